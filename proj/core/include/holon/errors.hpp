#pragma once

#include <stdexcept>
#include <string>

namespace holon {

// Caller broke an operation's contract (bad argument, mismatched types,
// unknown partition, ...).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Insert below the replica's own watermark. Signals a violated
// partition-order contract on the input.
class LateEventError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two executions of the same partition wrote different records at the same
// output offset.
class DeterminismViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TimeoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace holon

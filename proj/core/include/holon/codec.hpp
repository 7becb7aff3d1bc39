#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace holon {

// Little-endian, length-prefixed canonical encoding. Every encoded structure
// writes its maps in sorted key order so equal values give equal bytes.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void str(std::string_view s);
  void raw(std::string_view s) { buf_.append(s); }

  const std::string& bytes() const& { return buf_; }
  std::string bytes() && { return std::move(buf_); }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  std::string str();
  std::string_view raw(std::size_t n);

  bool done() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }
  // Throws DecodeError unless every byte was consumed.
  void expect_done() const;

 private:
  void need(std::size_t n) const;

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace holon

#include "holon/stream_log.hpp"

#include <algorithm>
#include <iterator>
#include <sstream>

#include "holon/errors.hpp"

namespace holon {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_frame(std::ofstream& out, std::string_view payload) {
  ByteWriter len;
  len.u32(static_cast<std::uint32_t>(payload.size()));
  out.write(len.bytes().data(), static_cast<std::streamsize>(len.bytes().size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

}  // namespace

// Record

void Record::encode(ByteWriter& out) const {
  out.u8(tag ? 1 : 0);
  if (tag) {
    out.str(tag->partition.str());
    out.u64(tag->window);
    out.str(tag->key);
  }
  out.str(payload);
}

std::string Record::encode() const {
  ByteWriter w;
  encode(w);
  return std::move(w).bytes();
}

Record Record::decode(ByteReader& in) {
  Record r;
  const auto has_tag = in.u8();
  if (has_tag > 1) throw DecodeError("bad record tag flag");
  if (has_tag) {
    auto partition = in.str();
    if (partition.empty()) throw DecodeError("empty partition in record tag");
    const auto window = in.u64();
    r.tag = RecordTag{PartitionId(std::move(partition)), window, in.str()};
  }
  r.payload = in.str();
  return r;
}

// LoggedTopic

LoggedTopic::LoggedTopic(std::string name, const std::vector<PartitionId>& partitions,
                         std::optional<std::filesystem::path> dir)
    : name_(std::move(name)) {
  for (const auto& p : partitions) {
    auto part = std::make_unique<Partition>();
    if (dir) {
      const auto topic_dir = *dir / name_;
      std::filesystem::create_directories(topic_dir);
      const auto path = topic_dir / (p.str() + ".log");
      if (std::filesystem::exists(path)) {
        const auto bytes = read_file(path);
        ByteReader in(bytes);
        while (!in.done()) {
          const auto len = in.u32();
          ByteReader frame(in.raw(len));
          part->records.push_back(Record::decode(frame));
          frame.expect_done();
        }
      }
      part->file.open(path, std::ios::binary | std::ios::app);
      if (!part->file) throw std::runtime_error("cannot open " + path.string());
    }
    parts_.emplace(p, std::move(part));
  }
}

LoggedTopic::Partition& LoggedTopic::partition(const PartitionId& p) const {
  auto it = parts_.find(p);
  if (it == parts_.end()) throw UsageError("topic " + name_ + " has no partition " + p.str());
  return *it->second;
}

void LoggedTopic::persist(Partition& part, std::span<const Record> records) {
  if (!part.file.is_open()) return;
  for (const auto& r : records) write_frame(part.file, r.encode());
  part.file.flush();
}

std::uint64_t LoggedTopic::append(const PartitionId& p, std::span<const Record> records) {
  auto& part = partition(p);
  std::unique_lock lock(part.mu);
  const auto first = part.records.size();
  part.records.insert(part.records.end(), records.begin(), records.end());
  persist(part, records);
  return first;
}

ReadResult LoggedTopic::read(const PartitionId& p, std::uint64_t from, std::size_t max_batch) const {
  if (max_batch == 0) throw UsageError("read batch size must be positive");
  auto& part = partition(p);
  std::shared_lock lock(part.mu);
  ReadResult out;
  out.next = from;
  if (from >= part.records.size()) return out;
  const auto n = std::min<std::uint64_t>(max_batch, part.records.size() - from);
  auto begin = part.records.begin() + static_cast<std::ptrdiff_t>(from);
  out.records.assign(begin, begin + static_cast<std::ptrdiff_t>(n));
  out.next = from + n;
  return out;
}

std::size_t LoggedTopic::write_at(const PartitionId& p, std::uint64_t odx, std::span<const Record> records) {
  auto& part = partition(p);
  std::unique_lock lock(part.mu);
  const auto end = part.records.size();
  if (odx > end) {
    throw UsageError("write at offset " + std::to_string(odx) + " leaves a gap after end " +
                     std::to_string(end) + " in " + name_ + "/" + p.str());
  }
  std::size_t i = 0;
  for (; i < records.size() && odx + i < end; ++i) {
    if (!(part.records[odx + i] == records[i])) {
      throw DeterminismViolation("conflicting rewrite of " + name_ + "/" + p.str() + " at offset " +
                                 std::to_string(odx + i));
    }
  }
  const auto fresh = records.subspan(i);
  part.records.insert(part.records.end(), fresh.begin(), fresh.end());
  persist(part, fresh);
  return fresh.size();
}

std::uint64_t LoggedTopic::end_offset(const PartitionId& p) const {
  auto& part = partition(p);
  std::shared_lock lock(part.mu);
  return part.records.size();
}

std::vector<PartitionId> LoggedTopic::partitions() const {
  std::vector<PartitionId> out;
  for (const auto& [p, _] : parts_) out.push_back(p);
  return out;
}

// BroadcastTopic

void BroadcastTopic::publish(std::string frame, std::uint64_t at) {
  std::unique_lock lock(mu_);
  frames_.emplace_back(at, std::move(frame));
}

std::vector<std::string> BroadcastTopic::poll(Cursor& cursor, std::uint64_t visible_until) const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  while (cursor.next < frames_.size() && frames_[cursor.next].first <= visible_until) {
    out.push_back(frames_[cursor.next].second);
    ++cursor.next;
  }
  return out;
}

std::uint64_t BroadcastTopic::size() const {
  std::shared_lock lock(mu_);
  return frames_.size();
}

// CheckpointStore

CheckpointStore::CheckpointStore(InitialState initial, std::optional<std::filesystem::path> dir)
    : initial_(std::move(initial)), dir_(std::move(dir)) {
  if (!dir_) return;
  std::filesystem::create_directories(*dir_);
  for (const auto& file : std::filesystem::directory_iterator(*dir_)) {
    if (file.path().extension() != ".ckpt") continue;
    auto bytes = read_file(file.path());
    const auto idx = PartitionState::decode(bytes).idx;
    entries_.insert_or_assign(PartitionId(file.path().stem().string()), Entry{idx, std::move(bytes), std::nullopt});
  }
}

void CheckpointStore::put(const PartitionId& p, const PartitionState& state, std::optional<std::uint64_t> frontier) {
  std::lock_guard lock(mu_);
  auto it = entries_.find(p);
  if (it != entries_.end() && it->second.idx >= state.idx) return;
  auto bytes = state.encode();
  if (dir_) {
    const auto tmp = *dir_ / (p.str() + ".ckpt.tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
    }
    std::filesystem::rename(tmp, *dir_ / (p.str() + ".ckpt"));
  }
  entries_.insert_or_assign(p, Entry{state.idx, std::move(bytes), frontier});
}

PartitionState CheckpointStore::get(const PartitionId& p) const {
  std::unique_lock lock(mu_);
  auto it = entries_.find(p);
  if (it == entries_.end()) {
    lock.unlock();
    return initial_(p);
  }
  return PartitionState::decode(it->second.bytes);
}

std::optional<std::uint64_t> CheckpointStore::stored_idx(const PartitionId& p) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(p);
  if (it == entries_.end()) return std::nullopt;
  return it->second.idx;
}

std::uint64_t CheckpointStore::min_frontier(const std::vector<PartitionId>& partitions) const {
  std::lock_guard lock(mu_);
  std::optional<std::uint64_t> low;
  for (const auto& p : partitions) {
    auto it = entries_.find(p);
    const std::uint64_t f = it == entries_.end() ? 0 : it->second.frontier.value_or(0);
    low = std::min(low.value_or(f), f);
  }
  return low.value_or(0);
}

}  // namespace holon

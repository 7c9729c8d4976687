#pragma once

// Append-only registry of the n_j values a signer has used, per key id.
//
// File format: a sequence of self-delimiting records
//
//   u32 body_length
//   body: record(key_id) record(n_j) u64 unix_seconds record(fingerprint)
//
// where record(x) is a u32 length followed by the bytes, n_j is a minimal
// big-endian two's-complement integer and fingerprint is the SHA-256 of the
// encoded signature that consumed n_j (empty when unknown). All integers are
// big-endian. Appends happen under an exclusive flock(2) and are fsync'd
// before record() returns.

#include "conjsig/bytes.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace conjsig {

struct LedgerEntry {
  Bytes key_id;
  mpz_class n_j;
  std::uint64_t timestamp = 0;
  Bytes fingerprint;
  std::uint64_t sequence = 0;  // position in the ledger, 0-based across all keys
};

enum class RecordStatus { Ok, AlreadyUsed };

class LedgerCorrupt : public std::runtime_error {
 public:
  LedgerCorrupt(std::uint64_t offset, bool torn_tail, const std::string& why)
      : std::runtime_error("ledger corrupt at byte offset " + std::to_string(offset) + ": " + why),
        offset_(offset),
        torn_tail_(torn_tail) {}
  std::uint64_t offset() const noexcept { return offset_; }
  /// The damage is an incomplete final record.
  bool torn_tail() const noexcept { return torn_tail_; }

 private:
  std::uint64_t offset_;
  bool torn_tail_;
};

class LedgerStorageError : public std::runtime_error {
 public:
  explicit LedgerStorageError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

class UniqueFd {
 public:
  explicit UniqueFd(int fd) : fd_(fd) {}
  UniqueFd(const UniqueFd&) = delete;
  UniqueFd& operator=(const UniqueFd&) = delete;
  ~UniqueFd() {
    if (fd_ >= 0) ::close(fd_);
  }
  int get() const noexcept { return fd_; }
  explicit operator bool() const noexcept { return fd_ >= 0; }

 private:
  int fd_;
};

class FileLock {
 public:
  FileLock(int fd, int op) : fd_(fd) {
    while (::flock(fd_, op) != 0) {
      if (errno != EINTR) throw LedgerStorageError(std::string("flock: ") + std::strerror(errno));
    }
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;
  ~FileLock() { ::flock(fd_, LOCK_UN); }

 private:
  int fd_;
};

inline Bytes read_from(int fd, std::uint64_t offset) {
  Bytes out;
  std::uint8_t buf[1 << 16];
  for (;;) {
    ssize_t got = ::pread(fd, buf, sizeof buf, static_cast<off_t>(offset + out.size()));
    if (got < 0) {
      if (errno == EINTR) continue;
      throw LedgerStorageError(std::string("read: ") + std::strerror(errno));
    }
    if (got == 0) break;
    out.insert(out.end(), buf, buf + got);
  }
  return out;
}

inline void write_all(int fd, ByteView data) {
  std::size_t done = 0;
  while (done < data.size()) {
    ssize_t put = ::write(fd, data.data() + done, data.size() - done);
    if (put < 0) {
      if (errno == EINTR) continue;
      throw LedgerStorageError(std::string("write: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(put);
  }
}

}  // namespace detail

class FactorLedger {
 public:
  using Clock = std::function<std::uint64_t()>;

  static std::uint64_t system_clock_seconds() {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count());
  }

  /// A ledger with no backing file.
  static FactorLedger in_memory() { return FactorLedger({}); }

  /// Opens the ledger at `path`. A missing file is an empty ledger; any
  /// damaged record raises LedgerCorrupt naming its byte offset.
  static FactorLedger load(const std::filesystem::path& path) {
    FactorLedger ledger(path);
    detail::UniqueFd fd(::open(path.c_str(), O_RDONLY | O_CLOEXEC));
    if (!fd) {
      if (errno == ENOENT) return ledger;
      throw LedgerStorageError("open " + path.string() + ": " + std::strerror(errno));
    }
    detail::FileLock lock(fd.get(), LOCK_SH);
    ledger.ingest(detail::read_from(fd.get(), 0), 0);
    return ledger;
  }

  /// Operator action: cuts an incomplete final record off the file. Returns
  /// the number of bytes removed (0 when the file is intact). Corruption that
  /// is not a torn tail is rethrown untouched.
  static std::uint64_t discard_torn_tail(const std::filesystem::path& path) {
    detail::UniqueFd fd(::open(path.c_str(), O_RDWR | O_CLOEXEC));
    if (!fd) throw LedgerStorageError("open " + path.string() + ": " + std::strerror(errno));
    detail::FileLock lock(fd.get(), LOCK_EX);
    Bytes data = detail::read_from(fd.get(), 0);
    FactorLedger scratch({});
    try {
      scratch.ingest(data, 0);
      return 0;
    } catch (const LedgerCorrupt& e) {
      if (!e.torn_tail()) throw;
      if (::ftruncate(fd.get(), static_cast<off_t>(e.offset())) != 0 || ::fsync(fd.get()) != 0)
        throw LedgerStorageError(std::string("truncate: ") + std::strerror(errno));
      return data.size() - e.offset();
    }
  }

  FactorLedger(FactorLedger&& other) noexcept {
    std::lock_guard lock(other.mutex_);
    path_ = std::move(other.path_);
    entries_ = std::move(other.entries_);
    index_ = std::move(other.index_);
    synced_size_ = other.synced_size_;
    clock_ = std::move(other.clock_);
  }

  void set_clock(Clock clock) {
    std::lock_guard lock(mutex_);
    clock_ = std::move(clock);
  }

  const std::optional<std::filesystem::path>& path() const noexcept { return path_; }

  /// Appends (key_id, n_j) durably. AlreadyUsed leaves the ledger untouched.
  RecordStatus record(ByteView key_id, const mpz_class& n_j, ByteView fingerprint = {}) {
    if (key_id.empty()) throw std::invalid_argument("ledger: key_id must be nonempty");
    if (n_j < 1) throw std::invalid_argument("ledger: n_j must be positive");
    if (!fingerprint.empty() && fingerprint.size() != 32) throw std::invalid_argument("ledger: fingerprint must be 32 bytes");

    std::lock_guard lock(mutex_);
    LedgerEntry entry{Bytes(key_id.begin(), key_id.end()), n_j, clock_(), Bytes(fingerprint.begin(), fingerprint.end()), 0};
    if (!path_) {
      if (contains_locked(entry.key_id, n_j)) return RecordStatus::AlreadyUsed;
      entry.sequence = entries_.size();
      push_locked(std::move(entry));
      return RecordStatus::Ok;
    }

    detail::UniqueFd fd(::open(path_->c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644));
    if (!fd) throw LedgerStorageError("open " + path_->string() + ": " + std::strerror(errno));
    detail::FileLock flock_guard(fd.get(), LOCK_EX);

    // Pick up anything other writers appended since we last looked.
    Bytes tail = detail::read_from(fd.get(), synced_size_);
    ingest(tail, synced_size_);

    if (contains_locked(entry.key_id, n_j)) return RecordStatus::AlreadyUsed;

    Bytes body;
    put_record(body, entry.key_id);
    put_integer_record(body, entry.n_j);
    put_u64(body, entry.timestamp);
    put_record(body, entry.fingerprint);
    Bytes rec;
    put_u32(rec, static_cast<std::uint32_t>(body.size()));
    append(rec, body);

    detail::write_all(fd.get(), rec);
    if (::fsync(fd.get()) != 0) throw LedgerStorageError(std::string("fsync: ") + std::strerror(errno));
    synced_size_ += rec.size();
    entry.sequence = entries_.size();
    push_locked(std::move(entry));
    return RecordStatus::Ok;
  }

  bool is_used(ByteView key_id, const mpz_class& n_j) const {
    std::lock_guard lock(mutex_);
    return contains_locked(Bytes(key_id.begin(), key_id.end()), n_j);
  }

  std::optional<LedgerEntry> find(ByteView key_id, const mpz_class& n_j) const {
    std::lock_guard lock(mutex_);
    auto it = index_.find(Bytes(key_id.begin(), key_id.end()));
    if (it == index_.end()) return std::nullopt;
    for (std::size_t i : it->second)
      if (entries_[i].n_j == n_j) return entries_[i];
    return std::nullopt;
  }

  /// Entries for one key in insertion order.
  std::vector<LedgerEntry> iterate(ByteView key_id) const {
    std::lock_guard lock(mutex_);
    std::vector<LedgerEntry> out;
    auto it = index_.find(Bytes(key_id.begin(), key_id.end()));
    if (it == index_.end()) return out;
    for (std::size_t i : it->second) out.push_back(entries_[i]);
    return out;
  }

  std::vector<LedgerEntry> all_entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
  }

  std::size_t count(ByteView key_id) const {
    std::lock_guard lock(mutex_);
    auto it = index_.find(Bytes(key_id.begin(), key_id.end()));
    return it == index_.end() ? 0 : it->second.size();
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

 private:
  explicit FactorLedger(std::optional<std::filesystem::path> path)
      : path_(std::move(path)), clock_(&FactorLedger::system_clock_seconds) {}

  bool contains_locked(const Bytes& key_id, const mpz_class& n_j) const {
    auto it = index_.find(key_id);
    if (it == index_.end()) return false;
    for (std::size_t i : it->second)
      if (entries_[i].n_j == n_j) return true;
    return false;
  }

  void push_locked(LedgerEntry entry) {
    index_[entry.key_id].push_back(entries_.size());
    entries_.push_back(std::move(entry));
  }

  // Parses `data`, which starts at absolute file offset `base`, and appends
  // its records. Caller holds mutex_ or owns the object exclusively.
  void ingest(ByteView data, std::uint64_t base) {
    std::size_t pos = 0;
    while (pos < data.size()) {
      const std::uint64_t at = base + pos;
      if (data.size() - pos < 4) throw LedgerCorrupt(at, true, "truncated length prefix");
      const std::uint32_t len = std::uint32_t{data[pos]} << 24 | std::uint32_t{data[pos + 1]} << 16 |
                                std::uint32_t{data[pos + 2]} << 8 | data[pos + 3];
      if (data.size() - pos - 4 < len) throw LedgerCorrupt(at, true, "truncated record body");
      LedgerEntry entry;
      try {
        ByteReader in(data.subspan(pos + 4, len), "ledger record");
        auto key = in.record();
        entry.key_id.assign(key.begin(), key.end());
        entry.n_j = in.integer_record();
        entry.timestamp = in.u64();
        auto fp = in.record();
        entry.fingerprint.assign(fp.begin(), fp.end());
        in.expect_done();
      } catch (const DecodeError& e) {
        throw LedgerCorrupt(at, false, e.what());
      }
      if (entry.key_id.empty()) throw LedgerCorrupt(at, false, "empty key id");
      if (entry.n_j < 1) throw LedgerCorrupt(at, false, "non-positive n_j");
      if (!entry.fingerprint.empty() && entry.fingerprint.size() != 32) throw LedgerCorrupt(at, false, "bad fingerprint length");
      if (contains_locked(entry.key_id, entry.n_j)) throw LedgerCorrupt(at, false, "duplicate (key_id, n_j)");
      entry.sequence = entries_.size();
      push_locked(std::move(entry));
      pos += 4 + len;
    }
    synced_size_ = base + data.size();
  }

  std::optional<std::filesystem::path> path_;
  std::vector<LedgerEntry> entries_;
  std::map<Bytes, std::vector<std::size_t>> index_;
  std::uint64_t synced_size_ = 0;
  Clock clock_;
  mutable std::mutex mutex_;
};

inline std::string iso8601_utc(std::uint64_t unix_seconds) {
  std::time_t t = static_cast<std::time_t>(unix_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Audit dump: one line per entry, "<hex key_id> <decimal n_j> <ISO-8601 UTC>".
inline std::string export_text(const FactorLedger& ledger) {
  std::string out;
  for (const auto& e : ledger.all_entries()) {
    out += to_hex(e.key_id);
    out += ' ';
    out += e.n_j.get_str();
    out += ' ';
    out += iso8601_utc(e.timestamp);
    out += '\n';
  }
  return out;
}

}  // namespace conjsig

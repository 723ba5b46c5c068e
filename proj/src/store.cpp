#include <crowdens/store.hpp>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>

#include <fcntl.h>
#include <unistd.h>

namespace crowdens {
namespace {

using nlohmann::json;

[[noreturn]] void io_failure(const std::filesystem::path& path, const char* what) {
  throw Error(ErrorCode::IoError, std::string(what) + " " + path.string() + ": " + std::strerror(errno));
}

class Fd {
 public:
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  int get() const noexcept { return fd_; }

 private:
  int fd_;
};

void write_all(int fd, std::string_view bytes, const std::filesystem::path& path) {
  while (!bytes.empty()) {
    const ssize_t n = ::write(fd, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      io_failure(path, "cannot write");
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

json version_line(const std::string& format) { return {{"format", format}}; }

std::string require_string(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw Error(ErrorCode::CorruptRecord, std::string("missing string field '") + key + "'");
  return j.at(key).get<std::string>();
}

}  // namespace

json to_json(const QuestionRecord& q) {
  return {{"id", q.id}, {"prompt", q.prompt}, {"image_refs", q.image_refs}, {"created_at", q.created_at}};
}

json to_json(const SubmissionRecord& s) {
  return {{"question_id", s.question_id},
          {"worker_id", s.worker_id},
          {"labels", s.labels},
          {"submitted_at", s.submitted_at}};
}

QuestionRecord question_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::CorruptRecord, "record is not an object");
  QuestionRecord q;
  q.id = require_string(j, "id");
  q.prompt = require_string(j, "prompt");
  q.created_at = require_string(j, "created_at");
  if (!j.contains("image_refs") || !j.at("image_refs").is_array())
    throw Error(ErrorCode::CorruptRecord, "missing array field 'image_refs'");
  for (const json& ref : j.at("image_refs")) {
    if (!ref.is_string()) throw Error(ErrorCode::CorruptRecord, "image ref is not a string");
    q.image_refs.push_back(ref.get<std::string>());
  }
  if (q.id.empty()) throw Error(ErrorCode::CorruptRecord, "empty question id");
  if (q.image_refs.size() < 2) throw Error(ErrorCode::CorruptRecord, "question has fewer than 2 images");
  return q;
}

SubmissionRecord submission_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::CorruptRecord, "record is not an object");
  SubmissionRecord s;
  s.question_id = require_string(j, "question_id");
  s.worker_id = require_string(j, "worker_id");
  s.submitted_at = require_string(j, "submitted_at");
  if (!j.contains("labels") || !j.at("labels").is_array())
    throw Error(ErrorCode::CorruptRecord, "missing array field 'labels'");
  for (const json& l : j.at("labels")) {
    if (!l.is_number_integer()) throw Error(ErrorCode::CorruptRecord, "label is not an integer");
    const auto v = l.get<std::int64_t>();
    if (v < 1 || v > static_cast<std::int64_t>(j.at("labels").size()))
      throw Error(ErrorCode::CorruptRecord, "label out of range");
    s.labels.push_back(static_cast<Label>(v));
  }
  if (s.question_id.empty() || s.worker_id.empty())
    throw Error(ErrorCode::CorruptRecord, "empty question or worker id");
  if (s.labels.empty() || !is_canonical(s.labels))
    throw Error(ErrorCode::CorruptRecord, "labels are not a canonical partition");
  return s;
}

RecordLog::RecordLog(std::filesystem::path path, std::string format)
    : path_(std::move(path)), format_(std::move(format)) {
  std::error_code ec;
  if (std::filesystem::exists(path_, ec)) {
    // A crash mid-append can leave a partial last line. Terminate it so the
    // next record starts on its own line; the fragment loads as corrupt.
    Fd fd(::open(path_.c_str(), O_RDWR));
    if (fd.get() < 0) io_failure(path_, "cannot open");
    const off_t end = ::lseek(fd.get(), 0, SEEK_END);
    if (end > 0) {
      char last = 0;
      if (::pread(fd.get(), &last, 1, end - 1) != 1) io_failure(path_, "cannot read");
      if (last != '\n') {
        write_all(fd.get(), "\n", path_);
        if (::fsync(fd.get()) != 0) io_failure(path_, "cannot sync");
      }
    }
    return;
  }
  if (!path_.parent_path().empty()) std::filesystem::create_directories(path_.parent_path());
  const std::filesystem::path tmp = path_.string() + ".tmp";
  {
    Fd fd(::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644));
    if (fd.get() < 0) io_failure(tmp, "cannot create");
    write_all(fd.get(), version_line(format_).dump() + "\n", tmp);
    if (::fsync(fd.get()) != 0) io_failure(tmp, "cannot sync");
  }
  std::filesystem::rename(tmp, path_);
  const std::filesystem::path dir = path_.parent_path().empty() ? "." : path_.parent_path();
  Fd dfd(::open(dir.c_str(), O_RDONLY | O_DIRECTORY));
  if (dfd.get() >= 0) ::fsync(dfd.get());
}

LoadResult<LoggedRecord> RecordLog::load() const {
  std::ifstream in(path_, std::ios::binary);
  if (!in) io_failure(path_, "cannot open");
  LoadResult<LoggedRecord> result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      const json header = json::parse(line, nullptr, false);
      if (header.is_discarded() || header != version_line(format_))
        throw Error(ErrorCode::CorruptRecord,
                    path_.string() + " line 1: expected format '" + format_ + "'");
      continue;
    }
    if (line.empty()) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      result.corrupt.push_back({line_no, line, "not a JSON object"});
      continue;
    }
    result.lines.push_back(line_no);
    result.records.push_back({line_no, std::move(record)});
  }
  return result;
}

void RecordLog::append(const json& record) {
  Fd fd(::open(path_.c_str(), O_WRONLY | O_APPEND));
  if (fd.get() < 0) io_failure(path_, "cannot open");
  write_all(fd.get(), record.dump() + "\n", path_);
  if (::fdatasync(fd.get()) != 0) io_failure(path_, "cannot sync");
}

namespace {

template <typename Record, typename Decode>
LoadResult<Record> decode_all(const RecordLog& log, Decode decode) {
  LoadResult<LoggedRecord> raw = log.load();
  LoadResult<Record> out;
  out.corrupt = std::move(raw.corrupt);
  for (LoggedRecord& r : raw.records) {
    try {
      out.records.push_back(decode(r.value));
      out.lines.push_back(r.line);
    } catch (const Error& e) {
      out.corrupt.push_back({r.line, r.value.dump(), e.what()});
    }
  }
  std::sort(out.corrupt.begin(), out.corrupt.end(),
            [](const CorruptLine& a, const CorruptLine& b) { return a.line < b.line; });
  return out;
}

}  // namespace

LoadResult<QuestionRecord> QuestionStore::load() const {
  return decode_all<QuestionRecord>(log_, question_from_json);
}

LoadResult<SubmissionRecord> SubmissionStore::load() const {
  return decode_all<SubmissionRecord>(log_, submission_from_json);
}

std::string utc_timestamp() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const std::time_t secs = system_clock::to_time_t(now);
  const auto millis = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  ::gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(millis));
  return buf;
}

}  // namespace crowdens

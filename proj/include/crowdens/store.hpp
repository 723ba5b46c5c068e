#pragma once

#include <crowdens/partition.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace crowdens {

struct QuestionRecord {
  std::string id;
  std::string prompt;
  std::vector<std::string> image_refs;
  std::string created_at;  // ISO-8601 UTC
  friend bool operator==(const QuestionRecord&, const QuestionRecord&) = default;
};

struct SubmissionRecord {
  std::string question_id;
  std::string worker_id;
  LabelVector labels;  // canonical
  std::string submitted_at;
  friend bool operator==(const SubmissionRecord&, const SubmissionRecord&) = default;
};

nlohmann::json to_json(const QuestionRecord& q);
nlohmann::json to_json(const SubmissionRecord& s);
/// Both throw CorruptRecord when a field is missing or an invariant fails
/// (fewer than 2 images, empty ids, non-canonical or empty labels).
QuestionRecord question_from_json(const nlohmann::json& j);
SubmissionRecord submission_from_json(const nlohmann::json& j);

struct CorruptLine {
  std::size_t line = 0;  // 1-based
  std::string text;
  std::string reason;
};

struct LoggedRecord {
  std::size_t line = 0;
  nlohmann::json value;
};

template <typename Record>
struct LoadResult {
  std::vector<Record> records;
  std::vector<std::size_t> lines;  // 1-based line of each record
  std::vector<CorruptLine> corrupt;
};

/// Append-only file of one JSON document per line. The first line names the
/// format and version and is written atomically on creation. Each append is
/// flushed to disk before returning. Lines that fail to parse are reported
/// and skipped; later lines still load.
class RecordLog {
 public:
  RecordLog(std::filesystem::path path, std::string format);

  const std::filesystem::path& path() const noexcept { return path_; }

  /// Throws CorruptRecord when the version line is wrong, IoError on I/O.
  LoadResult<LoggedRecord> load() const;
  void append(const nlohmann::json& record);

 private:
  std::filesystem::path path_;
  std::string format_;
};

class QuestionStore {
 public:
  explicit QuestionStore(std::filesystem::path path) : log_(std::move(path), "questions-v1") {}
  LoadResult<QuestionRecord> load() const;
  void append(const QuestionRecord& q) { log_.append(to_json(q)); }
  const std::filesystem::path& path() const noexcept { return log_.path(); }

 private:
  RecordLog log_;
};

class SubmissionStore {
 public:
  explicit SubmissionStore(std::filesystem::path path) : log_(std::move(path), "submissions-v1") {}
  LoadResult<SubmissionRecord> load() const;
  void append(const SubmissionRecord& s) { log_.append(to_json(s)); }
  const std::filesystem::path& path() const noexcept { return log_.path(); }

 private:
  RecordLog log_;
};

/// Current UTC time as YYYY-MM-DDTHH:MM:SS.mmmZ.
std::string utc_timestamp();

}  // namespace crowdens

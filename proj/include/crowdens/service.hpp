#pragma once

#include <crowdens/io.hpp>
#include <crowdens/store.hpp>

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace crowdens {

struct ServiceConfig {
  std::filesystem::path data_dir = "data";
  std::size_t min_submissions = 3;
  std::function<std::string()> clock = utc_timestamp;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Question and submission state backed by two append-only stores in
/// `data_dir`. Writes are serialized; reads work on snapshots so one
/// question's consensus never waits on another's.
class CollectService {
 public:
  explicit CollectService(ServiceConfig config);

  ApiResponse list_questions() const;
  ApiResponse create_question(std::string_view body);
  ApiResponse submit(std::string_view question_id, std::string_view body);
  ApiResponse consensus(std::string_view question_id, std::string_view mode) const;
  ApiResponse export_solutions(std::string_view question_id) const;

  std::vector<QuestionRecord> questions() const;
  std::vector<SubmissionRecord> submissions(std::string_view question_id) const;
  /// Lines skipped while loading the stores, also written to
  /// `quarantine.jsonl` in the data directory.
  const std::vector<CorruptLine>& quarantined() const noexcept { return quarantined_; }

 private:
  struct QuestionState {
    QuestionRecord record;
    std::vector<SubmissionRecord> submissions;  // one per worker, first-submission order
  };

  bool apply(SubmissionRecord s);
  std::shared_ptr<const QuestionState> find(std::string_view id) const;
  std::size_t next_question_number() const;

  ServiceConfig config_;
  QuestionStore question_store_;
  SubmissionStore submission_store_;
  std::vector<CorruptLine> quarantined_;

  std::mutex write_mutex_;
  mutable std::shared_mutex state_mutex_;
  std::vector<std::string> order_;  // question ids in creation order
  std::map<std::string, std::shared_ptr<const QuestionState>, std::less<>> questions_;
};

/// HTTP/JSON front end for CollectService.
class HttpServer {
 public:
  explicit HttpServer(CollectService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Port 0 binds any free port. Returns the bound port; throws IoError.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace crowdens

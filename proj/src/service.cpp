#include <crowdens/service.hpp>

#include <crowdens/consensus.hpp>

#include <httplib.h>

#include <algorithm>
#include <fstream>

namespace crowdens {
namespace {

using nlohmann::json;

ApiResponse error_response(int status, std::string_view code, const std::string& message,
                           json extra = json::object()) {
  json body = {{"code", code}, {"message", message}};
  body.update(extra);
  return {status, body.dump(), "application/json"};
}

ApiResponse json_response(int status, const json& body) { return {status, body.dump(), "application/json"}; }

std::size_t question_number(std::string_view id) {
  if (id.size() < 2 || id.front() != 'q') return 0;
  std::size_t n = 0;
  for (char c : id.substr(1)) {
    if (c < '0' || c > '9') return 0;
    n = n * 10 + static_cast<std::size_t>(c - '0');
  }
  return n;
}

void write_quarantine(std::string_view store, const std::vector<CorruptLine>& lines,
                      std::ofstream& out) {
  for (const CorruptLine& c : lines)
    out << json{{"store", store}, {"line", c.line}, {"reason", c.reason}, {"text", c.text}}.dump()
        << '\n';
}

template <typename Submissions>
SolutionsFile solutions_of(const QuestionRecord& q, const Submissions& submissions) {
  SolutionsFile file;
  file.object_count = q.image_refs.size();
  for (const SubmissionRecord& s : submissions) {
    file.worker_ids.push_back(s.worker_id);
    file.solutions.push_back(Partition::from_canonical(s.labels));
  }
  return file;
}

}  // namespace

CollectService::CollectService(ServiceConfig config)
    : config_(std::move(config)),
      question_store_(config_.data_dir / "questions.jsonl"),
      submission_store_(config_.data_dir / "submissions.jsonl") {
  LoadResult<QuestionRecord> qs = question_store_.load();
  for (std::size_t i = 0; i < qs.records.size(); ++i) {
    QuestionRecord& q = qs.records[i];
    if (questions_.contains(q.id)) {
      qs.corrupt.push_back({qs.lines[i], to_json(q).dump(), "duplicate question id " + q.id});
      continue;
    }
    order_.push_back(q.id);
    auto state = std::make_shared<QuestionState>();
    state->record = std::move(q);
    questions_.emplace(state->record.id, std::move(state));
  }
  std::stable_sort(order_.begin(), order_.end(), [&](const std::string& a, const std::string& b) {
    return questions_.at(a)->record.created_at < questions_.at(b)->record.created_at;
  });

  LoadResult<SubmissionRecord> ss = submission_store_.load();
  std::vector<CorruptLine> bad_submissions = std::move(ss.corrupt);
  for (std::size_t i = 0; i < ss.records.size(); ++i) {
    const std::string text = to_json(ss.records[i]).dump();
    if (!apply(std::move(ss.records[i])))
      bad_submissions.push_back({ss.lines[i], text, "unknown question or label count mismatch"});
  }

  auto by_line = [](const CorruptLine& a, const CorruptLine& b) { return a.line < b.line; };
  std::sort(qs.corrupt.begin(), qs.corrupt.end(), by_line);
  std::sort(bad_submissions.begin(), bad_submissions.end(), by_line);
  quarantined_ = qs.corrupt;
  quarantined_.insert(quarantined_.end(), bad_submissions.begin(), bad_submissions.end());
  const std::filesystem::path qpath = config_.data_dir / "quarantine.jsonl";
  std::ofstream out(qpath, std::ios::trunc);
  write_quarantine("questions.jsonl", qs.corrupt, out);
  write_quarantine("submissions.jsonl", bad_submissions, out);
}

bool CollectService::apply(SubmissionRecord s) {
  auto it = questions_.find(s.question_id);
  if (it == questions_.end() || it->second->record.image_refs.size() != s.labels.size()) return false;
  auto next = std::make_shared<QuestionState>(*it->second);
  auto prior = std::find_if(next->submissions.begin(), next->submissions.end(),
                            [&](const SubmissionRecord& r) { return r.worker_id == s.worker_id; });
  if (prior != next->submissions.end())
    *prior = std::move(s);
  else
    next->submissions.push_back(std::move(s));
  it->second = std::move(next);
  return true;
}

std::shared_ptr<const CollectService::QuestionState> CollectService::find(std::string_view id) const {
  std::shared_lock lock(state_mutex_);
  auto it = questions_.find(id);
  return it == questions_.end() ? nullptr : it->second;
}

std::size_t CollectService::next_question_number() const {
  std::size_t top = 0;
  for (const auto& [id, _] : questions_) top = std::max(top, question_number(id));
  return top + 1;
}

std::vector<QuestionRecord> CollectService::questions() const {
  std::shared_lock lock(state_mutex_);
  std::vector<QuestionRecord> out;
  for (const std::string& id : order_) out.push_back(questions_.at(id)->record);
  return out;
}

std::vector<SubmissionRecord> CollectService::submissions(std::string_view question_id) const {
  auto q = find(question_id);
  return q ? q->submissions : std::vector<SubmissionRecord>{};
}

ApiResponse CollectService::list_questions() const {
  json body = json::array();
  for (const QuestionRecord& q : questions()) body.push_back(to_json(q));
  return json_response(200, body);
}

ApiResponse CollectService::create_question(std::string_view body) {
  const json request = json::parse(body, nullptr, false);
  if (request.is_discarded() || !request.is_object())
    return error_response(400, "bad_request", "body must be a JSON object");
  QuestionRecord q;
  if (!request.contains("prompt") || !request["prompt"].is_string())
    return error_response(400, "bad_request", "'prompt' must be a string");
  q.prompt = request["prompt"].get<std::string>();
  if (!request.contains("image_refs") || !request["image_refs"].is_array())
    return error_response(400, "bad_request", "'image_refs' must be an array of strings");
  for (const json& ref : request["image_refs"]) {
    if (!ref.is_string() || ref.get<std::string>().empty())
      return error_response(400, "bad_request", "'image_refs' must be an array of strings");
    q.image_refs.push_back(ref.get<std::string>());
  }
  if (q.image_refs.size() < 2)
    return error_response(400, "bad_request", "a question needs at least 2 images");

  std::lock_guard writer(write_mutex_);
  {
    std::shared_lock lock(state_mutex_);
    q.id = "q" + std::to_string(next_question_number());
  }
  q.created_at = config_.clock();
  question_store_.append(q);
  auto state = std::make_shared<QuestionState>();
  state->record = q;
  std::unique_lock lock(state_mutex_);
  order_.push_back(q.id);
  questions_.emplace(q.id, std::move(state));
  return json_response(201, to_json(q));
}

ApiResponse CollectService::submit(std::string_view question_id, std::string_view body) {
  auto question = find(question_id);
  if (!question)
    return error_response(404, "not_found", "no question '" + std::string(question_id) + "'");
  const json request = json::parse(body, nullptr, false);
  if (request.is_discarded() || !request.is_object())
    return error_response(400, "bad_request", "body must be a JSON object");
  if (!request.contains("worker_id") || !request["worker_id"].is_string() ||
      !is_valid_worker_id(request["worker_id"].get<std::string>()))
    return error_response(422, "invalid_worker_id",
                          "'worker_id' must be a non-empty string without commas or line breaks");
  if (!request.contains("labels") || !request["labels"].is_array())
    return error_response(422, "invalid_labels", "'labels' must be an array of positive integers");
  std::vector<std::int64_t> raw;
  for (const json& l : request["labels"]) {
    if (!l.is_number_integer() || l.get<std::int64_t>() < 1)
      return error_response(422, "invalid_labels", "'labels' must be an array of positive integers");
    raw.push_back(l.get<std::int64_t>());
  }
  const std::size_t expected = question->record.image_refs.size();
  if (raw.size() != expected)
    return error_response(422, "label_count_mismatch",
                          "expected " + std::to_string(expected) + " labels, got " +
                              std::to_string(raw.size()));

  SubmissionRecord s;
  s.question_id = question->record.id;
  s.worker_id = request["worker_id"].get<std::string>();
  s.labels = canonicalize(std::span<const std::int64_t>(raw)).label_vector();

  std::lock_guard writer(write_mutex_);
  s.submitted_at = config_.clock();
  submission_store_.append(s);
  {
    std::unique_lock lock(state_mutex_);
    apply(s);
  }
  return json_response(201, to_json(s));
}

ApiResponse CollectService::consensus(std::string_view question_id, std::string_view mode_text) const {
  auto question = find(question_id);
  if (!question)
    return error_response(404, "not_found", "no question '" + std::string(question_id) + "'");
  const auto mode = parse_fusion_mode(mode_text.empty() ? "vote" : mode_text);
  if (!mode) return error_response(400, "bad_request", "mode must be 'medoid' or 'vote'");
  const std::size_t have = question->submissions.size();
  if (have < config_.min_submissions) {
    const std::size_t needed = config_.min_submissions - have;
    return error_response(409, "insufficient_submissions",
                          "needs " + std::to_string(needed) + " more submissions",
                          {{"needed", needed}, {"have", have}, {"threshold", config_.min_submissions}});
  }
  const SolutionsFile file = solutions_of(question->record, question->submissions);
  const ConsensusResult result = crowdens::consensus(file.ensemble(), *mode);
  return json_response(200, {{"question_id", question->record.id},
                             {"report", report_to_json(make_report(file, result, *mode))}});
}

ApiResponse CollectService::export_solutions(std::string_view question_id) const {
  auto question = find(question_id);
  if (!question)
    return error_response(404, "not_found", "no question '" + std::string(question_id) + "'");
  return {200, format_solutions(solutions_of(question->record, question->submissions)), "text/csv"};
}

struct HttpServer::Impl {
  CollectService& service;
  httplib::Server server;

  explicit Impl(CollectService& s) : service(s) {
    server.new_task_queue = [] { return new httplib::ThreadPool(16); };
    auto send = [](httplib::Response& res, const ApiResponse& api) {
      res.status = api.status;
      res.set_content(api.body, api.content_type);
    };
    server.Get("/api/questions", [this, send](const httplib::Request&, httplib::Response& res) {
      send(res, service.list_questions());
    });
    server.Post("/api/questions", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, service.create_question(req.body));
    });
    server.Post("/api/questions/:id/solutions",
                [this, send](const httplib::Request& req, httplib::Response& res) {
                  send(res, service.submit(req.path_params.at("id"), req.body));
                });
    server.Get("/api/questions/:id/consensus",
               [this, send](const httplib::Request& req, httplib::Response& res) {
                 const std::string mode = req.has_param("mode") ? req.get_param_value("mode") : "";
                 send(res, service.consensus(req.path_params.at("id"), mode));
               });
    server.Get("/api/questions/:id/export",
               [this, send](const httplib::Request& req, httplib::Response& res) {
                 send(res, service.export_solutions(req.path_params.at("id")));
               });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string message = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        message = e.what();
      } catch (...) {
      }
      res.status = 500;
      res.set_content(json{{"code", "internal"}, {"message", message}}.dump(), "application/json");
    });
  }
};

HttpServer::HttpServer(CollectService& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace crowdens

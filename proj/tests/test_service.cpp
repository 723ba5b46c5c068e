#include <crowdens/cli.hpp>
#include <crowdens/service.hpp>

#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

using namespace crowdens;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("crowdens-svc-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ServiceConfig config(const fs::path& dir, std::size_t threshold = 3) {
  auto tick = std::make_shared<std::atomic<int>>(0);
  return ServiceConfig{dir, threshold, [tick] {
                         char buf[32];
                         std::snprintf(buf, sizeof buf, "2026-10-15T00:00:%02d.000Z", (*tick)++ % 60);
                         return std::string(buf);
                       }};
}

std::string images_body(std::size_t n, const std::string& prompt = "Group these") {
  json refs = json::array();
  for (std::size_t i = 0; i < n; ++i) refs.push_back("https://example.org/img" + std::to_string(i) + ".jpg");
  return json{{"prompt", prompt}, {"image_refs", refs}}.dump();
}

std::string submission(const std::string& worker, const std::vector<int>& labels) {
  return json{{"worker_id", worker}, {"labels", labels}}.dump();
}

std::string create(CollectService& s, std::size_t images) {
  const ApiResponse r = s.create_question(images_body(images));
  REQUIRE(r.status == 201);
  return json::parse(r.body).at("id").get<std::string>();
}

}  // namespace

TEST_CASE("question listing") {
  TempDir dir;
  CollectService s(config(dir.path));
  CHECK(json::parse(s.list_questions().body) == json::array());

  for (std::size_t n : {5, 7, 9}) create(s, n);
  const json list = json::parse(s.list_questions().body);
  REQUIRE(list.size() == 3);
  CHECK(list[0]["image_refs"].size() == 5);
  CHECK(list[1]["image_refs"].size() == 7);
  CHECK(list[2]["image_refs"].size() == 9);
  CHECK(list[0]["id"] == "q1");
  CHECK(list[2]["id"] == "q3");
}

TEST_CASE("question creation validation") {
  TempDir dir;
  CollectService s(config(dir.path));
  const ApiResponse seven = s.create_question(images_body(7, "Footballers"));
  CHECK(seven.status == 201);
  CHECK(json::parse(seven.body)["image_refs"].size() == 7);

  const ApiResponse one = s.create_question(images_body(1));
  CHECK(one.status == 400);
  const json err = json::parse(one.body);
  CHECK(err.contains("code"));
  CHECK(err.contains("message"));
  CHECK(s.create_question("{not json").status == 400);
  CHECK(s.create_question(R"({"image_refs":["a","b"]})").status == 400);

  const ApiResponse again = s.create_question(images_body(7, "Footballers"));
  CHECK(again.status == 201);
  CHECK(json::parse(again.body)["id"] != json::parse(seven.body)["id"]);
}

TEST_CASE("submissions are validated, canonicalized and replaced per worker") {
  TempDir dir;
  CollectService s(config(dir.path));
  const std::string q = create(s, 5);

  const ApiResponse ok = s.submit(q, submission("alice", {1, 1, 2, 1, 3}));
  CHECK(ok.status == 201);
  CHECK(json::parse(ok.body)["labels"] == json({1, 1, 2, 1, 3}));

  CHECK(s.submit(q, submission("bob", {1, 1, 2})).status == 422);
  CHECK(s.submit(q, submission("bob", {1, 0, 2, 1, 1})).status == 422);
  CHECK(s.submit(q, R"({"worker_id":"bob","labels":[1,1,"2",1,1]})").status == 422);
  CHECK(s.submit(q, submission("", {1, 1, 2, 1, 1})).status == 422);
  CHECK(s.submit(q, submission("a,b", {1, 1, 2, 1, 1})).status == 422);
  CHECK(s.submit("q99", submission("bob", {1, 1, 2, 1, 3})).status == 404);

  const ApiResponse stored = s.submit(q, submission("carol", {3, 3, 3, 1, 1}));
  CHECK(json::parse(stored.body)["labels"] == json({1, 1, 1, 2, 2}));

  CHECK(s.submit(q, submission("alice", {1, 2, 3, 4, 5})).status == 201);
  const auto subs = s.submissions(q);
  REQUIRE(subs.size() == 2);
  CHECK(subs[0].worker_id == "alice");
  CHECK(subs[0].labels == LabelVector{1, 2, 3, 4, 5});
  CHECK(subs[1].worker_id == "carol");
}

TEST_CASE("consensus endpoint") {
  TempDir dir;
  CollectService s(config(dir.path));
  const std::string q = create(s, 5);
  CHECK(s.consensus("q42", "vote").status == 404);

  s.submit(q, submission("w1", {1, 1, 1, 2, 2}));
  s.submit(q, submission("w2", {2, 2, 2, 1, 1}));
  const ApiResponse early = s.consensus(q, "vote");
  CHECK(early.status == 409);
  CHECK(json::parse(early.body)["needed"] == 1);
  CHECK(json::parse(early.body)["message"].get<std::string>().find("1 more") != std::string::npos);

  s.submit(q, submission("w3", {1, 2, 3, 4, 5}));
  for (const char* mode : {"vote", "medoid", ""}) {
    const ApiResponse r = s.consensus(q, mode);
    REQUIRE(r.status == 200);
    const json report = json::parse(r.body)["report"];
    CHECK(report["consensus"] == json({1, 1, 1, 2, 2}));
    CHECK(report["centroid_k"] == 2);
    CHECK(report["mean_ari"].get<double>() == doctest::Approx(2.0 / 3.0));
    CHECK(report["solutions"].size() == 3);
  }
  CHECK(s.consensus(q, "average").status == 400);

  const std::string same = create(s, 4);
  for (const char* w : {"a", "b", "c", "d"}) s.submit(same, submission(w, {2, 1, 2, 1}));
  const json report = json::parse(s.consensus(same, "vote").body)["report"];
  CHECK(report["consensus"] == json({1, 2, 1, 2}));
  CHECK(report["mean_ari"] == 1.0);
}

TEST_CASE("export matches the CLI consensus") {
  TempDir dir;
  CollectService s(config(dir.path));
  const std::string q = create(s, 5);
  CHECK(s.export_solutions("nope").status == 404);
  const ApiResponse empty = s.export_solutions(q);
  CHECK(empty.status == 200);
  CHECK(empty.body == "solutions-v1,object_1,object_2,object_3,object_4,object_5\n");

  s.submit(q, submission("w1", {1, 1, 1, 2, 2}));
  s.submit(q, submission("w2", {2, 2, 2, 1, 1}));
  s.submit(q, submission("w3", {1, 2, 3, 4, 5}));
  const ApiResponse exported = s.export_solutions(q);
  CHECK(exported.content_type == "text/csv");
  CHECK(std::count(exported.body.begin(), exported.body.end(), '\n') == 4);

  const fs::path report_path = dir.path / "report.json";
  std::istringstream in(exported.body);
  std::ostringstream out, err;
  CHECK(cli::run({"consensus", "--input", "-", "--mode", "vote", "--report", report_path.string()}, in, out, err) == 0);
  std::ifstream f(report_path);
  const json cli_report = json::parse(f);
  CHECK(cli_report == json::parse(s.consensus(q, "vote").body)["report"]);
}

TEST_CASE("state survives restart") {
  TempDir dir;
  std::string q;
  {
    CollectService s(config(dir.path));
    q = create(s, 5);
    s.submit(q, submission("w1", {1, 1, 2, 1, 3}));
    s.submit(q, submission("w2", {1, 1, 1, 1, 1}));
    s.submit(q, submission("w1", {1, 2, 2, 1, 3}));
  }
  CollectService s(config(dir.path));
  REQUIRE(s.questions().size() == 1);
  const auto subs = s.submissions(q);
  REQUIRE(subs.size() == 2);
  CHECK(subs[0].worker_id == "w1");
  CHECK(subs[0].labels == LabelVector{1, 2, 2, 1, 3});
  CHECK(s.quarantined().empty());
  CHECK(create(s, 3) == "q2");
}

TEST_CASE("corrupt store lines are quarantined on startup") {
  TempDir dir;
  {
    CollectService s(config(dir.path));
    const std::string q = create(s, 3);
    s.submit(q, submission("w1", {1, 2, 2}));
  }
  {
    std::ofstream out(dir.path / "submissions.jsonl", std::ios::app);
    out << R"({"question_id":"q1","worker_id":"w2","labels":[1,2],"submitted_at":"t"})" << '\n';
    out << R"({"question_id":"q7","worker_id":"w2","labels":[1,2,1],"submitted_at":"t"})" << '\n';
    out << R"({"question_id":"q1","worker_id":"w3","labe)";
  }
  CollectService s(config(dir.path));
  CHECK(s.submissions("q1").size() == 1);
  REQUIRE(s.quarantined().size() == 3);
  CHECK(s.quarantined()[0].line == 3);
  std::ifstream qf(dir.path / "quarantine.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(qf, line)) ++lines;
  CHECK(lines == 3);
  CHECK(s.submit("q1", submission("w4", {1, 1, 1})).status == 201);
  CHECK(CollectService(config(dir.path)).submissions("q1").size() == 2);
}

TEST_CASE("HTTP front end serializes concurrent submissions") {
  TempDir dir;
  CollectService s(config(dir.path));
  HttpServer server(s);
  const int port = server.bind("127.0.0.1", 0);
  std::thread loop([&] { server.listen(); });

  httplib::Client client("127.0.0.1", port);
  auto listed = client.Get("/api/questions");
  REQUIRE(listed);
  CHECK(listed->status == 200);
  CHECK(listed->get_header_value("Content-Type") == "application/json");

  auto created = client.Post("/api/questions", images_body(9), "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const std::string q = json::parse(created->body)["id"];

  std::vector<std::thread> workers;
  std::atomic<int> accepted{0};
  for (int i = 0; i < 50; ++i)
    workers.emplace_back([&, i] {
      httplib::Client c("127.0.0.1", port);
      std::vector<int> labels(9);
      for (int j = 0; j < 9; ++j) labels[static_cast<std::size_t>(j)] = 1 + (i + j) % 3;
      auto r = c.Post("/api/questions/" + q + "/solutions", submission("w" + std::to_string(i), labels),
                      "application/json");
      if (r && r->status == 201) ++accepted;
    });
  for (auto& t : workers) t.join();
  CHECK(accepted == 50);
  CHECK(s.submissions(q).size() == 50);

  auto cons = client.Get("/api/questions/" + q + "/consensus?mode=medoid");
  REQUIRE(cons);
  CHECK(cons->status == 200);
  auto missing = client.Get("/api/questions/zzz/export");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  auto exported = client.Get("/api/questions/" + q + "/export");
  REQUIRE(exported);
  CHECK(std::count(exported->body.begin(), exported->body.end(), '\n') == 51);

  server.stop();
  loop.join();
  CHECK(CollectService(config(dir.path)).submissions(q).size() == 50);
}

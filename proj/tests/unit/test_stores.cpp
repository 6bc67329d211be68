#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ember/extract.hpp"
#include "ember/pipeline/record_store.hpp"
#include "ember/pipeline/report_store.hpp"
#include "ember/pipeline/schedule.hpp"
#include "ember/pipeline/vt_client.hpp"
#include "ember/record.hpp"
#include "pipeline_fixtures.hpp"

using namespace ember;
using namespace ember::pipeline;
using namespace ember::testing;
namespace fs = std::filesystem;

namespace {

constexpr std::int64_t kDay = 86400;

struct TempDir {
  fs::path path;
  explicit TempDir(const char* tag) {
    static int counter = 0;
    path = fs::temp_directory_path() / ("ember_" + std::string(tag) + "_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

class FakeClock final : public Clock {
 public:
  std::int64_t t = 1'700'000'000'000;
  std::vector<std::int64_t> sleeps;
  std::int64_t now_ms() override { return t; }
  void sleep_ms(std::int64_t ms) override {
    if (ms <= 0) return;
    sleeps.push_back(ms);
    t += ms;
  }
};

class ScriptedTransport final : public Transport {
 public:
  std::vector<HttpResponse> script;
  std::vector<HttpRequest> seen;
  std::vector<std::int64_t> times;
  Clock* clock = nullptr;

  HttpResponse send(const HttpRequest& r) override {
    seen.push_back(r);
    if (clock) times.push_back(clock->now_ms());
    if (script.empty()) return {200, {}, "{}", ""};
    auto res = script.front();
    script.erase(script.begin());
    return res;
  }
};

nlohmann::json envelope(const VtReport& r) {
  return {{"data", {{"id", r.sha256}, {"type", "file"}, {"attributes", vt_report_to_json(r)}}}};
}

FileMetadataRecord base_record(SplitMix64& rng, FileType t, int label) {
  static const RawFeatures raw = extract_raw({});
  FileMetadataRecord r;
  r.md5 = random_sha256(rng).substr(0, 32);
  r.sha1 = random_sha256(rng).substr(0, 40);
  r.sha256 = random_sha256(rng);
  r.first_submission_date = 1700000000;
  r.last_analysis_date = 1700000000 + 90 * kDay;
  r.detection_ratio = label ? "10/70" : "0/70";
  r.label = label;
  r.file_type = t;
  r.raw = raw;
  return r;
}

}  // namespace

TEST_CASE("report store appends, indexes and reopens") {
  TempDir dir("store");
  SplitMix64 rng(1);
  const auto sha = random_sha256(rng);
  const auto report = envelope(make_report(sha, 1000, 2000, {"X"}));
  {
    ReportStore s(dir.path, 600);
    s.append_report(sha, report, 5000);
    s.append_report(sha, report, 6000);
    s.append_rescan_request(sha, 7000);
    s.append_report(random_sha256(rng), report, 8000);
    CHECK(s.reports(sha).size() == 2);
    CHECK(s.reports(sha)[1].first == 6000);
    CHECK(s.reports(sha)[0].second == report);
    CHECK(s.rescan_requests(sha) == std::vector<std::int64_t>{7000});
  }
  CHECK(fs::exists(dir.path / "reports-00001.jsonl"));
  ReportStore reopened(dir.path, 600);
  CHECK(reopened.hashes().size() == 2);
  CHECK(reopened.reports(sha).size() == 2);
  CHECK(reopened.entries(sha).size() == 3);
  CHECK(reopened.entries("unknown").empty());
}

TEST_CASE("report store recovers unindexed entries and torn lines") {
  TempDir dir("recover");
  SplitMix64 rng(2);
  const auto a = random_sha256(rng), b = random_sha256(rng);
  {
    ReportStore s(dir.path);
    s.append_report(a, {{"n", 1}}, 10);
    s.append_report(b, {{"n", 2}}, 20);
  }
  // Simulate a crash: lose the last index line and tear a partial write.
  {
    std::ifstream in(dir.path / "index.tsv");
    std::string first;
    std::getline(in, first);
    in.close();
    std::ofstream out(dir.path / "index.tsv", std::ios::trunc);
    out << first << '\n';
    std::ofstream seg(dir.path / "reports-00000.jsonl", std::ios::app);
    seg << R"({"sha256":")" << a << R"(","retrieved_at":30,"ki)";
  }
  ReportStore s(dir.path);
  CHECK(s.reports(a).size() == 1);
  REQUIRE(s.reports(b).size() == 1);
  CHECK(s.reports(b)[0].second == nlohmann::json{{"n", 2}});
  s.append_report(a, {{"n", 3}}, 40);
  ReportStore again(dir.path);
  CHECK(again.reports(a).size() == 2);
  CHECK(again.reports(a)[1].second == nlohmann::json{{"n", 3}});
}

TEST_CASE("record store reproduces the expected split counts") {
  TempDir dir("table3");
  SplitMix64 rng(3);
  RecordStoreWriter w(dir.path);
  for (int i = 0; i < 12000; ++i) w.append(base_record(rng, FileType::pdf, i % 2), Split::test, "w52_pdf");
  for (int i = 0; i < 386; ++i) w.append(base_record(rng, FileType::elf, 1), Split::challenge, "all_elf");
  for (int i = 0; i < 50; ++i) w.append(base_record(rng, FileType::pdf, 1), Split::challenge, "all_pdf");
  const auto none = [](const FileMetadataRecord&, Split) {};
  CHECK(load_split(dir.path, make_filter("test", "pdf", "all"), none) == 12000);
  CHECK(load_split(dir.path, make_filter("challenge", "ELF", "all"), none) == 386);
}

TEST_CASE("record store filters compose") {
  TempDir dir("records");
  SplitMix64 rng(4);
  RecordStoreWriter w(dir.path);
  std::map<std::pair<Split, FileType>, std::size_t> totals;
  for (int i = 0; i < 600; ++i) {
    const auto t = static_cast<FileType>(rng.below(6));
    const auto s = static_cast<Split>(rng.below(3));
    auto r = base_record(rng, t, s == Split::challenge ? 1 : static_cast<int>(rng.below(2)));
    if (r.label == 1 && rng.below(2)) r.family = "fam" + std::to_string(rng.below(5));
    if (r.label == 1 && rng.below(3) == 0) r.packer = {"upx"};
    w.append(r, s, std::string("mixed_") + std::string(file_type_tag(t)));
    ++totals[{s, t}];
  }

  auto count = [&](std::string_view split, std::string_view type, std::string_view labels) {
    return load_split(dir.path, make_filter(split, type, labels), [](const FileMetadataRecord&, Split) {});
  };
  for (FileType t : kAllFileTypes) {
    const auto name = file_type_tag(t);
    const auto train = count("train", name, "all"), test = count("test", name, "all"),
               challenge = count("challenge", name, "all");
    CHECK(train == totals[{Split::train, t}]);
    CHECK(test == totals[{Split::test, t}]);
    CHECK(challenge == totals[{Split::challenge, t}]);
    CHECK(train + test + challenge == count("all", name, "all"));
    CHECK(count("train", name, "family") <= std::min(train, count("all", "all", "family")));
    CHECK(count("all", name, "packer") <= count("all", name, "malicious-benign"));
  }
  const auto pe = count("train", "pe", "all");
  CHECK(pe == count("train", "win32", "all") + count("train", "win64", "all") + count("train", "dotnet", "all"));
  load_split(dir.path, make_filter("train", "win32", "family"), [](const FileMetadataRecord& r, Split s) {
    CHECK(r.family.has_value());
    CHECK(r.file_type == FileType::win32);
    CHECK(s == Split::train);
  });

  CHECK_THROWS_AS(make_filter("validation", "all", "all"), FilterError);
  CHECK_THROWS_AS(make_filter("all", "com", "all"), FilterError);
  CHECK_THROWS_AS(make_filter("all", "all", "colour"), FilterError);
}

TEST_CASE("demographics") {
  SplitMix64 rng(4);
  Demographics d;
  for (int i = 0; i < 3; ++i) {
    auto r = base_record(rng, FileType::win32, 1);
    r.family = "a";
    if (i < 2) r.packer = {"upx"};
    d.add(r);
  }
  auto r = base_record(rng, FileType::win32, 1);
  r.family = "b";
  r.behavior = {"ransomware", "worm"};
  d.add(r);
  d.add(base_record(rng, FileType::pdf, 0));

  CHECK(d.family_size_histogram() == std::map<std::size_t, std::size_t>{{1, 1}, {3, 1}});
  CHECK(d.tag_stats("packer") == Demographics::TagStats{2, 1});
  CHECK(d.tag_stats("behavior") == Demographics::TagStats{1, 2});
  CHECK(d.tag_stats("group") == Demographics::TagStats{0, 0});
  CHECK(d.families_with_at_least(3) == 1);
  CHECK(d.families_with_at_most(1) == 1);
  CHECK(d.records() == 5);
  CHECK(d.malicious() == 4);
  CHECK(d.to_json()["unique_families"] == 2);
}

TEST_CASE("rate limiter spaces requests") {
  FakeClock clock;
  RateLimiter limiter(4, clock);
  const auto start = clock.t;
  for (int i = 0; i < 5; ++i) limiter.acquire();
  CHECK(clock.t - start == 4 * 15000);
}

TEST_CASE("client retry and failure classification") {
  FakeClock clock;
  RateLimiter limiter(0, clock);
  ScriptedTransport transport;
  RetryPolicy policy{4, 1000, 3000};
  VtClient client(transport, "secret", limiter, policy, clock);
  const std::string sha(64, 'a');

  SUBCASE("Retry-After is honoured on 429") {
    transport.script = {{429, {{"retry-after", "17"}}, "", ""}, {200, {}, R"({"data":{}})", ""}};
    const auto r = client.get_report(sha);
    CHECK(r.ok());
    CHECK(r.attempts == 2);
    CHECK(clock.sleeps == std::vector<std::int64_t>{17000});
    CHECK(transport.seen[0].headers.at("x-apikey") == "secret");
    CHECK(transport.seen[0].path == "/api/v3/files/" + sha);
  }
  SUBCASE("transport failures back off exponentially and give up") {
    transport.script = {{0, {}, "", "refused"}, {503, {}, "", ""}, {0, {}, "", "reset"}, {0, {}, "", "reset"}};
    const auto r = client.get_report(sha);
    CHECK(r.failure == Failure::transport);
    CHECK(r.attempts == 4);
    CHECK(clock.sleeps == std::vector<std::int64_t>{1000, 2000, 3000});
  }
  SUBCASE("quota exhaustion is surfaced after retries") {
    for (int i = 0; i < 4; ++i) transport.script.push_back({429, {}, "", ""});
    CHECK(client.get_report(sha).failure == Failure::quota_exhausted);
  }
  SUBCASE("not found and auth are not retried") {
    transport.script = {{404, {}, "", ""}};
    auto r = client.get_report(sha);
    CHECK(r.failure == Failure::not_found);
    CHECK(r.attempts == 1);
    transport.script = {{401, {}, "", ""}};
    CHECK(client.get_report(sha).failure == Failure::auth);
  }
  SUBCASE("non-report bodies are rejected") {
    transport.script = {{200, {}, "not json", ""}};
    CHECK(client.get_report(sha).failure == Failure::bad_response);
  }
  SUBCASE("rescan is a POST to analyse") {
    CHECK(client.request_rescan(sha).ok());
    CHECK(transport.seen[0].method == "POST");
    CHECK(transport.seen[0].path == "/api/v3/files/" + sha + "/analyse");
  }
}

TEST_CASE("fetches persist reports and dead letters") {
  TempDir dir("fetch");
  FakeClock clock;
  RateLimiter limiter(0, clock);
  ScriptedTransport transport;
  VtClient client(transport, "k", limiter, RetryPolicy{2, 10, 10}, clock);
  ReportStore store(dir.path);
  SplitMix64 rng(5);
  const auto sha = random_sha256(rng);
  const auto body = envelope(make_report(sha, 100, 200, {})).dump();

  transport.script = {{200, {}, body, ""}, {200, {}, body, ""}};
  CHECK(fetch_report(client, store, sha, clock) == Failure::none);
  clock.t += 5000;
  CHECK(fetch_report(client, store, sha, clock) == Failure::none);
  const auto reports = store.reports(sha);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].second == reports[1].second);
  CHECK(reports[1].first > reports[0].first);

  transport.script = {{404, {}, "", ""}};
  CHECK(fetch_report(client, store, "f" + sha.substr(1), clock) == Failure::not_found);
  transport.script = {{0, {}, "", "down"}, {0, {}, "", "down"}};
  CHECK(request_rescan(client, store, sha, clock) == Failure::transport);
  const auto dead = store.dead_letters();
  REQUIRE(dead.size() == 2);
  CHECK(dead[0].error == "not_found");
  CHECK(dead[1].operation == "rescan");
  CHECK(dead[1].attempts == 2);
  CHECK(store.rescan_requests(sha).empty());
}

TEST_CASE("schedule") {
  TempDir dir("schedule");
  ReportStore store(dir.path);
  SplitMix64 rng(6);
  const std::int64_t first = 1'700'000'000;
  const auto sha = random_sha256(rng);
  const std::vector<TrackedFile> files = {{sha, first}};
  auto kinds = [&](std::int64_t now) {
    std::vector<TaskKind> k;
    for (const auto& t : plan_schedule(files, store, now)) k.push_back(t.kind);
    return k;
  };

  const auto initial = plan_schedule(files, store, first + 3600);
  REQUIRE(initial.size() == 1);
  CHECK(initial[0].kind == TaskKind::initial_fetch);
  CHECK_FALSE(initial[0].late);
  CHECK(plan_schedule(files, store, first + 2 * kDay)[0].late);
  CHECK(kinds(first - 10).empty());

  store.append_report(sha, envelope(make_report(sha, first, first + 600, {})), first + 3600);
  CHECK(kinds(first + 29 * kDay).empty());
  CHECK(kinds(first + 30 * kDay) == std::vector<TaskKind>{TaskKind::rescan});
  store.append_rescan_request(sha, first + 30 * kDay);
  CHECK(kinds(first + 60 * kDay).empty());
  CHECK(kinds(first + 90 * kDay - 1).empty());
  CHECK(kinds(first + 90 * kDay) == std::vector<TaskKind>{TaskKind::relabel_fetch});

  store.append_report(sha, envelope(make_report(sha, first, first + 31 * kDay, {})), first + 90 * kDay);
  CHECK(kinds(first + 120 * kDay).empty());

  // A detected file is never force-rescanned.
  const auto mal = random_sha256(rng);
  store.append_report(mal, envelope(make_report(mal, first, first + 60, {"X"})), first + 60);
  const auto plan = plan_schedule({{mal, first}}, store, first + 40 * kDay);
  CHECK(plan.empty());

  std::stringstream tracked("# hash\tdate\n" + sha + "\t2023-11-14T22:13:20\n" + mal + "\t1700000000\n");
  const auto parsed = read_tracked_files(tracked);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].first_submission_date == first);
  CHECK(parsed[1].first_submission_date == first);
}

TEST_CASE("run_schedule executes tasks concurrently") {
  TempDir dir("run");
  FakeClock clock;
  RateLimiter limiter(0, clock);
  ScriptedTransport transport;
  VtClient client(transport, "k", limiter, RetryPolicy{1, 1, 1}, clock);
  ReportStore store(dir.path);
  SplitMix64 rng(7);
  std::vector<Task> tasks;
  for (int i = 0; i < 8; ++i) {
    const auto sha = random_sha256(rng);
    tasks.push_back({sha, i % 2 ? TaskKind::rescan : TaskKind::initial_fetch, 0, false});
  }
  struct Echo final : Transport {
    std::mutex mu;
    HttpResponse send(const HttpRequest& r) override {
      std::lock_guard lock(mu);
      const auto sha = r.path.substr(14, 64);
      if (r.method == "POST") return {200, {}, "{}", ""};
      return {200, {}, envelope(make_report(sha, 1, 2, {})).dump(), ""};
    }
  } echo;
  VtClient c2(echo, "k", limiter, RetryPolicy{1, 1, 1}, clock);
  const auto summary = run_schedule(tasks, c2, store, clock, 4);
  CHECK(summary.attempted == 8);
  CHECK(summary.succeeded == 8);
  for (const auto& t : tasks) {
    if (t.kind == TaskKind::rescan) CHECK(store.rescan_requests(t.sha256).size() == 1);
    else CHECK(store.reports(t.sha256).size() == 1);
  }
}

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "cli_common.hpp"
#include "ember/digests.hpp"
#include "ember/extract.hpp"
#include "ember/pipeline/calendar.hpp"
#include "ember/pipeline/report_store.hpp"
#include "ember/pipeline/schedule.hpp"
#include "ember/pipeline/vt_client.hpp"
#include "ember/pipeline/vt_report.hpp"

namespace ember::cli {

namespace fs = std::filesystem;
using namespace ember::pipeline;

namespace {

struct VtArgs {
  std::vector<std::string> hashes;
  std::string hash_file;
  std::string store;
  std::string base_url = "https://www.virustotal.com";
  double rpm = 4;
  int retries = 5;
};

void add_vt_options(CLI::App* c, CommonOptions& opts, VtArgs& a, bool hashes = true) {
  if (hashes) {
    c->add_option("hashes", a.hashes, "SHA-256 hashes");
    c->add_option("--hashes-file", a.hash_file, "File with one hash per line")->check(CLI::ExistingFile);
  }
  c->add_option("--base-url", a.base_url, "API base URL")->capture_default_str();
  c->add_option("--rpm", a.rpm, "Requests per minute across all workers (0: unlimited)")->capture_default_str();
  c->add_option("--retries", a.retries, "Attempts per request")->capture_default_str()->check(CLI::PositiveNumber);
  add_api_key_env(c, opts);
  add_threads(c, opts);
}

struct Session {
  std::unique_ptr<Transport> transport;
  std::unique_ptr<RateLimiter> limiter;
  std::unique_ptr<VtClient> client;
};

Session open_session(const CommonOptions& o, const VtArgs& a) {
  const char* key = std::getenv(o.api_key_env.c_str());
  if (!key || !*key) throw std::runtime_error("API key variable " + o.api_key_env + " is not set");
  Session s;
  s.transport = make_http_transport(a.base_url);
  s.limiter = std::make_unique<RateLimiter>(a.rpm, system_clock());
  RetryPolicy policy;
  policy.max_attempts = a.retries;
  s.client = std::make_unique<VtClient>(*s.transport, key, *s.limiter, policy, system_clock());
  return s;
}

bool is_sha256(const std::string& h) {
  return h.size() == 64 && std::all_of(h.begin(), h.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
}

std::vector<std::string> hashes_or_throw(const VtArgs& a) {
  auto hashes = collect_hashes(a.hashes, a.hash_file);
  if (hashes.empty()) throw std::runtime_error("no hashes given");
  for (const auto& h : hashes) {
    if (!is_sha256(h)) throw std::runtime_error("not a SHA-256 hash: " + h);
  }
  return hashes;
}

int run_store_op(const char* name, const CommonOptions& o, const VtArgs& a, bool rescan) {
  const auto hashes = hashes_or_throw(a);
  auto session = open_session(o, a);
  ReportStore store(a.store);
  std::vector<Task> tasks;
  for (const auto& h : hashes) tasks.push_back({h, rescan ? TaskKind::rescan : TaskKind::initial_fetch, 0, false});
  std::vector<Outcome> outcomes(hashes.size());
  ordered_map<Task, Outcome>(
      tasks, o.worker_count(), 1024,
      [&](const Task& t) {
        const auto f = rescan ? request_rescan(*session.client, store, t.sha256, system_clock())
                              : fetch_report(*session.client, store, t.sha256, system_clock());
        return Outcome{t.sha256, f == Failure::none ? "" : std::string(failure_name(f)), {}};
      },
      [&](std::size_t i, Outcome& oc) { outcomes[i] = std::move(oc); });
  return report(name, outcomes, {{"store", a.store}});
}

int run_download(const CommonOptions& o, const VtArgs& a, const std::string& out_dir) {
  const auto hashes = hashes_or_throw(a);
  auto session = open_session(o, a);
  fs::create_directories(out_dir);
  std::unique_ptr<ReportStore> store;
  if (!a.store.empty()) store = std::make_unique<ReportStore>(a.store);
  std::vector<Outcome> outcomes(hashes.size());
  ordered_map<std::string, Outcome>(
      hashes, o.worker_count(), 256,
      [&](const std::string& h) {
        Outcome oc{h, "", {}};
        const auto r = session.client->download(h);
        if (!r.ok()) {
          oc.error = std::string(failure_name(r.failure));
          if (store) store->append_dead_letter({h, "download", oc.error, r.message, system_clock().now_s(), r.attempts});
          return oc;
        }
        const std::span<const std::uint8_t> content(reinterpret_cast<const std::uint8_t*>(r.body.data()), r.body.size());
        if (o.max_file_size != 0 && content.size() > o.max_file_size) {
          oc.error = "file exceeds --max-file-size";
          return oc;
        }
        if (compute_digests(content).sha256 != h) {
          oc.error = "content hash mismatch";
          return oc;
        }
        std::ofstream f(fs::path(out_dir) / h, std::ios::binary | std::ios::trunc);
        f.write(r.body.data(), static_cast<std::streamsize>(r.body.size()));
        if (!f) {
          oc.error = "cannot write file";
          return oc;
        }
        const auto detected = detect_file_type(content);
        oc.detail["detected_type"] = detected ? std::string(file_type_name(*detected)) : std::string("unknown");
        if (store) {
          const auto reports = store->reports(h);
          if (!reports.empty()) {
            try {
              if (auto w = cross_check_type(parse_vt_report(reports.back().second).file_type, detected)) oc.detail["warning"] = *w;
            } catch (const ReportError&) {
            }
          }
        }
        return oc;
      },
      [&](std::size_t i, Outcome& oc) { outcomes[i] = std::move(oc); });
  return report("download", outcomes, {{"output", out_dir}}, true);
}

int run_schedule_cmd(const CommonOptions& o, const VtArgs& a, const std::string& tracked_path, const std::string& now_arg,
                     bool dry_run) {
  std::ifstream in(tracked_path);
  if (!in) return fail("schedule", "cannot open " + tracked_path);
  const auto tracked = read_tracked_files(in);
  ReportStore store(a.store);
  const std::int64_t now = now_arg.empty() ? system_clock().now_s()
                           : std::all_of(now_arg.begin(), now_arg.end(), [](char c) { return c >= '0' && c <= '9'; })
                               ? std::stoll(now_arg)
                               : parse_utc(now_arg);
  const auto tasks = plan_schedule(tracked, store, now);
  if (dry_run) {
    std::cout << "sha256\ttask\tdue\tlate\n";
    for (const auto& t : tasks) std::cout << t.sha256 << '\t' << task_name(t.kind) << '\t' << format_utc(t.due) << '\t' << t.late << '\n';
    return report("schedule", {}, {{"tasks", tasks.size()}, {"dry_run", true}}, false, tasks.size());
  }
  auto session = open_session(o, a);
  const auto summary = run_schedule(tasks, *session.client, store, system_clock(), o.worker_count());
  std::vector<Outcome> failures;
  for (const auto& [kind, n] : summary.failures) failures.push_back({kind, std::to_string(n) + " task(s) failed", {}});
  return report("schedule", failures, {{"tasks", summary.attempted}, {"succeeded", summary.succeeded}}, false,
                summary.succeeded);
}

}  // namespace

void add_vt_commands(CLI::App& app, CommonOptions& opts, Runner& run) {
  for (const bool rescan : {false, true}) {
    auto* c = app.add_subcommand(rescan ? "rescan" : "fetch",
                                 rescan ? "Request rescans and record the requests" : "Fetch and store scan reports");
    auto a = std::make_shared<VtArgs>();
    add_vt_options(c, opts, *a);
    c->add_option("--store", a->store, "Report store directory")->required();
    c->callback([&opts, &run, a, rescan] {
      run = [&opts, a, rescan] { return run_store_op(rescan ? "rescan" : "fetch", opts, *a, rescan); };
    });
  }
  {
    auto* c = app.add_subcommand("download", "Download files by hash and verify their content");
    auto a = std::make_shared<VtArgs>();
    auto out = std::make_shared<std::string>();
    add_vt_options(c, opts, *a);
    add_max_file_size(c, opts);
    c->add_option("--out-dir", *out, "Destination directory")->required();
    c->add_option("--store", a->store, "Report store for type cross-checks and dead letters");
    c->callback([&opts, &run, a, out] { run = [&opts, a, out] { return run_download(opts, *a, *out); }; });
  }
  {
    auto* c = app.add_subcommand("schedule", "Run the due initial fetches, relabel fetches and rescans");
    auto a = std::make_shared<VtArgs>();
    auto tracked = std::make_shared<std::string>();
    auto now = std::make_shared<std::string>();
    auto dry = std::make_shared<bool>(false);
    add_vt_options(c, opts, *a, false);
    c->add_option("--tracked", *tracked, "sha256<TAB>first_submission_date per line")->required()->check(CLI::ExistingFile);
    c->add_option("--store", a->store, "Report store directory")->required();
    c->add_option("--now", *now, "Evaluate the schedule at this time (default: current time)");
    c->add_flag("--dry-run", *dry, "List due tasks without running them");
    c->callback([&opts, &run, a, tracked, now, dry] {
      run = [&opts, a, tracked, now, dry] { return run_schedule_cmd(opts, *a, *tracked, *now, *dry); };
    });
  }
}

}  // namespace ember::cli

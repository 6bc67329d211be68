#include <fstream>
#include <iostream>

#include "cli_common.hpp"
#include "ember/pipeline/calendar.hpp"
#include "ember/pipeline/manifest.hpp"
#include "ember/pipeline/record_store.hpp"
#include "ember/pipeline/report_store.hpp"
#include "ember/pipeline/selection.hpp"
#include "ember/pipeline/vendor_graph.hpp"
#include "ember/record.hpp"

namespace ember::cli {

namespace fs = std::filesystem;
using namespace ember::pipeline;

namespace {

std::int64_t parse_start(const std::string& s) {
  if (s.empty()) return kDefaultCollectionStart;
  const bool numeric = std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  return numeric ? std::stoll(s) : parse_utc(s);
}

// "file_type<TAB>malicious<TAB>benign" rows override the built-in thresholds.
void apply_thresholds(SelectionConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto c = split_tabs(line);
    if (c.size() != 3) throw std::runtime_error(path + ": expected file_type<TAB>malicious<TAB>benign");
    const auto t = parse_file_type(c[0]);
    if (!t) throw std::runtime_error(path + ": unknown file type " + c[0]);
    config.threshold(*t, Label::malicious) = std::stoull(c[1]);
    config.threshold(*t, Label::benign) = std::stoull(c[2]);
  }
}

int run_label(const CommonOptions& o, const std::string& reports, const std::string& start, const std::string& out) {
  if (!fs::is_directory(reports)) return fail("label", "report store not found: " + reports);
  const auto graph = o.vendor_graph.empty() ? AvVendorGraph::default_graph() : AvVendorGraph::load(o.vendor_graph);
  const ReportStore store(reports);
  std::vector<SkippedFile> skipped;
  const auto rows = label_store(store, graph, parse_start(start), &skipped);
  Output output(out);
  write_label_manifest(output.stream(), rows);
  output.stream().flush();

  std::vector<Outcome> outcomes;
  std::map<std::string, std::size_t> counts;
  std::size_t challenge = 0;
  for (const auto& r : rows) {
    ++counts[std::string(label_name(r.candidate.label))];
    challenge += r.candidate.challenge;
  }
  for (const auto& s : skipped) outcomes.push_back({s.sha256, s.reason, {}});
  nlohmann::ordered_json extra = {{"labels", counts}, {"challenge", challenge}};
  return report("label", outcomes, extra, false, rows.size());
}

int run_select(const CommonOptions& o, const std::string& manifest, const std::string& thresholds,
               const std::string& out, const std::string& report_path) {
  std::ifstream in(manifest);
  if (!in) return fail("select", "cannot open " + manifest);
  auto config = SelectionConfig::standard(o.seed);
  config.max_file_size = o.max_file_size == 0 ? ~0ull : o.max_file_size;
  if (!thresholds.empty()) apply_thresholds(config, thresholds);
  std::vector<Candidate> candidates;
  for (auto& r : read_label_manifest(in)) candidates.push_back(std::move(r.candidate));

  const auto plan = plan_dataset(candidates, config);
  Output output(out);
  write_selection_manifest(output.stream(), plan.manifest);
  output.stream().flush();

  nlohmann::ordered_json weeks = nlohmann::ordered_json::array();
  std::size_t shortfall = 0;
  for (const auto& w : plan.weeks) {
    nlohmann::ordered_json buckets = nlohmann::ordered_json::array();
    for (const auto& b : w.buckets) {
      shortfall += b.shortfall();
      buckets.push_back({{"file_type", std::string(file_type_name(b.file_type))},
                         {"label", std::string(label_name(b.label))},
                         {"threshold", b.threshold},
                         {"available", b.available},
                         {"selected", b.selected},
                         {"shortfall", b.shortfall()},
                         {"oversize", b.oversize},
                         {"near_duplicate", b.near_duplicate},
                         {"without_digest", b.without_digest}});
    }
    weeks.push_back({{"week", w.week}, {"discarded", w.discarded}, {"buckets", std::move(buckets)}});
  }
  if (!report_path.empty()) {
    std::ofstream r(report_path);
    r << nlohmann::ordered_json{{"weeks", weeks}}.dump(2) << '\n';
  }
  nlohmann::ordered_json extra = {{"selected", plan.manifest.size()},
                                  {"excluded_by_challenge", plan.excluded_by_challenge},
                                  {"shortfall", shortfall}};
  return report("select", {}, extra, false, candidates.size());
}

int run_split(const std::string& store, const SplitFilter& filter, const std::string& out) {
  Output output(out);
  const auto n = load_split(store, filter, [&](const FileMetadataRecord& r, Split) {
    output.stream() << serialize_record(r) << '\n';
  });
  output.stream().flush();
  return report("split", {}, {{"records", n}}, false, n);
}

int run_stats(const std::string& store, const SplitFilter& filter, const std::string& out) {
  Demographics d;
  load_split(store, filter, [&](const FileMetadataRecord& r, Split) { d.add(r); });
  Output output(out);
  output.stream() << d.to_json().dump(2) << '\n';
  output.stream().flush();
  return report("stats", {}, {{"records", d.records()}}, false, d.records());
}

struct FilterArgs {
  std::string split = "all", type = "all", labels = "all";
};

void add_filter_options(CLI::App* c, FilterArgs& f) {
  c->add_option("--split", f.split, "train, test, challenge or all")->capture_default_str();
  c->add_option("--type", f.type, "all, pe, win32, win64, dotnet, apk, elf or pdf")->capture_default_str();
  c->add_option("--labels", f.labels, "all, malicious-benign, family or a tag category")->capture_default_str();
}

}  // namespace

void add_dataset_commands(CLI::App& app, CommonOptions& opts, Runner& run) {
  {
    auto* c = app.add_subcommand("label", "Label manifest from a report store");
    auto reports = std::make_shared<std::string>();
    auto start = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    c->add_option("--reports", *reports, "Report store directory")->required();
    c->add_option("--collection-start", *start, "First collection day, UTC (default 2023-09-24)");
    c->add_option("-o,--output", *out, "Label manifest TSV (default: stdout)");
    add_vendor_graph(c, opts);
    c->callback([&opts, &run, reports, start, out] {
      run = [&opts, reports, start, out] { return run_label(opts, *reports, *start, *out); };
    });
  }
  {
    auto* c = app.add_subcommand("select", "Weekly selection and challenge split from a label manifest");
    auto manifest = std::make_shared<std::string>();
    auto thresholds = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto rep = std::make_shared<std::string>();
    c->add_option("--manifest", *manifest, "Label manifest TSV")->required()->check(CLI::ExistingFile);
    c->add_option("--thresholds", *thresholds, "Per-type weekly thresholds TSV")->check(CLI::ExistingFile);
    c->add_option("-o,--output", *out, "Selection manifest TSV (default: stdout)");
    c->add_option("--report", *rep, "Per-week bucket report (JSON)");
    add_seed(c, opts);
    add_max_file_size(c, opts);
    c->callback([&opts, &run, manifest, thresholds, out, rep] {
      run = [&opts, manifest, thresholds, out, rep] { return run_select(opts, *manifest, *thresholds, *out, *rep); };
    });
  }
  {
    auto* c = app.add_subcommand("split", "Records of a store matching split, type and label filters");
    auto store = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto f = std::make_shared<FilterArgs>();
    c->add_option("--store", *store, "Record store directory")->required()->check(CLI::ExistingDirectory);
    c->add_option("-o,--output", *out, "Output JSONL (default: stdout)");
    add_filter_options(c, *f);
    c->callback([&run, store, out, f] {
      run = [store, out, f] { return run_split(*store, make_filter(f->split, f->type, f->labels), *out); };
    });
  }
  {
    auto* c = app.add_subcommand("stats", "Family and tag demographics of a record store");
    auto store = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto f = std::make_shared<FilterArgs>();
    c->add_option("--store", *store, "Record store directory")->required()->check(CLI::ExistingDirectory);
    c->add_option("-o,--output", *out, "Output JSON (default: stdout)");
    add_filter_options(c, *f);
    c->callback([&run, store, out, f] {
      run = [store, out, f] { return run_stats(*store, make_filter(f->split, f->type, f->labels), *out); };
    });
  }
}

}  // namespace ember::cli

#include <fstream>
#include <iostream>

#include "cli_common.hpp"
#include "ember/digests.hpp"
#include "ember/extract.hpp"
#include "ember/matrix.hpp"
#include "ember/record.hpp"
#include "ember/tlsh.hpp"
#include "ember/vectorize.hpp"

namespace ember::cli {

namespace fs = std::filesystem;

namespace {

struct FileResult {
  std::string line;
  Outcome outcome;
};

PatternSet load_patterns(const CommonOptions& o) {
  return o.patterns.empty() ? PatternSet::default_v3() : PatternSet::load(o.patterns);
}

FeatureLayout load_layout(const CommonOptions& o) {
  return o.layout.empty() ? FeatureLayout::default_v3() : FeatureLayout::load(o.layout);
}

bool too_large(const CommonOptions& o, std::uint64_t size) { return o.max_file_size != 0 && size > o.max_file_size; }

int run_extract(const CommonOptions& o, const std::vector<std::string>& inputs, const std::string& out_path) {
  std::vector<Outcome> outcomes;
  const auto files = expand_inputs(inputs, outcomes);
  const auto patterns = load_patterns(o);
  Output out(out_path);
  ordered_map<fs::path, FileResult>(
      files, o.worker_count(), 256,
      [&](const fs::path& p) {
        FileResult r;
        r.outcome.item = p.string();
        try {
          if (too_large(o, fs::file_size(p))) {
            r.outcome.error = "file exceeds --max-file-size";
            return r;
          }
          const auto content = read_file(p);
          const auto ex = extract(content, patterns);
          nlohmann::ordered_json ids;
          ids["sha256"] = compute_digests(content).sha256;
          r.line = serialize_raw(ex.raw, ids);
          if (ex.detected_type) r.outcome.detail["file_type"] = std::string(file_type_name(*ex.detected_type));
          if (!ex.pe_failure.empty()) r.outcome.detail["pe_failure"] = ex.pe_failure;
        } catch (const std::exception& e) {
          r.outcome.error = e.what();
        }
        return r;
      },
      [&](std::size_t, FileResult& r) {
        if (r.outcome.error.empty()) out.stream() << r.line << '\n';
        outcomes.push_back(std::move(r.outcome));
      });
  out.stream().flush();
  return report("extract", outcomes);
}

int run_digest(const CommonOptions& o, const std::vector<std::string>& inputs, const std::string& out_path) {
  std::vector<Outcome> outcomes;
  const auto files = expand_inputs(inputs, outcomes);
  Output out(out_path);
  out.stream() << "path\tmd5\tsha1\tsha256\ttlsh\n";
  ordered_map<fs::path, FileResult>(
      files, o.worker_count(), 256,
      [&](const fs::path& p) {
        FileResult r;
        r.outcome.item = p.string();
        try {
          const auto content = read_file(p);
          const auto d = compute_digests(content);
          r.line = p.string() + "\t" + d.md5 + "\t" + d.sha1 + "\t" + d.sha256 + "\t" +
                   tlsh::digest_text(content).value_or("-");
        } catch (const std::exception& e) {
          r.outcome.error = e.what();
        }
        return r;
      },
      [&](std::size_t, FileResult& r) {
        if (r.outcome.error.empty()) out.stream() << r.line << '\n';
        outcomes.push_back(std::move(r.outcome));
      });
  out.stream().flush();
  return report("digest", outcomes);
}

struct VectorRow {
  std::vector<float> values;
  std::int32_t label = -1;
  std::string error;
};

int run_vectorize(const CommonOptions& o, const std::string& in_path, const std::string& out_path, bool agnostic) {
  const auto layout = load_layout(o);
  std::ifstream in(in_path, std::ios::binary);
  if (!in) return fail("vectorize", "cannot open " + in_path);
  const std::size_t cols = agnostic ? layout.agnostic_width() : layout.total_width();
  MatrixWriter writer(out_path, cols);
  std::vector<Outcome> outcomes;
  std::size_t line_no = 0;
  const std::size_t window = 4096;
  while (in) {
    std::vector<std::pair<std::size_t, std::string>> lines;
    std::string line;
    while (lines.size() < window && std::getline(in, line)) {
      ++line_no;
      if (!line.empty()) lines.emplace_back(line_no, std::move(line));
    }
    ordered_map<std::pair<std::size_t, std::string>, VectorRow>(
        lines, o.worker_count(), window,
        [&](const std::pair<std::size_t, std::string>& l) {
          VectorRow row;
          try {
            const auto j = nlohmann::ordered_json::parse(l.second);
            RawFeatures raw;
            if (j.contains("md5") && j.contains("label")) {
              const auto rec = record_from_json(j);
              raw = rec.raw;
              row.label = static_cast<std::int32_t>(rec.label);
            } else {
              raw = raw_from_json(j);
              if (j.contains("label") && j["label"].is_number_integer()) row.label = j["label"].get<std::int32_t>();
            }
            row.values = vectorize(raw, layout);
            if (agnostic) row.values = truncate_agnostic(row.values, layout);
          } catch (const std::exception& e) {
            row.error = e.what();
          }
          return row;
        },
        [&](std::size_t i, VectorRow& row) {
          if (row.error.empty()) writer.append(row.values, row.label);
          else outcomes.push_back({in_path + ":" + std::to_string(lines[i].first), row.error, {}});
        });
  }
  writer.close();
  nlohmann::ordered_json extra = {{"rows", writer.rows()}, {"cols", cols}, {"output", out_path}};
  return report("vectorize", outcomes, extra, false, writer.rows());
}

}  // namespace

void add_feature_commands(CLI::App& app, CommonOptions& opts, Runner& run) {
  {
    auto* c = app.add_subcommand("extract", "Raw feature documents (JSON Lines) for files or directories");
    auto inputs = std::make_shared<std::vector<std::string>>();
    auto out = std::make_shared<std::string>();
    c->add_option("inputs", *inputs, "Files or directories")->required();
    c->add_option("-o,--output", *out, "Output JSONL (default: stdout)");
    add_patterns(c, opts);
    add_threads(c, opts);
    add_max_file_size(c, opts);
    c->callback([&opts, &run, inputs, out] { run = [&opts, inputs, out] { return run_extract(opts, *inputs, *out); }; });
  }
  {
    auto* c = app.add_subcommand("digest", "MD5, SHA-1, SHA-256 and TLSH digests as TSV");
    auto inputs = std::make_shared<std::vector<std::string>>();
    auto out = std::make_shared<std::string>();
    c->add_option("inputs", *inputs, "Files or directories")->required();
    c->add_option("-o,--output", *out, "Output TSV (default: stdout)");
    add_threads(c, opts);
    c->callback([&opts, &run, inputs, out] { run = [&opts, inputs, out] { return run_digest(opts, *inputs, *out); }; });
  }
  {
    auto* c = app.add_subcommand("vectorize", "Feature matrix from raw documents or metadata records");
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto agnostic = std::make_shared<bool>(false);
    c->add_option("input", *in, "JSONL of raw documents or metadata records")->required()->check(CLI::ExistingFile);
    c->add_option("-o,--output", *out, "Matrix file; labels go to <output>.labels")->required();
    c->add_flag("--agnostic-only", *agnostic, "Keep only the format-agnostic prefix");
    add_layout(c, opts);
    add_threads(c, opts);
    c->callback([&opts, &run, in, out, agnostic] {
      run = [&opts, in, out, agnostic] { return run_vectorize(opts, *in, *out, *agnostic); };
    });
  }
}

}  // namespace ember::cli

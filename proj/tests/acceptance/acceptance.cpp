// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only
// when every criterion passes.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ember/agnostic.hpp"
#include "ember/extract.hpp"
#include "ember/matrix.hpp"
#include "ember/pe/pe.hpp"
#include "ember/pe/warnings.hpp"
#include "ember/pipeline/calendar.hpp"
#include "ember/pipeline/labeling.hpp"
#include "ember/pipeline/manifest.hpp"
#include "ember/pipeline/selection.hpp"
#include "ember/record.hpp"
#include "ember/simd/kernels.hpp"
#include "ember/tlsh.hpp"
#include "ember/vectorize.hpp"
#include "pe_oracle.hpp"
#include "pe_writer.hpp"
#include "pipeline_fixtures.hpp"
#include "raw_fuzz.hpp"
#include "splitmix.hpp"
#include "test_data.hpp"

namespace fs = std::filesystem;
using namespace ember;
using namespace ember::pipeline;
using namespace ember::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Verdict {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;

  void expect(bool cond, const std::string& what) {
    if (cond) return;
    pass = false;
    if (failures.size() < 5) failures.push_back(what);
  }
};

std::string fmt(double x, int precision = 2) {
  std::ostringstream s;
  s.precision(precision);
  s << std::fixed << x;
  return s.str();
}

bool suffix_zero(const std::vector<float>& v) {
  return std::all_of(v.begin() + static_cast<std::ptrdiff_t>(kAgnosticWidth), v.end(), [](float x) { return x == 0.0f; });
}

Verdict vector_layout() {
  Verdict v;
  const auto start = Clock::now();
  SplitMix64 rng(20240901);
  std::size_t non_pe = 0;
  for (int i = 0; i < 1000; ++i) {
    const bool with_pe = i % 2 == 0;
    const auto raw = random_raw(rng, with_pe);
    const auto x = vectorize(raw);
    v.expect(x.size() == kVectorWidth, "document " + std::to_string(i) + " has width " + std::to_string(x.size()));
    if (x.size() != kVectorWidth) continue;
    if (with_pe) continue;
    ++non_pe;
    v.expect(suffix_zero(x), "document " + std::to_string(i) + " has a nonzero PE suffix");
    auto padded = truncate_agnostic(x);
    padded.resize(kVectorWidth, 0.0f);
    v.expect(padded == x, "document " + std::to_string(i) + " is not recovered from its truncation");
  }
  const char* kinds[] = {"random", "text", "mutate", "lowvar"};
  for (int i = 0; i < 200; ++i) {
    auto content = make_input(kinds[i % 4], rng.next(), rng.below(16384), 1 + rng.below(40));
    if (content.size() >= 2 && content[0] == 'M' && content[1] == 'Z') content[0] = 'X';
    const auto x = vectorize(extract_raw(content));
    ++non_pe;
    v.expect(x.size() == kVectorWidth && suffix_zero(x), "extracted non-PE input " + std::to_string(i));
  }
  const double t = seconds_since(start);
  v.expect(t < 10.0, "runtime " + fmt(t) + " s exceeds 10 s");
  v.detail = "1000 fuzzed documents plus 200 extracted files, " + std::to_string(non_pe) + " non-PE, " + fmt(t) + " s";
  return v;
}

Verdict section_ratios() {
  Verdict v;
  PeSpec spec;
  SectionSpec text;
  text.name = ".text";
  text.data.assign(115200, 0x90);
  text.virtual_size = 115080;
  text.characteristics = 0x60000020;
  spec.sections.push_back(text);
  auto image = build_pe(spec);
  image.resize(8782336, 0);
  const auto p = pe::parse_pe(image);
  v.expect(p.ok(), "image did not parse");
  if (!p.ok()) return v;
  const auto& s = p.features->section.sections.at(0);
  v.expect(s.size == 115200 && s.vsize == 115080, "section sizes");
  const double size_err = std::abs(s.size_ratio - 0.013117238966944557);
  const double vsize_err = std::abs(s.vsize_ratio - 1.0010427528675705);
  v.expect(size_err <= 1e-12, "size_ratio " + std::to_string(s.size_ratio));
  v.expect(vsize_err <= 1e-12, "vsize_ratio " + std::to_string(s.vsize_ratio));
  std::ostringstream d;
  d.precision(17);
  d << "size_ratio " << s.size_ratio << ", vsize_ratio " << s.vsize_ratio;
  v.detail = d.str();
  return v;
}

// H = log2(N) - (1/N) sum c log2 c, in extended precision.
long double entropy_oracle(const std::vector<std::uint64_t>& counts) {
  long double n = 0;
  for (auto c : counts) n += static_cast<long double>(c);
  if (n == 0) return 0;
  long double s = 0;
  for (auto c : counts) {
    if (c) s += static_cast<long double>(c) * std::log2(static_cast<long double>(c));
  }
  return std::log2(n) - s / n;
}

Verdict entropy() {
  Verdict v;
  std::mt19937_64 rng(8675309);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t bins = 1 + rng() % 256;
    std::vector<std::uint64_t> h(bins);
    const int shape = i % 4;
    for (auto& c : h) {
      switch (shape) {
        case 0: c = rng() % 1000; break;
        case 1: c = rng() % 4 == 0 ? rng() % 1000000 : 0; break;
        case 2: c = rng() % 3; break;
        default: c = rng() >> (20 + rng() % 44); break;
      }
    }
    const double got = shannon_entropy(h);
    const double err = static_cast<double>(std::abs(static_cast<long double>(got) - entropy_oracle(h)));
    worst = std::max(worst, err);
    v.expect(err <= 1e-9, "histogram " + std::to_string(i) + " off by " + std::to_string(err));
  }
  std::vector<std::uint64_t> degenerate(256, 0);
  degenerate[65] = 12345;
  v.expect(shannon_entropy(degenerate) == 0.0, "single-symbol histogram");
  v.expect(shannon_entropy(std::vector<std::uint64_t>(256, 0)) == 0.0, "empty histogram");
  v.expect(shannon_entropy(std::vector<std::uint64_t>(256, 977)) == 8.0, "uniform histogram");
  std::vector<std::uint8_t> all_bytes(256 * 64);
  for (std::size_t i = 0; i < all_bytes.size(); ++i) all_bytes[i] = static_cast<std::uint8_t>(i);
  v.expect(general_features(all_bytes).entropy == 8.0, "uniform content");
  std::ostringstream d;
  d << "10000 histograms, max error " << worst << "; degenerate 0.0, uniform 8.0";
  v.detail = d.str();
  return v;
}

Verdict tlsh_conformance() {
  Verdict v;
  const auto vectors = read_tsv(data_dir() / "tlsh_vectors.tsv");
  const auto distances = read_tsv(data_dir() / "tlsh_distances.tsv");
  v.expect(vectors.size() >= 30 && distances.size() >= 100, "test vector files are incomplete");
  std::size_t pairs = 0;
  for (auto isa : {simd::Isa::scalar, simd::Isa::avx2}) {
    if (!simd::isa_supported(isa)) continue;
    simd::force_isa(isa);
    const std::string tag = std::string(" [") + (isa == simd::Isa::avx2 ? "avx2" : "scalar") + "]";
    for (const auto& r : vectors) {
      const auto input = make_input(r[0], std::stoull(r[1]), std::stoull(r[2]), std::stoull(r[3]));
      const auto got = tlsh::digest_text(input);
      v.expect(got.value_or("TNULL") == r[4], "digest of " + r[0] + " len " + r[2] + tag);
    }
    for (const auto& r : distances) {
      const auto a = tlsh::Digest::parse(r[0]);
      const auto b = tlsh::Digest::parse(r[1]);
      v.expect(a && b, "unparseable vector digest");
      if (!a || !b) continue;
      v.expect(tlsh::distance(*a, *b) == std::stoi(r[2]), "distance " + r[0] + " " + r[1] + tag);
      v.expect(tlsh::distance(*a, *b, false) == std::stoi(r[3]), "length-free distance" + tag);
    }
    SplitMix64 rng(271828);
    for (int i = 0; i < 1000; ++i) {
      const auto a = random_digest(rng);
      const auto b = random_digest(rng);
      v.expect(tlsh::distance(a, a) == 0, "identity" + tag);
      v.expect(tlsh::distance(a, b) == tlsh::distance(b, a), "symmetry" + tag);
      ++pairs;
    }
  }
  simd::reset_isa();
  v.detail = std::to_string(vectors.size()) + " digest vectors, " + std::to_string(distances.size()) +
             " distance vectors, " + std::to_string(pairs) + " random pairs across ISAs";
  return v;
}

Verdict labeling_grid() {
  Verdict v;
  constexpr std::int64_t kDay = 86400;
  constexpr std::int64_t t0 = kDefaultCollectionStart + 3 * kDay;
  const auto graph = AvVendorGraph::parse("alpha\tA1,A2,A3,A4,A5,A6\nbeta\tB1,B2\ngamma\tG1\n");
  // Vendor pools ordered by the number of distinct clusters they realize.
  const std::vector<std::vector<std::string>> pools = {
      {},
      {"A1", "A2"},
      {"A1", "B1", "B2"},
      {"A1", "A2", "A3", "B1", "G1"},
      {"A1", "A2", "B1", "G1", "Solo1"},
      {"A1", "B1", "G1", "Solo1", "Solo2"},
      {"A1", "B1", "G1", "Solo1", "Solo2", "Solo3", "A4"},
  };
  auto vendors = [](std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("Init" + std::to_string(i));
    return out;
  };
  std::size_t cases = 0;
  std::map<std::string, std::size_t> by_label;
  for (std::size_t k = 0; k < pools.size(); ++k) {
    std::set<std::string> clusters;
    for (const auto& name : pools[k]) clusters.insert(name[0] == 'S' ? name : std::string(1, name[0]));
    for (std::int64_t age_day : {0, 1, 29, 30, 31, 89, 90}) {
      for (std::int64_t delta : {-1, 0, 1}) {
        const std::int64_t age = age_day * kDay + delta;
        if (age < 0) continue;
        for (std::size_t initial_detections : {0, 1, 7}) {
          const auto initial = make_report("h", t0, t0, vendors(initial_detections));
          const auto rescan = make_report("h", t0, t0 + age, pools[k]);
          const auto d = label_file(initial, rescan, graph);
          Label want = Label::indeterminate;
          if (clusters.size() >= 5) want = Label::malicious;
          else if (pools[k].empty()) want = age >= 30 * kDay ? Label::benign : Label::pending;
          const std::string where = std::to_string(clusters.size()) + " clusters, age " + std::to_string(age) +
                                    " s, initial " + std::to_string(initial_detections);
          v.expect(d.label == want, "label at " + where);
          v.expect(d.clusters == clusters.size(), "cluster count at " + where);
          v.expect(d.detections == pools[k].size(), "detection count at " + where);
          v.expect(is_challenge(initial, d.label) == (initial_detections == 0 && want == Label::malicious),
                   "challenge flag at " + where);
          ++by_label[std::string(label_name(want))];
          ++cases;
        }
      }
    }
  }
  v.expect(cases >= 200, "grid too small");
  v.detail = std::to_string(cases) + " report pairs (";
  for (auto it = by_label.begin(); it != by_label.end(); ++it) {
    v.detail += (it == by_label.begin() ? "" : ", ") + std::to_string(it->second) + " " + it->first;
  }
  v.detail += ")";
  return v;
}

std::string selection_bytes(const WeekSelection& s) {
  std::vector<ManifestEntry> rows;
  for (const auto& c : s.selected) rows.push_back({c.sha256, c.week, c.file_type, c.label == Label::malicious ? 1 : 0, split_for_week(c.week)});
  std::ostringstream out;
  write_selection_manifest(out, rows);
  return out.str();
}

Verdict selection() {
  Verdict v;
  const auto start = Clock::now();
  const auto config = SelectionConfig::standard(0x5eed);
  SplitMix64 rng(4242);
  std::array<std::array<std::size_t, 2>, 6> per_bucket{};
  for (std::size_t t = 0; t < 6; ++t) {
    for (std::size_t l = 0; l < 2; ++l) per_bucket[t][l] = config.thresholds[t][l] * 13 / 10;
  }
  // The two planted buckets hold exactly threshold + 1 candidates, so every candidate in them is examined.
  const std::size_t big_t = 0, dup_t = 1;
  per_bucket[big_t][0] = config.thresholds[big_t][0];
  per_bucket[dup_t][1] = config.thresholds[dup_t][1];
  auto pool = synthetic_week(9, per_bucket, rng);

  Candidate big{random_sha256(rng), 9, kAllFileTypes[big_t], Label::malicious, 101ull << 20, random_digest(rng), false};
  std::size_t original_index = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].file_type == kAllFileTypes[dup_t] && pool[i].label == Label::benign) original_index = i;
  }
  const Candidate original = pool[original_index];
  Candidate dup = original;
  dup.sha256 = random_sha256(rng);
  dup.tlsh = digest_at_distance(*original.tlsh, 30, rng);
  v.expect(tlsh::distance(*dup.tlsh, *original.tlsh) == 30, "planted digest is not at distance 30");
  pool.push_back(big);
  pool.push_back(dup);

  const auto first = select_week(pool, config);
  const auto bytes = selection_bytes(first);
  for (int run = 1; run < 5; ++run) v.expect(selection_bytes(select_week(pool, config)) == bytes, "run " + std::to_string(run + 1) + " differs");

  std::map<std::pair<int, int>, std::size_t> counts;
  bool big_selected = false;
  std::size_t pair_selected = 0;
  for (const auto& c : first.selected) {
    ++counts[{static_cast<int>(c.file_type), static_cast<int>(c.label)}];
    big_selected |= c.sha256 == big.sha256;
    pair_selected += c.sha256 == dup.sha256 || c.sha256 == original.sha256;
  }
  for (std::size_t t = 0; t < 6; ++t) {
    for (const Label l : {Label::malicious, Label::benign}) {
      const auto want = config.threshold(kAllFileTypes[t], l);
      const auto got = counts[{static_cast<int>(kAllFileTypes[t]), static_cast<int>(l)}];
      v.expect(got == want, std::string(file_type_name(kAllFileTypes[t])) + " " + std::string(label_name(l)) + ": " +
                                std::to_string(got) + " selected, threshold " + std::to_string(want));
    }
  }
  v.expect(!big_selected, "the 101 MB file was selected");
  v.expect(pair_selected == 1, "the distance-30 pair contributed " + std::to_string(pair_selected) + " files");
  std::size_t oversize = 0, near = 0;
  for (const auto& b : first.buckets) {
    oversize += b.oversize;
    near += b.near_duplicate;
  }
  v.expect(oversize >= 1 && near >= 1, "skip counters not incremented");
  const double t = seconds_since(start);
  v.expect(t < 30.0, "runtime " + fmt(t) + " s exceeds 30 s");
  v.detail = std::to_string(pool.size()) + " candidates, " + std::to_string(first.selected.size()) +
             " selected (weekly total " + std::to_string(config.weekly_total()) + "), 5 identical runs, " + fmt(t) + " s";
  return v;
}

Verdict challenge_exclusivity() {
  Verdict v;
  SplitMix64 rng(1357);
  std::array<std::array<std::size_t, 2>, 6> per_bucket{};
  for (auto& r : per_bucket) r = {40, 40};
  std::vector<Candidate> store;
  std::size_t planted = 0;
  for (int w : {0, 17, 51, 52, 58, 63}) {
    auto week = synthetic_week(w, per_bucket, rng);
    const std::size_t base_count = week.size();
    for (int k = 0; k < 25; ++k) {
      const auto& base = week[rng.below(base_count)];
      Candidate ch = base;
      ch.sha256 = random_sha256(rng);
      ch.label = Label::malicious;
      ch.challenge = true;
      ch.file_type = kAllFileTypes[rng.below(6)];
      ch.tlsh = digest_at_distance(*base.tlsh, static_cast<int>(rng.below(31)), rng);
      week.push_back(ch);
      // A neighbour of the challenge file that is not a neighbour of the base.
      Candidate near = base;
      near.sha256 = random_sha256(rng);
      near.challenge = false;
      near.tlsh = digest_at_distance(*ch.tlsh, static_cast<int>(rng.below(31)), rng);
      week.push_back(near);
      planted += 2;
    }
    store.insert(store.end(), week.begin(), week.end());
  }
  std::vector<Candidate> challenge, rest;
  for (const auto& c : store) (c.challenge ? challenge : rest).push_back(c);
  const auto kept = build_challenge_exclusion(challenge, rest);

  auto violations = [&](const std::vector<Candidate>& pool) {
    std::size_t n = 0;
    for (const auto& c : challenge) {
      for (const auto& r : pool) {
        if (c.week == r.week && c.tlsh && r.tlsh && tlsh::distance(*c.tlsh, *r.tlsh) <= 30) ++n;
      }
    }
    return n;
  };
  const std::size_t before = violations(rest);
  const std::size_t after = violations(kept);
  v.expect(before > 0, "the planted store has no near pairs to exclude");
  v.expect(after == 0, std::to_string(after) + " same-week pairs within distance 30 survive the exclusion");

  SelectionConfig config;
  config.seed = 99;
  for (auto& r : config.thresholds) r = {30, 30};
  const auto plan = plan_dataset(store, config);
  std::map<std::string, const Candidate*> by_hash;
  for (const auto& c : store) by_hash[c.sha256] = &c;
  std::size_t plan_pairs = 0, plan_violations = 0, challenge_rows = 0;
  for (const auto& a : plan.manifest) {
    if (a.split != Split::challenge) continue;
    ++challenge_rows;
    for (const auto& b : plan.manifest) {
      if (b.split == Split::challenge) continue;
      ++plan_pairs;
      if (a.sha256 == b.sha256) ++plan_violations;
      else if (a.week == b.week && tlsh::distance(*by_hash[a.sha256]->tlsh, *by_hash[b.sha256]->tlsh) <= 30) ++plan_violations;
    }
  }
  v.expect(challenge_rows == challenge.size(), "challenge split size");
  v.expect(plan_violations == 0, std::to_string(plan_violations) + " violating pairs in the planned dataset");
  v.detail = std::to_string(challenge.size()) + " challenge files vs " + std::to_string(rest.size()) + " candidates: " +
             std::to_string(before) + " near pairs before exclusion, " + std::to_string(after) + " after; " +
             std::to_string(plan_pairs) + " planned pairs scanned";
  return v;
}

Verdict round_trips() {
  Verdict v;
  SplitMix64 rng(1001);
  for (int i = 0; i < 1000; ++i) {
    const auto rec = random_record(rng);
    const auto line = serialize_record(rec);
    try {
      const auto back = parse_record(line);
      v.expect(back == rec, "record " + std::to_string(i) + " changed");
      v.expect(serialize_record(back) == line, "record " + std::to_string(i) + " reserialized differently");
    } catch (const RecordError& e) {
      v.expect(false, "record " + std::to_string(i) + ": " + e.what());
    }
  }
  const fs::path dir = fs::temp_directory_path() / ("ember_acceptance_" + std::to_string(rng.next()));
  fs::create_directories(dir);
  std::size_t values = 0;
  for (int i = 0; i < 1000; ++i) {
    Matrix m;
    m.rows = rng.below(12);
    m.cols = i % 10 == 0 ? kVectorWidth : i % 10 == 1 ? kAgnosticWidth : 1 + rng.below(64);
    m.values.resize(m.rows * m.cols);
    for (auto& x : m.values) {
      const auto bits = static_cast<std::uint32_t>(rng.next());
      std::memcpy(&x, &bits, sizeof x);
      if (std::isnan(x)) x = static_cast<float>(bits);
    }
    std::vector<std::int32_t> labels(m.rows);
    for (auto& l : labels) l = static_cast<std::int32_t>(rng.below(3)) - 1;
    const auto path = dir / ("m" + std::to_string(i) + ".bin");
    write_matrix(path, m, labels);
    const auto back = read_matrix(path, m.cols);
    const bool same = back.matrix.rows == m.rows && back.matrix.cols == m.cols &&
                      std::memcmp(back.matrix.values.data(), m.values.data(), m.values.size() * sizeof(float)) == 0;
    v.expect(same && back.labels == labels, "matrix " + std::to_string(i));
    values += m.values.size();
  }
  fs::remove_all(dir);
  v.detail = "1000 records, 1000 matrices (" + std::to_string(values) + " values) bit-exact";
  return v;
}

bool has_category(const std::vector<std::string>& warnings, std::string_view category) {
  const auto& cat = pe::WarningCatalog::default_v3();
  return std::any_of(warnings.begin(), warnings.end(),
                     [&](const std::string& w) { return cat.categories()[cat.categorize(w)].name == category; });
}

void check_graceful(Verdict& v, const std::vector<std::uint8_t>& bytes, std::string_view category, const std::string& name) {
  const auto ex = extract(bytes);
  v.expect(!ex.raw.pe && !ex.pe_failure.empty(), name + ": expected a graceful failure");
  if (!category.empty()) v.expect(has_category(ex.raw.pefilewarnings, category), name + ": no " + std::string(category) + " warning");
  v.expect(ex.raw.histogram == byte_histogram(bytes), name + ": histogram");
  v.expect(ex.raw.byteentropy == byte_entropy_histogram(bytes), name + ": byte entropy");
  v.expect(ex.raw.general.size == bytes.size(), name + ": general.size");
  v.expect(validate_raw(ex.raw).empty(), name + ": invalid document");
}

Verdict pe_parsing(double fuzz_seconds) {
  Verdict v;
  SplitMix64 rng(2024);
  for (int i = 0; i < 200; ++i) {
    const PeSpec spec = random_spec(rng);
    PeLayout layout;
    const auto image = build_pe(spec, &layout);
    for (const auto& m : pe_mismatches(spec, image, layout)) v.expect(false, "image " + std::to_string(i) + ": " + m);
  }
  {
    // The oracle must notice a header it did not write.
    SplitMix64 r(7);
    PeSpec spec = random_spec(r);
    PeLayout layout;
    auto image = build_pe(spec, &layout);
    spec.timestamp ^= 1;
    v.expect(!pe_mismatches(spec, image, layout).empty(), "oracle accepted a wrong timestamp");
  }

  std::size_t malformed = 0;
  SplitMix64 mrng(55);
  for (int i = 0; i < 40; ++i) {
    PeLayout L;
    const auto good = build_pe(random_spec(mrng), &L);
    auto with = [&](std::size_t at, std::uint8_t value) {
      auto b = good;
      b[at] = value;
      return b;
    };
    auto ne = good;
    ne[L.e_lfanew] = 'N';
    ne[L.e_lfanew + 1] = 'E';
    check_graceful(v, std::vector<std::uint8_t>(good.begin(), good.begin() + 40), "dos_header_truncated", "truncated DOS header");
    check_graceful(v, with(63, 0x7F), "lfanew_invalid", "e_lfanew beyond the file");
    check_graceful(v, ne, "nt_signature_ne", "NE signature");
    check_graceful(v, with(L.e_lfanew + 3, 1), "nt_signature_invalid", "bad PE signature");
    check_graceful(v, std::vector<std::uint8_t>(good.begin(), good.begin() + L.e_lfanew + 24 + 40), "optional_header_truncated",
                   "truncated optional header");
    check_graceful(v, with(L.e_lfanew + 24, 0x77), "optional_header_magic", "bad optional header magic");
    malformed += 6;
  }

  // Mutation fuzzing on every core until the time budget is spent.
  std::atomic<std::size_t> iterations{0}, parsed{0}, invalid{0};
  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(fuzz_seconds));
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      SplitMix64 r(0xF022 + w);
      do {
        auto image = build_pe(random_spec(r));
        const std::size_t flips = 1 + r.below(24);
        for (std::size_t k = 0; k < flips; ++k) {
          const std::size_t span = r.below(2) ? std::min<std::size_t>(image.size(), 1024) : image.size();
          image[r.below(span)] = static_cast<std::uint8_t>(r.next());
        }
        if (r.below(4) == 0) image.resize(r.below(image.size() + 1));
        const auto ex = extract(image);
        parsed += ex.raw.pe.has_value();
        if (!validate_raw(ex.raw).empty() || parse_raw(serialize_raw(ex.raw)) != ex.raw) ++invalid;
        ++iterations;
      } while (Clock::now() < deadline);
    });
  }
  for (auto& t : pool) t.join();
  v.expect(invalid == 0, std::to_string(invalid.load()) + " fuzzed images produced invalid documents");
  v.detail = "200 images field-exact, " + std::to_string(malformed) + " malformed variants graceful, fuzz " +
             fmt(fuzz_seconds, 0) + " s x " + std::to_string(workers) + " threads: " + std::to_string(iterations.load()) +
             " images, " + std::to_string(parsed.load()) + " still parsed, no crash";
  if (fuzz_seconds < 600) v.detail += " (short run; pass --fuzz-seconds 600 for the full budget)";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EMBER acceptance suite"};
  double fuzz_seconds = 600;
  std::string only;
  app.add_option("--fuzz-seconds", fuzz_seconds, "PE mutation fuzzing budget")->capture_default_str()->check(CLI::NonNegativeNumber);
  app.add_option("--only", only, "Run a single criterion by name");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"vector_layout", vector_layout},
      {"section_ratios", section_ratios},
      {"entropy_oracle", entropy},
      {"tlsh_conformance", tlsh_conformance},
      {"labeling_grid", labeling_grid},
      {"selection", selection},
      {"challenge_exclusivity", challenge_exclusivity},
      {"round_trips", round_trips},
      {"pe_parsing", [&] { return pe_parsing(fuzz_seconds); }},
  };
  int failed = 0, ran = 0;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && only != name) continue;
    ++ran;
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.expect(false, std::string("exception: ") + e.what());
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail;
    for (const auto& f : v.failures) std::cout << "\n    " << f;
    std::cout << std::endl;
  }
  if (ran == 0) {
    std::cerr << "unknown criterion: " << only << '\n';
    return 2;
  }
  std::cout << (ran - failed) << "/" << ran << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}

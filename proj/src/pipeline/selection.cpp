#include "ember/pipeline/selection.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

#include "ember/tlsh_index.hpp"

namespace ember::pipeline {
namespace {

std::size_t type_index(FileType t) { return static_cast<std::size_t>(t); }
std::size_t label_index(Label l) {
  if (l == Label::malicious) return 0;
  if (l == Label::benign) return 1;
  throw std::invalid_argument("only benign and malicious files have thresholds");
}

std::uint64_t mix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Unbiased draw in [0, n); std::uniform_int_distribution is not portable across libraries.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = ~0ull - (~0ull % n);
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % n;
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[draw_below(rng, i)]);
}

bool is_selectable(Label l) { return l == Label::malicious || l == Label::benign; }

}  // namespace

std::size_t SelectionConfig::threshold(FileType t, Label l) const { return thresholds[type_index(t)][label_index(l)]; }
std::size_t& SelectionConfig::threshold(FileType t, Label l) { return thresholds[type_index(t)][label_index(l)]; }

std::size_t SelectionConfig::weekly_total() const {
  std::size_t s = 0;
  for (const auto& row : thresholds) s += row[0] + row[1];
  return s;
}

SelectionConfig SelectionConfig::standard(std::uint64_t seed) {
  SelectionConfig c;
  c.seed = seed;
  const std::pair<FileType, std::size_t> rows[] = {{FileType::win32, 15000}, {FileType::win64, 5000},
                                                   {FileType::dotnet, 2500}, {FileType::apk, 2000},
                                                   {FileType::elf, 250},     {FileType::pdf, 500}};
  for (const auto& [t, n] : rows) c.thresholds[type_index(t)] = {n, n};
  return c;
}

WeekSelection select_week(const std::vector<Candidate>& candidates, const SelectionConfig& config) {
  WeekSelection out;
  if (candidates.empty()) return out;
  out.week = candidates.front().week;

  struct Bucket {
    BucketReport report;
    std::vector<const Candidate*> order;
    std::size_t next = 0;
  };
  std::vector<Bucket> buckets;
  for (FileType t : kAllFileTypes) {
    for (Label l : {Label::malicious, Label::benign}) {
      Bucket b;
      b.report.file_type = t;
      b.report.label = l;
      b.report.threshold = config.threshold(t, l);
      buckets.push_back(std::move(b));
    }
  }

  std::vector<const Candidate*> sorted;
  sorted.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (c.week != out.week) throw std::invalid_argument("select_week: candidates span more than one week");
    sorted.push_back(&c);
  }
  std::sort(sorted.begin(), sorted.end(), [](const Candidate* a, const Candidate* b) {
    if (a->sha256 != b->sha256) return a->sha256 < b->sha256;
    return std::tie(a->size, a->file_type, a->label) < std::tie(b->size, b->file_type, b->label);
  });
  const std::string* prev = nullptr;
  for (const Candidate* c : sorted) {
    if (!is_selectable(c->label) || (prev && *prev == c->sha256)) {
      ++out.discarded;
      continue;
    }
    prev = &c->sha256;
    buckets[type_index(c->file_type) * 2 + label_index(c->label)].order.push_back(c);
  }

  for (std::size_t i = 0; i < buckets.size(); ++i) {
    auto& b = buckets[i];
    b.report.available = b.order.size();
    std::mt19937_64 rng(mix(config.seed ^ mix(static_cast<std::uint64_t>(out.week) * 64 + i)));
    shuffle(b.order, rng);
  }

  tlsh::NearDuplicateIndex index;
  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (auto& b : buckets) {
      if (b.report.selected >= b.report.threshold || b.next >= b.order.size()) continue;
      progressed = true;
      const Candidate& c = *b.order[b.next++];
      if (c.size > config.max_file_size) {
        ++b.report.oversize;
        continue;
      }
      if (c.tlsh) {
        if (index.any_within(*c.tlsh, config.dedup_threshold)) {
          ++b.report.near_duplicate;
          continue;
        }
        index.insert(*c.tlsh);
      } else {
        ++b.report.without_digest;
      }
      ++b.report.selected;
      out.selected.push_back(c);
    }
  }
  for (auto& b : buckets) out.buckets.push_back(b.report);
  return out;
}

std::vector<WeekSelection> select_weeks(const std::vector<Candidate>& candidates, const SelectionConfig& config) {
  std::map<int, std::vector<Candidate>> by_week;
  for (const auto& c : candidates) by_week[c.week].push_back(c);
  std::vector<WeekSelection> out;
  for (const auto& [week, list] : by_week) out.push_back(select_week(list, config));
  return out;
}

std::vector<Candidate> build_challenge_exclusion(const std::vector<Candidate>& challenge,
                                                 const std::vector<Candidate>& pool, int threshold) {
  std::unordered_set<std::string> challenge_hashes;
  std::map<int, tlsh::NearDuplicateIndex> by_week;
  for (const auto& c : challenge) {
    challenge_hashes.insert(c.sha256);
    if (c.tlsh) by_week[c.week].insert(*c.tlsh);
  }
  std::vector<Candidate> kept;
  kept.reserve(pool.size());
  for (const auto& p : pool) {
    if (challenge_hashes.count(p.sha256)) continue;
    if (p.tlsh) {
      const auto it = by_week.find(p.week);
      if (it != by_week.end() && it->second.any_within(*p.tlsh, threshold)) continue;
    }
    kept.push_back(p);
  }
  return kept;
}

DatasetPlan plan_dataset(const std::vector<Candidate>& candidates, const SelectionConfig& config) {
  DatasetPlan plan;
  std::vector<Candidate> challenge, pool;
  for (const auto& c : candidates) {
    if (c.challenge && c.label == Label::malicious) {
      if (c.size <= config.max_file_size) challenge.push_back(c);
    } else {
      pool.push_back(c);
    }
  }
  std::sort(challenge.begin(), challenge.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.week, a.sha256) < std::tie(b.week, b.sha256);
  });
  challenge.erase(std::unique(challenge.begin(), challenge.end(),
                              [](const Candidate& a, const Candidate& b) { return a.sha256 == b.sha256; }),
                  challenge.end());

  auto filtered = build_challenge_exclusion(challenge, pool, config.dedup_threshold);
  plan.excluded_by_challenge = pool.size() - filtered.size();
  for (const auto& c : challenge) plan.manifest.push_back({c.sha256, c.week, c.file_type, 1, Split::challenge});
  plan.weeks = select_weeks(filtered, config);
  for (const auto& w : plan.weeks) {
    for (const auto& c : w.selected) {
      plan.manifest.push_back({c.sha256, c.week, c.file_type, c.label == Label::malicious ? 1 : 0, split_for_week(c.week)});
    }
  }
  return plan;
}

}  // namespace ember::pipeline

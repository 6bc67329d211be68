#include "ember/pattern_set.hpp"

#include <boost/regex.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "text_util.hpp"

namespace ember {
namespace {

constexpr std::string_view kDefaultText =
#include "patterns_v3.inc"
    ;

}  // namespace

struct PatternSet::Compiled {
  // Parallel to patterns_; regex slots are empty for literals.
  std::vector<std::string> lowered_literals;
  std::vector<boost::regex> regexes;
  bool any_literal = false;
};

PatternSet PatternSet::parse(std::string_view text) {
  PatternSet set;
  set.version_ = "unversioned";
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, '\t');
    if (fields.size() == 2 && fields[0] == "version") {
      set.version_ = std::string(fields[1]);
      continue;
    }
    if (fields.size() != 3) {
      throw PatternSetError("pattern file line " + std::to_string(line_no) + ": expected name<TAB>kind<TAB>pattern");
    }
    Pattern p;
    p.name = std::string(fields[0]);
    if (p.name.empty()) throw PatternSetError("pattern file line " + std::to_string(line_no) + ": empty name");
    if (!seen.insert(p.name).second) throw PatternSetError("duplicate pattern name: " + p.name);
    if (fields[1] == "literal") {
      p.kind = PatternKind::literal;
    } else if (fields[1] == "regex") {
      p.kind = PatternKind::regex;
    } else {
      throw PatternSetError("pattern file line " + std::to_string(line_no) + ": unknown kind '" +
                            std::string(fields[1]) + "'");
    }
    p.pattern = std::string(fields[2]);
    if (p.pattern.empty()) throw PatternSetError("empty pattern for " + p.name);
    set.patterns_.push_back(std::move(p));
  }

  auto compiled = std::make_shared<Compiled>();
  compiled->lowered_literals.resize(set.patterns_.size());
  compiled->regexes.resize(set.patterns_.size());
  for (std::size_t i = 0; i < set.patterns_.size(); ++i) {
    const Pattern& p = set.patterns_[i];
    if (p.kind == PatternKind::literal) {
      compiled->lowered_literals[i] = ascii_lower(p.pattern);
      compiled->any_literal = true;
    } else {
      try {
        compiled->regexes[i] = boost::regex(p.pattern, boost::regex::perl | boost::regex::icase);
      } catch (const boost::regex_error& e) {
        throw PatternSetError("invalid regex for " + p.name + ": " + e.what());
      }
    }
  }
  set.compiled_ = std::move(compiled);
  return set;
}

PatternSet PatternSet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PatternSetError("cannot open pattern file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const PatternSet& PatternSet::default_v3() {
  static const PatternSet set = parse(kDefaultText);
  return set;
}

std::string_view PatternSet::default_v3_text() { return kDefaultText; }

std::vector<std::uint64_t> PatternSet::count(std::span<const std::uint8_t> content) const {
  std::vector<std::uint64_t> counts(patterns_.size(), 0);
  if (content.empty()) return counts;
  const char* begin = reinterpret_cast<const char*>(content.data());
  const char* end = begin + content.size();

  std::string lowered;
  if (compiled_->any_literal) lowered = ascii_lower(std::string_view(begin, content.size()));

  for (std::size_t i = 0; i < patterns_.size(); ++i) {
    if (patterns_[i].kind == PatternKind::literal) {
      const std::string& needle = compiled_->lowered_literals[i];
      std::uint64_t n = 0;
      for (std::size_t pos = lowered.find(needle); pos != std::string::npos;
           pos = lowered.find(needle, pos + needle.size())) {
        ++n;
      }
      counts[i] = n;
      continue;
    }
    std::uint64_t n = 0;
    try {
      boost::cregex_iterator it(begin, end, compiled_->regexes[i]);
      for (const boost::cregex_iterator stop; it != stop; ++it) ++n;
    } catch (const std::runtime_error&) {
      // Complexity limit hit; keep the matches found so far.
    }
    counts[i] = n;
  }
  return counts;
}

}  // namespace ember

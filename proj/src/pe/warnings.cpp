#include "ember/pe/warnings.hpp"

#include <unordered_set>

#include "text_util.hpp"

namespace ember::pe {
namespace {

constexpr std::string_view kDefaultText =
#include "warnings_v3.inc"
    ;

}  // namespace

WarningCatalog WarningCatalog::parse(std::string_view text) {
  WarningCatalog cat;
  cat.version_ = "unversioned";
  std::unordered_set<std::string> names;
  bool have_other = false;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 2) {
      throw WarningCatalogError("warning catalog line " + std::to_string(line_no) + ": expected name<TAB>prefix");
    }
    if (fields[0] == "version") {
      cat.version_ = std::string(fields[1]);
      continue;
    }
    Category c{std::string(fields[0]), std::string(fields[1])};
    if (c.name.empty() || !names.insert(c.name).second) {
      throw WarningCatalogError("warning catalog line " + std::to_string(line_no) + ": empty or duplicate name");
    }
    if (c.name == "other") {
      if (!c.prefix.empty()) throw WarningCatalogError("the other category must have an empty prefix");
      have_other = true;
      cat.other_ = cat.categories_.size();
    } else if (c.prefix.empty()) {
      throw WarningCatalogError("category " + c.name + " has an empty prefix");
    }
    cat.categories_.push_back(std::move(c));
  }
  if (!have_other) throw WarningCatalogError("warning catalog lacks the other category");
  if (cat.categories_.size() != kWarningCategories) {
    throw WarningCatalogError("warning catalog must define exactly " + std::to_string(kWarningCategories) +
                              " categories, found " + std::to_string(cat.categories_.size()));
  }
  return cat;
}

WarningCatalog WarningCatalog::load(const std::filesystem::path& path) {
  try {
    return parse(read_text_file(path));
  } catch (const WarningCatalogError&) {
    throw;
  } catch (const std::exception& e) {
    throw WarningCatalogError(e.what());
  }
}

const WarningCatalog& WarningCatalog::default_v3() {
  static const WarningCatalog cat = parse(kDefaultText);
  return cat;
}

std::string_view WarningCatalog::default_v3_text() { return kDefaultText; }

std::size_t WarningCatalog::categorize(std::string_view warning) const {
  std::size_t best = other_;
  std::size_t best_len = 0;
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    const auto& p = categories_[i].prefix;
    if (p.size() > best_len && warning.substr(0, p.size()) == p) {
      best = i;
      best_len = p.size();
    }
  }
  return best;
}

std::vector<std::uint64_t> WarningCatalog::canonicalize(std::span<const std::string> warnings) const {
  std::vector<std::uint64_t> counts(categories_.size(), 0);
  for (const auto& w : warnings) ++counts[categorize(w)];
  return counts;
}

}  // namespace ember::pe

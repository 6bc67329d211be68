#include "ember/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <unordered_set>

#include "ember/hashing.hpp"
#include "ember/pe/warnings.hpp"
#include "text_util.hpp"

namespace ember {
namespace {

constexpr std::string_view kDefaultText =
#include "layout_v3.inc"
    ;

struct KnownGroup {
  std::string_view name;
  std::size_t width;  // 0 = any positive width
  bool agnostic;
};

constexpr KnownGroup kKnownGroups[] = {
    {"histogram", 256, true},
    {"byteentropy", 256, true},
    {"strings.stats", 5, true},
    {"strings.printabledist", 96, true},
    {"strings.patterns", 0, true},
    {"general", 7, true},
    {"general.pe", 4, false},
    {"header.dos", 17, false},
    {"header.coff", 5, false},
    {"header.coff.machine", 0, false},
    {"header.coff.characteristics", 0, false},
    {"header.optional", 25, false},
    {"header.optional.subsystem", 0, false},
    {"header.optional.dll_characteristics", 0, false},
    {"section.summary", 8, false},
    {"section.stats", 9, false},
    {"section.size", 0, false},
    {"section.entropy", 0, false},
    {"section.vsize", 0, false},
    {"section.entry_name", 0, false},
    {"section.entry_props", 0, false},
    {"imports.libraries", 0, false},
    {"imports.functions", 0, false},
    {"exports", 0, false},
    {"datadirectories.size", 0, false},
    {"datadirectories.va", 0, false},
    {"richheader", 0, false},
    {"authenticode", 8, false},
    {"pe.counts", 6, false},
    {"warnings", pe::kWarningCategories, false},
};

float clip(double v) {
  if (v > kScalarClip) v = kScalarClip;
  if (v < -kScalarClip) v = -kScalarClip;
  return static_cast<float>(v);
}

class Writer {
 public:
  Writer(const FeatureLayout& layout, std::span<float> out) : layout_(layout), out_(out) {}

  std::span<float> slot(std::string_view name) {
    const auto& g = layout_.group(name);
    return out_.subspan(g.offset, g.width);
  }

  void scalars(std::string_view name, std::initializer_list<double> values) {
    auto s = slot(name);
    std::size_t i = 0;
    for (double v : values) s[i++] = clip(v);
  }

  void normalized(std::string_view name, std::span<const std::uint64_t> counts) {
    auto s = slot(name);
    const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
    if (total == 0) return;
    for (std::size_t i = 0; i < counts.size(); ++i) s[i] = static_cast<float>(static_cast<double>(counts[i]) / total);
  }

  void hashed(std::string_view name, const std::vector<HashedItem>& items) { hash_embed(items, slot(name)); }

 private:
  const FeatureLayout& layout_;
  std::span<float> out_;
};

std::vector<HashedItem> keys(const std::vector<std::string>& names) {
  std::vector<HashedItem> items;
  items.reserve(names.size());
  for (const auto& n : names) items.push_back({n, 1.0});
  return items;
}

struct MinMeanMax {
  double lo = 0, sum = 0, hi = 0;
  std::size_t n = 0;
  void add(double v) {
    lo = n == 0 ? v : std::min(lo, v);
    hi = n == 0 ? v : std::max(hi, v);
    sum += v;
    ++n;
  }
  double mean() const { return n == 0 ? 0.0 : sum / static_cast<double>(n); }
};

void write_pe(const RawFeatures& raw, Writer& w) {
  const PeFeatures& pe = *raw.pe;
  if (raw.general.pe) {
    const auto& g = *raw.general.pe;
    w.scalars("general.pe", {double(g.vsize), double(g.has_relocs), double(g.has_dynamic_relocs), double(g.symbols)});
  }

  const auto& d = pe.header.dos;
  w.scalars("header.dos", {double(d.e_magic), double(d.e_cblp), double(d.e_cp), double(d.e_crlc), double(d.e_cparhdr),
                           double(d.e_minalloc), double(d.e_maxalloc), double(d.e_ss), double(d.e_sp), double(d.e_csum),
                           double(d.e_ip), double(d.e_cs), double(d.e_lfarlc), double(d.e_ovno), double(d.e_oemid),
                           double(d.e_oeminfo), double(d.e_lfanew)});

  const auto& c = pe.header.coff;
  w.scalars("header.coff", {double(c.timestamp), double(c.number_of_sections), double(c.number_of_symbols),
                            double(c.sizeof_optional_header), double(c.pointer_to_symbol_table)});
  w.hashed("header.coff.machine", {{c.machine, 1.0}});
  w.hashed("header.coff.characteristics", keys(c.characteristics));

  const auto& o = pe.header.optional;
  w.scalars("header.optional",
            {double(o.magic), double(o.major_image_version), double(o.minor_image_version),
             double(o.major_linker_version), double(o.minor_linker_version), double(o.major_operating_system_version),
             double(o.minor_operating_system_version), double(o.major_subsystem_version),
             double(o.minor_subsystem_version), double(o.sizeof_code), double(o.sizeof_headers), double(o.sizeof_image),
             double(o.sizeof_initialized_data), double(o.sizeof_uninitialized_data), double(o.sizeof_stack_reserve),
             double(o.sizeof_stack_commit), double(o.sizeof_heap_reserve), double(o.sizeof_heap_commit),
             double(o.address_of_entrypoint), double(o.base_of_code), double(o.base_of_data), double(o.image_base),
             double(o.section_alignment), double(o.checksum), double(o.number_of_rvas_and_sizes)});
  w.hashed("header.optional.subsystem", {{o.subsystem, 1.0}});
  w.hashed("header.optional.dll_characteristics", keys(o.dll_characteristics));

  const auto& sec = pe.section;
  std::size_t zero_size = 0, empty_name = 0, rx = 0, writable = 0;
  MinMeanMax ent, sr, vr;
  std::vector<HashedItem> sizes, entropies, vsizes;
  const std::vector<std::string>* entry_props = nullptr;
  for (const auto& s : sec.sections) {
    zero_size += s.size == 0;
    empty_name += s.name.empty();
    const bool r = std::find(s.props.begin(), s.props.end(), "MEM_READ") != s.props.end();
    const bool x = std::find(s.props.begin(), s.props.end(), "MEM_EXECUTE") != s.props.end();
    rx += r && x;
    writable += std::find(s.props.begin(), s.props.end(), "MEM_WRITE") != s.props.end();
    ent.add(s.entropy);
    sr.add(s.size_ratio);
    vr.add(s.vsize_ratio);
    sizes.push_back({s.name, std::log1p(static_cast<double>(s.size))});
    entropies.push_back({s.name, s.entropy});
    vsizes.push_back({s.name, std::log1p(static_cast<double>(s.vsize))});
    if (!entry_props && !sec.entry.empty() && s.name == sec.entry) entry_props = &s.props;
  }
  w.scalars("section.summary", {double(sec.sections.size()), double(zero_size), double(empty_name), double(rx),
                                double(writable), double(sec.overlay.size), sec.overlay.size_ratio,
                                sec.overlay.entropy});
  w.scalars("section.stats", {ent.lo, ent.mean(), ent.hi, sr.lo, sr.mean(), sr.hi, vr.lo, vr.mean(), vr.hi});
  w.hashed("section.size", sizes);
  w.hashed("section.entropy", entropies);
  w.hashed("section.vsize", vsizes);
  if (!sec.entry.empty()) w.hashed("section.entry_name", {{sec.entry, 1.0}});
  if (entry_props) w.hashed("section.entry_props", keys(*entry_props));

  std::vector<HashedItem> libs, funcs;
  std::size_t nfuncs = 0;
  for (const auto& [lib, symbols] : pe.imports) {
    const std::string lower = ascii_lower(lib);
    libs.push_back({lower, 1.0});
    for (const auto& sym : symbols) funcs.push_back({lower + ":" + sym, 1.0});
    nfuncs += symbols.size();
  }
  w.hashed("imports.libraries", libs);
  w.hashed("imports.functions", funcs);
  w.hashed("exports", keys(pe.exports));

  std::vector<HashedItem> dsize, dva;
  for (const auto& e : pe.datadirectories) {
    dsize.push_back({e.name, std::log1p(static_cast<double>(e.size))});
    dva.push_back({e.name, std::log1p(static_cast<double>(e.virtual_address))});
  }
  w.hashed("datadirectories.size", dsize);
  w.hashed("datadirectories.va", dva);

  std::vector<HashedItem> rich;
  for (std::size_t i = 0; i + 1 < pe.richheader.size(); i += 2)
    rich.push_back({std::to_string(pe.richheader[i]), std::log1p(static_cast<double>(pe.richheader[i + 1]))});
  w.hashed("richheader", rich);

  const auto& a = pe.authenticode;
  w.scalars("authenticode", {double(a.num_certs), double(a.self_signed), double(a.empty_program_name),
                             double(a.no_countersigner), double(a.parse_error), double(a.chain_max_depth),
                             double(a.latest_signing_time), double(a.signing_time_diff)});

  w.scalars("pe.counts", {double(pe.imports.size()), double(nfuncs), double(pe.exports.size()),
                          double(pe.richheader.size() / 2), double(raw.pefilewarnings.size()),
                          double(pe.datadirectories.size())});

  const auto counts = pe::WarningCatalog::default_v3().canonicalize(raw.pefilewarnings);
  auto slot = w.slot("warnings");
  for (std::size_t i = 0; i < counts.size(); ++i) slot[i] = clip(static_cast<double>(counts[i]));
}

}  // namespace

FeatureLayout FeatureLayout::parse(std::string_view text) {
  FeatureLayout layout;
  layout.version_ = "unversioned";
  std::unordered_set<std::string> seen;
  bool in_pe = false;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto f = split(line, '\t');
    const std::string where = "layout line " + std::to_string(line_no) + ": ";
    if (f.size() == 2 && f[0] == "version") {
      layout.version_ = std::string(f[1]);
      continue;
    }
    if (f.size() != 3) throw LayoutError(where + "expected name<TAB>width<TAB>region");
    LayoutGroup g;
    g.name = std::string(f[0]);
    try {
      std::size_t used = 0;
      g.width = std::stoul(std::string(f[1]), &used);
      if (used != f[1].size()) throw std::invalid_argument("width");
    } catch (const std::exception&) {
      throw LayoutError(where + "bad width");
    }
    if (f[2] == "agnostic") {
      g.agnostic = true;
    } else if (f[2] != "pe") {
      throw LayoutError(where + "region must be agnostic or pe");
    }
    if (g.agnostic && in_pe) throw LayoutError(where + "agnostic groups must precede pe groups");
    in_pe |= !g.agnostic;

    const auto known = std::find_if(std::begin(kKnownGroups), std::end(kKnownGroups),
                                    [&](const KnownGroup& k) { return k.name == g.name; });
    if (known == std::end(kKnownGroups)) throw LayoutError(where + "unknown group " + g.name);
    if (!seen.insert(g.name).second) throw LayoutError(where + "duplicate group " + g.name);
    if (known->agnostic != g.agnostic) throw LayoutError(where + "group " + g.name + " is in the wrong region");
    if (g.width == 0 || (known->width != 0 && g.width != known->width))
      throw LayoutError(where + "group " + g.name + " has the wrong width");

    g.offset = layout.total_;
    layout.total_ += g.width;
    if (g.agnostic) layout.agnostic_ += g.width;
    layout.groups_.push_back(std::move(g));
  }
  for (const auto& k : kKnownGroups) {
    if (!seen.count(std::string(k.name))) throw LayoutError("layout lacks group " + std::string(k.name));
  }
  if (layout.total_ != kVectorWidth)
    throw LayoutError("layout width is " + std::to_string(layout.total_) + ", expected " + std::to_string(kVectorWidth));
  if (layout.agnostic_ != kAgnosticWidth)
    throw LayoutError("agnostic prefix is " + std::to_string(layout.agnostic_) + ", expected " +
                      std::to_string(kAgnosticWidth));
  return layout;
}

FeatureLayout FeatureLayout::load(const std::filesystem::path& path) {
  try {
    return parse(read_text_file(path));
  } catch (const LayoutError&) {
    throw;
  } catch (const std::exception& e) {
    throw LayoutError(e.what());
  }
}

const FeatureLayout& FeatureLayout::default_v3() {
  static const FeatureLayout layout = parse(kDefaultText);
  return layout;
}

std::string_view FeatureLayout::default_v3_text() { return kDefaultText; }

const LayoutGroup& FeatureLayout::group(std::string_view name) const {
  for (const auto& g : groups_) {
    if (g.name == name) return g;
  }
  throw LayoutError("no layout group named " + std::string(name));
}

void vectorize_into(const RawFeatures& raw, std::span<float> out, const FeatureLayout& layout) {
  if (out.size() != layout.total_width()) throw std::invalid_argument("vectorize: output width mismatch");
  std::fill(out.begin(), out.end(), 0.0f);
  Writer w(layout, out);

  w.normalized("histogram", raw.histogram);
  w.normalized("byteentropy", raw.byteentropy);

  const auto& s = raw.strings;
  const double size = static_cast<double>(raw.general.size);
  w.scalars("strings.stats", {double(s.numstrings), s.avlength, double(s.printables), s.entropy,
                              size == 0 ? 0.0 : static_cast<double>(s.printables) / size});
  w.normalized("strings.printabledist", s.printabledist);
  auto patterns = w.slot("strings.patterns");
  if (s.string_counts.size() != patterns.size())
    throw std::invalid_argument("vectorize: document has " + std::to_string(s.string_counts.size()) +
                                " pattern counts, layout expects " + std::to_string(patterns.size()));
  for (std::size_t i = 0; i < patterns.size(); ++i) patterns[i] = clip(static_cast<double>(s.string_counts[i].second));

  const auto& g = raw.general;
  w.scalars("general", {size, std::log1p(size), g.entropy, double(g.magic4[0]), double(g.magic4[1]),
                        double(g.magic4[2]), double(g.magic4[3])});

  if (raw.pe) write_pe(raw, w);
}

std::vector<float> vectorize(const RawFeatures& raw, const FeatureLayout& layout) {
  std::vector<float> out(layout.total_width(), 0.0f);
  vectorize_into(raw, out, layout);
  return out;
}

std::vector<float> truncate_agnostic(std::span<const float> v, const FeatureLayout& layout) {
  if (v.size() != layout.total_width()) throw std::invalid_argument("truncate_agnostic: input width mismatch");
  return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(layout.agnostic_width())};
}

}  // namespace ember

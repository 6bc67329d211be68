#include "ember/pipeline/vendor_graph.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace ember::pipeline {
namespace {

constexpr std::string_view kVendorGraphText =
#include "vendor_graph.inc"
    ;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

AvVendorGraph AvVendorGraph::parse(std::string_view text) {
  AvVendorGraph g;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw VendorGraphError("line " + std::to_string(line_no) + ": expected cluster<TAB>vendors");
    const std::string cluster(trim(line.substr(0, tab)));
    if (cluster.empty() || cluster.starts_with("vendor:"))
      throw VendorGraphError("line " + std::to_string(line_no) + ": invalid cluster name");
    if (g.members_.count(cluster)) throw VendorGraphError("line " + std::to_string(line_no) + ": duplicate cluster " + cluster);
    auto& members = g.members_[cluster];
    std::string_view rest = line.substr(tab + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto name = trim(rest.substr(0, comma));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      if (name.empty()) continue;
      const auto key = lower(name);
      const auto [it, inserted] = g.cluster_by_vendor_.emplace(key, cluster);
      if (!inserted)
        throw VendorGraphError("line " + std::to_string(line_no) + ": vendor " + std::string(name) +
                               " already belongs to cluster " + it->second);
      members.emplace_back(name);
    }
    if (members.empty()) throw VendorGraphError("line " + std::to_string(line_no) + ": cluster has no vendors");
  }
  return g;
}

AvVendorGraph AvVendorGraph::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw VendorGraphError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string_view AvVendorGraph::default_text() { return kVendorGraphText; }

const AvVendorGraph& AvVendorGraph::default_graph() {
  static const AvVendorGraph g = parse(default_text());
  return g;
}

std::string AvVendorGraph::cluster_of(std::string_view vendor) const {
  const auto key = lower(trim(vendor));
  const auto it = cluster_by_vendor_.find(key);
  return it == cluster_by_vendor_.end() ? "vendor:" + key : it->second;
}

std::vector<std::string> AvVendorGraph::cluster_names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : members_) out.push_back(name);
  return out;
}

std::vector<std::string> AvVendorGraph::members(std::string_view cluster) const {
  const auto it = members_.find(std::string(cluster));
  return it == members_.end() ? std::vector<std::string>{} : it->second;
}

}  // namespace ember::pipeline

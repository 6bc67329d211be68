#include "cli_common.hpp"

#include <atomic>
#include <fstream>
#include <iostream>
#include <set>
#include <stdexcept>

namespace ember::cli {

namespace fs = std::filesystem;

int report(const std::string& command, const std::vector<Outcome>& outcomes, const nlohmann::ordered_json& extra,
           bool list_all, std::size_t unlisted_successes) {
  nlohmann::ordered_json j;
  std::size_t failed = 0;
  nlohmann::ordered_json errors = nlohmann::ordered_json::array();
  nlohmann::ordered_json items = nlohmann::ordered_json::array();
  for (const auto& o : outcomes) {
    nlohmann::ordered_json e = {{"item", o.item}};
    if (!o.error.empty()) {
      ++failed;
      e["error"] = o.error;
    }
    for (const auto& [k, v] : o.detail.items()) e[k] = v;
    if (!o.error.empty()) errors.push_back(e);
    if (list_all) items.push_back(std::move(e));
  }
  j["command"] = command;
  j["ok"] = failed == 0;
  j["processed"] = outcomes.size() + unlisted_successes;
  j["failed"] = failed;
  j["errors"] = std::move(errors);
  if (list_all) j["items"] = std::move(items);
  for (const auto& [k, v] : extra.items()) j[k] = v;
  std::cerr << j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) << '\n';
  return failed == 0 ? 0 : 1;
}

int fail(const std::string& command, const std::string& message) {
  nlohmann::ordered_json j = {{"command", command}, {"ok", false}, {"error", message}};
  std::cerr << j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) << '\n';
  return 2;
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs, std::vector<Outcome>& missing) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(p, ec)) {
        if (e.is_regular_file()) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p, ec)) {
      out.push_back(p);
    } else {
      missing.push_back({in, "no such file or directory"});
    }
  }
  return out;
}

std::vector<std::uint8_t> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file");
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::uint8_t> data(size);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(size));
  if (!in) throw std::runtime_error("read failed");
  return data;
}

std::vector<std::string> collect_hashes(const std::vector<std::string>& args, const std::string& list_file) {
  std::vector<std::string> out = args;
  if (!list_file.empty()) {
    std::ifstream in(list_file);
    if (!in) throw std::runtime_error("cannot open hash list " + list_file);
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
      const auto tab = line.find('\t');
      if (tab != std::string::npos) line.resize(tab);
      if (line.empty() || line.front() == '#' || line == "sha256") continue;
      out.push_back(line);
    }
  }
  for (auto& h : out) {
    std::transform(h.begin(), h.end(), h.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
  return out;
}

Output::Output(const std::string& path) {
  if (!path.empty() && path != "-") {
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw std::runtime_error("cannot write " + path);
  }
}

std::ostream& Output::stream() { return file_ ? static_cast<std::ostream&>(*file_) : std::cout; }

}  // namespace ember::cli

#pragma once

#include <algorithm>
#include <atomic>
#include <fstream>
#include <memory>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace ember::cli {

struct Outcome {
  std::string item;
  std::string error;  // empty on success
  nlohmann::ordered_json detail = nlohmann::ordered_json::object();
};

// One JSON line on stderr: {"command", "ok", "processed", "failed", "errors": [...], ...extra}.
// `unlisted_successes` counts processed items that have no Outcome entry.
// Returns the process exit code (0 when nothing failed, 1 otherwise).
int report(const std::string& command, const std::vector<Outcome>& outcomes,
           const nlohmann::ordered_json& extra = nlohmann::ordered_json::object(), bool list_all = false,
           std::size_t unlisted_successes = 0);

// Usage or setup error before any work: exit code 2.
int fail(const std::string& command, const std::string& message);

struct CommonOptions {
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned threads = 0;
  std::string layout;
  std::string patterns;
  std::string vendor_graph;
  std::string api_key_env = "VT_API_KEY";
  std::uint64_t max_file_size = 100ull * 1024 * 1024;

  unsigned worker_count() const { return threads ? threads : std::max(1u, std::thread::hardware_concurrency()); }
};

// Regular files named directly plus every regular file under named
// directories, directories expanded in sorted path order.
std::vector<std::filesystem::path> expand_inputs(const std::vector<std::string>& inputs, std::vector<Outcome>& missing);

std::vector<std::uint8_t> read_file(const std::filesystem::path& p);

// Lines of a hash list file (blank lines and '#' comments skipped) plus explicit hashes.
std::vector<std::string> collect_hashes(const std::vector<std::string>& args, const std::string& list_file);

// Output stream for "-o": stdout when empty or "-".
class Output {
 public:
  explicit Output(const std::string& path);
  std::ostream& stream();

 private:
  std::unique_ptr<std::ofstream> file_;
};

// Runs fn over items on `threads` workers, calling emit in input order.
// At most `window` results are held at once.
template <typename In, typename Out>
void ordered_map(const std::vector<In>& items, unsigned threads, std::size_t window,
                 const std::function<Out(const In&)>& fn, const std::function<void(std::size_t, Out&)>& emit) {
  window = std::max<std::size_t>(window, 1);
  for (std::size_t base = 0; base < items.size(); base += window) {
    const std::size_t n = std::min(window, items.size() - base);
    std::vector<Out> results(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < n; i = next++) results[i] = fn(items[base + i]);
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::min<std::size_t>(threads, n); ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < n; ++i) emit(base + i, results[i]);
  }
}

inline void add_threads(CLI::App* c, CommonOptions& o) {
  c->add_option("--threads", o.threads, "Worker threads (default: hardware concurrency)");
}
inline void add_seed(CLI::App* c, CommonOptions& o) {
  c->add_option("--seed", o.seed, "Random seed")->required()->each([&o](const std::string&) { o.seed_given = true; });
}
inline void add_layout(CLI::App* c, CommonOptions& o) {
  c->add_option("--layout", o.layout, "Vector layout table (default: built-in v3)")->check(CLI::ExistingFile);
}
inline void add_patterns(CLI::App* c, CommonOptions& o) {
  c->add_option("--patterns", o.patterns, "String pattern set (default: built-in v3)")->check(CLI::ExistingFile);
}
inline void add_vendor_graph(CLI::App* c, CommonOptions& o) {
  c->add_option("--vendor-graph", o.vendor_graph, "AV vendor relationship table (default: built-in)")
      ->check(CLI::ExistingFile);
}
inline void add_api_key_env(CLI::App* c, CommonOptions& o) {
  c->add_option("--api-key-env", o.api_key_env, "Environment variable holding the API key")->capture_default_str();
}
inline void add_max_file_size(CLI::App* c, CommonOptions& o) {
  c->add_option("--max-file-size", o.max_file_size, "Largest file in bytes to accept (0: no limit)")
      ->capture_default_str();
}

using Runner = std::function<int()>;

void add_feature_commands(CLI::App& app, CommonOptions& opts, Runner& run);
void add_dataset_commands(CLI::App& app, CommonOptions& opts, Runner& run);
void add_vt_commands(CLI::App& app, CommonOptions& opts, Runner& run);

}  // namespace ember::cli

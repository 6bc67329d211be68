#include <doctest.h>

#include <cmath>
#include <numeric>
#include <string>

#include "ember/agnostic.hpp"
#include "ember/simd/kernels.hpp"
#include "splitmix.hpp"

using namespace ember;

namespace {

std::vector<std::uint8_t> bytes_of(std::string_view s) { return {s.begin(), s.end()}; }

// Straight transcription of the windowed definition, one window at a time.
std::vector<std::uint64_t> naive_byte_entropy(const std::vector<std::uint8_t>& data, std::size_t window,
                                              std::size_t step) {
  std::vector<std::uint64_t> grid(256, 0);
  auto add_window = [&](std::size_t start, std::size_t len) {
    std::uint64_t c[16] = {};
    for (std::size_t i = start; i < start + len; ++i) ++c[data[i] >> 4];
    double h = 0.0;
    for (int k = 0; k < 16; ++k) {
      if (c[k] == 0) continue;
      const double p = static_cast<double>(c[k]) / static_cast<double>(window);
      h += -p * std::log2(p);
    }
    int bin = static_cast<int>(h * 2 * 2);
    if (bin == 16) bin = 15;
    for (int k = 0; k < 16; ++k) grid[bin * 16 + k] += c[k];
  };
  if (data.size() < window) {
    add_window(0, data.size());
  } else {
    for (std::size_t s = 0; s + window <= data.size(); s += step) add_window(s, window);
  }
  return grid;
}

struct NaiveStrings {
  std::uint64_t numstrings = 0, printables = 0;
  std::vector<std::uint64_t> dist = std::vector<std::uint64_t>(96, 0);
};

NaiveStrings naive_strings(const std::vector<std::uint8_t>& data) {
  NaiveStrings out;
  std::size_t run = 0;
  auto close = [&](std::size_t end) {
    if (run >= 5) {
      ++out.numstrings;
      out.printables += run;
      for (std::size_t i = end - run; i < end; ++i) ++out.dist[data[i] - 0x20];
    }
    run = 0;
  };
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i] >= 0x20 && data[i] <= 0x7E) {
      ++run;
    } else {
      close(i);
    }
  }
  close(data.size());
  return out;
}

std::uint64_t count_of(const StringFeatures& s, std::string_view name) {
  for (const auto& [n, c] : s.string_counts)
    if (n == name) return c;
  FAIL("missing pattern " << name);
  return 0;
}

}  // namespace

TEST_CASE("byte_histogram") {
  const auto empty = byte_histogram({});
  CHECK(empty.size() == 256);
  CHECK(std::accumulate(empty.begin(), empty.end(), 0ull) == 0);

  const std::vector<std::uint8_t> small = {0, 0, 1};
  const auto h = byte_histogram(small);
  CHECK(h[0] == 2);
  CHECK(h[1] == 1);
  CHECK(std::accumulate(h.begin(), h.end(), 0ull) == 3);

  const auto mib = ember::testing::splitmix_bytes(1234, 1 << 20);
  std::vector<std::uint64_t> oracle(256, 0);
  for (auto b : mib) ++oracle[b];
  CHECK(byte_histogram(mib) == oracle);
}

TEST_CASE("shannon_entropy") {
  std::vector<std::uint64_t> one(256, 0);
  one[65] = 1000;
  CHECK(shannon_entropy(one) == 0.0);
  CHECK(shannon_entropy(std::vector<std::uint64_t>(256, 3)) == 8.0);
  CHECK(shannon_entropy(std::vector<std::uint64_t>{2, 2}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(shannon_entropy(std::vector<std::uint64_t>(256, 0)) == 0.0);
  CHECK(shannon_entropy({}) == 0.0);
}

TEST_CASE("byte_entropy_histogram matches the naive windowed oracle") {
  CHECK(byte_entropy_histogram({}) == std::vector<std::uint64_t>(256, 0));

  const std::vector<std::uint8_t> flat(2048, 0xA7);
  const auto g = byte_entropy_histogram(flat);
  CHECK(g[0xA] == 2048);
  CHECK(std::accumulate(g.begin(), g.end(), 0ull) == 2048);

  ember::testing::SplitMix64 rng(42);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = trial == 0 ? 8192 : rng.below(64 * 1024);
    auto data = ember::testing::splitmix_bytes(rng.next(), n);
    if (trial % 4 == 1) for (auto& b : data) b &= 0x3F;  // lower-entropy rows
    if (trial % 4 == 2) for (std::size_t i = 0; i < n; ++i) data[i] = static_cast<std::uint8_t>(i / 700);
    CAPTURE(n);
    for (auto isa : {simd::Isa::scalar, simd::Isa::avx2}) {
      if (!simd::isa_supported(isa)) continue;
      simd::force_isa(isa);
      CHECK(byte_entropy_histogram(data) == naive_byte_entropy(data, 2048, 1024));
      CHECK(byte_entropy_histogram(data, 1000, 300) == naive_byte_entropy(data, 1000, 300));
    }
    simd::reset_isa();
  }
}

TEST_CASE("string_features agrees with a naive run scanner") {
  const auto& patterns = PatternSet::default_v3();
  ember::testing::SplitMix64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    auto data = ember::testing::splitmix_bytes(rng.next(), rng.below(50000) + 1);
    for (auto& b : data) if (b & 0x80) b = static_cast<std::uint8_t>(0x20 + (b % 95));  // long printable runs
    const auto s = string_features(data, patterns);
    const auto n = naive_strings(data);
    CHECK(s.numstrings == n.numstrings);
    CHECK(s.printables == n.printables);
    CHECK(s.printabledist == n.dist);
    CHECK(s.printabledist[95] == 0);
    CHECK(s.avlength == doctest::Approx(n.numstrings ? double(n.printables) / n.numstrings : 0.0));
    CHECK(s.entropy == doctest::Approx(shannon_entropy(n.dist)).epsilon(1e-12));
  }
}

TEST_CASE("string_features edge cases") {
  const auto& patterns = PatternSet::default_v3();
  const auto e = string_features({}, patterns);
  CHECK(e.numstrings == 0);
  CHECK(e.avlength == 0.0);
  CHECK(e.entropy == 0.0);
  CHECK(e.string_counts.size() == 76);
  for (const auto& [name, c] : e.string_counts) CHECK(c == 0);

  CHECK(string_features(bytes_of("aaaa"), patterns).numstrings == 0);
  CHECK(string_features(bytes_of("aaaaa"), patterns).numstrings == 1);
  CHECK(string_features(bytes_of("aaaaa\x01" "bbbbbb\x7f" "cc"), patterns).printables == 11);
}

TEST_CASE("string_counts reproduce the documented example counts") {
  std::string text("\x00\x01 wallet 1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa end\n", 49);
  for (int i = 0; i < 8; ++i) text += "code signing CERTIFICATE block\n";
  for (int i = 0; i < 11; ++i) text += "connect() failed\n";
  for (int i = 0; i < 31; ++i) text += "CryptAcquireContext; ";
  const auto s = string_features(bytes_of(text), PatternSet::default_v3());
  CHECK(count_of(s, "btc_wallet") == 1);
  CHECK(count_of(s, "certificate") == 8);
  CHECK(count_of(s, "connect") == 11);
  CHECK(count_of(s, "crypt") == 31);
}

TEST_CASE("general_features") {
  const auto e = general_features({});
  CHECK(e.size == 0);
  CHECK(e.entropy == 0.0);
  CHECK(e.magic4 == std::vector<std::uint64_t>{0, 0, 0, 0});

  const auto mz = general_features(bytes_of("MZ\x90"));
  CHECK(mz.magic4 == std::vector<std::uint64_t>{0x4D, 0x5A, 0x90, 0});
  CHECK(mz.size == 3);
  CHECK_FALSE(mz.pe.has_value());

  const auto data = ember::testing::splitmix_bytes(3, 100000);
  const auto g = general_features(data);
  CHECK(g.entropy > 7.99);
  CHECK(g.entropy <= 8.0);
  CHECK(general_features(data) == g);
}

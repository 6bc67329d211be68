#include "ember/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace ember::simd {
namespace {

bool cpu_has_avx2() {
#if defined(EMBER_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const KernelTable* select_default() {
  const char* env = std::getenv("EMBER_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") return &detail::scalar_table;
#if defined(EMBER_HAVE_AVX2)
  if (cpu_has_avx2()) return &detail::avx2_table;
#endif
  return &detail::scalar_table;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{select_default()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return cpu_has_avx2();
  }
  return false;
}

const KernelTable& kernels() { return *active_slot().load(std::memory_order_acquire); }

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::runtime_error("kernel variant not supported on this CPU: " + std::string(isa_name(isa)));
  }
#if defined(EMBER_HAVE_AVX2)
  if (isa == Isa::avx2) return detail::avx2_table;
#endif
  return detail::scalar_table;
}

void force_isa(Isa isa) { active_slot().store(&kernels_for(isa), std::memory_order_release); }

void reset_isa() { active_slot().store(select_default(), std::memory_order_release); }

}  // namespace ember::simd

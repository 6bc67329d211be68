#include "ember/tlsh_index.hpp"

#include <cstdlib>

namespace ember::tlsh {
namespace {

int length_term(int d) { return d <= 1 ? d : d * 12; }
int ratio_term(int d) { return d <= 1 ? d : (d - 1) * 12; }

}  // namespace

void NearDuplicateIndex::insert(const Digest& d) {
  cells_[cell(d.lvalue, d.q1ratio, d.q2ratio)].push_back(digests_.size());
  digests_.push_back(d);
}

std::optional<std::size_t> NearDuplicateIndex::find_within(const Digest& d, int threshold) const {
  if (threshold < 0) return std::nullopt;
  std::optional<std::size_t> best;
  for (int dl = -128; dl <= 127; ++dl) {
    const int lt = length_term(std::abs(dl));
    if (lt > threshold) continue;
    const int lv = (d.lvalue + dl + 256) % 256;
    for (int d1 = -8; d1 <= 7; ++d1) {
      const int t1 = lt + ratio_term(std::abs(d1));
      if (t1 > threshold) continue;
      const int q1 = (d.q1ratio + d1 + 16) % 16;
      for (int d2 = -8; d2 <= 7; ++d2) {
        if (t1 + ratio_term(std::abs(d2)) > threshold) continue;
        const int q2 = (d.q2ratio + d2 + 16) % 16;
        for (std::size_t i : cells_[cell(lv, q1, q2)]) {
          if (best && i >= *best) break;
          if (distance(d, digests_[i]) <= threshold) {
            best = i;
            break;
          }
        }
      }
    }
  }
  return best;
}

}  // namespace ember::tlsh

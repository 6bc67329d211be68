#pragma once

// Exact "any digest within distance t" queries over a growing set of TLSH
// digests. Entries are bucketed by (lvalue, q1ratio, q2ratio); a query
// visits only cells whose header terms alone stay within the threshold,
// so results equal a linear scan with tlsh::distance.

#include <cstddef>
#include <optional>
#include <vector>

#include "ember/tlsh.hpp"

namespace ember::tlsh {

class NearDuplicateIndex {
 public:
  void insert(const Digest& d);
  // Index of the first inserted digest with distance(d, e) <= threshold.
  std::optional<std::size_t> find_within(const Digest& d, int threshold) const;
  bool any_within(const Digest& d, int threshold) const { return find_within(d, threshold).has_value(); }

  std::size_t size() const { return digests_.size(); }
  const Digest& at(std::size_t i) const { return digests_[i]; }

 private:
  static std::size_t cell(int lvalue, int q1, int q2) {
    return (static_cast<std::size_t>(lvalue) << 8) | (static_cast<std::size_t>(q1) << 4) | static_cast<std::size_t>(q2);
  }
  std::vector<Digest> digests_;
  std::vector<std::vector<std::size_t>> cells_ = std::vector<std::vector<std::size_t>>(256 * 16 * 16);
};

}  // namespace ember::tlsh

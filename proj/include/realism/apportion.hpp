#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace realism {

// Largest-remainder apportionment of `total` integer units over non-negative
// weights. Every entry lands within 1 of its real-valued quota and the
// outputs sum to `total` exactly. Leftover units go to the largest
// fractional parts, ties to the lowest index. All-zero weights fall back to
// a uniform split with the remainder assigned to the lowest indices.
inline std::vector<int> largest_remainder(std::span<const double> weights, int total) {
  if (total < 0) throw std::invalid_argument("largest_remainder: negative total");
  const int n = static_cast<int>(weights.size());
  if (n == 0) {
    if (total > 0) throw std::invalid_argument("largest_remainder: no bins");
    return {};
  }
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) throw std::invalid_argument("largest_remainder: bad weight");
    sum += w;
  }

  std::vector<double> quota(n);
  if (sum <= 0.0) {
    std::fill(quota.begin(), quota.end(), static_cast<double>(total) / n);
  } else {
    for (int i = 0; i < n; ++i) quota[i] = total * (weights[i] / sum);
  }

  std::vector<int> out(n);
  std::vector<double> frac(n);
  int assigned = 0;
  for (int i = 0; i < n; ++i) {
    out[i] = static_cast<int>(std::floor(quota[i]));
    frac[i] = quota[i] - out[i];
    assigned += out[i];
  }

  int leftover = total - assigned;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return frac[a] > frac[b]; });
  for (int k = 0; k < leftover; ++k) out[order[k % n]] += 1;
  return out;
}

inline std::vector<int> largest_remainder(const std::vector<double>& weights, int total) {
  return largest_remainder(std::span<const double>(weights), total);
}

}  // namespace realism

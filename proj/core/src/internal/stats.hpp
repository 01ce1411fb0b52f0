#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace dyncop::detail {

/// Counts inversions of v by merge sort; v is left sorted.
inline std::uint64_t count_inversions(std::vector<double>& v,
                                      std::vector<double>& buf, std::size_t lo,
                                      std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = count_inversions(v, buf, lo, mid) +
                      count_inversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += mid - i;
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<long>(lo), buf.begin() + static_cast<long>(hi),
            v.begin() + static_cast<long>(lo));
  return inv;
}

/// Kendall tau-a via inversion counting, O(n log n). Ties contribute like
/// half-discordant pairs, which is adequate for the moment-matching starts
/// and sampler checks this backs (pseudo-observations are tie-free anyway).
inline double kendall_tau_empirical(const std::vector<double>& x,
                                    const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2)
    throw std::invalid_argument("kendall_tau_empirical: need equal lengths >= 2");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const std::uint64_t inv = count_inversions(ys, buf, 0, n);
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return 1.0 - 2.0 * static_cast<double>(inv) / pairs;
}

/// k-th order statistic with k = ceil(p*n) (1-indexed); the empirical
/// quantile convention used for Monte-Carlo VaR.
inline double empirical_quantile(std::vector<double> sample, double p) {
  if (sample.empty()) throw std::invalid_argument("empirical_quantile: empty");
  const std::size_t n = sample.size();
  std::size_t k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  if (k < 1) k = 1;
  if (k > n) k = n;
  std::nth_element(sample.begin(), sample.begin() + static_cast<long>(k - 1),
                   sample.end());
  return sample[k - 1];
}

inline double median_sorted(const std::vector<double>& s) {
  const std::size_t n = s.size();
  if (n == 0) return std::nan("");
  return n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

}  // namespace dyncop::detail

#pragma once

// Shared test utilities: an O(n log n) sample Kendall tau and a per-process
// scratch directory for tests that write files.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

namespace testutil {

namespace detail {

// Inversion count by merge sort over [lo, hi).
inline long long merge_count(std::vector<double>& a, std::vector<double>& buf,
                             std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  long long inv = merge_count(a, buf, lo, mid) + merge_count(a, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (a[i] <= a[j]) {
      buf[k++] = a[i++];
    } else {
      inv += static_cast<long long>(mid - i);
      buf[k++] = a[j++];
    }
  }
  while (i < mid) buf[k++] = a[i++];
  while (j < hi) buf[k++] = a[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
            buf.begin() + static_cast<std::ptrdiff_t>(k),
            a.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

}  // namespace detail

/// Kendall tau-a via Knight's algorithm: sort by the first column, count
/// inversions in the second. Assumes continuous data (no ties), which holds
/// almost surely for copula samples.
inline double sample_kendall_tau(const Eigen::ArrayX2d& u) {
  const std::size_t n = static_cast<std::size_t>(u.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&u](std::size_t a, std::size_t b) {
    return u(static_cast<Eigen::Index>(a), 0) < u(static_cast<Eigen::Index>(b), 0);
  });
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = u(static_cast<Eigen::Index>(order[i]), 1);
  std::vector<double> buf(n);
  const long long inv = detail::merge_count(y, buf, 0, n);
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return 1.0 - 2.0 * static_cast<double>(inv) / pairs;
}

/// Scratch directory for this test process, created on first use.
inline std::string scratch_dir() {
  namespace fs = std::filesystem;
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("dyncop_tests_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir.string();
}

/// Path inside the scratch directory.
inline std::string scratch_path(const std::string& name) {
  return (std::filesystem::path(scratch_dir()) / name).string();
}

}  // namespace testutil

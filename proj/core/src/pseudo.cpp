#include "dyncop/pseudo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace dyncop {

namespace {

void rank_column(const Eigen::ArrayXd& col, double scale, Eigen::ArrayXd& out) {
  const Eigen::Index n = col.size();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return col[a] < col[b]; });
  // Average ranks over runs of equal values (1-based ranks).
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && col[order[j + 1]] == col[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) out[order[k]] = avg * scale;
    i = j + 1;
  }
}

}  // namespace

PseudoSample pseudo_observations(const Eigen::ArrayX2d& data) {
  const Eigen::Index t = data.rows();
  if (t < 2) throw std::invalid_argument("pseudo_observations: need T >= 2");
  if (!data.isFinite().all())
    throw std::invalid_argument("pseudo_observations: non-finite input");
  PseudoSample ps;
  ps.u.resize(t, 2);
  const double scale = 1.0 / static_cast<double>(t + 1);
  Eigen::ArrayXd out(t);
  for (int c = 0; c < 2; ++c) {
    rank_column(data.col(c), scale, out);
    ps.u.col(c) = out;
  }
  return ps;
}

}  // namespace dyncop

#pragma once

// Rank transform of raw bivariate data to pseudo-observations.

#include <Eigen/Dense>

namespace dyncop {

/// T x 2 matrix of rank-based uniforms, strictly inside (0,1).
struct PseudoSample {
  Eigen::ArrayX2d u;
  int t_len() const { return static_cast<int>(u.rows()); }
};

/// Column-wise ranks scaled by 1/(T+1), average ranks for ties. Scaling by
/// T+1 rather than T keeps the sample maximum strictly below 1 so densities
/// stay evaluable. Invariant to strictly increasing per-column transforms.
/// Throws std::invalid_argument on non-finite input or T < 2.
PseudoSample pseudo_observations(const Eigen::ArrayX2d& data);

}  // namespace dyncop

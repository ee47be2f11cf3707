#pragma once

#include <Eigen/Dense>
#include <utility>

namespace blindcal {

// Keeps the k entries of largest magnitude and zeroes the rest. Ties are
// broken toward the lower index so the result is unique.
Eigen::VectorXd hard_threshold(const Eigen::Ref<const Eigen::VectorXd>& u,
                               Eigen::Index k);

// Orthogonal projection onto the hyperplane of zero-mean vectors.
Eigen::VectorXd project_zero_mean(const Eigen::Ref<const Eigen::VectorXd>& v);

// Euclidean projection onto the gain feasible set: vectors 1 + e with
// |e_i| <= rho and sum(e) = 0. Solved as a clipped shift 1 + clip(v - 1 -
// lambda, -rho, rho) with lambda found by bisection on the sum constraint.
Eigen::VectorXd project_gain_box(const Eigen::Ref<const Eigen::VectorXd>& v,
                                 double rho);

// Rescales the pair (x, g) along the scaling ambiguity of the bilinear model
// so the gains average to one: alpha = sum(g)/m, returns (alpha*x, g/alpha).
// diag(g) A x is invariant under this map.
std::pair<Eigen::VectorXd, Eigen::VectorXd> normalize_gains(
    const Eigen::VectorXd& x, const Eigen::VectorXd& g);

// Membership test for the gain feasible set, with numeric slack: 1e-12 on
// the box and 1e-9 * m on the sum.
struct GainFeasibleSet {
  Eigen::Index m = 0;
  double rho = 0.0;

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& v) const;
};

}  // namespace blindcal

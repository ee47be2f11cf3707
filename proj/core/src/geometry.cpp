#include "blindcal/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace blindcal {

Eigen::VectorXd hard_threshold(const Eigen::Ref<const Eigen::VectorXd>& u,
                               Eigen::Index k) {
  const Eigen::Index n = u.size();
  if (k < 0 || k > n)
    throw std::invalid_argument("hard_threshold: k must be in [0, n]");
  if (k == n) return u;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  if (k == 0) return out;

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::nth_element(idx.begin(), idx.begin() + k, idx.end(),
                   [&u](Eigen::Index a, Eigen::Index b) {
                     const double ma = std::abs(u[a]);
                     const double mb = std::abs(u[b]);
                     if (ma != mb) return ma > mb;
                     return a < b;
                   });
  for (Eigen::Index i = 0; i < k; ++i) out[idx[static_cast<std::size_t>(i)]] = u[idx[static_cast<std::size_t>(i)]];
  return out;
}

Eigen::VectorXd project_zero_mean(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() == 0)
    throw std::invalid_argument("project_zero_mean: empty vector");
  return v.array() - v.mean();
}

Eigen::VectorXd project_gain_box(const Eigen::Ref<const Eigen::VectorXd>& v,
                                 double rho) {
  const Eigen::Index m = v.size();
  if (m == 0) throw std::invalid_argument("project_gain_box: empty vector");
  if (!(rho >= 0.0 && rho < 1.0))
    throw std::invalid_argument("project_gain_box: rho must be in [0, 1)");

  const Eigen::ArrayXd b = v.array() - 1.0;
  const auto clipped_sum = [&](double lambda) {
    return (b - lambda).max(-rho).min(rho).sum();
  };

  /* the offset sum is continuous and non-increasing in lambda; these ends
     pin it at +m*rho and -m*rho, so the root is bracketed */
  double lo = b.minCoeff() - rho;
  double hi = b.maxCoeff() + rho;
  constexpr double kSumTol = 1e-12;
  double lambda = 0.5 * (lo + hi);
  bool converged = false;
  for (int iter = 0; iter < 200; ++iter) {
    lambda = 0.5 * (lo + hi);
    const double s = clipped_sum(lambda);
    if (std::abs(s) <= kSumTol) {
      converged = true;
      break;
    }
    if (s > 0.0)
      lo = lambda;
    else
      hi = lambda;
  }
  if (!converged)
    throw std::logic_error("project_gain_box: bisection failed to converge");
  return (1.0 + (b - lambda).max(-rho).min(rho)).matrix();
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> normalize_gains(
    const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
  if (g.size() == 0) throw std::invalid_argument("normalize_gains: empty gains");
  if ((g.array() <= 0.0).any())
    throw std::invalid_argument("normalize_gains: gains must be strictly positive");
  const double alpha = g.sum() / static_cast<double>(g.size());
  return {alpha * x, g / alpha};
}

bool GainFeasibleSet::contains(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  if (v.size() != m) return false;
  const Eigen::ArrayXd e = v.array() - 1.0;
  if ((e.abs() > rho + 1e-12).any()) return false;
  return std::abs(e.sum()) <= 1e-9 * static_cast<double>(m);
}

}  // namespace blindcal

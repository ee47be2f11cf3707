#include "blindcal/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "blindcal/geometry.hpp"

namespace blindcal {

namespace {

void check_state(const SnapshotSource& source, const SnapshotSet& y,
                 const SignalVector& xi, const GainVector& gamma) {
  if (static_cast<Eigen::Index>(y.size()) != source.snapshots())
    throw std::invalid_argument("snapshot count does not match ensemble");
  for (const auto& yl : y)
    if (yl.size() != source.sensors())
      throw std::invalid_argument("snapshot length does not match sensor count");
  if (xi.size() != source.signal_length())
    throw std::invalid_argument("signal length does not match ensemble");
  if (gamma.size() != source.sensors())
    throw std::invalid_argument("gain length does not match sensor count");
}

double rel_change(const Eigen::VectorXd& next, const Eigen::VectorXd& prev) {
  const double dn = (next - prev).norm();
  const double pn = prev.norm();
  if (pn > 0.0) return dn / pn;
  return dn == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

/* residuals r_l = gamma .* (A_l xi) - y_l for all snapshots, plus whichever
   of loss / gradients the caller asked for, in one pass over the matrices */
void accumulate_state(const SnapshotSource& source, const SnapshotSet& y,
                      const SignalVector& xi, const GainVector& gamma,
                      Eigen::MatrixXd* u_out, Eigen::MatrixXd* r_out,
                      double* loss_out, SignalVector* grad_x_out,
                      GainVector* grad_g_out) {
  const auto m = source.sensors();
  const auto p = source.snapshots();
  const double mp = static_cast<double>(m) * static_cast<double>(p);
  if (loss_out) *loss_out = 0.0;
  if (grad_x_out) grad_x_out->setZero(source.signal_length());
  if (grad_g_out) grad_g_out->setZero(m);
  Eigen::VectorXd u(m), r(m);
  for (Eigen::Index l = 0; l < p; ++l)
    source.with_matrix(l, [&](const Eigen::MatrixXd& a) {
      u.noalias() = a * xi;
      r = gamma.cwiseProduct(u) - y[static_cast<std::size_t>(l)];
      if (loss_out) *loss_out += r.squaredNorm();
      if (grad_x_out) grad_x_out->noalias() += a.transpose() * gamma.cwiseProduct(r);
      if (grad_g_out) *grad_g_out += u.cwiseProduct(r);
      if (u_out) u_out->col(l) = u;
      if (r_out) r_out->col(l) = r;
    });
  if (loss_out) *loss_out /= 2.0 * mp;
  if (grad_x_out) *grad_x_out /= mp;
  if (grad_g_out) {
    *grad_g_out /= mp;
    *grad_g_out = project_zero_mean(*grad_g_out);
  }
}

double safe_ratio(double num, double denom) {
  return denom > 0.0 ? num / denom : 0.0;
}

}  // namespace

void SolverConfig::validate(Eigen::Index n) const {
  if (k < 1 || k > n)
    throw std::invalid_argument("SolverConfig: k must be in [1, n]");
  if (!(rho >= 0.0 && rho < 1.0))
    throw std::invalid_argument("SolverConfig: rho must be in [0, 1)");
  if (!(stop_tol > 0.0))
    throw std::invalid_argument("SolverConfig: stop_tol must be positive");
  if (max_iters < 1)
    throw std::invalid_argument("SolverConfig: max_iters must be at least 1");
  if (basis && basis->pixel_count() != n)
    throw std::invalid_argument("SolverConfig: basis size does not match signal length");
}

std::string to_string(Termination t) {
  return t == Termination::converged ? "converged" : "max_iters";
}

SignalVector grad_signal(const SnapshotSource& source, const SnapshotSet& y,
                         const SignalVector& xi, const GainVector& gamma) {
  check_state(source, y, xi, gamma);
  SignalVector g;
  accumulate_state(source, y, xi, gamma, nullptr, nullptr, nullptr, &g, nullptr);
  return g;
}

SignalVector grad_signal(const SensingEnsemble& ensemble, const SnapshotSet& y,
                         const SignalVector& xi, const GainVector& gamma) {
  return grad_signal(DenseSnapshotSource(ensemble), y, xi, gamma);
}

GainVector grad_gains_projected(const SnapshotSource& source,
                                const SnapshotSet& y, const SignalVector& xi,
                                const GainVector& gamma) {
  check_state(source, y, xi, gamma);
  GainVector g;
  accumulate_state(source, y, xi, gamma, nullptr, nullptr, nullptr, nullptr, &g);
  return g;
}

GainVector grad_gains_projected(const SensingEnsemble& ensemble,
                                const SnapshotSet& y, const SignalVector& xi,
                                const GainVector& gamma) {
  return grad_gains_projected(DenseSnapshotSource(ensemble), y, xi, gamma);
}

double line_search_signal(const SnapshotSource& source, const SnapshotSet& y,
                          const SignalVector& xi, const GainVector& gamma,
                          const SignalVector& direction) {
  check_state(source, y, xi, gamma);
  if (direction.size() != xi.size())
    throw std::invalid_argument("line_search_signal: direction length mismatch");
  double num = 0.0, denom = 0.0;
  Eigen::VectorXd r(source.sensors()), s(source.sensors());
  for (Eigen::Index l = 0; l < source.snapshots(); ++l)
    source.with_matrix(l, [&](const Eigen::MatrixXd& a) {
      r = gamma.cwiseProduct(a * xi) - y[static_cast<std::size_t>(l)];
      s = gamma.cwiseProduct(a * direction);
      num += s.dot(r);
      denom += s.squaredNorm();
    });
  return safe_ratio(num, denom);
}

double line_search_signal(const SensingEnsemble& ensemble, const SnapshotSet& y,
                          const SignalVector& xi, const GainVector& gamma,
                          const SignalVector& direction) {
  return line_search_signal(DenseSnapshotSource(ensemble), y, xi, gamma, direction);
}

double line_search_gains(const SnapshotSource& source, const SnapshotSet& y,
                         const SignalVector& xi, const GainVector& gamma,
                         const GainVector& direction) {
  check_state(source, y, xi, gamma);
  if (direction.size() != gamma.size())
    throw std::invalid_argument("line_search_gains: direction length mismatch");
  double num = 0.0, denom = 0.0;
  Eigen::VectorXd u(source.sensors()), s(source.sensors());
  for (Eigen::Index l = 0; l < source.snapshots(); ++l)
    source.with_matrix(l, [&](const Eigen::MatrixXd& a) {
      u.noalias() = a * xi;
      s = u.cwiseProduct(direction);
      num += s.dot(gamma.cwiseProduct(u) - y[static_cast<std::size_t>(l)]);
      denom += s.squaredNorm();
    });
  return safe_ratio(num, denom);
}

double line_search_gains(const SensingEnsemble& ensemble, const SnapshotSet& y,
                         const SignalVector& xi, const GainVector& gamma,
                         const GainVector& direction) {
  return line_search_gains(DenseSnapshotSource(ensemble), y, xi, gamma, direction);
}

namespace {

SolverResult solve_impl(const SnapshotSource& source, const SnapshotSet& y,
                        const SolverConfig& config, SolveObserver* observer,
                        bool update_gains) {
  const auto n = source.signal_length();
  const auto m = source.sensors();
  const auto p = source.snapshots();
  config.validate(n);

  SignalVector xi = backproject_init(source, y);
  GainVector gamma = GainVector::Ones(m);
  check_state(source, y, xi, gamma);

  const double mp = static_cast<double>(m) * static_cast<double>(p);
  SolverResult result;
  Eigen::MatrixXd u(m, p);
  SignalVector grad_x(n), xi_pre(n), xi_next(n);
  GainVector grad_g(m), gamma_pre(m), gamma_next(m);
  int consecutive_zero_steps = 0;

  for (int j = 0; j < config.max_iters; ++j) {
    double loss_j = 0.0;
    accumulate_state(source, y, xi, gamma, &u, nullptr, &loss_j, &grad_x,
                     update_gains ? &grad_g : nullptr);
    if (!std::isfinite(loss_j) || !grad_x.allFinite() ||
        (update_gains && !grad_g.allFinite()))
      break;  // diverged; report the last finite iterate as non-converged

    /* exact line searches, both taken from the current iterate */
    double denom_x = 0.0;
    for (Eigen::Index l = 0; l < p; ++l)
      source.with_matrix(l, [&](const Eigen::MatrixXd& a) {
        denom_x += gamma.cwiseProduct(a * grad_x).squaredNorm();
      });
    const double mu_x = safe_ratio(mp * grad_x.squaredNorm(), denom_x);

    double mu_g = 0.0;
    if (update_gains) {
      double denom_g = 0.0;
      for (Eigen::Index l = 0; l < p; ++l)
        denom_g += u.col(l).cwiseProduct(grad_g).squaredNorm();
      mu_g = safe_ratio(mp * grad_g.squaredNorm(), denom_g);
    }
    if (!std::isfinite(mu_x) || !std::isfinite(mu_g)) break;

    xi_pre = xi - mu_x * grad_x;
    gamma_pre = update_gains ? (gamma - mu_g * grad_g).eval() : gamma;
    if (!xi_pre.allFinite() || !gamma_pre.allFinite()) break;

    if (config.basis) {
      Eigen::VectorXd coeffs =
          hard_threshold(config.basis->analyze(xi_pre), config.k);
      xi_next = config.basis->synthesize(coeffs);
    } else {
      xi_next = hard_threshold(xi_pre, config.k);
    }
    gamma_next = (update_gains && config.project_gains)
                     ? project_gain_box(gamma_pre, config.rho)
                     : gamma_pre;

    const double dx = rel_change(xi_next, xi);
    const double dg = rel_change(gamma_next, gamma);
    if (observer)
      observer->on_iteration(j, xi, gamma, xi_pre, xi_next, gamma_pre,
                             gamma_next, mu_x, mu_g);
    result.trace.push_back({loss_j, dx, dg, mu_x, mu_g});
    xi.swap(xi_next);
    gamma.swap(gamma_next);
    result.iterations = j + 1;

    consecutive_zero_steps =
        (mu_x == 0.0 && mu_g == 0.0) ? consecutive_zero_steps + 1 : 0;
    if ((dx < config.stop_tol && dg < config.stop_tol) ||
        consecutive_zero_steps >= 2) {
      result.termination = Termination::converged;
      break;
    }
  }

  result.x_hat = std::move(xi);
  result.g_hat = std::move(gamma);
  return result;
}

}  // namespace

SolverResult solve_bc_iht(const SnapshotSource& source, const SnapshotSet& y,
                          const SolverConfig& config, SolveObserver* observer) {
  return solve_impl(source, y, config, observer, true);
}

SolverResult solve_bc_iht(const SensingEnsemble& ensemble, const SnapshotSet& y,
                          const SolverConfig& config, SolveObserver* observer) {
  return solve_bc_iht(DenseSnapshotSource(ensemble), y, config, observer);
}

SolverResult solve_iht_uncalibrated(const SnapshotSource& source,
                                    const SnapshotSet& y,
                                    const SolverConfig& config,
                                    SolveObserver* observer) {
  return solve_impl(source, y, config, observer, false);
}

SolverResult solve_iht_uncalibrated(const SensingEnsemble& ensemble,
                                    const SnapshotSet& y,
                                    const SolverConfig& config,
                                    SolveObserver* observer) {
  return solve_iht_uncalibrated(DenseSnapshotSource(ensemble), y, config,
                                observer);
}

EvalReport evaluate(const SignalVector& truth_x, const GainVector& truth_g,
                    const SolverResult& result, double zeta) {
  if (!(zeta > 0.0)) throw std::invalid_argument("evaluate: zeta must be positive");
  if (truth_x.size() != result.x_hat.size() ||
      truth_g.size() != result.g_hat.size())
    throw std::invalid_argument("evaluate: estimate and truth sizes differ");

  /* rescale each pair so its gains average to one; the measurements are
     invariant under this map, so it removes the scaling ambiguity */
  const auto canonical = [](const SignalVector& x, const GainVector& g)
      -> std::pair<SignalVector, GainVector> {
    const double alpha = g.sum() / static_cast<double>(g.size());
    if (alpha == 0.0 || !std::isfinite(alpha)) return {x, g};
    return {alpha * x, g / alpha};
  };
  const double alpha_t = truth_g.sum() / static_cast<double>(truth_g.size());
  if (alpha_t == 0.0 || !std::isfinite(alpha_t))
    throw std::invalid_argument("evaluate: truth gains have zero mean");
  const auto [tx, tg] = canonical(truth_x, truth_g);
  if (tx.norm() == 0.0 || tg.norm() == 0.0)
    throw std::invalid_argument("evaluate: zero-norm truth");
  const auto [ex, eg] = canonical(result.x_hat, result.g_hat);

  EvalReport report;
  report.rel_err_x = (ex - tx).norm() / tx.norm();
  report.rel_err_g = (eg - tg).norm() / tg.norm();
  const auto rsnr = [](double err) {
    return err == 0.0 ? 300.0 : -20.0 * std::log10(err);
  };
  report.rsnr_x_db = rsnr(report.rel_err_x);
  report.rsnr_g_db = rsnr(report.rel_err_g);
  report.success =
      std::max(report.rel_err_x, report.rel_err_g) < zeta;
  return report;
}

}  // namespace blindcal

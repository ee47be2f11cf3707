// End-to-end acceptance checks for the blind-calibration solver library.
// Each numbered check prints one [PASS]/[FAIL] line; the process exits
// nonzero if any check fails. Tolerances are pinned here, next to the checks
// that use them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "blindcal/geometry.hpp"
#include "blindcal/imaging.hpp"
#include "blindcal/phase.hpp"
#include "blindcal/rng.hpp"
#include "blindcal/sensing.hpp"
#include "blindcal/solver.hpp"
#include "blindcal/wavelet.hpp"

using namespace blindcal;

namespace {

struct CheckResult {
  bool ok = false;
  std::string detail;
};

Eigen::VectorXd gaussian_vector(Eigen::Index n, std::uint64_t seed) {
  RandomStream stream(seed);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = stream.gaussian();
  return v;
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------- check 1

SignalVector fd_grad_signal(const SensingEnsemble& ensemble,
                            const SnapshotSet& y, const SignalVector& xi,
                            const GainVector& gamma, double h) {
  SignalVector g(xi.size());
  SignalVector probe = xi;
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    probe[i] = xi[i] + h;
    const double fp = loss(ensemble, y, probe, gamma);
    probe[i] = xi[i] - h;
    const double fm = loss(ensemble, y, probe, gamma);
    probe[i] = xi[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

GainVector fd_grad_gains(const SensingEnsemble& ensemble, const SnapshotSet& y,
                         const SignalVector& xi, const GainVector& gamma,
                         double h) {
  GainVector g(gamma.size());
  GainVector probe = gamma;
  for (Eigen::Index i = 0; i < gamma.size(); ++i) {
    probe[i] = gamma[i] + h;
    const double fp = loss(ensemble, y, xi, probe);
    probe[i] = gamma[i] - h;
    const double fm = loss(ensemble, y, xi, probe);
    probe[i] = gamma[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

CheckResult check_gradient_oracle() {
  const double step = 1e-6;
  const double tol = 1e-6;
  double worst = 0.0;
  RandomStream dims_stream(20260001);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 4 + static_cast<Eigen::Index>(dims_stream.uniform_below(13));
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(dims_stream.uniform_below(7));
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(dims_stream.uniform_below(2));
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(
                                   dims_stream.uniform_below(
                                       static_cast<std::uint64_t>(std::min<Eigen::Index>(4, n))));
    const auto seed = derive_seed(777, static_cast<std::uint64_t>(trial));
    const ProblemInstance inst = generate_instance({n, m, p, k}, 0.4, seed);
    const SignalVector xi = gaussian_vector(n, seed + 1);
    const GainVector gamma =
        (1.0 + 0.3 * gaussian_vector(m, seed + 2).array()).matrix();

    const SignalVector gx = grad_signal(inst.ensemble, inst.snapshots, xi, gamma);
    const SignalVector fx =
        fd_grad_signal(inst.ensemble, inst.snapshots, xi, gamma, step);
    worst = std::max(worst, (gx - fx).norm() / std::max(1.0, fx.norm()));

    const GainVector gg =
        grad_gains_projected(inst.ensemble, inst.snapshots, xi, gamma);
    const GainVector fg = project_zero_mean(
        fd_grad_gains(inst.ensemble, inst.snapshots, xi, gamma, step));
    worst = std::max(worst, (gg - fg).norm() / std::max(1.0, fg.norm()));
  }
  return {worst < tol,
          fmt("20 instances, worst relative gradient error %.2e (tol %.0e)",
              worst, tol)};
}

// ---------------------------------------------------------------- check 2

Eigen::VectorXd best_k_term_oracle(const Eigen::VectorXd& u, int k) {
  const int n = static_cast<int>(u.size());
  std::vector<int> comb(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) comb[static_cast<std::size_t>(i)] = i;
  Eigen::VectorXd best;
  double best_err = std::numeric_limits<double>::infinity();
  for (;;) {
    Eigen::VectorXd candidate = Eigen::VectorXd::Zero(n);
    for (const int i : comb) candidate[i] = u[i];
    const double err = (u - candidate).squaredNorm();
    if (err < best_err) {
      best_err = err;
      best = candidate;
    }
    int pos = k - 1;
    while (pos >= 0 && comb[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++comb[static_cast<std::size_t>(pos)];
    for (int i = pos + 1; i < k; ++i)
      comb[static_cast<std::size_t>(i)] = comb[static_cast<std::size_t>(i - 1)] + 1;
  }
  return best;
}

Eigen::VectorXd gain_projection_oracle(const Eigen::VectorXd& v, double rho) {
  const int m = static_cast<int>(v.size());
  const Eigen::VectorXd b = v.array() - 1.0;
  long patterns = 1;
  for (int i = 0; i < m; ++i) patterns *= 3;
  Eigen::VectorXd best;
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<int> state(static_cast<std::size_t>(m));
  for (long pat = 0; pat < patterns; ++pat) {
    long rest = pat;
    int low = 0, high = 0, free_count = 0;
    double free_sum = 0.0;
    for (int i = 0; i < m; ++i) {
      state[static_cast<std::size_t>(i)] = static_cast<int>(rest % 3);
      rest /= 3;
      switch (state[static_cast<std::size_t>(i)]) {
        case 0: ++low; break;
        case 2: ++high; break;
        default:
          ++free_count;
          free_sum += b[i];
      }
    }
    Eigen::VectorXd e(m);
    if (free_count > 0) {
      const double lambda = (free_sum + rho * (high - low)) / free_count;
      bool feasible = true;
      for (int i = 0; i < m; ++i) {
        switch (state[static_cast<std::size_t>(i)]) {
          case 0: e[i] = -rho; break;
          case 2: e[i] = rho; break;
          default:
            e[i] = b[i] - lambda;
            if (std::abs(e[i]) > rho + 1e-12) feasible = false;
        }
      }
      if (!feasible) continue;
    } else {
      if (low != high) continue;
      for (int i = 0; i < m; ++i)
        e[i] = state[static_cast<std::size_t>(i)] == 0 ? -rho : rho;
    }
    const double obj = (e - b).squaredNorm();
    if (obj < best_obj) {
      best_obj = obj;
      best = e;
    }
  }
  return 1.0 + best.array();
}

CheckResult check_geometry_oracles() {
  const double qp_tol = 1e-8;
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + trial % 7;
    const Eigen::VectorXd u =
        gaussian_vector(8, derive_seed(888, static_cast<std::uint64_t>(trial)));
    if ((hard_threshold(u, k) - best_k_term_oracle(u, k))
            .lpNorm<Eigen::Infinity>() != 0.0)
      return {false, fmt("hard_threshold mismatch at trial %d (k=%d)", trial, k)};
  }
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd v =
        Eigen::VectorXd::Ones(6) +
        2.0 * gaussian_vector(6, derive_seed(889, static_cast<std::uint64_t>(trial)));
    const double err = (project_gain_box(v, 0.5) - gain_projection_oracle(v, 0.5))
                           .lpNorm<Eigen::Infinity>();
    worst = std::max(worst, err);
  }
  if (worst >= qp_tol)
    return {false, fmt("projection deviates from QP oracle by %.2e (tol %.0e)",
                       worst, qp_tol)};
  return {true, fmt("200 thresholdings exact, 100 projections within %.0e "
                    "(worst %.2e)",
                    qp_tol, worst)};
}

// ---------------------------------------------------------------- check 3

CheckResult check_wavelet_orthonormality() {
  const double tol = 1e-12;
  const WaveletBasis small(8);
  const Eigen::Index n = small.pixel_count();
  Eigen::MatrixXd Zt(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    Zt.col(i) = small.analyze(Eigen::VectorXd::Unit(n, i));
  const double gram_err =
      (Zt * Zt.transpose() - Eigen::MatrixXd::Identity(n, n))
          .cwiseAbs()
          .maxCoeff();

  const WaveletBasis big(64);
  const Eigen::VectorXd x = gaussian_vector(big.pixel_count(), 424242);
  const double round_trip =
      (big.synthesize(big.analyze(x)) - x).norm() / x.norm();

  const bool ok = gram_err < tol && round_trip < tol;
  return {ok, fmt("side-8 Gram deviation %.2e, side-64 round trip %.2e "
                  "(tol %.0e)",
                  gram_err, round_trip, tol)};
}

// ----------------------------------------------------------- checks 4 & 9

struct InvariantObserver final : SolveObserver {
  const SensingEnsemble* ensemble = nullptr;
  const SnapshotSet* y = nullptr;
  Eigen::Index k = 0;
  double max_gain_sum_error = 0.0;
  Eigen::Index max_nonzeros = 0;
  double max_loss_increase = 0.0;

  void on_iteration(int, const SignalVector& xi_prev,
                    const GainVector& gamma_prev, const SignalVector& xi_pre,
                    const SignalVector& xi_next, const GainVector& gamma_pre,
                    const GainVector& gamma_next, double, double) override {
    max_gain_sum_error = std::max(
        max_gain_sum_error,
        std::abs(gamma_next.sum() - static_cast<double>(gamma_next.size())));
    max_nonzeros =
        std::max(max_nonzeros, Eigen::Index((xi_next.array() != 0.0).count()));
    const double f0 = loss(*ensemble, *y, xi_prev, gamma_prev);
    const double fx = loss(*ensemble, *y, xi_pre, gamma_prev);
    const double fg = loss(*ensemble, *y, xi_prev, gamma_pre);
    const double slack = 1e-12 * std::max(1.0, f0);
    max_loss_increase =
        std::max({max_loss_increase, fx - f0 - slack, fg - f0 - slack});
  }
};

struct RecoveryOutcome {
  bool ran = false;
  int successes = 0;
  int converged = 0;
  double worst_converged_err = 0.0;
  double gain_sum_err = 0.0;
  Eigen::Index worst_nonzeros = 0;
  double loss_increase = -1.0;
};

RecoveryOutcome run_recovery_block() {
  const Dimensions dims{128, 64, 6, 8};
  const double rho = 0.5;
  const int trials = 50;
  RecoveryOutcome out;
  for (int t = 0; t < trials; ++t) {
    const ProblemInstance inst = generate_instance(
        dims, rho, derive_seed(20260404, static_cast<std::uint64_t>(t)));
    SolverConfig config;
    config.k = dims.k;
    config.rho = rho;
    InvariantObserver obs;
    obs.ensemble = &inst.ensemble;
    obs.y = &inst.snapshots;
    obs.k = dims.k;
    const SolverResult result =
        solve_bc_iht(inst.ensemble, inst.snapshots, config, &obs);
    const EvalReport report =
        evaluate(inst.truth_signal, inst.truth_gains, result);
    if (report.success) ++out.successes;
    if (result.termination == Termination::converged) {
      ++out.converged;
      out.worst_converged_err =
          std::max(out.worst_converged_err,
                   std::max(report.rel_err_x, report.rel_err_g));
    }
    out.gain_sum_err = std::max(out.gain_sum_err, obs.max_gain_sum_error);
    out.worst_nonzeros = std::max(out.worst_nonzeros, obs.max_nonzeros);
    out.loss_increase = std::max(out.loss_increase, obs.max_loss_increase);
  }
  out.ran = true;
  return out;
}

CheckResult check_exact_recovery(const RecoveryOutcome& out) {
  const bool ok = out.successes >= 45 &&
                  (out.converged == 0 || out.worst_converged_err < 1e-5);
  return {ok,
          fmt("n=128 k=8 m=64 p=6: %d/50 successes (need >= 45), %d converged, "
              "worst converged relative error %.2e (tol 1e-05)",
              out.successes, out.converged, out.worst_converged_err)};
}

CheckResult check_solver_invariants(const RecoveryOutcome& out) {
  if (!out.ran) return {false, "recovery block never ran"};
  const Eigen::Index m = 64, k = 8;
  const double sum_tol = 1e-9 * static_cast<double>(m);
  const bool ok = out.gain_sum_err <= sum_tol && out.worst_nonzeros <= k &&
                  out.loss_increase <= 0.0;
  return {ok,
          fmt("gain-sum drift %.2e (tol %.1e), max nonzeros %ld (k=%ld), "
              "line-search loss increase beyond slack %s",
              out.gain_sum_err, sum_tol, static_cast<long>(out.worst_nonzeros),
              static_cast<long>(k), out.loss_increase <= 0.0 ? "none" : "seen")};
}

// ---------------------------------------------------------------- check 5

CheckResult check_single_snapshot_failure() {
  const Dimensions dims{128, 64, 1, 8};
  const int trials = 24;
  int successes = 0;
  for (int t = 0; t < trials; ++t) {
    const ProblemInstance inst = generate_instance(
        dims, 0.5, derive_seed(20260505, static_cast<std::uint64_t>(t)));
    SolverConfig config;
    config.k = dims.k;
    config.rho = 0.5;
    const SolverResult result =
        solve_bc_iht(inst.ensemble, inst.snapshots, config);
    if (evaluate(inst.truth_signal, inst.truth_gains, result).success)
      ++successes;
  }
  const double rate = static_cast<double>(successes) / trials;
  return {rate <= 0.1,
          fmt("p=1 success rate %d/%d = %.3f (must stay <= 0.1)", successes,
              trials, rate)};
}

// ---------------------------------------------------------------- check 6

CheckResult check_phase_monotonicity(int threads) {
  PhaseGridSpec spec;
  spec.n_values = {256};
  spec.k_values = {16};
  spec.m_over_k_exponents = {1.0, 2.0, 3.0};  // m = 32, 64, 128
  spec.p_exponents = {1.0, 2.0, 3.0};         // p = 2, 4, 8
  spec.rho = 0.5;
  spec.trials = 24;
  spec.master_seed = 20260606;
  const PhaseGridResult grid = run_phase_grid(spec, threads, false);

  const auto prob = [&](Eigen::Index m, Eigen::Index p) {
    for (const auto& c : grid.cells)
      if (c.m == m && c.p == p) return c.probability;
    return -1.0;
  };
  const std::vector<Eigen::Index> ms = {32, 64, 128};
  const std::vector<Eigen::Index> ps = {2, 4, 8};
  const double slack = 2.0 / 24.0 + 1e-12;

  int bad_sweeps = 0;
  std::string note;
  const auto audit_sweep = [&](const std::vector<double>& vals,
                               const char* label) {
    int inversions = 0;
    bool too_big = false;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i)
      if (vals[i + 1] < vals[i]) {
        ++inversions;
        if (vals[i] - vals[i + 1] > slack) too_big = true;
      }
    if (inversions > 1 || too_big) {
      ++bad_sweeps;
      note += fmt(" [%s: %.3f %.3f %.3f]", label, vals[0], vals[1], vals[2]);
    }
  };
  for (const auto p : ps)
    audit_sweep({prob(32, p), prob(64, p), prob(128, p)},
                fmt("m-sweep p=%ld", static_cast<long>(p)).c_str());
  for (const auto m : ms)
    audit_sweep({prob(m, 2), prob(m, 4), prob(m, 8)},
                fmt("p-sweep m=%ld", static_cast<long>(m)).c_str());

  std::string table;
  for (const auto m : ms)
    for (const auto p : ps)
      table += fmt(" P(m=%ld,p=%ld)=%.2f", static_cast<long>(m),
                   static_cast<long>(p), prob(m, p));
  return {bad_sweeps == 0,
          fmt("9 cells x 24 trials:%s;%s monotone up to one small inversion "
              "per sweep",
              table.c_str(), note.empty() ? " all sweeps" : note.c_str())};
}

// ---------------------------------------------------------------- check 7

CheckResult check_imaging_demo() {
  ImagingDemoParams params;  // side 64, k 300, m 1764, p 5, rho 0.5, seed 1
  const ImagingDemoReport report = run_imaging_demo(params);
  const double gap =
      report.calibrated_rsnr_x_db - report.uncalibrated_rsnr_x_db;
  const bool ok = report.calibrated_rsnr_x_db >= 80.0 &&
                  report.calibrated_rsnr_g_db >= 80.0 && gap >= 30.0;
  return {ok,
          fmt("calibrated RSNR x %.1f dB / g %.1f dB (need >= 80), "
              "uncalibrated x %.1f dB, gap %.1f dB (need >= 30)",
              report.calibrated_rsnr_x_db, report.calibrated_rsnr_g_db,
              report.uncalibrated_rsnr_x_db, gap)};
}

// ---------------------------------------------------------------- check 8

CheckResult check_determinism() {
  PhaseGridSpec spec;
  spec.n_values = {128};
  spec.k_values = {8};
  spec.m_over_k_exponents = {3.0};          // m = 64
  spec.p_exponents = {std::log2(6.0)};      // p = 6
  spec.rho = 0.5;
  spec.trials = 50;
  spec.master_seed = 20260404;
  const std::string serial = phase_csv_string(run_phase_grid(spec, 1, false));
  const std::string threaded = phase_csv_string(run_phase_grid(spec, 8, false));
  const bool ok = serial == threaded;
  return {ok, ok ? fmt("1-thread and 8-thread CSV byte-identical (%zu bytes)",
                       serial.size())
                 : std::string("thread count changed the CSV bytes")};
}

}  // namespace

int main(int argc, char** argv) {
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc)
      threads = std::atoi(argv[++i]);
  }
  if (threads < 1) threads = 1;

  int failures = 0;
  const auto report = [&](int index, const char* title,
                          const std::function<CheckResult()>& run) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = run();
    } catch (const std::exception& e) {
      r = {false, fmt("threw %s", e.what())};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("[%s] %d) %s: %s [%.1f s]\n", r.ok ? "PASS" : "FAIL", index,
                title, r.detail.c_str(), secs);
    std::fflush(stdout);
    if (!r.ok) ++failures;
  };

  RecoveryOutcome recovery;
  report(1, "gradient oracle", check_gradient_oracle);
  report(2, "geometry oracles", check_geometry_oracles);
  report(3, "wavelet orthonormality", check_wavelet_orthonormality);
  report(4, "exact recovery", [&] {
    recovery = run_recovery_block();
    return check_exact_recovery(recovery);
  });
  report(5, "single-snapshot failure", check_single_snapshot_failure);
  report(6, "phase monotonicity", [&] { return check_phase_monotonicity(threads); });
  report(7, "imaging demo", check_imaging_demo);
  report(8, "determinism across threads", check_determinism);
  report(9, "solver invariants", [&] { return check_solver_invariants(recovery); });

  if (failures > 0) {
    std::printf("%d of 9 checks failed\n", failures);
    return 1;
  }
  std::printf("all 9 checks passed\n");
  return 0;
}

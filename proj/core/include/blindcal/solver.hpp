#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "blindcal/sensing.hpp"
#include "blindcal/wavelet.hpp"

namespace blindcal {

struct SolverConfig {
  Eigen::Index k = 0;       // sparsity of the signal estimate
  double rho = 0.0;         // gain box half-width, used when project_gains is on
  double stop_tol = 1e-7;   // threshold on both relative iterate changes
  int max_iters = 5000;
  bool project_gains = false;  // clamp gain iterates back into the feasible set
  std::optional<WaveletBasis> basis;  // identity basis when absent

  void validate(Eigen::Index n) const;
};

enum class Termination { converged, max_iters };

std::string to_string(Termination t);

struct TraceRecord {
  double loss = 0.0;               // objective at the iterate the step started from
  double signal_rel_change = 0.0;  // |xi_{j+1} - xi_j| / |xi_j|
  double gain_rel_change = 0.0;    // |gamma_{j+1} - gamma_j| / |gamma_j|
  double mu_signal = 0.0;
  double mu_gain = 0.0;
};

struct SolverResult {
  SignalVector x_hat;
  GainVector g_hat;
  int iterations = 0;
  Termination termination = Termination::max_iters;
  std::vector<TraceRecord> trace;
};

// Hook for inspecting every iteration: receives the state the step was taken
// from, the tentative updates before thresholding / projection, and the
// accepted updates. Used by invariant checks; pass nullptr to skip.
class SolveObserver {
 public:
  virtual ~SolveObserver() = default;
  virtual void on_iteration(int j, const SignalVector& xi_prev,
                            const GainVector& gamma_prev,
                            const SignalVector& xi_pre_threshold,
                            const SignalVector& xi_next,
                            const GainVector& gamma_pre_projection,
                            const GainVector& gamma_next, double mu_signal,
                            double mu_gain) = 0;
};

// (1 / mp) sum_l A_l^T diag(gamma) (diag(gamma) A_l xi - y_l)
SignalVector grad_signal(const SnapshotSource& source, const SnapshotSet& y,
                         const SignalVector& xi, const GainVector& gamma);
SignalVector grad_signal(const SensingEnsemble& ensemble, const SnapshotSet& y,
                         const SignalVector& xi, const GainVector& gamma);

// Gain gradient projected onto the zero-mean hyperplane:
// (1 / mp) P sum_l diag(A_l xi) (diag(gamma) A_l xi - y_l)
GainVector grad_gains_projected(const SnapshotSource& source,
                                const SnapshotSet& y, const SignalVector& xi,
                                const GainVector& gamma);
GainVector grad_gains_projected(const SensingEnsemble& ensemble,
                                const SnapshotSet& y, const SignalVector& xi,
                                const GainVector& gamma);

// Exact minimizer of t -> f(xi - t d, gamma); 0 when the direction leaves
// every residual unchanged.
double line_search_signal(const SnapshotSource& source, const SnapshotSet& y,
                          const SignalVector& xi, const GainVector& gamma,
                          const SignalVector& direction);
double line_search_signal(const SensingEnsemble& ensemble, const SnapshotSet& y,
                          const SignalVector& xi, const GainVector& gamma,
                          const SignalVector& direction);

// Exact minimizer of t -> f(xi, gamma - t d).
double line_search_gains(const SnapshotSource& source, const SnapshotSet& y,
                         const SignalVector& xi, const GainVector& gamma,
                         const GainVector& direction);
double line_search_gains(const SensingEnsemble& ensemble, const SnapshotSet& y,
                         const SignalVector& xi, const GainVector& gamma,
                         const GainVector& direction);

// Joint recovery of a k-sparse signal and zero-mean gain offsets by
// alternating exact-line-search gradient steps with hard thresholding on the
// signal block, both steps taken from the same iterate.
SolverResult solve_bc_iht(const SnapshotSource& source, const SnapshotSet& y,
                          const SolverConfig& config,
                          SolveObserver* observer = nullptr);
SolverResult solve_bc_iht(const SensingEnsemble& ensemble, const SnapshotSet& y,
                          const SolverConfig& config,
                          SolveObserver* observer = nullptr);

// Baseline that ignores the gains: plain hard-thresholding recovery on the
// stacked system with gamma frozen at all-ones, same stopping rule.
SolverResult solve_iht_uncalibrated(const SnapshotSource& source,
                                    const SnapshotSet& y,
                                    const SolverConfig& config,
                                    SolveObserver* observer = nullptr);
SolverResult solve_iht_uncalibrated(const SensingEnsemble& ensemble,
                                    const SnapshotSet& y,
                                    const SolverConfig& config,
                                    SolveObserver* observer = nullptr);

struct EvalReport {
  double rel_err_x = 0.0;
  double rel_err_g = 0.0;
  double rsnr_x_db = 0.0;
  double rsnr_g_db = 0.0;
  bool success = false;
};

// Scores an estimate against the ground truth after rescaling both pairs to
// mean-one gains (the model's scaling ambiguity). RSNR = -20 log10(rel err),
// reported as 300 dB at exactly zero error. Success requires both relative
// errors below zeta.
EvalReport evaluate(const SignalVector& truth_x, const GainVector& truth_g,
                    const SolverResult& result, double zeta = 1e-3);

}  // namespace blindcal

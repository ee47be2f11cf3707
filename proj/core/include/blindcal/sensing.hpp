#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

namespace blindcal {

using SignalVector = Eigen::VectorXd;
using GainVector = Eigen::VectorXd;
using SnapshotSet = std::vector<Eigen::VectorXd>;

// Problem sizes: n signal length, m sensors, p snapshots, k sparsity.
struct Dimensions {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Eigen::Index p = 0;
  Eigen::Index k = 0;

  void validate() const;
};

// Stream tags for splitting an instance seed into the independent draws.
inline constexpr std::uint64_t kSignalStream = 1;
inline constexpr std::uint64_t kGainStream = 2;
inline constexpr std::uint64_t kEnsembleStream = 3;

// The p dense sensing matrices, each m x n with i.i.d. standard normal
// entries. The seed they were drawn from is kept so the same matrices can be
// regenerated bit-for-bit without storing them.
struct SensingEnsemble {
  std::vector<Eigen::MatrixXd> matrices;
  std::uint64_t seed = 0;

  Eigen::Index sensors() const {
    return matrices.empty() ? 0 : matrices.front().rows();
  }
  Eigen::Index signal_length() const {
    return matrices.empty() ? 0 : matrices.front().cols();
  }
  Eigen::Index snapshots() const {
    return static_cast<Eigen::Index>(matrices.size());
  }
};

// Uniform access to the sensing matrices for code that should not care
// whether they are held in memory or regenerated from the seed on demand.
class SnapshotSource {
 public:
  virtual ~SnapshotSource() = default;
  virtual Eigen::Index sensors() const = 0;
  virtual Eigen::Index signal_length() const = 0;
  virtual Eigen::Index snapshots() const = 0;
  virtual void with_matrix(
      Eigen::Index l,
      const std::function<void(const Eigen::MatrixXd&)>& fn) const = 0;
};

class DenseSnapshotSource final : public SnapshotSource {
 public:
  explicit DenseSnapshotSource(const SensingEnsemble& ensemble)
      : ensemble_(&ensemble) {}
  Eigen::Index sensors() const override { return ensemble_->sensors(); }
  Eigen::Index signal_length() const override {
    return ensemble_->signal_length();
  }
  Eigen::Index snapshots() const override { return ensemble_->snapshots(); }
  void with_matrix(
      Eigen::Index l,
      const std::function<void(const Eigen::MatrixXd&)>& fn) const override;

 private:
  const SensingEnsemble* ensemble_;
};

// Regenerates each matrix from the seed at every access. Slower, but memory
// use stays at one matrix regardless of p.
class SeededSnapshotSource final : public SnapshotSource {
 public:
  SeededSnapshotSource(Eigen::Index m, Eigen::Index n, Eigen::Index p,
                       std::uint64_t seed);
  Eigen::Index sensors() const override { return m_; }
  Eigen::Index signal_length() const override { return n_; }
  Eigen::Index snapshots() const override { return p_; }
  void with_matrix(
      Eigen::Index l,
      const std::function<void(const Eigen::MatrixXd&)>& fn) const override;

 private:
  Eigen::Index m_, n_, p_;
  std::uint64_t seed_;
};

SensingEnsemble draw_ensemble(const Dimensions& dims, std::uint64_t seed);
SignalVector draw_sparse_signal(Eigen::Index n, Eigen::Index k,
                                std::uint64_t seed);

// Draws gains uniformly from the feasible set: offsets e uniform on
// [-rho, rho]^m, recentred to zero mean, rejected if the recentring pushed
// any entry outside the box, then rescaled so the sum is exactly m.
GainVector draw_gains(Eigen::Index m, double rho, std::uint64_t seed);

// y_l = diag(g) A_l x for every snapshot l.
SnapshotSet synthesize(const SnapshotSource& source, const SignalVector& x,
                       const GainVector& g);
SnapshotSet synthesize(const SensingEnsemble& ensemble, const SignalVector& x,
                       const GainVector& g);

// f(xi, gamma) = (1 / 2mp) sum_l |diag(gamma) A_l xi - y_l|^2
double loss(const SnapshotSource& source, const SnapshotSet& snapshots,
            const SignalVector& xi, const GainVector& gamma);
double loss(const SensingEnsemble& ensemble, const SnapshotSet& snapshots,
            const SignalVector& xi, const GainVector& gamma);

// Unbiased linear initial estimate (1 / mp) sum_l A_l^T y_l.
SignalVector backproject_init(const SnapshotSource& source,
                              const SnapshotSet& snapshots);
SignalVector backproject_init(const SensingEnsemble& ensemble,
                              const SnapshotSet& snapshots);

// A full randomly drawn problem: ground truth, ensemble, and snapshots, all
// derived from one seed so the instance can be reproduced from (dims, rho,
// seed) alone.
struct ProblemInstance {
  Dimensions dims;
  double rho = 0.0;
  std::uint64_t seed = 0;
  SignalVector truth_signal;
  GainVector truth_gains;
  SensingEnsemble ensemble;
  SnapshotSet snapshots;
};

ProblemInstance generate_instance(const Dimensions& dims, double rho,
                                  std::uint64_t seed);

}  // namespace blindcal

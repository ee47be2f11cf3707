#include "blindcal/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "blindcal/rng.hpp"

namespace blindcal {

namespace {

void fill_gaussian(Eigen::MatrixXd& a, std::uint64_t seed) {
  /* row-major fill order pins the bit pattern for regeneration */
  RandomStream stream(seed);
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = stream.gaussian();
}

void check_snapshots(const SnapshotSource& source, const SnapshotSet& y) {
  if (static_cast<Eigen::Index>(y.size()) != source.snapshots())
    throw std::invalid_argument("snapshot count does not match ensemble");
  for (const auto& yl : y)
    if (yl.size() != source.sensors())
      throw std::invalid_argument("snapshot length does not match sensor count");
}

void check_state(const SnapshotSource& source, const SnapshotSet& y,
                 const SignalVector& xi, const GainVector& gamma) {
  check_snapshots(source, y);
  if (xi.size() != source.signal_length())
    throw std::invalid_argument("signal length does not match ensemble");
  if (gamma.size() != source.sensors())
    throw std::invalid_argument("gain length does not match sensor count");
}

}  // namespace

void Dimensions::validate() const {
  if (n < 1 || m < 1 || p < 1)
    throw std::invalid_argument("dimensions must be at least 1");
  if (k < 1 || k > n)
    throw std::invalid_argument("sparsity k must be in [1, n]");
}

void DenseSnapshotSource::with_matrix(
    Eigen::Index l,
    const std::function<void(const Eigen::MatrixXd&)>& fn) const {
  fn(ensemble_->matrices.at(static_cast<std::size_t>(l)));
}

SeededSnapshotSource::SeededSnapshotSource(Eigen::Index m, Eigen::Index n,
                                           Eigen::Index p, std::uint64_t seed)
    : m_(m), n_(n), p_(p), seed_(seed) {
  if (m < 1 || n < 1 || p < 1)
    throw std::invalid_argument("SeededSnapshotSource: sizes must be at least 1");
}

void SeededSnapshotSource::with_matrix(
    Eigen::Index l,
    const std::function<void(const Eigen::MatrixXd&)>& fn) const {
  if (l < 0 || l >= p_)
    throw std::invalid_argument("snapshot index out of range");
  Eigen::MatrixXd a(m_, n_);
  fill_gaussian(a, derive_seed(seed_, static_cast<std::uint64_t>(l)));
  fn(a);
}

SensingEnsemble draw_ensemble(const Dimensions& dims, std::uint64_t seed) {
  dims.validate();
  SensingEnsemble ensemble;
  ensemble.seed = seed;
  ensemble.matrices.resize(static_cast<std::size_t>(dims.p));
  for (Eigen::Index l = 0; l < dims.p; ++l) {
    auto& a = ensemble.matrices[static_cast<std::size_t>(l)];
    a.resize(dims.m, dims.n);
    fill_gaussian(a, derive_seed(seed, static_cast<std::uint64_t>(l)));
  }
  return ensemble;
}

SignalVector draw_sparse_signal(Eigen::Index n, Eigen::Index k,
                                std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("draw_sparse_signal: n must be positive");
  if (k < 1 || k > n)
    throw std::invalid_argument("draw_sparse_signal: k must be in [1, n]");
  RandomStream stream(seed);

  /* uniform k-subset via a partial Fisher-Yates shuffle */
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Eigen::Index>(
                           stream.uniform_below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  std::sort(idx.begin(), idx.begin() + k);

  SignalVector x = SignalVector::Zero(n);
  for (Eigen::Index i = 0; i < k; ++i)
    x[idx[static_cast<std::size_t>(i)]] = stream.gaussian();
  return x;
}

GainVector draw_gains(Eigen::Index m, double rho, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("draw_gains: m must be positive");
  if (!(rho >= 0.0 && rho < 1.0))
    throw std::invalid_argument("draw_gains: rho must be in [0, 1)");
  RandomStream stream(seed);
  Eigen::ArrayXd e(m);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    for (Eigen::Index i = 0; i < m; ++i) e[i] = stream.uniform_symmetric(rho);
    e -= e.mean();
    if ((e.abs() <= rho).all()) {
      GainVector g = (1.0 + e).matrix();
      g *= static_cast<double>(m) / g.sum();
      return g;
    }
  }
  throw std::logic_error("draw_gains: rejection sampling failed to terminate");
}

SnapshotSet synthesize(const SnapshotSource& source, const SignalVector& x,
                       const GainVector& g) {
  if (x.size() != source.signal_length())
    throw std::invalid_argument("synthesize: signal length does not match ensemble");
  if (g.size() != source.sensors())
    throw std::invalid_argument("synthesize: gain length does not match sensor count");
  SnapshotSet y(static_cast<std::size_t>(source.snapshots()));
  for (Eigen::Index l = 0; l < source.snapshots(); ++l)
    source.with_matrix(l, [&](const Eigen::MatrixXd& a) {
      y[static_cast<std::size_t>(l)] = g.cwiseProduct(a * x);
    });
  return y;
}

SnapshotSet synthesize(const SensingEnsemble& ensemble, const SignalVector& x,
                       const GainVector& g) {
  return synthesize(DenseSnapshotSource(ensemble), x, g);
}

double loss(const SnapshotSource& source, const SnapshotSet& snapshots,
            const SignalVector& xi, const GainVector& gamma) {
  check_state(source, snapshots, xi, gamma);
  double acc = 0.0;
  for (Eigen::Index l = 0; l < source.snapshots(); ++l)
    source.with_matrix(l, [&](const Eigen::MatrixXd& a) {
      acc += (gamma.cwiseProduct(a * xi) - snapshots[static_cast<std::size_t>(l)])
                 .squaredNorm();
    });
  return acc / (2.0 * static_cast<double>(source.sensors()) *
                static_cast<double>(source.snapshots()));
}

double loss(const SensingEnsemble& ensemble, const SnapshotSet& snapshots,
            const SignalVector& xi, const GainVector& gamma) {
  return loss(DenseSnapshotSource(ensemble), snapshots, xi, gamma);
}

SignalVector backproject_init(const SnapshotSource& source,
                              const SnapshotSet& snapshots) {
  check_snapshots(source, snapshots);
  SignalVector acc = SignalVector::Zero(source.signal_length());
  for (Eigen::Index l = 0; l < source.snapshots(); ++l)
    source.with_matrix(l, [&](const Eigen::MatrixXd& a) {
      acc.noalias() += a.transpose() * snapshots[static_cast<std::size_t>(l)];
    });
  return acc / (static_cast<double>(source.sensors()) *
                static_cast<double>(source.snapshots()));
}

SignalVector backproject_init(const SensingEnsemble& ensemble,
                              const SnapshotSet& snapshots) {
  return backproject_init(DenseSnapshotSource(ensemble), snapshots);
}

ProblemInstance generate_instance(const Dimensions& dims, double rho,
                                  std::uint64_t seed) {
  dims.validate();
  ProblemInstance inst;
  inst.dims = dims;
  inst.rho = rho;
  inst.seed = seed;
  inst.truth_signal =
      draw_sparse_signal(dims.n, dims.k, derive_seed(seed, kSignalStream));
  inst.truth_gains = draw_gains(dims.m, rho, derive_seed(seed, kGainStream));
  inst.ensemble = draw_ensemble(dims, derive_seed(seed, kEnsembleStream));
  inst.snapshots = synthesize(inst.ensemble, inst.truth_signal, inst.truth_gains);
  return inst;
}

}  // namespace blindcal

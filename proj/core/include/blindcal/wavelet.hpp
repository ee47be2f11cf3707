#pragma once

#include <Eigen/Dense>
#include <array>
#include <utility>

namespace blindcal {

// Orthonormal multilevel 2D Daubechies-4 transform with circular boundary
// handling, acting on square images stored row-major as vectors of length
// side^2. analyze and synthesize are exact inverses and preserve energy, so
// the implied change of basis is orthogonal.
class WaveletBasis {
 public:
  // full depth: coarsest approximation band of 2 x 2
  explicit WaveletBasis(Eigen::Index side);
  WaveletBasis(Eigen::Index side, Eigen::Index levels);

  static Eigen::Index max_levels(Eigen::Index side);

  Eigen::Index side() const { return side_; }
  Eigen::Index levels() const { return levels_; }
  Eigen::Index pixel_count() const { return side_ * side_; }

  // image -> coefficients (the adjoint of synthesize)
  Eigen::VectorXd analyze(const Eigen::Ref<const Eigen::VectorXd>& image) const;

  // coefficients -> image
  Eigen::VectorXd synthesize(const Eigen::Ref<const Eigen::VectorXd>& coeffs) const;

  // best k-term approximation in this basis; returns the approximated image
  // and its thresholded coefficient vector
  std::pair<Eigen::VectorXd, Eigen::VectorXd> sparsify_top_k(
      const Eigen::Ref<const Eigen::VectorXd>& image, Eigen::Index k) const;

 private:
  Eigen::Index side_ = 0;
  Eigen::Index levels_ = 0;
  std::array<double, 4> lowpass_{};
  std::array<double, 4> highpass_{};
};

}  // namespace blindcal

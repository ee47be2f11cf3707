#include "blindcal/wavelet.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "blindcal/geometry.hpp"

namespace blindcal {

namespace {

bool is_power_of_two(Eigen::Index v) { return v > 0 && (v & (v - 1)) == 0; }

/* one analysis sweep over a strided length-len slice: first half approx,
   second half detail */
void analyze_step(double* data, Eigen::Index stride, Eigen::Index len,
                  const std::array<double, 4>& h, const std::array<double, 4>& g,
                  std::vector<double>& tmp) {
  const Eigen::Index half = len / 2;
  for (Eigen::Index j = 0; j < half; ++j) {
    double a = 0.0, d = 0.0;
    for (Eigen::Index t = 0; t < 4; ++t) {
      const double s = data[((2 * j + t) % len) * stride];
      a += h[static_cast<std::size_t>(t)] * s;
      d += g[static_cast<std::size_t>(t)] * s;
    }
    tmp[static_cast<std::size_t>(j)] = a;
    tmp[static_cast<std::size_t>(half + j)] = d;
  }
  for (Eigen::Index i = 0; i < len; ++i)
    data[i * stride] = tmp[static_cast<std::size_t>(i)];
}

/* the adjoint of analyze_step, which inverts it exactly for an orthonormal
   filter pair */
void synthesize_step(double* data, Eigen::Index stride, Eigen::Index len,
                     const std::array<double, 4>& h,
                     const std::array<double, 4>& g, std::vector<double>& tmp) {
  const Eigen::Index half = len / 2;
  std::fill(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(len), 0.0);
  for (Eigen::Index j = 0; j < half; ++j) {
    const double a = data[j * stride];
    const double d = data[(half + j) * stride];
    for (Eigen::Index t = 0; t < 4; ++t)
      tmp[static_cast<std::size_t>((2 * j + t) % len)] +=
          h[static_cast<std::size_t>(t)] * a + g[static_cast<std::size_t>(t)] * d;
  }
  for (Eigen::Index i = 0; i < len; ++i)
    data[i * stride] = tmp[static_cast<std::size_t>(i)];
}

}  // namespace

Eigen::Index WaveletBasis::max_levels(Eigen::Index side) {
  if (!is_power_of_two(side) || side < 4)
    throw std::invalid_argument("WaveletBasis: side must be a power of two >= 4");
  Eigen::Index levels = 0;
  while ((side >> (levels + 1)) >= 2) ++levels;
  return levels;
}

WaveletBasis::WaveletBasis(Eigen::Index side)
    : WaveletBasis(side, max_levels(side)) {}

WaveletBasis::WaveletBasis(Eigen::Index side, Eigen::Index levels)
    : side_(side), levels_(levels) {
  if (!is_power_of_two(side) || side < 4)
    throw std::invalid_argument("WaveletBasis: side must be a power of two >= 4");
  if (levels < 1)
    throw std::invalid_argument("WaveletBasis: levels must be at least 1");
  if ((side >> levels) < 2)
    throw std::invalid_argument(
        "WaveletBasis: too many levels, coarsest band would drop below half "
        "the filter length");

  const double s3 = std::sqrt(3.0);
  const double norm = 4.0 * std::numbers::sqrt2;
  lowpass_ = {(1.0 + s3) / norm, (3.0 + s3) / norm, (3.0 - s3) / norm,
              (1.0 - s3) / norm};
  /* alternating-sign reversal of the low-pass filter */
  for (std::size_t i = 0; i < 4; ++i)
    highpass_[i] = (i % 2 == 0 ? 1.0 : -1.0) * lowpass_[3 - i];
}

Eigen::VectorXd WaveletBasis::analyze(
    const Eigen::Ref<const Eigen::VectorXd>& image) const {
  if (image.size() != pixel_count())
    throw std::invalid_argument("analyze: image size does not match basis");
  Eigen::VectorXd w = image;
  std::vector<double> tmp(static_cast<std::size_t>(side_));
  for (Eigen::Index lev = 0; lev < levels_; ++lev) {
    const Eigen::Index b = side_ >> lev;
    for (Eigen::Index r = 0; r < b; ++r)
      analyze_step(w.data() + r * side_, 1, b, lowpass_, highpass_, tmp);
    for (Eigen::Index c = 0; c < b; ++c)
      analyze_step(w.data() + c, side_, b, lowpass_, highpass_, tmp);
  }
  return w;
}

Eigen::VectorXd WaveletBasis::synthesize(
    const Eigen::Ref<const Eigen::VectorXd>& coeffs) const {
  if (coeffs.size() != pixel_count())
    throw std::invalid_argument("synthesize: coefficient size does not match basis");
  Eigen::VectorXd w = coeffs;
  std::vector<double> tmp(static_cast<std::size_t>(side_));
  for (Eigen::Index lev = levels_ - 1; lev >= 0; --lev) {
    const Eigen::Index b = side_ >> lev;
    for (Eigen::Index c = 0; c < b; ++c)
      synthesize_step(w.data() + c, side_, b, lowpass_, highpass_, tmp);
    for (Eigen::Index r = 0; r < b; ++r)
      synthesize_step(w.data() + r * side_, 1, b, lowpass_, highpass_, tmp);
  }
  return w;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> WaveletBasis::sparsify_top_k(
    const Eigen::Ref<const Eigen::VectorXd>& image, Eigen::Index k) const {
  Eigen::VectorXd coeffs = hard_threshold(analyze(image), k);
  return {synthesize(coeffs), coeffs};
}

}  // namespace blindcal

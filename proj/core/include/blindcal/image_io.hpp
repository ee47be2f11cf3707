#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

namespace blindcal {

// Interleaved row-major pixels scaled to [0, 1]; 1 channel (gray) or 3 (RGB).
struct Image {
  Eigen::Index width = 0;
  Eigen::Index height = 0;
  Eigen::Index channels = 0;
  std::vector<double> pixels;

  double& at(Eigen::Index row, Eigen::Index col, Eigen::Index channel) {
    return pixels[static_cast<std::size_t>((row * width + col) * channels +
                                           channel)];
  }
  double at(Eigen::Index row, Eigen::Index col, Eigen::Index channel) const {
    return pixels[static_cast<std::size_t>((row * width + col) * channels +
                                           channel)];
  }

  // one channel as a row-major vector of length width * height
  Eigen::VectorXd channel(Eigen::Index c) const;
  void set_channel(Eigen::Index c, const Eigen::VectorXd& values);
};

// Binary P5 (gray) and P6 (RGB) only, 8-bit samples.
Image read_pnm(const std::filesystem::path& path);
void write_pnm(const Image& image, const std::filesystem::path& path);

// Center-crops to the largest square, then bilinearly resamples to
// side x side.
Image resize_to_square(const Image& image, Eigen::Index side);

// Deterministic piecewise-smooth grayscale target: a gradient background
// with a disk, a rectangle, and a smooth bump. Compressible in a wavelet
// basis, which is what the reconstruction experiments need.
Image synthetic_test_image(Eigen::Index side);

}  // namespace blindcal

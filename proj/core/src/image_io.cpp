#include "blindcal/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "blindcal/errors.hpp"

namespace blindcal {

namespace {

int next_pnm_int(std::istream& in, const std::filesystem::path& path) {
  /* skip whitespace and '#' comment lines between header tokens */
  for (;;) {
    const int c = in.peek();
    if (c == EOF) throw IoError("truncated header: " + path.string());
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
      continue;
    }
    break;
  }
  int value = 0;
  if (!(in >> value)) throw IoError("malformed header: " + path.string());
  return value;
}

}  // namespace

Eigen::VectorXd Image::channel(Eigen::Index c) const {
  Eigen::VectorXd v(width * height);
  for (Eigen::Index i = 0; i < width * height; ++i)
    v[i] = pixels[static_cast<std::size_t>(i * channels + c)];
  return v;
}

void Image::set_channel(Eigen::Index c, const Eigen::VectorXd& values) {
  if (values.size() != width * height)
    throw std::invalid_argument("set_channel: size mismatch");
  for (Eigen::Index i = 0; i < width * height; ++i)
    pixels[static_cast<std::size_t>(i * channels + c)] = values[i];
}

Image read_pnm(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open: " + path.string());
  std::string magic;
  file >> magic;
  Eigen::Index channels = 0;
  if (magic == "P5")
    channels = 1;
  else if (magic == "P6")
    channels = 3;
  else
    throw IoError("unsupported format (want binary P5 or P6): " + path.string());

  const int width = next_pnm_int(file, path);
  const int height = next_pnm_int(file, path);
  const int maxval = next_pnm_int(file, path);
  if (width < 1 || height < 1) throw IoError("bad image size: " + path.string());
  if (maxval < 1 || maxval > 255)
    throw IoError("only 8-bit samples supported: " + path.string());
  file.get();  // single whitespace byte before the raster

  Image img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  const std::size_t count =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
      static_cast<std::size_t>(channels);
  std::vector<unsigned char> raw(count);
  file.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(file.gcount()) != count)
    throw IoError("truncated raster: " + path.string());
  img.pixels.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    img.pixels[i] = raw[i] / static_cast<double>(maxval);
  return img;
}

void write_pnm(const Image& image, const std::filesystem::path& path) {
  if (image.channels != 1 && image.channels != 3)
    throw std::invalid_argument("write_pnm: need 1 or 3 channels");
  if (image.width < 1 || image.height < 1)
    throw std::invalid_argument("write_pnm: empty image");
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open for writing: " + path.string());
  file << (image.channels == 1 ? "P5" : "P6") << '\n'
       << image.width << ' ' << image.height << '\n'
       << 255 << '\n';
  std::vector<unsigned char> raw(image.pixels.size());
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const double v = std::clamp(image.pixels[i], 0.0, 1.0);
    raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  file.write(reinterpret_cast<const char*>(raw.data()),
             static_cast<std::streamsize>(raw.size()));
  if (!file) throw IoError("write failed: " + path.string());
}

Image resize_to_square(const Image& image, Eigen::Index side) {
  if (side < 1) throw std::invalid_argument("resize_to_square: side must be positive");
  const Eigen::Index s = std::min(image.width, image.height);
  if (s < 1) throw std::invalid_argument("resize_to_square: empty image");
  const Eigen::Index off_x = (image.width - s) / 2;
  const Eigen::Index off_y = (image.height - s) / 2;

  Image out;
  out.width = side;
  out.height = side;
  out.channels = image.channels;
  out.pixels.resize(static_cast<std::size_t>(side * side * image.channels));
  const double scale = static_cast<double>(s) / static_cast<double>(side);
  for (Eigen::Index r = 0; r < side; ++r) {
    for (Eigen::Index c = 0; c < side; ++c) {
      /* bilinear sample at the output pixel center */
      const double sy = (static_cast<double>(r) + 0.5) * scale - 0.5;
      const double sx = (static_cast<double>(c) + 0.5) * scale - 0.5;
      const double fy = std::clamp(sy, 0.0, static_cast<double>(s - 1));
      const double fx = std::clamp(sx, 0.0, static_cast<double>(s - 1));
      const Eigen::Index y0 = static_cast<Eigen::Index>(std::floor(fy));
      const Eigen::Index x0 = static_cast<Eigen::Index>(std::floor(fx));
      const Eigen::Index y1 = std::min(y0 + 1, s - 1);
      const Eigen::Index x1 = std::min(x0 + 1, s - 1);
      const double wy = fy - static_cast<double>(y0);
      const double wx = fx - static_cast<double>(x0);
      for (Eigen::Index ch = 0; ch < image.channels; ++ch) {
        const double v00 = image.at(off_y + y0, off_x + x0, ch);
        const double v01 = image.at(off_y + y0, off_x + x1, ch);
        const double v10 = image.at(off_y + y1, off_x + x0, ch);
        const double v11 = image.at(off_y + y1, off_x + x1, ch);
        out.at(r, c, ch) = (1.0 - wy) * ((1.0 - wx) * v00 + wx * v01) +
                           wy * ((1.0 - wx) * v10 + wx * v11);
      }
    }
  }
  return out;
}

Image synthetic_test_image(Eigen::Index side) {
  if (side < 1)
    throw std::invalid_argument("synthetic_test_image: side must be positive");
  Image img;
  img.width = side;
  img.height = side;
  img.channels = 1;
  img.pixels.resize(static_cast<std::size_t>(side * side));
  const double d = static_cast<double>(side);
  for (Eigen::Index r = 0; r < side; ++r) {
    for (Eigen::Index c = 0; c < side; ++c) {
      const double x = (static_cast<double>(c) + 0.5) / d;
      const double y = (static_cast<double>(r) + 0.5) / d;
      double v = 0.35 + 0.25 * (x + y) / 2.0;
      const double dx = x - 0.35, dy = y - 0.4;
      if (dx * dx + dy * dy < 0.22 * 0.22) v = 0.85;
      if (x > 0.55 && x < 0.8 && y > 0.15 && y < 0.45) v = 0.15;
      const double bx = x - 0.7, by = y - 0.75;
      v += 0.25 * std::exp(-(bx * bx + by * by) / (2.0 * 0.12 * 0.12));
      img.at(r, c, 0) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

}  // namespace blindcal

#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "lcs/cauchy_green.hpp"
#include "lcs/grid.hpp"

namespace lcs::test {

/// Tensor field sampled from a closure over [xmin,xmax]x[ymin,ymax].
inline SymmetricTensorField sample_tensor(const std::function<SymmetricTensor<double>(const Vec2&)>& fn, double xmin,
                                          double xmax, double ymin, double ymax, int nx, int ny) {
  SymmetricTensorField tf;
  tf.x = Axis::linspace(xmin, xmax, nx, "x");
  tf.y = Axis::linspace(ymin, ymax, ny, "y");
  tf.c11 = ScalarGrid2D(tf.x, tf.y);
  tf.c12 = ScalarGrid2D(tf.x, tf.y);
  tf.c22 = ScalarGrid2D(tf.x, tf.y);
  tf.valid = MaskGrid(tf.x, tf.y, 1);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const auto c = fn(Vec2(tf.x[i], tf.y[j]));
      tf.c11(i, j) = c.c11;
      tf.c12(i, j) = c.c12;
      tf.c22(i, j) = c.c22;
    }
  }
  return tf;
}

/// Tensor with eigenvalues m -+ k r^2/2 whose major direction is the tangent
/// of circles about the origin, rotated by `twist` (a spiral when nonzero).
inline SymmetricTensor<double> swirl_tensor(const Vec2& p, double m = 5.0, double k = 1.0, double twist = 0.0) {
  const double a = p.x() * p.x() - p.y() * p.y();
  const double b = 2 * p.x() * p.y();
  const double c2 = std::cos(2 * twist), s2 = std::sin(2 * twist);
  // doubled major angle 2*phi + pi + 2*twist
  const double d = -k * (a * c2 - b * s2);
  const double e = -k * (a * s2 + b * c2);
  return {m + d / 2, e / 2, m - d / 2};
}

/// Scratch directory removed on scope exit.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("lcs_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace lcs::test

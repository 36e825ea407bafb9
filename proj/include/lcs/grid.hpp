#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

namespace lcs {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

using Vec2 = Vector2<double>;
using Mat2 = Matrix2<double>;

/// Strictly increasing coordinate axis, either uniform or explicit.
class Axis {
 public:
  Axis() = default;
  explicit Axis(std::vector<double> coords, std::string name = {}, std::string units = {});

  static Axis uniform(double start, double step, int size, std::string name = {},
                      std::string units = {});
  /// `size` nodes spanning [lo, hi] inclusive.
  static Axis linspace(double lo, double hi, int size, std::string name = {},
                       std::string units = {});

  int size() const { return static_cast<int>(coords_.size()); }
  double operator[](int i) const { return coords_[static_cast<std::size_t>(i)]; }
  double front() const { return coords_.front(); }
  double back() const { return coords_.back(); }
  const std::vector<double>& coords() const { return coords_; }

  bool is_uniform() const { return uniform_; }
  /// Spacing of a uniform axis (mean spacing otherwise).
  double step() const;

  bool contains(double x) const { return size() > 0 && x >= front() && x <= back(); }

  /// Cell index i in [0, size-2] and fraction in [0,1] with x = c[i] + frac*(c[i+1]-c[i]).
  std::optional<std::pair<int, double>> locate(double x) const;

  const std::string& name() const { return name_; }
  const std::string& units() const { return units_; }
  void set_name(std::string n) { name_ = std::move(n); }
  void set_units(std::string u) { units_ = std::move(u); }

  bool operator==(const Axis& o) const { return coords_ == o.coords_; }

 private:
  std::vector<double> coords_;
  bool uniform_ = true;
  std::string name_;
  std::string units_;
};

/// Row-major storage (rows = y, columns = x) of scalar samples on a rectilinear grid.
template <typename Scalar>
class Grid2D {
 public:
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Grid2D() = default;
  Grid2D(Axis x, Axis y, Scalar fill = Scalar(0))
      : x_(std::move(x)), y_(std::move(y)), values_(Storage::Constant(y_.size(), x_.size(), fill)) {}

  const Axis& x_axis() const { return x_; }
  const Axis& y_axis() const { return y_; }
  int nx() const { return x_.size(); }
  int ny() const { return y_.size(); }

  Scalar& operator()(int ix, int iy) { return values_(iy, ix); }
  Scalar operator()(int ix, int iy) const { return values_(iy, ix); }

  Vec2 node(int ix, int iy) const { return {x_[ix], y_[iy]}; }

  Storage& values() { return values_; }
  const Storage& values() const { return values_; }

  bool same_shape(const Grid2D& o) const { return x_ == o.x_ && y_ == o.y_; }

 private:
  Axis x_;
  Axis y_;
  Storage values_;
};

using ScalarGrid2D = Grid2D<double>;
using MaskGrid = Grid2D<unsigned char>;

/// Cell containing p and local coordinates in [0,1]^2, or nothing outside the grid.
struct CellLocation {
  int ix;
  int iy;
  double s;
  double t;
};

inline std::optional<CellLocation> locate_cell(const Axis& x, const Axis& y, const Vec2& p) {
  auto lx = x.locate(p.x());
  auto ly = y.locate(p.y());
  if (!lx || !ly) return std::nullopt;
  return CellLocation{lx->first, ly->first, lx->second, ly->second};
}

template <typename Scalar>
Scalar bilinear_weights_apply(Scalar v00, Scalar v10, Scalar v01, Scalar v11, double s, double t) {
  return static_cast<Scalar>((1 - s) * (1 - t)) * v00 + static_cast<Scalar>(s * (1 - t)) * v10 +
         static_cast<Scalar>((1 - s) * t) * v01 + static_cast<Scalar>(s * t) * v11;
}

/// Bilinear interpolation; nothing outside the grid.
template <typename Scalar>
std::optional<Scalar> bilinear(const Grid2D<Scalar>& g, const Vec2& p) {
  auto c = locate_cell(g.x_axis(), g.y_axis(), p);
  if (!c) return std::nullopt;
  return bilinear_weights_apply(g(c->ix, c->iy), g(c->ix + 1, c->iy), g(c->ix, c->iy + 1),
                                g(c->ix + 1, c->iy + 1), c->s, c->t);
}

}  // namespace lcs

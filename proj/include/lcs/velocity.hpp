#pragma once

#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "lcs/grid.hpp"

namespace lcs {

struct Bounds {
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool contains(const Vec2& p) const {
    return p.x() >= xmin && p.x() <= xmax && p.y() >= ymin && p.y() <= ymax;
  }
};

/// Time-dependent planar velocity field. Implementations are immutable and
/// safe to evaluate concurrently.
class VelocityField {
 public:
  virtual ~VelocityField() = default;
  /// Velocity at (t, x). Gridded fields throw OutOfBounds outside their data.
  virtual Vec2 operator()(double t, const Vec2& x) const = 0;
  virtual Bounds spatial_bounds() const = 0;
  /// Whether (t, x) lies in the region where trajectories may continue.
  virtual bool contains(double t, const Vec2& x) const;
};

// ---------------------------------------------------------------------------
// Analytic double gyre

struct DoubleGyreParams {
  double A = 0.2;
  double epsilon = 0.2;
  double omega = std::numbers::pi / 5;

  /// Throws ConfigError on A <= 0, epsilon outside [0, 0.5), omega <= 0.
  void validate() const;
};

/// f(t,x) = eps sin(wt) x^2 + (1 - 2 eps sin(wt)) x and its x-derivative.
template <typename Scalar>
Vector2<Scalar> double_gyre_forcing(const DoubleGyreParams& p, Scalar t, Scalar x) {
  using std::sin;
  const Scalar a = Scalar(p.epsilon) * sin(Scalar(p.omega) * t);
  const Scalar b = Scalar(1) - Scalar(2) * a;
  return {a * x * x + b * x, Scalar(2) * a * x + b};
}

template <typename Scalar>
Vector2<Scalar> eval_double_gyre(const DoubleGyreParams& p, Scalar t, Scalar x, Scalar y) {
  using std::cos;
  using std::sin;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Vector2<Scalar> f = double_gyre_forcing(p, t, x);
  const Scalar amp = pi * Scalar(p.A);
  return {-amp * sin(pi * f[0]) * cos(pi * y), amp * cos(pi * f[0]) * sin(pi * y) * f[1]};
}

class DoubleGyreField final : public VelocityField {
 public:
  /// The full two-gyre domain [0,2]x[0,1] is invariant; the left gyre occupies [0,1]x[0,1].
  explicit DoubleGyreField(DoubleGyreParams p = {}, Bounds domain = {0, 2, 0, 1});
  Vec2 operator()(double t, const Vec2& x) const override {
    return eval_double_gyre(params_, t, x.x(), x.y());
  }
  Bounds spatial_bounds() const override { return domain_; }
  const DoubleGyreParams& params() const { return params_; }

 private:
  DoubleGyreParams params_;
  Bounds domain_;
};

/// Wraps a callable; convenient for synthetic fields in tests and tools.
class FunctionField final : public VelocityField {
 public:
  using Fn = std::function<Vec2(double, const Vec2&)>;
  FunctionField(Fn fn, Bounds domain) : fn_(std::move(fn)), domain_(domain) {}
  Vec2 operator()(double t, const Vec2& x) const override { return fn_(t, x); }
  Bounds spatial_bounds() const override { return domain_; }

 private:
  Fn fn_;
  Bounds domain_;
};

// ---------------------------------------------------------------------------
// Gridded data

/// Sequence of 2D slices sharing spatial axes, indexed by a time axis.
struct GridSeries {
  Axis time;
  std::vector<ScalarGrid2D> slices;

  const Axis& x_axis() const { return slices.front().x_axis(); }
  const Axis& y_axis() const { return slices.front().y_axis(); }
  /// Throws FormatError on inconsistent shapes.
  void validate() const;
};

/// Velocity samples u, v on a (time, y, x) grid. Missing data is NaN.
/// Interpolation is cubic convolution in space and linear in time.
class GriddedVelocityField final : public VelocityField {
 public:
  GriddedVelocityField(GridSeries u, GridSeries v);

  Vec2 operator()(double t, const Vec2& x) const override { return interpolate(t, x); }
  Bounds spatial_bounds() const override;
  bool contains(double t, const Vec2& x) const override;

  /// Throws OutOfBounds naming the offending axis ("time", x or y axis name, or "mask").
  Vec2 interpolate(double t, const Vec2& x) const;

  const GridSeries& u() const { return u_; }
  const GridSeries& v() const { return v_; }
  const Axis& time_axis() const { return u_.time; }
  const Axis& x_axis() const { return u_.x_axis(); }
  const Axis& y_axis() const { return u_.y_axis(); }

 private:
  Vec2 spatial(int slice, const Vec2& x) const;

  GridSeries u_;
  GridSeries v_;
};

/// Free-function form of GriddedVelocityField::interpolate.
inline Vec2 interpolate_velocity(const GriddedVelocityField& field, double t, double x, double y) {
  return field.interpolate(t, Vec2(x, y));
}

/// Cubic convolution (Keys, a = -1/2) of a uniform-axis grid; exact for quadratics.
double cubic_convolution(const ScalarGrid2D& g, const Vec2& p);

// ---------------------------------------------------------------------------
// Geostrophic velocities from sea-surface height

struct PhysicalConstants {
  double g = 9.81;             // m s^-2
  double R = 6371.0e3;         // m
  double Omega = 7.2921159e-5;  // rad s^-1

  void validate() const;
  double coriolis(double lat_rad) const;
};

struct GeostrophicOptions {
  /// Minimum admissible |f(theta) cos(theta)| in s^-1.
  double coriolis_floor = 1e-6;
};

/// Geostrophic surface velocities in degrees/day from SSH h (metres) on a
/// lon/lat grid in degrees with time in days. Central differences inside,
/// second-order one-sided at the edges. Throws DegenerateLatitude.
GriddedVelocityField geostrophic_from_ssh(const GridSeries& h, const PhysicalConstants& consts = {},
                                          const GeostrophicOptions& opts = {});

/// Derivative of a slice along x (axis = 0) or y (axis = 1) per unit coordinate.
ScalarGrid2D finite_difference(const ScalarGrid2D& g, int axis);

}  // namespace lcs

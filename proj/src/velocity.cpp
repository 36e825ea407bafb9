#include "lcs/velocity.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "lcs/errors.hpp"

namespace lcs {

bool VelocityField::contains(double /*t*/, const Vec2& x) const { return spatial_bounds().contains(x); }

void DoubleGyreParams::validate() const {
  if (!(A > 0)) throw ConfigError("double gyre: A must be positive");
  if (!(epsilon >= 0 && epsilon < 0.5)) throw ConfigError("double gyre: epsilon must lie in [0, 0.5)");
  if (!(omega > 0)) throw ConfigError("double gyre: omega must be positive");
}

DoubleGyreField::DoubleGyreField(DoubleGyreParams p, Bounds domain) : params_(p), domain_(domain) {
  params_.validate();
}

void GridSeries::validate() const {
  if (slices.empty()) throw FormatError("grid series has no slices");
  if (static_cast<int>(slices.size()) != time.size())
    throw FormatError("grid series: slice count does not match time axis");
  for (const auto& s : slices) {
    if (!s.same_shape(slices.front())) throw FormatError("grid series: slices differ in shape");
  }
}

GriddedVelocityField::GriddedVelocityField(GridSeries u, GridSeries v) : u_(std::move(u)), v_(std::move(v)) {
  u_.validate();
  v_.validate();
  if (!(u_.time == v_.time) || !u_.slices.front().same_shape(v_.slices.front()))
    throw FormatError("u and v grids differ in shape");
  for (const Axis* ax : {&x_axis(), &y_axis()}) {
    if (ax->size() < 3) throw FormatError("spatial axes need at least 3 nodes");
    if (!ax->is_uniform()) throw FormatError("spatial axes must be uniform for cubic interpolation");
  }
}

Bounds GriddedVelocityField::spatial_bounds() const {
  return {x_axis().front(), x_axis().back(), y_axis().front(), y_axis().back()};
}

bool GriddedVelocityField::contains(double t, const Vec2& x) const {
  if (!spatial_bounds().contains(x)) return false;
  const Axis& ta = time_axis();
  if (ta.size() > 1 && !ta.contains(t)) return false;
  try {
    const Vec2 w = interpolate(t, x);
    return std::isfinite(w.x()) && std::isfinite(w.y());
  } catch (const OutOfBounds&) {
    return false;
  }
}

namespace {

std::array<double, 4> keys_weights(double s) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  return {0.5 * (-s3 + 2 * s2 - s), 0.5 * (3 * s3 - 5 * s2 + 2), 0.5 * (-3 * s3 + 4 * s2 + s),
          0.5 * (s3 - s2)};
}

// Sample with Keys' boundary extension: f(-1) = 3f(0) - 3f(1) + f(2).
double sample_x(const ScalarGrid2D& g, int ix, int iy) {
  const int n = g.nx();
  if (ix < 0) return 3 * g(0, iy) - 3 * g(1, iy) + g(2, iy);
  if (ix >= n) return 3 * g(n - 1, iy) - 3 * g(n - 2, iy) + g(n - 3, iy);
  return g(ix, iy);
}

double row_value(const ScalarGrid2D& g, int ix, const std::array<double, 4>& wx, int iy) {
  double acc = 0;
  for (int k = 0; k < 4; ++k) {
    const double w = wx[static_cast<std::size_t>(k)];
    if (w != 0.0) acc += w * sample_x(g, ix - 1 + k, iy);
  }
  return acc;
}

}  // namespace

double cubic_convolution(const ScalarGrid2D& g, const Vec2& p) {
  auto lx = g.x_axis().locate(p.x());
  if (!lx) throw OutOfBounds(g.x_axis().name().empty() ? "x" : g.x_axis().name(), p.x());
  auto ly = g.y_axis().locate(p.y());
  if (!ly) throw OutOfBounds(g.y_axis().name().empty() ? "y" : g.y_axis().name(), p.y());
  const auto [ix, sx] = *lx;
  const auto [iy, sy] = *ly;
  const auto wx = keys_weights(sx);
  const auto wy = keys_weights(sy);
  const int ny = g.ny();
  std::array<double, 4> rows{};
  for (int k = 0; k < 4; ++k) {
    if (wy[static_cast<std::size_t>(k)] == 0.0) continue;
    const int jy = iy - 1 + k;
    if (jy < 0) {
      rows[static_cast<std::size_t>(k)] =
          3 * row_value(g, ix, wx, 0) - 3 * row_value(g, ix, wx, 1) + row_value(g, ix, wx, 2);
    } else if (jy >= ny) {
      rows[static_cast<std::size_t>(k)] = 3 * row_value(g, ix, wx, ny - 1) -
                                          3 * row_value(g, ix, wx, ny - 2) +
                                          row_value(g, ix, wx, ny - 3);
    } else {
      rows[static_cast<std::size_t>(k)] = row_value(g, ix, wx, jy);
    }
  }
  double acc = 0;
  for (int k = 0; k < 4; ++k) {
    if (wy[static_cast<std::size_t>(k)] != 0.0) acc += wy[static_cast<std::size_t>(k)] * rows[static_cast<std::size_t>(k)];
  }
  return acc;
}

Vec2 GriddedVelocityField::spatial(int slice, const Vec2& x) const {
  const auto s = static_cast<std::size_t>(slice);
  return {cubic_convolution(u_.slices[s], x), cubic_convolution(v_.slices[s], x)};
}

Vec2 GriddedVelocityField::interpolate(double t, const Vec2& x) const {
  const Axis& ta = time_axis();
  Vec2 w;
  if (ta.size() == 1) {
    // a single slice is treated as a steady field
    w = spatial(0, x);
  } else {
    auto lt = ta.locate(t);
    if (!lt) throw OutOfBounds(ta.name().empty() ? "time" : ta.name(), t);
    const auto [it, st] = *lt;
    if (st == 0.0) {
      w = spatial(it, x);
    } else if (st == 1.0) {
      w = spatial(it + 1, x);
    } else {
      w = (1 - st) * spatial(it, x) + st * spatial(it + 1, x);
    }
  }
  if (!std::isfinite(w.x()) || !std::isfinite(w.y())) throw OutOfBounds("mask", x.x());
  return w;
}

// ---------------------------------------------------------------------------

void PhysicalConstants::validate() const {
  if (!(g > 0) || !(R > 0) || !(Omega > 0)) throw ConfigError("physical constants must be positive");
}

double PhysicalConstants::coriolis(double lat_rad) const { return 2 * Omega * std::sin(lat_rad); }

ScalarGrid2D finite_difference(const ScalarGrid2D& g, int axis) {
  ScalarGrid2D d(g.x_axis(), g.y_axis());
  const Axis& ax = axis == 0 ? g.x_axis() : g.y_axis();
  const int n = ax.size();
  if (n < 3) throw FormatError("finite differences need at least 3 nodes");
  const double h = ax.step();
  auto at = [&](int i, int j) { return axis == 0 ? g(i, j) : g(j, i); };
  const int other = axis == 0 ? g.ny() : g.nx();
  for (int j = 0; j < other; ++j) {
    for (int i = 0; i < n; ++i) {
      double v;
      if (i == 0) {
        v = (4 * (at(1, j) - at(0, j)) - (at(2, j) - at(0, j))) / (2 * h);
      } else if (i == n - 1) {
        v = (4 * (at(n - 1, j) - at(n - 2, j)) - (at(n - 1, j) - at(n - 3, j))) / (2 * h);
      } else {
        v = (at(i + 1, j) - at(i - 1, j)) / (2 * h);
      }
      if (axis == 0) {
        d(i, j) = v;
      } else {
        d(j, i) = v;
      }
    }
  }
  return d;
}

GriddedVelocityField geostrophic_from_ssh(const GridSeries& h, const PhysicalConstants& consts,
                                          const GeostrophicOptions& opts) {
  h.validate();
  consts.validate();
  constexpr double deg = std::numbers::pi / 180.0;
  constexpr double seconds_per_day = 86400.0;
  const Axis& lat = h.y_axis();
  if (!h.x_axis().is_uniform() || !lat.is_uniform())
    throw FormatError("geostrophic_from_ssh needs uniform lon/lat axes");

  // per-latitude factor g / (R^2 f cos(theta)), then rad/s -> deg/day
  std::vector<double> factor(static_cast<std::size_t>(lat.size()));
  for (int j = 0; j < lat.size(); ++j) {
    const double theta = lat[j] * deg;
    const double fc = consts.coriolis(theta) * std::cos(theta);
    if (!(std::abs(fc) >= opts.coriolis_floor)) throw DegenerateLatitude(lat[j]);
    factor[static_cast<std::size_t>(j)] = consts.g / (consts.R * consts.R * fc) / deg * seconds_per_day;
  }

  GridSeries u{h.time, {}};
  GridSeries v{h.time, {}};
  for (const auto& slice : h.slices) {
    // derivatives per degree -> per radian
    const ScalarGrid2D dlon = finite_difference(slice, 0);
    const ScalarGrid2D dlat = finite_difference(slice, 1);
    ScalarGrid2D us(slice.x_axis(), slice.y_axis());
    ScalarGrid2D vs(slice.x_axis(), slice.y_axis());
    for (int j = 0; j < slice.ny(); ++j) {
      const double k = factor[static_cast<std::size_t>(j)];
      for (int i = 0; i < slice.nx(); ++i) {
        us(i, j) = -k * dlat(i, j) / deg;
        vs(i, j) = k * dlon(i, j) / deg;
      }
    }
    u.slices.push_back(std::move(us));
    v.slices.push_back(std::move(vs));
  }
  return GriddedVelocityField(std::move(u), std::move(v));
}

}  // namespace lcs

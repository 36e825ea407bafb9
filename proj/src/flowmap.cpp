#include "lcs/flowmap.hpp"

#include <algorithm>
#include <cmath>

#include "lcs/errors.hpp"

namespace lcs {

void IntegratorConfig::validate() const {
  if (method == IntegratorMethod::RK4 && rk4_steps < 1) throw ConfigError("rk4_steps must be positive");
  if (method == IntegratorMethod::RK45 && (!(abs_tol > 0) || !(rel_tol > 0)))
    throw ConfigError("integrator tolerances must be positive");
  if (!std::isfinite(t0) || !std::isfinite(T)) throw ConfigError("t0 and T must be finite");
}

namespace {

Vec2 rhs(const VelocityField& field, double t, const Vec2& x) {
  try {
    return field(t, x);
  } catch (const OutOfBounds&) {
    throw LeftDomain(t, x);
  }
}

void check_inside(const VelocityField& field, double t, const Vec2& x) {
  if (!field.spatial_bounds().contains(x) || !x.allFinite()) throw LeftDomain(t, x);
}

Vec2 advect_rk4(const VelocityField& field, Vec2 x, double t0, double T, int steps) {
  const double h = T / steps;
  double t = t0;
  for (int n = 0; n < steps; ++n) {
    const Vec2 k1 = rhs(field, t, x);
    const Vec2 k2 = rhs(field, t + 0.5 * h, x + 0.5 * h * k1);
    const Vec2 k3 = rhs(field, t + 0.5 * h, x + 0.5 * h * k2);
    const Vec2 k4 = rhs(field, t + h, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = t0 + (n + 1) * h;
    check_inside(field, t, x);
  }
  return x;
}

// Dormand-Prince 5(4) with FSAL.
Vec2 advect_rk45(const VelocityField& field, Vec2 x, double t0, double T, double atol, double rtol) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b*, the embedded fourth-order error weights
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  const double dir = T > 0 ? 1.0 : -1.0;
  const double t_end = t0 + T;
  const double span = std::abs(T);
  double t = t0;
  double h = dir * std::min(span, std::max(span / 100.0, 1e-12));
  Vec2 k1 = rhs(field, t, x);
  int guard = 0;
  while (dir * (t_end - t) > 0) {
    if (++guard > 10'000'000) throw Error("RK45 step limit exceeded");
    bool clipped = false;
    if (dir * (t + h - t_end) >= 0) {
      h = t_end - t;
      clipped = true;
    }
    const Vec2 k2 = rhs(field, t + c2 * h, x + h * (a21 * k1));
    const Vec2 k3 = rhs(field, t + c3 * h, x + h * (a31 * k1 + a32 * k2));
    const Vec2 k4 = rhs(field, t + c4 * h, x + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec2 k5 = rhs(field, t + c5 * h, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec2 k6 = rhs(field, t + h, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec2 xn = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec2 k7 = rhs(field, t + h, xn);
    const Vec2 err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double norm = 0;
    for (int d = 0; d < 2; ++d) {
      const double sc = atol + rtol * std::max(std::abs(x[d]), std::abs(xn[d]));
      norm = std::max(norm, std::abs(err[d]) / sc);
    }
    if (norm <= 1.0) {
      t = clipped ? t_end : t + h;
      x = xn;
      k1 = k7;
      check_inside(field, t, x);
    }
    const double factor = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
    h *= factor;
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t))) throw Error("RK45 step size underflow");
  }
  return x;
}

}  // namespace

Vec2 advect(const VelocityField& field, const Vec2& x0, double t0, double T, const IntegratorConfig& cfg) {
  if (T == 0.0) return x0;
  check_inside(field, t0, x0);
  if (cfg.method == IntegratorMethod::RK4) return advect_rk4(field, x0, t0, T, cfg.rk4_steps);
  return advect_rk45(field, x0, t0, T, cfg.abs_tol, cfg.rel_tol);
}

std::size_t FlowMapGrid::valid_count() const {
  return static_cast<std::size_t>((valid.values() != 0).count());
}

FlowMapGrid compute_flow_map_grid(const VelocityField& field, const FlowGridSpec& spec, const IntegratorConfig& cfg) {
  cfg.validate();
  if (spec.nx < 2 || spec.ny < 2) throw ConfigError("flow map grid needs at least 2x2 nodes");
  if (!(spec.rho > 0 && spec.rho <= 0.5)) throw ConfigError("stencil ratio rho must lie in (0, 0.5]");
  FlowMapGrid fm;
  fm.x = Axis::linspace(spec.domain.xmin, spec.domain.xmax, spec.nx, "x");
  fm.y = Axis::linspace(spec.domain.ymin, spec.domain.ymax, spec.ny, "y");
  fm.rho = spec.rho;
  fm.t0 = cfg.t0;
  fm.T = cfg.T;
  for (int c = 0; c < 4; ++c) {
    fm.final_x[c] = ScalarGrid2D(fm.x, fm.y, std::nan(""));
    fm.final_y[c] = ScalarGrid2D(fm.x, fm.y, std::nan(""));
  }
  fm.valid = MaskGrid(fm.x, fm.y, 0);

  const double dx = fm.offset_x();
  const double dy = fm.offset_y();
  const std::array<Vec2, 4> offsets = {Vec2(dx, 0), Vec2(-dx, 0), Vec2(0, dy), Vec2(0, -dy)};
  const int nx = spec.nx;
  const int ny = spec.ny;

#pragma omp parallel for schedule(dynamic, 4)
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Vec2 p(fm.x[i], fm.y[j]);
      bool ok = true;
      for (int c = 0; c < 4 && ok; ++c) {
        try {
          const Vec2 q = advect(field, p + offsets[static_cast<std::size_t>(c)], cfg);
          fm.final_x[c](i, j) = q.x();
          fm.final_y[c](i, j) = q.y();
        } catch (const LeftDomain&) {
          ok = false;
        }
      }
      if (!ok) {
        for (int c = 0; c < 4; ++c) {
          fm.final_x[c](i, j) = std::nan("");
          fm.final_y[c](i, j) = std::nan("");
        }
      }
      fm.valid(i, j) = ok ? 1 : 0;
    }
  }
  return fm;
}

Mat2 deformation_gradient(const FlowMapGrid& fm, int i, int j) {
  if (i < 0 || j < 0 || i >= fm.nx() || j >= fm.ny()) throw InvalidPoint("grid index out of range");
  if (!fm.valid(i, j)) throw InvalidPoint("stencil companion left the domain");
  using C = FlowMapGrid;
  // differencing displacements keeps DF = I exact for rigid translations
  const Vec2 p(fm.x[i], fm.y[j]);
  const double dx = fm.offset_x();
  const double dy = fm.offset_y();
  auto disp = [&](C::Companion c, const Vec2& off) { return Vec2(fm.final_position(c, i, j) - (p + off)); };
  const Vec2 ddx = disp(C::XPlus, Vec2(dx, 0)) - disp(C::XMinus, Vec2(-dx, 0));
  const Vec2 ddy = disp(C::YPlus, Vec2(0, dy)) - disp(C::YMinus, Vec2(0, -dy));
  Mat2 df = Mat2::Identity();
  df.col(0) += ddx / (2 * dx);
  df.col(1) += ddy / (2 * dy);
  return df;
}

}  // namespace lcs

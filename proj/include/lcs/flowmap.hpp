#pragma once

#include <array>

#include "lcs/grid.hpp"
#include "lcs/velocity.hpp"

namespace lcs {

enum class IntegratorMethod { RK4, RK45 };

struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::RK45;
  int rk4_steps = 1000;  // fixed-step RK4: steps over the whole horizon
  double abs_tol = 1e-6;
  double rel_tol = 1e-6;
  double t0 = 0.0;
  double T = 0.0;  // may be negative

  void validate() const;
};

/// F_{t0}^{t0+T}(x0). Throws LeftDomain if the trajectory exits the field's domain.
Vec2 advect(const VelocityField& field, const Vec2& x0, double t0, double T, const IntegratorConfig& cfg);

inline Vec2 advect(const VelocityField& field, const Vec2& x0, const IntegratorConfig& cfg) {
  return advect(field, x0, cfg.t0, cfg.T, cfg);
}

/// Main grid plus the advected images of four auxiliary companions per node,
/// offset by +-rho*dx along x and +-rho*dy along y.
struct FlowMapGrid {
  enum Companion { XPlus = 0, XMinus = 1, YPlus = 2, YMinus = 3 };

  Axis x;
  Axis y;
  double rho = 0.1;
  double t0 = 0.0;
  double T = 0.0;
  /// final_x[c](i, j), final_y[c](i, j): image of companion c of node (i, j).
  std::array<ScalarGrid2D, 4> final_x;
  std::array<ScalarGrid2D, 4> final_y;
  MaskGrid valid;

  int nx() const { return x.size(); }
  int ny() const { return y.size(); }
  double offset_x() const { return rho * x.step(); }
  double offset_y() const { return rho * y.step(); }
  Vec2 final_position(Companion c, int i, int j) const { return {final_x[c](i, j), final_y[c](i, j)}; }
  std::size_t valid_count() const;
};

struct FlowGridSpec {
  Bounds domain;
  int nx = 0;
  int ny = 0;
  double rho = 0.1;
};

/// Advects every companion point; trajectories that leave the data domain mark
/// their node invalid instead of aborting. Deterministic regardless of threads.
FlowMapGrid compute_flow_map_grid(const VelocityField& field, const FlowGridSpec& spec, const IntegratorConfig& cfg);

/// Central-difference flow-map gradient at node (i, j). Throws InvalidPoint.
Mat2 deformation_gradient(const FlowMapGrid& fm, int i, int j);

}  // namespace lcs

#pragma once

#include <vector>

#include "lcs/grid.hpp"
#include "lcs/velocity.hpp"

namespace lcs {

/// Elliptical Gaussian bump of sea-surface height translating at constant velocity.
struct GaussianVortex {
  Vec2 center = Vec2::Zero();    // lon, lat at t = 0 (degrees)
  Vec2 velocity = Vec2::Zero();  // degrees/day
  double amplitude = 0.3;        // metres; sign sets the rotation sense
  double radius = 0.8;           // degrees
  double aspect = 1.5;           // squared ratio of the principal axes
  double angle = 0.5;            // orientation of the major axis (radians)

  double height(double t, double lon, double lat) const;
};

struct SyntheticOcean {
  Axis lon;
  Axis lat;
  Axis time;
  std::vector<GaussianVortex> vortices;
};

/// Three vortices on a 0.1 degree grid over 8..33 E, 40..25 S, daily for 32 days.
SyntheticOcean default_synthetic_ocean();

/// SSH series h(t, lat, lon) in metres.
GridSeries synthetic_ssh(const SyntheticOcean& ocean);

}  // namespace lcs

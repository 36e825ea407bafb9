#include "lcs/synthetic.hpp"

#include <cmath>

namespace lcs {

double GaussianVortex::height(double t, double lon, double lat) const {
  const Vec2 d = Vec2(lon, lat) - (center + t * velocity);
  const double c = std::cos(angle), s = std::sin(angle);
  const double p = c * d.x() + s * d.y();
  const double q = -s * d.x() + c * d.y();
  return amplitude * std::exp(-(p * p / aspect + q * q * aspect) / (2 * radius * radius));
}

SyntheticOcean default_synthetic_ocean() {
  SyntheticOcean o;
  o.lon = Axis::uniform(8.0, 0.1, 251, "lon", "degrees_east");
  o.lat = Axis::uniform(-40.0, 0.1, 151, "lat", "degrees_north");
  o.time = Axis::uniform(0.0, 1.0, 32, "time", "days");
  o.vortices = {
      {Vec2(16.0, -31.0), Vec2(-0.06, -0.01), 0.3, 0.8, 1.5, 0.5},
      {Vec2(21.0, -34.0), Vec2(-0.05, 0.01), -0.3, 0.88, 1.5, 0.5},
      {Vec2(25.5, -30.0), Vec2(-0.07, 0.0), 0.27, 0.72, 1.5, 0.5},
  };
  return o;
}

GridSeries synthetic_ssh(const SyntheticOcean& ocean) {
  GridSeries h;
  h.time = ocean.time;
  for (int k = 0; k < ocean.time.size(); ++k) {
    ScalarGrid2D g(ocean.lon, ocean.lat);
    for (int j = 0; j < ocean.lat.size(); ++j) {
      for (int i = 0; i < ocean.lon.size(); ++i) {
        double s = 0;
        for (const auto& v : ocean.vortices) s += v.height(ocean.time[k], ocean.lon[i], ocean.lat[j]);
        g(i, j) = s;
      }
    }
    h.slices.push_back(std::move(g));
  }
  return h;
}

}  // namespace lcs

#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "lcs/errors.hpp"
#include "lcs/velocity.hpp"

using namespace lcs;
using std::numbers::pi;

namespace {

GridSeries sample_series(const Axis& time, const Axis& x, const Axis& y,
                         const std::function<double(double, double, double)>& fn) {
  GridSeries s{time, {}};
  for (int k = 0; k < time.size(); ++k) {
    ScalarGrid2D g(x, y);
    for (int j = 0; j < y.size(); ++j)
      for (int i = 0; i < x.size(); ++i) g(i, j) = fn(time[k], x[i], y[j]);
    s.slices.push_back(std::move(g));
  }
  return s;
}

}  // namespace

TEST_SUITE("velocity") {
  TEST_CASE("double gyre at t=0 on the left wall") {
    const Vec2 v = eval_double_gyre(DoubleGyreParams{}, 0.0, 0.0, 0.5);
    CHECK(v.x() == 0.0);
    CHECK(v.y() == doctest::Approx(pi * 0.2).epsilon(1e-15));
  }

  TEST_CASE("double gyre mid-cell value against a hand evaluation") {
    // sin(wt) = 1: f = 0.2*0.25 + 0.6*0.5 = 0.35, df/dx = 0.8
    const Vec2 v = eval_double_gyre(DoubleGyreParams{}, 2.5, 0.5, 0.5);
    const double expected_v = 0.228200515005011098550692045956;  // 0.16*pi*cos(0.35*pi)
    CHECK(std::abs(v.x()) < 1e-15);
    CHECK(v.y() == doctest::Approx(expected_v).epsilon(1e-14));
    // long double evaluation of the same closed form
    const long double lpi = std::numbers::pi_v<long double>;
    const long double a = 0.2L * std::sin(lpi / 5 * 2.5L);
    const long double f = a * 0.25L + (1 - 2 * a) * 0.5L;
    const long double fx = 2 * a * 0.5L + (1 - 2 * a);
    CHECK(v.y() == doctest::Approx(static_cast<double>(lpi * 0.2L * std::cos(lpi * f) * std::sin(lpi * 0.5L) * fx)).epsilon(1e-14));
  }

  TEST_CASE("double gyre walls are invariant") {
    const DoubleGyreParams p;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 1), t(0, 20);
    for (int n = 0; n < 200; ++n) {
      CHECK(eval_double_gyre(p, t(rng), u(rng), 0.0).y() == 0.0);
      CHECK(std::abs(eval_double_gyre(p, t(rng), u(rng), 1.0).y()) < 1e-15);
      // sin(wt) = 0 at t = 0, 5, 10
      const double tz = 5.0 * (n % 3);
      CHECK(std::abs(eval_double_gyre(p, tz, 0.0, u(rng)).x()) < 1e-15);
      CHECK(std::abs(eval_double_gyre(p, tz, 1.0, u(rng)).x()) < 1e-15);
    }
  }

  TEST_CASE("double gyre is divergence free") {
    const DoubleGyreParams p;
    const double h = 1e-4;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.01, 0.99), t(0, 20);
    for (int n = 0; n < 500; ++n) {
      const double tt = t(rng), x = u(rng), y = u(rng);
      const double du = (eval_double_gyre(p, tt, x + h, y).x() - eval_double_gyre(p, tt, x - h, y).x()) / (2 * h);
      const double dv = (eval_double_gyre(p, tt, x, y + h).y() - eval_double_gyre(p, tt, x, y - h).y()) / (2 * h);
      CHECK(std::abs(du + dv) < 1e-6);
    }
  }

  TEST_CASE("double gyre parameters are validated") {
    CHECK_THROWS_AS(DoubleGyreParams({0.0, 0.2, 1.0}).validate(), ConfigError);
    CHECK_THROWS_AS(DoubleGyreParams({0.2, 0.5, 1.0}).validate(), ConfigError);
    CHECK_THROWS_AS(DoubleGyreParams({0.2, -0.1, 1.0}).validate(), ConfigError);
    CHECK_THROWS_AS(DoubleGyreParams({0.2, 0.2, 0.0}).validate(), ConfigError);
    CHECK_NOTHROW(DoubleGyreParams({0.2, 0.0, 1.0}).validate());
  }

  TEST_CASE("gridded interpolation is exact at nodes") {
    const Axis x = Axis::uniform(0, 0.5, 9, "x"), y = Axis::uniform(-1, 0.25, 11, "y"), t = Axis::uniform(0, 1, 3, "time");
    auto fu = [](double tt, double xx, double yy) { return std::sin(xx + 2 * yy) + tt; };
    auto fv = [](double tt, double xx, double yy) { return xx * yy * yy - tt; };
    const GriddedVelocityField f(sample_series(t, x, y, fu), sample_series(t, x, y, fv));
    for (int k = 0; k < t.size(); ++k)
      for (int j = 0; j < y.size(); ++j)
        for (int i = 0; i < x.size(); ++i) {
          const Vec2 v = interpolate_velocity(f, t[k], x[i], y[j]);
          CHECK(v.x() == fu(t[k], x[i], y[j]));
          CHECK(v.y() == fv(t[k], x[i], y[j]));
        }
  }

  TEST_CASE("gridded interpolation of a constant-in-time field") {
    const Axis x = Axis::uniform(0, 1, 6, "x"), y = Axis::uniform(0, 1, 6, "y"), t = Axis::uniform(0, 2, 2, "time");
    auto fu = [](double, double xx, double yy) { return std::cos(xx) * yy; };
    auto fv = [](double, double xx, double) { return xx * xx; };
    const GriddedVelocityField f(sample_series(t, x, y, fu), sample_series(t, x, y, fv));
    const Vec2 p(2.3, 1.7);
    const Vec2 a = f(0.0, p), b = f(0.7, p), c = f(2.0, p);
    CHECK(a.x() == doctest::Approx(b.x()).epsilon(1e-15));
    CHECK(a.y() == doctest::Approx(c.y()).epsilon(1e-15));
  }

  TEST_CASE("gridded interpolation reproduces affine fields") {
    const Axis x = Axis::uniform(-2, 0.5, 12, "lon"), y = Axis::uniform(1, 0.3, 9, "lat"), t = Axis::uniform(0, 1, 2, "time");
    auto fu = [](double, double xx, double yy) { return xx + 2 * yy; };
    auto fv = [](double tt, double xx, double yy) { return 3 - xx + 0.5 * yy + tt; };
    const GriddedVelocityField f(sample_series(t, x, y, fu), sample_series(t, x, y, fv));
    // cell centres
    for (int j = 0; j + 1 < y.size(); ++j)
      for (int i = 0; i + 1 < x.size(); ++i) {
        const double xc = (x[i] + x[i + 1]) / 2, yc = (y[j] + y[j + 1]) / 2;
        const Vec2 v = interpolate_velocity(f, 0.5, xc, yc);
        CHECK(v.x() == doctest::Approx(xc + 2 * yc).epsilon(1e-12));
        CHECK(v.y() == doctest::Approx(3.5 - xc + 0.5 * yc).epsilon(1e-12));
      }
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(x.front(), x.back()), uy(y.front(), y.back());
    for (int n = 0; n < 500; ++n) {
      const double xx = ux(rng), yy = uy(rng);
      CHECK(interpolate_velocity(f, 0.0, xx, yy).x() == doctest::Approx(xx + 2 * yy).epsilon(1e-12));
    }
  }

  TEST_CASE("gridded queries outside the data name the axis") {
    const Axis x = Axis::uniform(0, 1, 4, "lon"), y = Axis::uniform(0, 1, 4, "lat"), t = Axis::uniform(0, 1, 2, "time");
    auto zero = [](double, double, double) { return 0.0; };
    const GriddedVelocityField f(sample_series(t, x, y, zero), sample_series(t, x, y, zero));
    auto axis_of = [&](double tt, double xx, double yy) {
      try {
        f.interpolate(tt, Vec2(xx, yy));
      } catch (const OutOfBounds& e) {
        return e.axis();
      }
      return std::string();
    };
    CHECK(axis_of(2.0, 1, 1) == "time");
    CHECK(axis_of(0.5, 3.5, 1) == "lon");
    CHECK(axis_of(0.5, 1, -0.1) == "lat");
    CHECK(axis_of(0.5, 1, 1).empty());
  }

  TEST_CASE("geostrophic velocity of a constant height is zero") {
    const Axis lon = Axis::uniform(10, 1, 8, "lon"), lat = Axis::uniform(-40, 1, 10, "lat"), t = Axis::uniform(0, 1, 2, "time");
    const auto h = sample_series(t, lon, lat, [](double, double, double) { return 0.7; });
    const auto f = geostrophic_from_ssh(h);
    for (int j = 0; j < lat.size(); ++j)
      for (int i = 0; i < lon.size(); ++i) {
        CHECK(f.u().slices[0](i, j) == 0.0);
        CHECK(f.v().slices[1](i, j) == 0.0);
      }
  }

  TEST_CASE("geostrophic velocity of a height linear in longitude") {
    const double c = 0.02;  // m per degree
    const Axis lon = Axis::uniform(10, 0.5, 9, "lon"), lat = Axis::uniform(-40, 0.5, 11, "lat"), t = Axis::uniform(0, 1, 2, "time");
    const auto h = sample_series(t, lon, lat, [&](double, double l, double) { return c * l; });
    const PhysicalConstants k;
    const auto f = geostrophic_from_ssh(h, k);
    const double deg = pi / 180;
    for (int j = 0; j < lat.size(); ++j) {
      const double theta = lat[j] * deg;
      // dh/dphi per radian = c / deg; output in degrees per day
      const double expected = k.g / (k.R * k.R * k.coriolis(theta) * std::cos(theta)) * (c / deg) / deg * 86400.0;
      for (int i = 1; i + 1 < lon.size(); ++i) {
        CHECK(std::abs(f.u().slices[0](i, j)) < 1e-15);
        CHECK(f.v().slices[0](i, j) == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("geostrophic velocity is odd in the height") {
    const Axis lon = Axis::uniform(0, 0.25, 20, "lon"), lat = Axis::uniform(-35, 0.25, 16, "lat"), t = Axis::uniform(0, 1, 2, "time");
    auto fn = [](double tt, double l, double p) { return std::sin(l) * std::cos(p) + 0.1 * tt * l; };
    const auto hp = sample_series(t, lon, lat, fn);
    const auto hm = sample_series(t, lon, lat, [&](double tt, double l, double p) { return -fn(tt, l, p); });
    const auto fp = geostrophic_from_ssh(hp), fm = geostrophic_from_ssh(hm);
    for (int k = 0; k < 2; ++k) {
      CHECK((fp.u().slices[k].values() == -fm.u().slices[k].values()).all());
      CHECK((fp.v().slices[k].values() == -fm.v().slices[k].values()).all());
    }
  }

  TEST_CASE("geostrophic conversion refuses the equator") {
    const Axis lon = Axis::uniform(0, 1, 5, "lon"), lat = Axis::uniform(-2, 1, 5, "lat"), t = Axis::uniform(0, 1, 2, "time");
    const auto h = sample_series(t, lon, lat, [](double, double l, double) { return l; });
    CHECK_THROWS_AS(geostrophic_from_ssh(h), DegenerateLatitude);
  }

  TEST_CASE("physical constants must be positive") {
    CHECK_THROWS_AS(PhysicalConstants({0.0, 6371e3, 7.29e-5}).validate(), ConfigError);
    CHECK_THROWS_AS(PhysicalConstants({9.81, -1.0, 7.29e-5}).validate(), ConfigError);
    CHECK_NOTHROW(PhysicalConstants{}.validate());
  }
}

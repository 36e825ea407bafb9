#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "lcs/errors.hpp"
#include "lcs/flowmap.hpp"

using namespace lcs;
using std::numbers::pi;

namespace {

const Bounds kWide{-100, 100, -100, 100};

IntegratorConfig rk45(double T, double tol = 1e-10) {
  IntegratorConfig c;
  c.T = T;
  c.abs_tol = c.rel_tol = tol;
  return c;
}

IntegratorConfig rk4(double T, int steps) {
  IntegratorConfig c;
  c.method = IntegratorMethod::RK4;
  c.rk4_steps = steps;
  c.T = T;
  return c;
}

// Truncated Taylor series of the matrix exponential.
Mat2 expm_series(const Mat2& a) {
  Mat2 sum = Mat2::Identity(), term = Mat2::Identity();
  for (int k = 1; k < 60; ++k) {
    term = term * a / k;
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_SUITE("flowmap") {
  TEST_CASE("uniform flow is translated exactly") {
    const FunctionField f([](double, const Vec2&) { return Vec2(1, 0); }, kWide);
    for (const auto& cfg : {rk4(2.0, 10), rk45(2.0)}) {
      const Vec2 x = advect(f, Vec2(0, 0), cfg);
      CHECK(x.x() == doctest::Approx(2.0).epsilon(1e-14));
      CHECK(x.y() == 0.0);
    }
  }

  TEST_CASE("solid-body rotation by a quarter turn") {
    const FunctionField f([](double, const Vec2& p) { return Vec2(-p.y(), p.x()); }, kWide);
    const Vec2 a = advect(f, Vec2(1, 0), rk45(pi / 2));
    CHECK(std::abs(a.x()) < 1e-8);
    CHECK(a.y() == doctest::Approx(1.0).epsilon(1e-8));
    const Vec2 b = advect(f, Vec2(1, 0), rk4(pi / 2, 1000));
    CHECK(std::abs(b.x()) < 1e-10);
    CHECK(b.y() == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("zero horizon is the identity") {
    const DoubleGyreField f;
    const Vec2 x0(0.3, 0.7);
    CHECK(advect(f, x0, rk45(0.0)) == x0);
    CHECK(advect(f, x0, rk4(0.0, 50)) == x0);
  }

  TEST_CASE("composition and backward consistency") {
    const DoubleGyreField f;
    const double tol = 1e-8;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int n = 0; n < 20; ++n) {
      const Vec2 x0(u(rng), u(rng));
      const Vec2 whole = advect(f, x0, 0.0, 3.0, rk45(0, tol));
      const Vec2 mid = advect(f, x0, 0.0, 1.25, rk45(0, tol));
      const Vec2 split = advect(f, mid, 1.25, 1.75, rk45(0, tol));
      CHECK((whole - split).norm() < 10 * tol);
      const Vec2 back = advect(f, whole, 3.0, -3.0, rk45(0, tol));
      CHECK((back - x0).norm() < 10 * tol);
    }
  }

  TEST_CASE("leaving the domain is reported") {
    const FunctionField f([](double, const Vec2&) { return Vec2(1, 0); }, Bounds{0, 1, 0, 1});
    for (const auto& cfg : {rk4(2.0, 100), rk45(2.0)}) {
      try {
        advect(f, Vec2(0.5, 0.5), cfg);
        FAIL("expected LeftDomain");
      } catch (const LeftDomain& e) {
        CHECK(e.exit_time() >= 0.5);
        CHECK(e.exit_time() <= 2.0);
        CHECK(e.position().x() > 1.0);
      }
    }
  }

  TEST_CASE("integrator settings are validated") {
    IntegratorConfig c;
    c.abs_tol = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = IntegratorConfig{};
    c.method = IntegratorMethod::RK4;
    c.rk4_steps = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }

  TEST_CASE("zero velocity: final positions equal initial and DF = I") {
    const FunctionField f([](double, const Vec2&) { return Vec2(0, 0); }, kWide);
    const FlowMapGrid fm = compute_flow_map_grid(f, {Bounds{0, 1, 0, 1}, 11, 9, 0.1}, rk45(3.0));
    CHECK(fm.valid_count() == 99u);
    for (int j = 0; j < fm.ny(); ++j)
      for (int i = 0; i < fm.nx(); ++i) {
        CHECK(fm.final_position(FlowMapGrid::XPlus, i, j) == Vec2(fm.x[i] + fm.offset_x(), fm.y[j]));
        CHECK(fm.final_position(FlowMapGrid::YMinus, i, j) == Vec2(fm.x[i], fm.y[j] - fm.offset_y()));
        CHECK(deformation_gradient(fm, i, j) == Mat2::Identity());
      }
  }

  TEST_CASE("uniform translation shifts every companion and DF = I") {
    const Vec2 w(0.5, -0.25);
    const FunctionField f([&](double, const Vec2&) { return w; }, kWide);
    const FlowMapGrid fm = compute_flow_map_grid(f, {Bounds{0, 1, 0, 1}, 6, 6, 0.1}, rk4(2.0, 8));
    for (int j = 0; j < fm.ny(); ++j)
      for (int i = 0; i < fm.nx(); ++i) {
        const Vec2 p = fm.final_position(FlowMapGrid::XMinus, i, j);
        CHECK(p.x() == doctest::Approx(fm.x[i] - fm.offset_x() + 1.0).epsilon(1e-14));
        CHECK(p.y() == doctest::Approx(fm.y[j] - 0.5).epsilon(1e-14));
        const Mat2 df = deformation_gradient(fm, i, j);
        CHECK((df - Mat2::Identity()).norm() < 1e-12);
      }
  }

  TEST_CASE("linear flow: DF matches the matrix exponential") {
    Mat2 m;
    m << 0.3, -0.8, 0.5, -0.1;
    const FunctionField f([&](double, const Vec2& p) { return Vec2(m * p); }, kWide);
    const double T = 1.5;
    const Mat2 expected = expm_series(m * T);
    const FlowMapGrid fm = compute_flow_map_grid(f, {Bounds{-1, 1, -1, 1}, 5, 5, 0.1}, rk45(T, 1e-12));
    for (int j = 0; j < fm.ny(); ++j)
      for (int i = 0; i < fm.nx(); ++i) CHECK((deformation_gradient(fm, i, j) - expected).norm() < 1e-8);
  }

  TEST_CASE("coarse double gyre trajectories agree with a refined integration") {
    const DoubleGyreField f;
    const double T = 2.5 * pi;
    const FlowMapGrid fm = compute_flow_map_grid(f, {Bounds{0, 1, 0, 1}, 50, 50, 0.1}, rk45(T, 1e-6));
    IntegratorConfig fine = rk4(T, 20000);
    for (const auto [i, j] : {std::pair{10, 20}, std::pair{25, 25}, std::pair{40, 7}}) {
      const Vec2 x0(fm.x[i] + fm.offset_x(), fm.y[j]);
      const Vec2 ref = advect(f, x0, fine);
      CHECK((fm.final_position(FlowMapGrid::XPlus, i, j) - ref).norm() < 1e-4);
    }
  }

  TEST_CASE("nodes whose companions leave the domain are masked") {
    const FunctionField f([](double, const Vec2&) { return Vec2(1, 0); }, Bounds{0, 2, 0, 1});
    const FlowMapGrid fm = compute_flow_map_grid(f, {Bounds{0, 1.5, 0, 1}, 16, 3, 0.1}, rk4(0.95, 10));
    for (int j = 0; j < fm.ny(); ++j)
      for (int i = 0; i < fm.nx(); ++i) {
        const bool inside = fm.x[i] - fm.offset_x() >= 0 && fm.x[i] + fm.offset_x() + 0.95 <= 2.0 && fm.y[j] - fm.offset_y() >= 0 &&
                            fm.y[j] + fm.offset_y() <= 1.0;
        CHECK(bool(fm.valid(i, j)) == inside);
        if (!inside) CHECK_THROWS_AS(deformation_gradient(fm, i, j), InvalidPoint);
      }
  }

  TEST_CASE("flow map does not depend on the thread count") {
    const DoubleGyreField f;
    const FlowGridSpec spec{Bounds{0, 1, 0, 1}, 30, 30, 0.1};
#ifdef _OPENMP
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
#endif
    const FlowMapGrid a = compute_flow_map_grid(f, spec, rk45(5.0, 1e-6));
#ifdef _OPENMP
    omp_set_num_threads(4);
#endif
    const FlowMapGrid b = compute_flow_map_grid(f, spec, rk45(5.0, 1e-6));
#ifdef _OPENMP
    omp_set_num_threads(saved);
#endif
    // masked nodes hold NaN on both sides
    auto same = [](const ScalarGrid2D& p, const ScalarGrid2D& q) {
      return ((p.values() == q.values()) || (p.values().isNaN() && q.values().isNaN())).all();
    };
    CHECK((a.valid.values() == b.valid.values()).all());
    for (int c = 0; c < 4; ++c) {
      CHECK(same(a.final_x[c], b.final_x[c]));
      CHECK(same(a.final_y[c], b.final_y[c]));
    }
  }
}

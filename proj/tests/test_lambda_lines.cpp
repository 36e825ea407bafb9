#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "lcs/errors.hpp"
#include "lcs/lambda_lines.hpp"
#include "support.hpp"

using namespace lcs;
using lcs::test::sample_tensor;
using lcs::test::swirl_tensor;
using std::numbers::pi;

namespace {

// Same line: parallel unit vectors up to sign.
bool same_line(const Vec2& a, const Vec2& b, double tol) {
  return std::abs(a.x() * b.y() - a.y() * b.x()) <= tol && std::abs(std::abs(a.dot(b)) - 1) <= tol;
}

double line_angle_gap(const Vec2& a, const Vec2& b) {
  const double c = std::abs(a.normalized().dot(b.normalized()));
  return std::acos(std::min(1.0, c));
}

SymmetricTensorField swirl_field(double twist = 0.0, int n = 201) {
  return sample_tensor([=](const Vec2& p) { return swirl_tensor(p, 5.0, 1.0, twist); }, -2, 2, -2, 2, n, n);
}

struct Spec {
  SymmetricTensorField tensor;
  EigenField eigen;
  EtaFieldSpec spec;
  Spec(SymmetricTensorField tf, double lambda, EtaSign sign = EtaSign::Plus)
      : tensor(std::move(tf)), eigen(eigen_field_from_tensor(tensor)) {
    spec.lambda = lambda;
    spec.sign = sign;
    spec.tensor = &tensor;
    spec.eigen = &eigen;
  }
};

// lambda^2 = 9.61 exceeds lambda2 <= 9 everywhere: eta follows the circles.
constexpr double kTangential = 3.1;

}  // namespace

TEST_SUITE("lambda_lines") {
  TEST_CASE("eta on the edges of its natural domain") {
    const Vec2 xi1(1, 0), xi2(0, 1);
    for (auto sign : {EtaSign::Plus, EtaSign::Minus}) {
      const Vec2 at2 = eta_direction(0.25, 4.0, xi1, xi2, 2.0, sign);
      CHECK(at2.x() == 0.0);
      CHECK(std::abs(at2.y()) == 1.0);
      const Vec2 at1 = eta_direction(0.25, 4.0, xi1, xi2, 0.5, sign);
      CHECK(same_line(at1, xi1, 0.0));
    }
  }

  TEST_CASE("eta by direct substitution") {
    const Vec2 p = eta_direction(0.25, 4.0, Vec2(1, 0), Vec2(0, 1), 1.0, EtaSign::Plus);
    const Vec2 m = eta_direction(0.25, 4.0, Vec2(1, 0), Vec2(0, 1), 1.0, EtaSign::Minus);
    CHECK(p.x() == doctest::Approx(std::sqrt(0.8)).epsilon(1e-15));
    CHECK(p.y() == doctest::Approx(std::sqrt(0.2)).epsilon(1e-15));
    CHECK(m.x() == doctest::Approx(std::sqrt(0.8)).epsilon(1e-15));
    CHECK(m.y() == doctest::Approx(-std::sqrt(0.2)).epsilon(1e-15));
  }

  TEST_CASE("eta outside its natural domain is refused") {
    CHECK_THROWS_AS(eta_direction(0.25, 4.0, Vec2(1, 0), Vec2(0, 1), 2.5, EtaSign::Plus), OutsideDomain);
    CHECK_THROWS_AS(eta_direction(0.25, 4.0, Vec2(1, 0), Vec2(0, 1), 0.4, EtaSign::Plus), OutsideDomain);
    CHECK_THROWS_AS(eta_direction(1.0, 1.0, Vec2(1, 0), Vec2(0, 1), 1.0, EtaSign::Plus), OutsideDomain);
  }

  TEST_CASE("eta identities at random tensors") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> u(0.001, 0.999);
    for (int k = 0; k < 20000; ++k) {
      Mat2 df;
      df << n(rng), n(rng), n(rng), n(rng);
      const auto c = cg_from_gradient<double>(df);
      const auto e = eigen_decompose(c);
      if (e.degenerate) continue;
      const double lam = std::sqrt(e.lambda1 + u(rng) * (e.lambda2 - e.lambda1));
      for (auto sign : {EtaSign::Plus, EtaSign::Minus}) {
        const Vec2 eta = eta_direction(e.lambda1, e.lambda2, e.xi1, e.xi2, lam, sign);
        CHECK(std::abs(eta.norm() - 1) < 1e-12);
        CHECK(eta.dot(c.matrix() * eta) == doctest::Approx(lam * lam).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("eta branches do not depend on eigenvector signs") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ang(0, 2 * pi), u(0.01, 0.99);
    for (int k = 0; k < 2000; ++k) {
      const double a = ang(rng);
      const Vec2 xi2(std::cos(a), std::sin(a));
      const Vec2 xi1(-xi2.y(), xi2.x());
      const double l1 = 0.2, l2 = 5.0, lam = std::sqrt(l1 + u(rng) * (l2 - l1));
      for (auto sign : {EtaSign::Plus, EtaSign::Minus}) {
        const Vec2 ref = eta_direction(l1, l2, xi1, xi2, lam, sign);
        for (double s1 : {1.0, -1.0})
          for (double s2 : {1.0, -1.0}) CHECK(same_line(eta_direction(l1, l2, Vec2(s1 * xi1), Vec2(s2 * xi2), lam, sign), ref, 1e-14));
      }
    }
  }

  TEST_CASE("lambda = 1 reduces to the shear-line coefficients") {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> l1d(0.01, 0.99), l2d(1.01, 50), ang(0, pi);
    for (int k = 0; k < 5000; ++k) {
      const double l1 = l1d(rng), l2 = l2d(rng), a = ang(rng);
      const Vec2 xi2(std::cos(a), std::sin(a));
      const Vec2 xi1 = upper_half_plane<double>(Vec2(xi2.y(), -xi2.x()));
      const Vec2 x1(xi2.y(), -xi2.x());
      const double ca = std::sqrt(l2 - 1) / std::sqrt(l2 - l1), cb = std::sqrt(1 - l1) / std::sqrt(l2 - l1);
      const Vec2 plus = eta_direction(l1, l2, xi1, xi2, 1.0, EtaSign::Plus);
      const Vec2 minus = eta_direction(l1, l2, xi1, xi2, 1.0, EtaSign::Minus);
      CHECK((plus - (ca * x1 + cb * xi2)).norm() < 1e-12);
      CHECK((minus - (ca * x1 - cb * xi2)).norm() < 1e-12);
    }
  }

  TEST_CASE("extension outside the natural domain") {
    EigenDecomposition<double> e;
    e.lambda1 = 0.5;
    e.lambda2 = 2.0;
    e.xi1 = Vec2(1, 0);
    e.xi2 = Vec2(0, 1);
    EtaRegion r;
    CHECK(extend_eta(e, 1.5, EtaSign::Plus, &r) == e.xi2);
    CHECK(r == EtaRegion::Xi2Extension);
    CHECK(extend_eta(e, 0.6, EtaSign::Minus, &r) == e.xi1);
    CHECK(r == EtaRegion::Xi1Extension);
    CHECK(extend_eta(e, 1.0, EtaSign::Minus, &r) == eta_direction(0.5, 2.0, e.xi1, e.xi2, 1.0, EtaSign::Minus));
    CHECK(r == EtaRegion::Natural);
    e.degenerate = true;
    CHECK_THROWS_AS(extend_eta(e, 1.0, EtaSign::Plus), DegenerateTensor);
  }

  TEST_CASE("extended eta is continuous across the xi2 boundary") {
    // lambda2 = 5 + r^2/2 = lambda^2 on the unit circle
    Spec s(swirl_field(0.0, 401), std::sqrt(5.5));
    for (auto sign : {EtaSign::Plus, EtaSign::Minus}) {
      s.spec.sign = sign;
      int crossings = 0;
      EtaRegion prev_region{};
      Vec2 prev;
      for (int k = 0; k <= 2000; ++k) {
        const Vec2 p(0.2 + 1.3 * k / 2000.0, 0.3);
        EtaRegion region;
        const Vec2 v = extend_eta(s.spec, p, &region);
        if (k > 0) {
          CHECK(line_angle_gap(prev, v) < pi / 32);
          if (region != prev_region) ++crossings;
        }
        prev = v;
        prev_region = region;
      }
      CHECK(crossings == 1);
    }
  }

  TEST_CASE("extended eta outside the data") {
    Spec s(swirl_field(0.0, 41), kTangential);
    CHECK_THROWS_AS(extend_eta(s.spec, Vec2(3, 0)), OutOfBounds);
  }

  TEST_CASE("constant line field gives a straight segment") {
    Spec s(sample_tensor([](const Vec2&) { return SymmetricTensor<double>{1, 0, 4}; }, 0, 1, 0, 3, 11, 31), 3.0);
    const LineOptions opts{0.01, 1.5};
    const LambdaLine line = integrate_lambda_line(s.spec, Vec2(0.5, 0.2), Vec2(0, 1), opts);
    CHECK(line.reason == HaltReason::MaxArclength);
    CHECK(line.arclength == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(line.points.back().x() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(line.points.back().y() == doctest::Approx(1.7).epsilon(1e-12));
    for (const auto& p : line.points) CHECK(p.x() == doctest::Approx(0.5).epsilon(1e-14));
  }

  TEST_CASE("leaving the data halts the line") {
    Spec s(sample_tensor([](const Vec2&) { return SymmetricTensor<double>{1, 0, 4}; }, 0, 1, 0, 1, 11, 11), 3.0);
    const LambdaLine line = integrate_lambda_line(s.spec, Vec2(0.5, 0.5), Vec2(0, -1), LineOptions{0.01, 5});
    CHECK(line.reason == HaltReason::LeftDomain);
    CHECK(line.arclength <= 0.5 + 1e-9);
  }

  TEST_CASE("circular line field closes after one turn") {
    Spec s(swirl_field(), kTangential);
    const LineOptions opts{1e-3, 8};
    std::optional<Vec2> hit;
    const Vec2 seed(1, 0);
    auto observer = [&](const Vec2& a, const Vec2& b, double) -> std::optional<Vec2> {
      if (a.y() < 0 && b.y() >= 0 && b.x() > 0) return b;
      return std::nullopt;
    };
    const LambdaLine line = integrate_lambda_line(s.spec, seed, Vec2(0, 1), opts, observer);
    REQUIRE(line.reason == HaltReason::Returned);
    CHECK(line.arclength == doctest::Approx(2 * pi).epsilon(2e-3));
    CHECK((line.points.back() - seed).norm() < 2e-3);
  }

  TEST_CASE("a line aimed at an isotropic point halts") {
    // lambda^2 = 1 <= lambda1: eta follows the radial xi1 into the isotropic centre
    Spec s(swirl_field(0.0, 41), 1.0);
    const LambdaLine line = integrate_lambda_line(s.spec, Vec2(0.35, 0.0), Vec2(-1, 0), LineOptions{1e-2, 5});
    CHECK((line.reason == HaltReason::DegenerateCell || line.reason == HaltReason::SingularityCrossing));
    CHECK(line.points.back().norm() < 0.35);
    CHECK(line.points.back().norm() > 0.0);
  }

  TEST_CASE("Poincare sections") {
    const PoincareSection a = build_section(Vec2(0, 0), 1.0, 100);
    REQUIRE(a.seeds.size() == 100u);
    CHECK(a.seeds.front() == 0.0);
    CHECK(a.seeds.back() == 1.0);
    CHECK(a.seeds[1] == doctest::Approx(1.0 / 99).epsilon(1e-15));
    CHECK(a.point(a.seeds.back()) == Vec2(1, 0));
    for (std::size_t k = 1; k < a.seeds.size(); ++k) CHECK(a.seeds[k] > a.seeds[k - 1]);
    CHECK(a.normal() == Vec2(0, 1));
    const PoincareSection b = build_section(Vec2(0, 0), 1.0, 2);
    CHECK(b.seeds == std::vector<double>{0.0, 1.0});
    const Bounds dom{-1, 0.5, -1, 1};
    const PoincareSection c = build_section(Vec2(0, 0), 1.0, 10, &dom);
    CHECK(c.truncated);
    CHECK(c.length() == doctest::Approx(0.5));
    CHECK_THROWS_AS(build_section(Vec2(2, 0), 1.0, 10, &dom), SectionLeavesDomain);
    CHECK_THROWS_AS(build_section(Vec2(0, 0), 1.0, 1), ConfigError);
  }

  TEST_CASE("circle field: zero return distance at every seed") {
    Spec s(swirl_field(), kTangential);
    PoincareSection sec = build_section(Vec2(0.2, 0.0), 1.2, 25);
    const LineOptions opts{1e-3, 20 * sec.length()};
    const auto results = compute_return_distances(s.spec, sec, opts);
    for (std::size_t k = 1; k < sec.seeds.size(); ++k) {
      REQUIRE(results[k].distance.has_value());
      CHECK(std::abs(*results[k].distance) < 1e-3 * sec.length());
      CHECK(sec.return_distances[k] == *results[k].distance);
    }
    OrbitOptions oo;
    oo.line = opts;
    const auto search = find_closed_orbits(s.spec, sec, oo);
    CHECK(search.orbits.size() >= sec.seeds.size() - 1);
    for (std::size_t k = 1; k < search.orbits.size(); ++k) CHECK(search.orbits[k].seed > search.orbits[k - 1].seed);
    CHECK(search.stalled_brackets == 0);
  }

  TEST_CASE("spiral field: return distances share one sign and no orbit closes") {
    for (double twist : {0.05, -0.05}) {
      Spec s(swirl_field(twist), kTangential);
      PoincareSection sec = build_section(Vec2(0.2, 0.0), 1.0, 20);
      const LineOptions opts{1e-3, 20};
      compute_return_distances(s.spec, sec, opts);
      int pos = 0, neg = 0;
      for (double d : sec.return_distances) {
        if (std::isnan(d)) continue;
        CHECK(std::abs(d) > 1e-3);
        (d > 0 ? pos : neg) += 1;
      }
      CHECK(pos + neg >= 10);
      CHECK((pos == 0 || neg == 0));
      OrbitOptions oo;
      oo.line = opts;
      CHECK(find_closed_orbits(s.spec, sec, oo).orbits.empty());
    }
  }

  TEST_CASE("a seed whose line leaves the data has no return") {
    Spec s(sample_tensor([](const Vec2&) { return SymmetricTensor<double>{1, 0, 4}; }, 0, 1, 0, 1, 11, 11), 3.0);
    const PoincareSection sec = build_section(Vec2(0.2, 0.5), 0.5, 5);
    const ReturnResult r = return_distance(s.spec, sec, 2, LineOptions{0.01, 5});
    CHECK_FALSE(r.distance.has_value());
    CHECK(r.reason == HaltReason::LeftDomain);
  }

  TEST_CASE("bisection finds an isolated closed orbit") {
    // circles inside r = 1 spiral outward, outside spiral inward: a limit cycle at r = 1
    auto fn = [](const Vec2& p) { return swirl_tensor(p, 5.0, 1.0, 0.08 * (1.0 - p.squaredNorm())); };
    Spec s(sample_tensor(fn, -2, 2, -2, 2, 201, 201), kTangential);
    PoincareSection sec = build_section(Vec2(0.3, 0.0), 1.2, 13);
    OrbitOptions oo;
    oo.line = LineOptions{1e-3, 30};
    compute_return_distances(s.spec, sec, oo.line);
    const auto search = find_closed_orbits(s.spec, sec, oo);
    REQUIRE(search.orbits.size() == 1u);
    const auto& orbit = search.orbits[0];
    CHECK(orbit.seed + 0.3 == doctest::Approx(1.0).epsilon(5e-3));
    CHECK(orbit.residual < oo.closure_factor * sec.length());
    // the reversed line traces the same curve
    const ReturnResult back = return_map(s.spec, sec, orbit.seed, oo.line, true);
    REQUIRE(back.distance.has_value());
    CHECK(std::abs(*back.distance) < oo.closure_factor * sec.length());
    for (std::size_t k = 0; k < back.path.size(); k += 25) {
      double best = 1e9;
      for (const auto& q : orbit.path) best = std::min(best, (q - back.path[k]).norm());
      CHECK(best < oo.closure_factor * sec.length() + oo.line.step);
    }
  }

  TEST_CASE("sweep grid") {
    const SweepOptions o;
    const auto l = o.lambdas();
    REQUIRE(l.size() == 31u);
    CHECK(l.front() == doctest::Approx(0.85));
    CHECK(l.back() == doctest::Approx(1.15));
  }

  TEST_CASE("sweep without closed orbits returns nothing") {
    Spec s(sample_tensor([](const Vec2&) { return SymmetricTensor<double>{1, 0, 4}; }, 0, 1, 0, 1, 21, 21), 1.0);
    WedgePair pair;
    pair.first.position = Vec2(0.4, 0.5);
    pair.second.position = Vec2(0.5, 0.5);
    pair.midpoint = Vec2(0.45, 0.5);
    const PoincareSection sec = build_section(pair, 0.3, 10);
    SweepOptions o;
    o.lambda_min = 0.9;
    o.lambda_max = 1.1;
    o.lambda_step = 0.1;
    o.orbit.line = LineOptions{0.01, 6};
    CHECK_FALSE(sweep_lambda(s.tensor, s.eigen, pair, sec, o, {}, {}).has_value());
  }

  TEST_CASE("enclosure rule") {
    using T = SingularityType;
    auto sing = [](Vec2 p, T t) {
      Singularity s;
      s.position = p;
      s.type = t;
      return s;
    };
    WedgePair pair;
    pair.first = sing({-0.1, 0}, T::Wedge);
    pair.second = sing({0.1, 0}, T::Wedge);
    std::vector<Vec2> ring;
    for (int k = 0; k < 40; ++k) ring.emplace_back(std::cos(2 * pi * k / 40), std::sin(2 * pi * k / 40));
    const ClosedPolygon orbit(ring);
    std::vector<Singularity> located = {pair.first, pair.second, sing({3, 3}, T::Unclassified)};
    std::vector<Singularity> classified = {pair.first, pair.second};
    Census census;
    CHECK(orbit_encloses_pair_only(orbit, pair, located, classified, &census));
    CHECK(census == Census{2, 0, 0});
    // a third singularity inside, even one discarded before classification
    located.push_back(sing({0.5, 0.5}, T::Unclassified));
    CHECK_FALSE(orbit_encloses_pair_only(orbit, pair, located, classified));
    located.pop_back();
    classified.push_back(sing({0, 0.5}, T::Trisector));
    located.push_back(classified.back());
    CHECK_FALSE(orbit_encloses_pair_only(orbit, pair, located, classified, &census));
    CHECK(census == Census{2, 1, 0});
    // a wedge of the pair outside
    WedgePair far = pair;
    far.second = sing({2, 0}, T::Wedge);
    CHECK_FALSE(orbit_encloses_pair_only(orbit, far, std::vector<Singularity>{far.first, far.second},
                                         std::vector<Singularity>{far.first, far.second}));
  }

  TEST_CASE("arclength ratio under isotropic expansion") {
    const double a = 0.2, T = 1.5;
    const FunctionField f([&](double, const Vec2& p) { return Vec2(a * p); }, Bounds{-10, 10, -10, 10});
    IntegratorConfig cfg;
    cfg.T = T;
    cfg.abs_tol = cfg.rel_tol = 1e-10;
    const ClosedPolygon tri({{0, 0}, {1, 0}, {0.3, 0.8}});
    CHECK(arclength_ratio(f, tri, cfg) == doctest::Approx(std::exp(a * T)).epsilon(1e-8));
  }
}

#include "lcs/lambda_lines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace lcs {

std::string to_string(EtaSign s) { return s == EtaSign::Plus ? "+" : "-"; }

std::string to_string(HaltReason r) {
  switch (r) {
    case HaltReason::MaxArclength:
      return "max_arclength";
    case HaltReason::LeftDomain:
      return "left_domain";
    case HaltReason::DegenerateCell:
      return "degenerate_cell";
    case HaltReason::SingularityCrossing:
      return "singularity_crossing";
    case HaltReason::Returned:
      return "returned";
  }
  return "unknown";
}

Vec2 extend_eta(const EtaFieldSpec& spec, const Vec2& position, EtaRegion* region) {
  const auto c = spec.tensor->interpolate(position);
  if (!c) throw OutOfBounds("x", position.x());
  const double threshold = spec.eigen ? spec.eigen->degeneracy_threshold : -1.0;
  EigenDecomposition<double> e;
  try {
    e = eigen_decompose(*c, threshold);
  } catch (const NotPositiveDefinite&) {
    throw DegenerateTensor("tensor is not positive definite");
  }
  return extend_eta(e, spec.lambda, spec.sign, region);
}

// ---------------------------------------------------------------------------

namespace {

struct Halt {
  HaltReason reason;
};

Vec2 oriented_eta(const EtaFieldSpec& spec, const Vec2& p, const Vec2& reference) {
  Vec2 e;
  try {
    e = extend_eta(spec, p);
  } catch (const OutOfBounds&) {
    throw Halt{HaltReason::LeftDomain};
  } catch (const DegenerateTensor&) {
    throw Halt{HaltReason::DegenerateCell};
  }
  return e.dot(reference) < 0 ? Vec2(-e) : e;
}

bool in_degenerate_cell(const EtaFieldSpec& spec, const Vec2& p) {
  if (!spec.eigen) return false;
  const auto c = locate_cell(spec.eigen->x, spec.eigen->y, p);
  return c && spec.eigen->cell_degenerate(c->ix, c->iy);
}

}  // namespace

LambdaLine integrate_lambda_line(const EtaFieldSpec& spec, const Vec2& seed, const Vec2& initial_direction,
                                 const LineOptions& opts, const StepObserver& observer) {
  static const double kTurnLimit = std::cos(std::numbers::pi / 4);
  LambdaLine line;
  line.points.push_back(seed);
  Vec2 x = seed;
  Vec2 prev = initial_direction.normalized();
  bool first = true;
  try {
    while (true) {
      if (line.arclength >= opts.max_arclength) {
        line.reason = HaltReason::MaxArclength;
        break;
      }
      if (in_degenerate_cell(spec, x)) throw Halt{HaltReason::DegenerateCell};
      const double h = std::min(opts.step, opts.max_arclength - line.arclength);
      const Vec2 k1 = oriented_eta(spec, x, prev);
      if (!first && k1.dot(prev) < kTurnLimit) throw Halt{HaltReason::SingularityCrossing};
      const Vec2 k2 = oriented_eta(spec, x + 0.5 * h * k1, k1);
      const Vec2 k3 = oriented_eta(spec, x + 0.5 * h * k2, k1);
      const Vec2 k4 = oriented_eta(spec, x + h * k3, k1);
      const Vec2 next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (observer) {
        if (auto hit = observer(x, next, line.arclength + h)) {
          line.arclength += (*hit - x).norm();
          line.points.push_back(*hit);
          line.reason = HaltReason::Returned;
          break;
        }
      }
      const Vec2 step = next - x;
      if (step.squaredNorm() == 0) throw Halt{HaltReason::SingularityCrossing};
      prev = step.normalized();
      x = next;
      line.points.push_back(x);
      line.arclength += h;
      first = false;
    }
  } catch (const Halt& halt) {
    line.reason = halt.reason;
  }
  return line;
}

// ---------------------------------------------------------------------------

PoincareSection build_section(const Vec2& anchor, double length, int n_seeds, const Bounds* domain) {
  if (!(length > 0)) throw ConfigError("section length must be positive");
  if (n_seeds < 2) throw ConfigError("a section needs at least 2 seeds");
  PoincareSection sec;
  sec.anchor = anchor;
  if (domain) {
    if (!domain->contains(anchor)) throw SectionLeavesDomain("section anchor lies outside the domain");
    const double room = domain->xmax - anchor.x();
    if (room < length) {
      length = room;
      sec.truncated = true;
      if (!(length > 0)) throw SectionLeavesDomain("no room for a section inside the domain");
    }
  }
  sec.endpoint = anchor + Vec2(length, 0);
  sec.seeds.resize(static_cast<std::size_t>(n_seeds));
  for (int k = 0; k < n_seeds; ++k) sec.seeds[static_cast<std::size_t>(k)] = length * k / (n_seeds - 1);
  sec.seeds.back() = length;
  sec.return_distances.assign(sec.seeds.size(), std::numeric_limits<double>::quiet_NaN());
  return sec;
}

ReturnResult return_map(const EtaFieldSpec& spec, const PoincareSection& section, double s, const LineOptions& opts,
                        bool reversed) {
  const Vec2 u = section.direction();
  const Vec2 n = reversed ? Vec2(-section.normal()) : section.normal();
  const Vec2 anchor = section.anchor;
  const Vec2 seed = section.point(s);
  const double length = section.length();
  auto observer = [&](const Vec2& a, const Vec2& b, double) -> std::optional<Vec2> {
    const double sa = (a - anchor).dot(n);
    const double sb = (b - anchor).dot(n);
    if (!(sa < 0 && sb >= 0)) return std::nullopt;
    const double w = sa / (sa - sb);
    const Vec2 c = a + w * (b - a);
    const double coord = (c - anchor).dot(u);
    if (coord < 0 || coord > length) return std::nullopt;
    return c;
  };
  LambdaLine line = integrate_lambda_line(spec, seed, n, opts, observer);
  ReturnResult r;
  r.seed = s;
  r.reason = line.reason;
  if (line.reason == HaltReason::Returned) r.distance = (line.points.back() - anchor).dot(u) - s;
  r.path = std::move(line.points);
  return r;
}

ReturnResult return_distance(const EtaFieldSpec& spec, const PoincareSection& section, std::size_t seed_index,
                             const LineOptions& opts) {
  return return_map(spec, section, section.seeds.at(seed_index), opts);
}

std::vector<ReturnResult> compute_return_distances(const EtaFieldSpec& spec, PoincareSection& section,
                                                   const LineOptions& opts) {
  const int n = static_cast<int>(section.seeds.size());
  std::vector<ReturnResult> results(section.seeds.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < n; ++k) {
    results[static_cast<std::size_t>(k)] = return_distance(spec, section, static_cast<std::size_t>(k), opts);
  }
  section.return_distances.assign(section.seeds.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (results[k].distance) section.return_distances[k] = *results[k].distance;
  }
  return results;
}

OrbitSearch find_closed_orbits(const EtaFieldSpec& spec, const PoincareSection& section, const OrbitOptions& opts) {
  OrbitSearch out;
  const double length = section.length();
  const double tol = opts.closure_factor * length;
  const double width = opts.bisection_factor * length;
  const auto& d = section.return_distances;
  const auto& seeds = section.seeds;
  const std::size_t n = std::min(d.size(), seeds.size());
  auto near = [&](std::size_t k) { return std::isfinite(d[k]) && std::abs(d[k]) < tol; };

  for (std::size_t k = 0; k < n; ++k) {
    if (!near(k)) continue;
    ReturnResult r = return_map(spec, section, seeds[k], opts.line);
    if (r.distance && std::abs(*r.distance) < tol) out.orbits.push_back({seeds[k], std::abs(*r.distance), std::move(r.path)});
  }

  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (!std::isfinite(d[k]) || !std::isfinite(d[k + 1]) || near(k) || near(k + 1)) continue;
    if ((d[k] < 0) == (d[k + 1] < 0)) continue;
    double a = seeds[k], b = seeds[k + 1];
    double fa = d[k];
    bool stalled = false;
    for (int it = 0; it < opts.max_bisections && (b - a) > width; ++it) {
      const double m = 0.5 * (a + b);
      const ReturnResult r = return_map(spec, section, m, opts.line);
      if (!r.distance) {
        stalled = true;
        break;
      }
      if ((*r.distance < 0) == (fa < 0)) {
        a = m;
        fa = *r.distance;
      } else {
        b = m;
      }
    }
    if (stalled) {
      ++out.stalled_brackets;
      continue;
    }
    const double m = 0.5 * (a + b);
    ReturnResult r = return_map(spec, section, m, opts.line);
    if (r.distance && std::abs(*r.distance) < tol) {
      out.orbits.push_back({m, std::abs(*r.distance), std::move(r.path)});
    } else {
      ++out.rejected_brackets;
    }
  }
  std::sort(out.orbits.begin(), out.orbits.end(),
            [](const ClosedOrbit& x, const ClosedOrbit& y) { return x.seed < y.seed; });
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> SweepOptions::lambdas() const {
  if (!(lambda_step > 0) || !(lambda_max >= lambda_min) || !(lambda_min > 0))
    throw ConfigError("invalid lambda sweep range");
  const int n = static_cast<int>(std::floor((lambda_max - lambda_min) / lambda_step + 1e-9));
  std::vector<double> out;
  for (int k = 0; k <= n; ++k) out.push_back(lambda_min + k * lambda_step);
  return out;
}

bool orbit_encloses_pair_only(const ClosedPolygon& orbit, const WedgePair& pair, std::span<const Singularity> located,
                              std::span<const Singularity> classified, Census* census) {
  const Census c = census_enclosed(orbit, classified);
  if (census) *census = c;
  if (!orbit.contains(pair.first.position) || !orbit.contains(pair.second.position)) return false;
  int inside = 0;
  for (const auto& s : located) inside += orbit.contains(s.position) ? 1 : 0;
  if (inside != 2) return false;
  return c.wedges == 2 && c.trisectors == 0 && c.unclassified == 0;
}

std::optional<VortexBoundary> sweep_lambda(const SymmetricTensorField& tensor, const EigenField& eigen,
                                           const WedgePair& pair, const PoincareSection& section,
                                           const SweepOptions& opts, std::span<const Singularity> located,
                                           std::span<const Singularity> classified, std::vector<SweepTrace>* trace) {
  std::optional<VortexBoundary> best;
  for (double lambda : opts.lambdas()) {
    for (EtaSign sign : opts.signs) {
      const EtaFieldSpec spec{lambda, sign, &tensor, &eigen};
      PoincareSection sec = section;
      compute_return_distances(spec, sec, opts.orbit.line);
      const OrbitSearch search = find_closed_orbits(spec, sec, opts.orbit);
      SweepTrace tr{lambda, sign, static_cast<int>(search.orbits.size()), 0, std::nullopt};
      for (auto it = search.orbits.rbegin(); it != search.orbits.rend(); ++it) {
        std::optional<ClosedPolygon> poly;
        try {
          poly.emplace(it->path);
        } catch (const InvalidPolygon&) {
          continue;
        }
        Census census;
        if (!orbit_encloses_pair_only(*poly, pair, located, classified, &census)) continue;
        ++tr.accepted;
        if (!tr.outermost_seed) tr.outermost_seed = it->seed;
        if (!best || it->seed > best->seed) {
          best = VortexBoundary{std::move(*poly), lambda, sign, census, it->seed, section.anchor, -1};
        }
        break;
      }
      if (trace) trace->push_back(tr);
    }
  }
  return best;
}

double arclength_ratio(const VelocityField& field, const ClosedPolygon& curve, const IntegratorConfig& cfg) {
  const auto& v = curve.vertices();
  std::vector<Vec2> moved(v.size());
  const int n = static_cast<int>(v.size());
#pragma omp parallel for schedule(static)
  for (int k = 0; k < n; ++k) moved[static_cast<std::size_t>(k)] = advect(field, v[static_cast<std::size_t>(k)], cfg);
  double before = 0, after = 0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::size_t l = (k + 1) % v.size();
    before += (v[l] - v[k]).norm();
    after += (moved[l] - moved[k]).norm();
  }
  return after / before;
}

}  // namespace lcs

#include "lcs/topology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "lcs/delaunay.hpp"
#include "lcs/errors.hpp"

namespace lcs {

std::string to_string(SingularityType t) {
  switch (t) {
    case SingularityType::Wedge:
      return "wedge";
    case SingularityType::Trisector:
      return "trisector";
    case SingularityType::Unclassified:
      break;
  }
  return "unclassified";
}

SingularityType singularity_type_from_string(const std::string& s) {
  if (s == "wedge") return SingularityType::Wedge;
  if (s == "trisector") return SingularityType::Trisector;
  if (s == "unclassified") return SingularityType::Unclassified;
  throw FormatError("unknown singularity type '" + s + "'");
}

// ---------------------------------------------------------------------------
// Polygons

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); }

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p, double tol) {
  const Vec2 ab = b - a;
  const double len = ab.norm();
  if (len == 0) return (p - a).norm() <= tol;
  if (std::abs(cross(ab, p - a)) / len > tol) return false;
  const double u = ab.dot(p - a) / (len * len);
  return u >= -tol / len && u <= 1 + tol / len;
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  if (std::max(a.x(), b.x()) < std::min(c.x(), d.x()) || std::max(c.x(), d.x()) < std::min(a.x(), b.x()) ||
      std::max(a.y(), b.y()) < std::min(c.y(), d.y()) || std::max(c.y(), d.y()) < std::min(a.y(), b.y()))
    return false;
  const double o1 = orient(a, b, c);
  const double o2 = orient(a, b, d);
  const double o3 = orient(c, d, a);
  const double o4 = orient(c, d, b);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) return true;
  if (o1 == 0 && on_segment(a, b, c, 0)) return true;
  if (o2 == 0 && on_segment(a, b, d, 0)) return true;
  if (o3 == 0 && on_segment(c, d, a, 0)) return true;
  if (o4 == 0 && on_segment(c, d, b, 0)) return true;
  return false;
}

}  // namespace

bool is_simple(std::span<const Vec2> v) {
  const std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& a = v[k];
    const Vec2& b = v[(k + 1) % n];
    for (std::size_t l = k + 2; l < n; ++l) {
      if (k == 0 && l == n - 1) continue;  // adjacent through the closing edge
      if (segments_intersect(a, b, v[l], v[(l + 1) % n])) return false;
    }
  }
  return true;
}

ClosedPolygon::ClosedPolygon(std::vector<Vec2> vertices, bool require_simple) : vertices_(std::move(vertices)) {
  if (vertices_.size() > 1 && vertices_.front() == vertices_.back()) vertices_.pop_back();
  if (vertices_.size() < 3) throw InvalidPolygon("polygon needs at least 3 distinct vertices");
  if (require_simple && !is_simple(vertices_)) throw InvalidPolygon("polygon is self-intersecting");
  if (signed_area() < 0) {
    std::reverse(vertices_.begin(), vertices_.end());
    reversed_ = true;
  }
}

double ClosedPolygon::signed_area() const {
  double a = 0;
  const std::size_t n = vertices_.size();
  for (std::size_t k = 0; k < n; ++k) a += cross(vertices_[k], vertices_[(k + 1) % n]);
  return 0.5 * a;
}

double ClosedPolygon::perimeter() const {
  double p = 0;
  const std::size_t n = vertices_.size();
  for (std::size_t k = 0; k < n; ++k) p += (vertices_[(k + 1) % n] - vertices_[k]).norm();
  return p;
}

bool ClosedPolygon::contains(const Vec2& p) const {
  const std::size_t n = vertices_.size();
  double scale = 0;
  for (const auto& v : vertices_) scale = std::max(scale, v.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * std::max(scale, 1.0);
  bool inside = false;
  for (std::size_t k = 0, l = n - 1; k < n; l = k++) {
    const Vec2& a = vertices_[l];
    const Vec2& b = vertices_[k];
    if (on_segment(a, b, p, tol)) return true;
    if ((b.y() > p.y()) != (a.y() > p.y())) {
      const double xc = b.x() + (p.y() - b.y()) * (a.x() - b.x()) / (a.y() - b.y());
      if (p.x() < xc) inside = !inside;
    }
  }
  return inside;
}

std::vector<Vec2> ClosedPolygon::sample(int per_edge) const {
  per_edge = std::max(per_edge, 1);
  std::vector<Vec2> out;
  const std::size_t n = vertices_.size();
  out.reserve(n * static_cast<std::size_t>(per_edge));
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& a = vertices_[k];
    const Vec2& b = vertices_[(k + 1) % n];
    for (int s = 0; s < per_edge; ++s) out.push_back(a + (b - a) * (static_cast<double>(s) / per_edge));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Location

namespace {

struct Bilinear {
  double p0, p1, p2, p3;  // f = p0 + p1 s + p2 t + p3 s t
  Bilinear(double f00, double f10, double f01, double f11)
      : p0(f00), p1(f10 - f00), p2(f01 - f00), p3(f00 - f10 - f01 + f11) {}
  double operator()(double s, double t) const { return p0 + p1 * s + p2 * t + p3 * s * t; }
};

bool spans_zero(double a, double b, double c, double d) {
  const double lo = std::min({a, b, c, d});
  const double hi = std::max({a, b, c, d});
  return lo <= 0 && hi >= 0 && !(lo == 0 && hi == 0);
}

// Real roots of a s^2 + b s + c.
std::vector<double> quadratic_roots(double a, double b, double c) {
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
  if (scale == 0) return {};
  a /= scale;
  b /= scale;
  c /= scale;
  if (std::abs(a) < 1e-14) {
    if (std::abs(b) < 1e-14) return {};
    return {-c / b};
  }
  double disc = b * b - 4 * a * c;
  if (disc < 0) {
    if (disc > -1e-14) {
      disc = 0;
    } else {
      return {};
    }
  }
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + (b >= 0 ? sq : -sq));
  std::vector<double> r;
  if (q != 0) {
    r.push_back(q / a);
    r.push_back(c / q);
  } else {
    r.push_back(0.0);
  }
  return r;
}

std::vector<std::array<double, 2>> cell_zeros(const Bilinear& f, const Bilinear& g) {
  const double a = f.p1 * g.p3 - g.p1 * f.p3;
  const double b = f.p0 * g.p3 + f.p1 * g.p2 - g.p0 * f.p3 - g.p1 * f.p2;
  const double c = f.p0 * g.p2 - g.p0 * f.p2;
  std::vector<std::array<double, 2>> out;
  constexpr double slack = 1e-9;
  for (double s : quadratic_roots(a, b, c)) {
    if (s < -slack || s > 1 + slack) continue;
    const double bf = f.p2 + f.p3 * s;
    const double bg = g.p2 + g.p3 * s;
    double t;
    if (std::abs(bf) >= std::abs(bg)) {
      if (bf == 0) continue;
      t = -(f.p0 + f.p1 * s) / bf;
    } else {
      t = -(g.p0 + g.p1 * s) / bg;
    }
    if (t < -slack || t > 1 + slack) continue;
    // Newton polish on the bilinear system
    for (int it = 0; it < 4; ++it) {
      const double r1 = f(s, t);
      const double r2 = g(s, t);
      const double j11 = f.p1 + f.p3 * t, j12 = f.p2 + f.p3 * s;
      const double j21 = g.p1 + g.p3 * t, j22 = g.p2 + g.p3 * s;
      const double det = j11 * j22 - j12 * j21;
      if (det == 0) break;
      s -= (j22 * r1 - j12 * r2) / det;
      t -= (-j21 * r1 + j11 * r2) / det;
    }
    out.push_back({s, t});
  }
  return out;
}

}  // namespace

std::vector<Singularity> locate_singularities(const SymmetricTensorField& tf) {
  const int nx = tf.nx();
  const int ny = tf.ny();
  std::vector<std::vector<Singularity>> rows(static_cast<std::size_t>(std::max(ny - 1, 0)));
#pragma omp parallel for schedule(dynamic, 8)
  for (int j = 0; j < ny - 1; ++j) {
    auto& found = rows[static_cast<std::size_t>(j)];
    for (int i = 0; i < nx - 1; ++i) {
      if (!tf.cell_valid(i, j)) continue;
      auto c1 = [&](int a, int b) { return tf.c11(a, b) - tf.c22(a, b); };
      auto c2 = [&](int a, int b) { return tf.c12(a, b); };
      const double a00 = c1(i, j), a10 = c1(i + 1, j), a01 = c1(i, j + 1), a11 = c1(i + 1, j + 1);
      const double b00 = c2(i, j), b10 = c2(i + 1, j), b01 = c2(i, j + 1), b11 = c2(i + 1, j + 1);
      if (!spans_zero(a00, a10, a01, a11) || !spans_zero(b00, b10, b01, b11)) continue;
      const Bilinear f(a00, a10, a01, a11);
      const Bilinear g(b00, b10, b01, b11);
      const double scale = std::max({1.0, std::abs(a00), std::abs(a10), std::abs(a01), std::abs(a11), std::abs(b00),
                                     std::abs(b10), std::abs(b01), std::abs(b11)});
      const bool last_i = i == nx - 2;
      const bool last_j = j == ny - 2;
      std::vector<std::array<double, 2>> kept;
      for (auto [s, t] : cell_zeros(f, g)) {
        if (s < 0 && s > -1e-12) s = 0;
        if (t < 0 && t > -1e-12) t = 0;
        if (s < 0 || t < 0 || s > 1 || t > 1) continue;
        if ((s == 1 && !last_i) || (t == 1 && !last_j)) continue;
        if (std::abs(f(s, t)) > 1e-10 * scale || std::abs(g(s, t)) > 1e-10 * scale) continue;
        bool dup = false;
        for (const auto& k : kept) dup = dup || (std::abs(k[0] - s) < 1e-12 && std::abs(k[1] - t) < 1e-12);
        if (dup) continue;
        kept.push_back({s, t});
        Singularity sg;
        sg.position = Vec2(tf.x[i] + s * (tf.x[i + 1] - tf.x[i]), tf.y[j] + t * (tf.y[j + 1] - tf.y[j]));
        sg.cell_i = i;
        sg.cell_j = j;
        found.push_back(sg);
      }
    }
  }
  std::vector<Singularity> all;
  for (auto& r : rows) all.insert(all.end(), r.begin(), r.end());
  return all;
}

std::vector<Singularity> select_isolated(std::span<const Singularity> sings, double delta_x,
                                         std::size_t delaunay_cutoff) {
  std::vector<Vec2> pts;
  pts.reserve(sings.size());
  for (const auto& s : sings) pts.push_back(s.position);
  const auto nn = nearest_neighbor_distances(pts, delaunay_cutoff);
  std::vector<Singularity> out;
  for (std::size_t k = 0; k < sings.size(); ++k) {
    if (nn[k] < 2 * delta_x) continue;
    Singularity s = sings[k];
    s.nn_distance = nn[k];
    out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classification

namespace {

// Sign changes of a cyclic sequence whose closing value is `wrap_sign` times the
// first; exact zeros are skipped.
int cyclic_sign_changes(const std::vector<double>& v, double wrap_sign) {
  int first = 0;
  int prev = 0;
  int changes = 0;
  for (double x : v) {
    const int sg = x > 0 ? 1 : (x < 0 ? -1 : 0);
    if (sg == 0) continue;
    if (first == 0) first = sg;
    if (prev != 0 && sg != prev) ++changes;
    prev = sg;
  }
  if (first == 0) return 0;
  const int closing = wrap_sign < 0 ? -first : first;
  if (closing != prev) ++changes;
  return changes;
}

}  // namespace

ClassificationResult classify_singularity(const SymmetricTensorField& tf, const Singularity& s, double r,
                                          std::span<const Singularity> others) {
  for (const auto& o : others) {
    if (o.position == s.position) continue;
    if ((o.position - s.position).norm() < r)
      throw RadiusTooLarge("another singularity lies inside the classification circle");
  }
  ClassificationResult res;
  res.radius = r;
  std::vector<double> dots(kClassificationSamples);
  std::vector<double> crosses(kClassificationSamples);
  Vec2 prev = Vec2::Zero();
  Vec2 first = Vec2::Zero();
  bool usable = true;
  for (int k = 0; k < kClassificationSamples; ++k) {
    const double phi = 2 * std::numbers::pi * k / kClassificationSamples;
    const Vec2 dir(std::cos(phi), std::sin(phi));
    ++res.samples_evaluated;
    const auto c = tf.interpolate(s.position + r * dir);
    if (!c) {
      usable = false;
      continue;
    }
    EigenDecomposition<double> e;
    try {
      e = eigen_decompose(*c);
    } catch (const NotPositiveDefinite&) {
      usable = false;
      continue;
    }
    if (e.degenerate) usable = false;
    Vec2 xi = e.xi2;
    if (k == 0) {
      first = xi;
    } else if (xi.dot(prev) < 0) {
      xi = -xi;
    }
    prev = xi;
    dots[static_cast<std::size_t>(k)] = dir.dot(xi);
    crosses[static_cast<std::size_t>(k)] = cross(dir, xi);
  }
  if (!usable) return res;
  const double wrap = first.dot(prev) < 0 ? -1.0 : 1.0;
  res.orthogonal_zeros = cyclic_sign_changes(dots, wrap);
  res.parallel_zeros = cyclic_sign_changes(crosses, wrap);
  res.type = (res.orthogonal_zeros == 3 && res.parallel_zeros == 3) ? SingularityType::Trisector
                                                                     : SingularityType::Wedge;
  return res;
}

std::optional<double> classification_radius(double nn_distance, double delta_x) {
  const double r = std::min(0.5 * nn_distance, 5 * delta_x);
  if (!(r >= 2 * delta_x)) return std::nullopt;
  return r;
}

std::vector<Singularity> classify_all(const SymmetricTensorField& tf, std::span<const Singularity> sings,
                                      double delta_x, std::size_t* total_samples) {
  std::vector<Singularity> out(sings.begin(), sings.end());
  std::vector<int> samples(out.size(), 0);
  const int n = static_cast<int>(out.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (int k = 0; k < n; ++k) {
    auto& s = out[static_cast<std::size_t>(k)];
    const auto r = classification_radius(s.nn_distance, delta_x);
    if (!r) {
      s.type = SingularityType::Unclassified;
      continue;
    }
    const auto res = classify_singularity(tf, s, *r, sings);
    s.type = res.type;
    samples[static_cast<std::size_t>(k)] = res.samples_evaluated;
  }
  if (total_samples) {
    for (int c : samples) *total_samples += static_cast<std::size_t>(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Filtering and pairing

std::vector<WedgePair> pair_wedges(std::span<const Singularity> wedges, std::span<const Singularity> trisectors,
                                   double max_pair_distance) {
  const std::size_t nw = wedges.size();
  // wedges whose nearest classified neighbour is a trisector go
  std::vector<std::size_t> kept;
  for (std::size_t a = 0; a < nw; ++a) {
    double best_w = std::numeric_limits<double>::infinity();
    double best_t = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < nw; ++b) {
      if (b != a) best_w = std::min(best_w, (wedges[a].position - wedges[b].position).norm());
    }
    for (const auto& t : trisectors) best_t = std::min(best_t, (wedges[a].position - t.position).norm());
    if (best_t < best_w) continue;
    kept.push_back(a);
  }
  auto nearest_in = [&](std::size_t a, const std::vector<std::size_t>& set) {
    std::size_t best = nw;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t b : set) {
      if (b == a) continue;
      const double d = (wedges[a].position - wedges[b].position).norm();
      if (d < bd) {
        bd = d;
        best = b;
      }
    }
    return std::make_pair(best, bd);
  };
  // lone wedges go
  std::vector<std::size_t> paired;
  for (std::size_t a : kept) {
    if (nearest_in(a, kept).second <= max_pair_distance) paired.push_back(a);
  }
  std::vector<std::pair<std::size_t, std::size_t>> keys;
  for (std::size_t a : paired) {
    const auto [b, d] = nearest_in(a, paired);
    if (b == nw) continue;
    keys.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::vector<WedgePair> pairs;
  for (const auto& [a, b] : keys) {
    WedgePair p;
    p.first = wedges[a];
    p.second = wedges[b];
    p.midpoint = 0.5 * (p.first.position + p.second.position);
    p.separation = (p.first.position - p.second.position).norm();
    pairs.push_back(p);
  }
  return pairs;
}

std::vector<WedgePair> pair_wedges(std::span<const Singularity> classified, double max_pair_distance) {
  std::vector<Singularity> w;
  std::vector<Singularity> t;
  for (const auto& s : classified) {
    if (s.type == SingularityType::Wedge) w.push_back(s);
    if (s.type == SingularityType::Trisector) t.push_back(s);
  }
  return pair_wedges(w, t, max_pair_distance);
}

// ---------------------------------------------------------------------------
// Indices

namespace {

double total_turning(std::span<const Vec2> samples) {
  const std::size_t n = samples.size();
  if (n < 3) throw UndersampledCurve("need at least 3 samples along the curve");
  double total = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& a = samples[k];
    const Vec2& b = samples[(k + 1) % n];
    // signed angle between consecutive samples, in (-pi, pi]
    const double inc = std::atan2(cross(a, b), a.dot(b));
    if (std::abs(inc) >= std::numbers::pi / 2) throw UndersampledCurve("consecutive samples turn by pi/2 or more");
    total += inc;
  }
  return total;
}

}  // namespace

int winding_number(std::span<const Vec2> samples) {
  for (const auto& v : samples) {
    if (v.x() == 0 && v.y() == 0) throw CriticalPointOnCurve("zero vector on the curve");
  }
  const double turns = total_turning(samples) / (2 * std::numbers::pi);
  const double rounded = std::round(turns);
  if (std::abs(turns - rounded) >= 1e-6) throw Error("winding number residual too large");
  return static_cast<int>(rounded);
}

double line_winding_number(std::span<const Vec2> line_samples) {
  std::vector<Vec2> doubled;
  doubled.reserve(line_samples.size());
  for (const auto& v : line_samples) {
    const double n2 = v.squaredNorm();
    if (n2 == 0) throw DegeneratePointOnCurve("undefined line on the curve");
    const Vec2 u = v / std::sqrt(n2);
    doubled.emplace_back(u.x() * u.x() - u.y() * u.y(), 2 * u.x() * u.y());
  }
  return 0.5 * winding_number(doubled);
}

int vector_field_index(const ClosedPolygon& gamma, const PlanarField& v, int samples_per_edge) {
  std::vector<Vec2> values;
  for (const auto& p : gamma.sample(samples_per_edge)) values.push_back(v(p));
  return winding_number(values);
}

double line_field_index(const ClosedPolygon& gamma, const PlanarField& line, int samples_per_edge) {
  std::vector<Vec2> values;
  for (const auto& p : gamma.sample(samples_per_edge)) values.push_back(line(p));
  return line_winding_number(values);
}

double tensor_line_index(const SymmetricTensorField& tf, const ClosedPolygon& gamma, int samples_per_edge) {
  return line_field_index(
      gamma,
      [&](const Vec2& p) -> Vec2 {
        const auto c = tf.interpolate(p);
        if (!c) throw DegeneratePointOnCurve("curve leaves the valid tensor data");
        const auto e = eigen_decompose(*c);
        if (e.degenerate) throw DegeneratePointOnCurve("isotropic tensor on the curve");
        return e.xi2;
      },
      samples_per_edge);
}

Census census_enclosed(const ClosedPolygon& gamma, std::span<const Singularity> sings) {
  Census c;
  for (const auto& s : sings) {
    if (!gamma.contains(s.position)) continue;
    switch (s.type) {
      case SingularityType::Wedge:
        ++c.wedges;
        break;
      case SingularityType::Trisector:
        ++c.trisectors;
        break;
      case SingularityType::Unclassified:
        ++c.unclassified;
        break;
    }
  }
  return c;
}

}  // namespace lcs

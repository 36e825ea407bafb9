#include "lcs/delaunay.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>

namespace lcs {

namespace {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// > 0 when d lies strictly inside the circumcircle of the CCW triangle abc.
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

std::uint64_t hilbert_index(std::uint32_t x, std::uint32_t y, int order) {
  std::uint64_t d = 0;
  for (std::uint32_t s = 1u << (order - 1); s > 0; s /= 2) {
    const std::uint32_t rx = (x & s) > 0;
    const std::uint32_t ry = (y & s) > 0;
    d += static_cast<std::uint64_t>(s) * s * ((3 * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        x = s - 1 - x;
        y = s - 1 - y;
      }
      std::swap(x, y);
    }
  }
  return d;
}

struct Tri {
  std::array<int, 3> v;
  std::array<int, 3> nb;  // nb[k] is across the edge opposite v[k]
  bool alive;
};

class BowyerWatson {
 public:
  explicit BowyerWatson(std::span<const Vec2> input) {
    pts_.assign(input.begin(), input.end());
    Vec2 lo = pts_.empty() ? Vec2::Zero() : pts_.front();
    Vec2 hi = lo;
    for (const auto& p : pts_) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Vec2 c = 0.5 * (lo + hi);
    const double m = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-12});
    const double big = 100.0 * m;
    n_real_ = static_cast<int>(pts_.size());
    pts_.emplace_back(c.x() - 2 * big, c.y() - big);
    pts_.emplace_back(c.x() + 2 * big, c.y() - big);
    pts_.emplace_back(c.x(), c.y() + 2 * big);
    tris_.push_back({{n_real_, n_real_ + 1, n_real_ + 2}, {-1, -1, -1}, true});
  }

  void insert(int pi) {
    const Vec2& p = pts_[static_cast<std::size_t>(pi)];
    const int start = locate(p);
    // cavity: triangles whose circumcircle strictly contains p
    std::vector<int> bad{start};
    std::vector<int> stack{start};
    mark_.resize(tris_.size(), 0);
    ++stamp_;
    mark(start);
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      for (int k = 0; k < 3; ++k) {
        const int n = tris_[static_cast<std::size_t>(t)].nb[static_cast<std::size_t>(k)];
        if (n < 0 || marked(n)) continue;
        const auto& tv = tris_[static_cast<std::size_t>(n)].v;
        if (incircle(pt(tv[0]), pt(tv[1]), pt(tv[2]), p) > 0) {
          mark(n);
          bad.push_back(n);
          stack.push_back(n);
        }
      }
    }
    struct Edge {
      int a, b, outer;
    };
    std::vector<Edge> boundary;
    for (int t : bad) {
      const Tri& tr = tris_[static_cast<std::size_t>(t)];
      for (int k = 0; k < 3; ++k) {
        const int n = tr.nb[static_cast<std::size_t>(k)];
        if (n >= 0 && marked(n)) continue;
        boundary.push_back({tr.v[static_cast<std::size_t>((k + 1) % 3)], tr.v[static_cast<std::size_t>((k + 2) % 3)], n});
      }
    }
    for (int t : bad) {
      tris_[static_cast<std::size_t>(t)].alive = false;
      free_.push_back(t);
    }
    std::vector<int> created;
    created.reserve(boundary.size());
    for (const Edge& e : boundary) {
      int slot;
      if (!free_.empty()) {
        slot = free_.back();
        free_.pop_back();
      } else {
        slot = static_cast<int>(tris_.size());
        tris_.push_back({});
        mark_.push_back(0);
      }
      const std::size_t s = static_cast<std::size_t>(slot);
      tris_[s] = {{e.a, e.b, pi}, {-1, -1, e.outer}, true};
      if (e.outer >= 0) {
        Tri& o = tris_[static_cast<std::size_t>(e.outer)];
        for (int k = 0; k < 3; ++k) {
          const int a = o.v[static_cast<std::size_t>((k + 1) % 3)];
          const int b = o.v[static_cast<std::size_t>((k + 2) % 3)];
          if (a == e.b && b == e.a) o.nb[static_cast<std::size_t>(k)] = slot;
        }
      }
      created.push_back(slot);
    }
    // link the fan around p: (a,b,p) borders (b,c,p) across b-p and (z,a,p) across p-a
    for (int t : created) {
      Tri& tr = tris_[static_cast<std::size_t>(t)];
      for (int u : created) {
        if (u == t) continue;
        const Tri& ou = tris_[static_cast<std::size_t>(u)];
        if (ou.v[0] == tr.v[1]) tr.nb[0] = u;
        if (ou.v[1] == tr.v[0]) tr.nb[1] = u;
      }
    }
    last_ = created.empty() ? 0 : created.front();
  }

  Triangulation result() const {
    Triangulation out;
    for (const Tri& t : tris_) {
      if (!t.alive) continue;
      if (t.v[0] >= n_real_ || t.v[1] >= n_real_ || t.v[2] >= n_real_) continue;
      out.triangles.push_back(t.v);
    }
    return out;
  }

 private:
  const Vec2& pt(int i) const { return pts_[static_cast<std::size_t>(i)]; }
  void mark(int t) { mark_[static_cast<std::size_t>(t)] = stamp_; }
  bool marked(int t) const { return mark_[static_cast<std::size_t>(t)] == stamp_; }

  int locate(const Vec2& p) const {
    int t = last_;
    if (t < 0 || !tris_[static_cast<std::size_t>(t)].alive) t = first_alive();
    const std::size_t limit = 4 * tris_.size() + 16;
    for (std::size_t step = 0; step < limit; ++step) {
      const Tri& tr = tris_[static_cast<std::size_t>(t)];
      int next = -1;
      for (int r = 0; r < 3; ++r) {
        const int k = static_cast<int>((step + static_cast<std::size_t>(r)) % 3);
        const int a = tr.v[static_cast<std::size_t>((k + 1) % 3)];
        const int b = tr.v[static_cast<std::size_t>((k + 2) % 3)];
        if (orient(pt(a), pt(b), p) < 0) {
          next = tr.nb[static_cast<std::size_t>(k)];
          break;
        }
      }
      if (next < 0) return t;
      t = next;
    }
    // walk did not terminate; fall back to a scan
    for (std::size_t i = 0; i < tris_.size(); ++i) {
      const Tri& tr = tris_[i];
      if (!tr.alive) continue;
      if (orient(pt(tr.v[0]), pt(tr.v[1]), p) >= 0 && orient(pt(tr.v[1]), pt(tr.v[2]), p) >= 0 &&
          orient(pt(tr.v[2]), pt(tr.v[0]), p) >= 0)
        return static_cast<int>(i);
    }
    return first_alive();
  }

  int first_alive() const {
    for (std::size_t i = 0; i < tris_.size(); ++i) {
      if (tris_[i].alive) return static_cast<int>(i);
    }
    return 0;
  }

  std::vector<Vec2> pts_;
  std::vector<Tri> tris_;
  std::vector<int> free_;
  std::vector<unsigned> mark_;
  unsigned stamp_ = 0;
  int n_real_ = 0;
  int last_ = 0;
};

// Point order along a Hilbert curve, duplicates removed (first occurrence kept).
std::vector<int> insertion_order(std::span<const Vec2> points) {
  std::vector<int> idx(points.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    const auto& pa = points[static_cast<std::size_t>(a)];
    const auto& pb = points[static_cast<std::size_t>(b)];
    if (pa.x() != pb.x()) return pa.x() < pb.x();
    if (pa.y() != pb.y()) return pa.y() < pb.y();
    return a < b;
  });
  std::vector<int> unique;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (k > 0 && points[static_cast<std::size_t>(idx[k])] == points[static_cast<std::size_t>(idx[k - 1])]) continue;
    unique.push_back(idx[k]);
  }
  if (unique.empty()) return unique;
  Vec2 lo = points[static_cast<std::size_t>(unique.front())];
  Vec2 hi = lo;
  for (int i : unique) {
    lo = lo.cwiseMin(points[static_cast<std::size_t>(i)]);
    hi = hi.cwiseMax(points[static_cast<std::size_t>(i)]);
  }
  const double span = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-300});
  constexpr int order = 16;
  const double scale = static_cast<double>((1u << order) - 1) / span;
  std::vector<std::pair<std::uint64_t, int>> keyed;
  keyed.reserve(unique.size());
  for (int i : unique) {
    const Vec2& p = points[static_cast<std::size_t>(i)];
    const auto hx = static_cast<std::uint32_t>((p.x() - lo.x()) * scale);
    const auto hy = static_cast<std::uint32_t>((p.y() - lo.y()) * scale);
    keyed.emplace_back(hilbert_index(hx, hy, order), i);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<int> out;
  out.reserve(keyed.size());
  for (const auto& k : keyed) out.push_back(k.second);
  return out;
}

}  // namespace

Triangulation delaunay_triangulation(std::span<const Vec2> points) {
  BowyerWatson bw(points);
  for (int i : insertion_order(points)) bw.insert(i);
  return bw.result();
}

std::vector<int> nearest_neighbors(std::span<const Vec2> points, std::size_t exhaustive_cutoff) {
  const std::size_t n = points.size();
  std::vector<int> nn(n, -1);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  auto consider = [&](std::size_t a, std::size_t b) {
    const double d = (points[a] - points[b]).norm();
    if (d < best[a] || (d == best[a] && static_cast<int>(b) < nn[a])) {
      best[a] = d;
      nn[a] = static_cast<int>(b);
    }
  };
  if (n <= exhaustive_cutoff) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a != b) consider(a, b);
      }
    }
    return nn;
  }
  // exact duplicates are absent from the triangulation: link them directly
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    const auto& pa = points[static_cast<std::size_t>(a)];
    const auto& pb = points[static_cast<std::size_t>(b)];
    if (pa.x() != pb.x()) return pa.x() < pb.x();
    if (pa.y() != pb.y()) return pa.y() < pb.y();
    return a < b;
  });
  for (std::size_t k = 1; k < n; ++k) {
    const auto a = static_cast<std::size_t>(idx[k - 1]);
    const auto b = static_cast<std::size_t>(idx[k]);
    if (points[a] == points[b]) {
      consider(a, b);
      consider(b, a);
    }
  }
  const Triangulation tri = delaunay_triangulation(points);
  if (tri.triangles.empty()) {
    // all points collinear: neighbours are adjacent in sorted order
    for (std::size_t k = 1; k < n; ++k) {
      consider(static_cast<std::size_t>(idx[k - 1]), static_cast<std::size_t>(idx[k]));
      consider(static_cast<std::size_t>(idx[k]), static_cast<std::size_t>(idx[k - 1]));
    }
  }
  for (const auto& t : tri.triangles) {
    for (int k = 0; k < 3; ++k) {
      const auto a = static_cast<std::size_t>(t[static_cast<std::size_t>(k)]);
      const auto b = static_cast<std::size_t>(t[static_cast<std::size_t>((k + 1) % 3)]);
      consider(a, b);
      consider(b, a);
    }
  }
  return nn;
}

std::vector<double> nearest_neighbor_distances(std::span<const Vec2> points, std::size_t exhaustive_cutoff) {
  const auto nn = nearest_neighbors(points, exhaustive_cutoff);
  std::vector<double> d(points.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (nn[i] >= 0) d[i] = (points[i] - points[static_cast<std::size_t>(nn[i])]).norm();
  }
  return d;
}

}  // namespace lcs

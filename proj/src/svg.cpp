#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lcs/pipeline.hpp"

namespace lcs {

std::optional<Layer> layer_from_string(const std::string& s) {
  if (s == "backdrop") return Layer::Backdrop;
  if (s == "singularities") return Layer::Singularities;
  if (s == "sections") return Layer::Sections;
  if (s == "boundaries") return Layer::Boundaries;
  return std::nullopt;
}

namespace {

constexpr int kLevels = 32;
constexpr int kMaxBackdropCells = 200;

std::array<int, 3> colormap(double t) {
  static const std::array<std::array<double, 3>, 5> stops{{
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - static_cast<double>(i);
  std::array<int, 3> c{};
  for (int k = 0; k < 3; ++k) c[k] = static_cast<int>(std::lround(stops[i][k] + f * (stops[i + 1][k] - stops[i][k])));
  return c;
}

std::string hex(const std::array<int, 3>& c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

struct Frame {
  Bounds world;
  double scale = 1;
  double pad = 30;
  double legend = 170;

  double sx(double x) const { return pad + (x - world.xmin) * scale; }
  double sy(double y) const { return pad + (world.ymax - y) * scale; }
  double width() const { return 2 * pad + (world.xmax - world.xmin) * scale + legend; }
  double height() const { return 2 * pad + (world.ymax - world.ymin) * scale; }
};

Bounds extent(const RenderInput& in) {
  if (in.eigen && in.eigen->x.size() > 1) return {in.eigen->x.front(), in.eigen->x.back(), in.eigen->y.front(), in.eigen->y.back()};
  Bounds b{INFINITY, -INFINITY, INFINITY, -INFINITY};
  auto add = [&](const Vec2& p) {
    b.xmin = std::min(b.xmin, p.x());
    b.xmax = std::max(b.xmax, p.x());
    b.ymin = std::min(b.ymin, p.y());
    b.ymax = std::max(b.ymax, p.y());
  };
  for (const auto& s : in.located) add(s.position);
  for (const auto& s : in.classified) add(s.position);
  for (const auto& s : in.sections) {
    add(s.anchor);
    add(s.endpoint);
  }
  for (const auto& bd : in.boundaries) {
    for (const auto& v : bd.polygon.vertices()) add(v);
  }
  if (!(b.xmax > b.xmin)) b.xmin -= 0.5, b.xmax += 0.5;
  if (!(b.ymax > b.ymin)) b.ymin -= 0.5, b.ymax += 0.5;
  if (!std::isfinite(b.xmin)) b = {0, 1, 0, 1};
  return b;
}

void backdrop(std::ostringstream& out, const EigenField& e, const Frame& f, double& lo, double& hi) {
  const int nx = e.x.size(), ny = e.y.size();
  const int bx = std::max(1, (nx + kMaxBackdropCells - 1) / kMaxBackdropCells);
  const int by = std::max(1, (ny + kMaxBackdropCells - 1) / kMaxBackdropCells);
  const int cx = (nx + bx - 1) / bx, cy = (ny + by - 1) / by;
  std::vector<double> v(static_cast<std::size_t>(cx) * static_cast<std::size_t>(cy), NAN);
  lo = INFINITY;
  hi = -INFINITY;
  for (int j = 0; j < cy; ++j) {
    for (int i = 0; i < cx; ++i) {
      double sum = 0;
      int n = 0;
      for (int jj = j * by; jj < std::min(ny, (j + 1) * by); ++jj) {
        for (int ii = i * bx; ii < std::min(nx, (i + 1) * bx); ++ii) {
          if (!e.valid(ii, jj)) continue;
          sum += std::log10(std::max(e.lambda2(ii, jj), 1.0));
          ++n;
        }
      }
      if (n == 0) continue;
      const double m = sum / n;
      v[static_cast<std::size_t>(j) * static_cast<std::size_t>(cx) + static_cast<std::size_t>(i)] = m;
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
  }
  if (!std::isfinite(lo)) return;
  if (!(hi > lo)) hi = lo + 1;
  const double x0 = e.x.front(), y0 = e.y.front();
  const double wx = (e.x.back() - x0) / cx, wy = (e.y.back() - y0) / cy;
  out << "<g id=\"backdrop\" shape-rendering=\"crispEdges\">\n";
  char buf[200];
  for (int j = 0; j < cy; ++j) {
    int i = 0;
    while (i < cx) {
      const double val = v[static_cast<std::size_t>(j) * static_cast<std::size_t>(cx) + static_cast<std::size_t>(i)];
      const int level = std::isnan(val) ? -1 : std::min(kLevels - 1, static_cast<int>((val - lo) / (hi - lo) * kLevels));
      int run = 1;
      while (i + run < cx) {
        const double w = v[static_cast<std::size_t>(j) * static_cast<std::size_t>(cx) + static_cast<std::size_t>(i + run)];
        const int l2 = std::isnan(w) ? -1 : std::min(kLevels - 1, static_cast<int>((w - lo) / (hi - lo) * kLevels));
        if (l2 != level) break;
        ++run;
      }
      if (level >= 0) {
        const double xa = f.sx(x0 + i * wx), xb = f.sx(x0 + (i + run) * wx);
        const double ya = f.sy(y0 + (j + 1) * wy), yb = f.sy(y0 + j * wy);
        std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n", xa, ya,
                      xb - xa + 0.3, yb - ya + 0.3, hex(colormap((level + 0.5) / kLevels)).c_str());
        out << buf;
      }
      i += run;
    }
  }
  out << "</g>\n";
}

}  // namespace

std::string render_svg(const RenderInput& in, const std::set<Layer>& layers, int width_px) {
  if (layers.count(Layer::Backdrop) && !in.eigen) throw MissingLayer("backdrop layer needs the Cauchy-Green eigen field");
  Frame f;
  f.world = extent(in);
  f.scale = (width_px - 2 * f.pad - f.legend) / (f.world.xmax - f.world.xmin);
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                f.width(), f.height(), f.width(), f.height());
  out << buf << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  double lo = 0, hi = 0;
  if (layers.count(Layer::Backdrop)) backdrop(out, *in.eigen, f, lo, hi);

  const double mk = 4.0;
  if (layers.count(Layer::Singularities)) {
    out << "<g id=\"singularities\">\n";
    for (const auto& s : in.located) {
      const double x = f.sx(s.position.x()), y = f.sy(s.position.y());
      std::snprintf(buf, sizeof buf, "<path d=\"M%.2f %.2fL%.2f %.2fM%.2f %.2fL%.2f %.2f\" stroke=\"black\" stroke-width=\"1\"/>\n",
                    x - mk, y - mk, x + mk, y + mk, x - mk, y + mk, x + mk, y - mk);
      out << buf;
    }
    for (const auto& p : in.pairs) {
      std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#1a9850\" stroke-width=\"1.5\"/>\n",
                    f.sx(p.first.position.x()), f.sy(p.first.position.y()), f.sx(p.second.position.x()),
                    f.sy(p.second.position.y()));
      out << buf;
    }
    for (const auto& s : in.classified) {
      const double x = f.sx(s.position.x()), y = f.sy(s.position.y());
      if (s.type == SingularityType::Trisector) {
        std::snprintf(buf, sizeof buf, "<path d=\"M%.2f %.2fL%.2f %.2fL%.2f %.2fZ\" fill=\"#d73027\" stroke=\"black\" stroke-width=\"0.5\"/>\n",
                      x, y - 1.5 * mk, x - 1.3 * mk, y + mk, x + 1.3 * mk, y + mk);
      } else if (s.type == SingularityType::Wedge) {
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"#1a9850\" stroke=\"black\" stroke-width=\"0.5\"/>\n",
                      x, y, mk);
      } else {
        std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"#999999\"/>\n",
                      x - mk, y - mk, 2 * mk, 2 * mk);
      }
      out << buf;
    }
    out << "</g>\n";
  }

  if (layers.count(Layer::Sections)) {
    out << "<g id=\"sections\" stroke=\"black\" stroke-width=\"1\">\n";
    for (const auto& s : in.sections) {
      std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/>\n", f.sx(s.anchor.x()),
                    f.sy(s.anchor.y()), f.sx(s.endpoint.x()), f.sy(s.endpoint.y()));
      out << buf;
      for (std::size_t k = 0; k < s.seeds.size(); k += 10) {
        const Vec2 p = s.point(s.seeds[k]);
        std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/>\n", f.sx(p.x()),
                      f.sy(p.y()) - 3, f.sx(p.x()), f.sy(p.y()) + 3);
        out << buf;
      }
    }
    out << "</g>\n";
  }

  if (layers.count(Layer::Boundaries)) {
    out << "<g id=\"boundaries\">\n";
    for (const auto& b : in.boundaries) {
      out << "<polygon fill=\"none\" stroke=\"#00c853\" stroke-width=\"2\" points=\"";
      const auto& v = b.polygon.vertices();
      const std::size_t stride = std::max<std::size_t>(1, v.size() / 2000);
      for (std::size_t k = 0; k < v.size(); k += stride) {
        std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", k ? " " : "", f.sx(v[k].x()), f.sy(v[k].y()));
        out << buf;
      }
      out << "\"/>\n";
      double top = -INFINITY, cx = 0;
      for (const auto& p : v) {
        if (p.y() > top) top = p.y(), cx = p.x();
      }
      std::snprintf(buf, sizeof buf,
                    "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">&#955;=%.3f</text>\n",
                    f.sx(cx), f.sy(top) - 4, b.lambda);
      out << buf;
    }
    out << "</g>\n";
  }

  // Legend
  const double lx = f.width() - f.legend + 10;
  double ly = f.pad;
  out << "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
  auto entry = [&](const std::string& symbol, const std::string& label) {
    out << symbol;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\">%s</text>\n", lx + 16, ly + 4, label.c_str());
    out << buf;
    ly += 18;
  };
  if (layers.count(Layer::Singularities)) {
    std::snprintf(buf, sizeof buf, "<path d=\"M%.2f %.2fL%.2f %.2fM%.2f %.2fL%.2f %.2f\" stroke=\"black\"/>\n", lx, ly - 4, lx + 8,
                  ly + 4, lx, ly + 4, lx + 8, ly - 4);
    entry(buf, "singularity");
    std::snprintf(buf, sizeof buf, "<path d=\"M%.2f %.2fL%.2f %.2fL%.2f %.2fZ\" fill=\"#d73027\"/>\n", lx + 4, ly - 6, lx, ly + 4, lx + 8,
                  ly + 4);
    entry(buf, "trisector");
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" fill=\"#1a9850\"/>\n", lx + 4, ly);
    entry(buf, "wedge");
  }
  if (layers.count(Layer::Sections)) {
    std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", lx, ly, lx + 10, ly);
    entry(buf, "Poincare section");
  }
  if (layers.count(Layer::Boundaries)) {
    std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#00c853\" stroke-width=\"2\"/>\n", lx,
                  ly, lx + 10, ly);
    entry(buf, "vortex boundary");
  }
  if (layers.count(Layer::Backdrop) && hi > lo) {
    ly += 6;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\">log10 &#955;2</text>\n", lx, ly);
    out << buf;
    ly += 6;
    for (int k = 0; k < kLevels; ++k) {
      std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"14\" height=\"4\" fill=\"%s\"/>\n", lx,
                    ly + 4.0 * (kLevels - 1 - k), hex(colormap((k + 0.5) / kLevels)).c_str());
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\">%.2f</text>\n<text x=\"%.2f\" y=\"%.2f\">%.2f</text>\n", lx + 18,
                  ly + 8, hi, lx + 18, ly + 4.0 * kLevels, lo);
    out << buf;
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace lcs

#include "lcs/grid_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "lcs/errors.hpp"

namespace lcs {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw FormatError("not a number: '" + s + "'");
  return v;
}

namespace {

std::string units_token(const std::string& u) { return u.empty() ? "-" : u; }
std::string units_from_token(const std::string& u) { return u == "-" ? std::string{} : u; }

bool exactly_uniform(const Axis& a) {
  if (a.size() < 2) return false;
  const double start = a.front();
  const double step = a[1] - a[0];
  if (!(step > 0)) return false;
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] != start + step * i) return false;
  }
  return true;
}

std::ifstream open_in(const fs::path& p, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(p, mode);
  if (!in) throw FormatError("cannot open " + p.string());
  return in;
}

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::out) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, mode | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + p.string());
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

}  // namespace

// ---------------------------------------------------------------------------

std::size_t GridHeader::sample_count() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= static_cast<std::size_t>(a.size());
  return n;
}

const std::string& GridHeader::attr(const std::string& key) const {
  auto it = attrs.find(key);
  if (it == attrs.end()) throw FormatError("missing attribute '" + key + "'");
  return it->second;
}

double GridHeader::attr_double(const std::string& key) const { return parse_double(attr(key)); }

GridHeader read_grid_header(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "lcsgrid 1") throw FormatError(path.string() + ": not an lcsgrid 1 header");
  GridHeader h;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string kind;
    ss >> kind;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    if (kind == "axis") {
      std::string name, units, mode;
      int n = 0;
      if (!(ss >> name >> n >> units >> mode) || n < 1) throw FormatError(where + "malformed axis");
      if (mode == "start") {
        std::string s, step_kw, step;
        if (!(ss >> s >> step_kw >> step) || step_kw != "step") throw FormatError(where + "malformed uniform axis");
        h.axes.push_back(Axis::uniform(parse_double(s), parse_double(step), n, name, units_from_token(units)));
      } else if (mode == "values") {
        std::vector<double> c;
        std::string tok;
        while (ss >> tok) c.push_back(parse_double(tok));
        if (static_cast<int>(c.size()) != n) throw FormatError(where + "axis length does not match its values");
        h.axes.emplace_back(std::move(c), name, units_from_token(units));
      } else {
        throw FormatError(where + "unknown axis mode '" + mode + "'");
      }
    } else if (kind == "fill") {
      std::string v;
      if (!(ss >> v)) throw FormatError(where + "malformed fill");
      h.fill = parse_double(v);
    } else if (kind == "field") {
      std::string name, file;
      if (!(ss >> name >> file)) throw FormatError(where + "malformed field");
      h.fields.emplace_back(name, file);
    } else if (kind == "attr") {
      std::string key, value;
      if (!(ss >> key)) throw FormatError(where + "malformed attr");
      std::getline(ss, value);
      h.attrs[key] = trim(value);
    } else {
      throw FormatError(where + "unknown record '" + kind + "'");
    }
  }
  if (h.axes.empty()) throw FormatError(path.string() + ": no axes");
  return h;
}

void write_grid_header(const fs::path& path, const GridHeader& header) {
  auto out = open_out(path);
  out << "lcsgrid 1\n";
  for (const auto& a : header.axes) {
    out << "axis " << (a.name().empty() ? "axis" : a.name()) << ' ' << a.size() << ' ' << units_token(a.units());
    if (exactly_uniform(a)) {
      out << " start " << format_double(a.front()) << " step " << format_double(a[1] - a[0]);
    } else {
      out << " values";
      for (double c : a.coords()) out << ' ' << format_double(c);
    }
    out << '\n';
  }
  out << "fill " << format_double(header.fill) << '\n';
  for (const auto& [name, file] : header.fields) out << "field " << name << ' ' << file << '\n';
  for (const auto& [k, v] : header.attrs) out << "attr " << k << ' ' << v << '\n';
}

std::vector<double> read_raw(const fs::path& path, std::size_t count) {
  auto in = open_in(path, std::ios::binary);
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != count * sizeof(double))
    throw FormatError(path.string() + ": expected " + std::to_string(count * sizeof(double)) + " bytes, found " +
                      std::to_string(bytes));
  in.seekg(0);
  std::vector<double> v(count);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes));
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& x : v) {
      auto u = std::bit_cast<std::uint64_t>(x);
      u = __builtin_bswap64(u);
      x = std::bit_cast<double>(u);
    }
  }
  return v;
}

void write_raw(const fs::path& path, std::span<const double> values) {
  auto out = open_out(path, std::ios::binary);
  if constexpr (std::endian::native == std::endian::big) {
    for (double x : values) {
      const auto u = __builtin_bswap64(std::bit_cast<std::uint64_t>(x));
      out.write(reinterpret_cast<const char*>(&u), sizeof u);
    }
  } else {
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  }
}

const std::vector<double>& GridData::field(const std::string& name) const {
  auto it = fields.find(name);
  if (it == fields.end()) throw FormatError("missing field '" + name + "'");
  return it->second;
}

GridData read_grid(const fs::path& header_path) {
  GridData d;
  d.header = read_grid_header(header_path);
  const std::size_t n = d.header.sample_count();
  const bool nan_fill = std::isnan(d.header.fill);
  for (const auto& [name, file] : d.header.fields) {
    auto v = read_raw(header_path.parent_path() / file, n);
    if (!nan_fill) {
      for (auto& x : v) {
        if (x == d.header.fill) x = std::numeric_limits<double>::quiet_NaN();
      }
    }
    d.fields[name] = std::move(v);
  }
  return d;
}

void write_grid(const fs::path& header_path, GridData data) {
  const std::string stem = header_path.stem().string();
  std::vector<std::string> order;
  for (const auto& f : data.header.fields) order.push_back(f.first);
  for (const auto& [name, v] : data.fields) {
    if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);
  }
  data.header.fields.clear();
  const std::size_t n = data.header.sample_count();
  const bool nan_fill = std::isnan(data.header.fill);
  for (const auto& name : order) {
    auto& v = data.fields.at(name);
    if (v.size() != n) throw FormatError("field '" + name + "' has the wrong number of samples");
    if (!nan_fill) {
      for (auto& x : v) {
        if (std::isnan(x)) x = data.header.fill;
      }
    }
    const std::string file = stem + "." + name + ".bin";
    write_raw(header_path.parent_path() / file, v);
    data.header.fields.emplace_back(name, file);
  }
  write_grid_header(header_path, data.header);
}

// ---------------------------------------------------------------------------
// Series

void save_series(const fs::path& path, const std::vector<std::pair<std::string, const GridSeries*>>& fields) {
  if (fields.empty()) throw FormatError("nothing to save");
  const GridSeries& first = *fields.front().second;
  first.validate();
  GridData d;
  Axis t = first.time;
  if (t.name().empty()) t.set_name("time");
  Axis y = first.y_axis();
  Axis x = first.x_axis();
  if (y.name().empty()) y.set_name("y");
  if (x.name().empty()) x.set_name("x");
  d.header.axes = {t, y, x};
  for (const auto& [name, s] : fields) {
    s->validate();
    if (!(s->time == first.time) || !(s->x_axis() == x) || !(s->y_axis() == y))
      throw FormatError("series '" + name + "' does not share the axes of the first");
    std::vector<double> v;
    v.reserve(d.header.sample_count());
    for (const auto& slice : s->slices) {
      const auto& vals = slice.values();
      v.insert(v.end(), vals.data(), vals.data() + vals.size());
    }
    d.fields[name] = std::move(v);
    d.header.fields.emplace_back(name, "");
  }
  write_grid(path, std::move(d));
}

std::map<std::string, GridSeries> load_series(const fs::path& path) {
  const GridData d = read_grid(path);
  if (d.header.axes.size() != 3) throw FormatError(path.string() + ": a series needs axes (time, y, x)");
  const Axis& t = d.header.axes[0];
  const Axis& y = d.header.axes[1];
  const Axis& x = d.header.axes[2];
  const std::size_t per = static_cast<std::size_t>(x.size()) * static_cast<std::size_t>(y.size());
  std::map<std::string, GridSeries> out;
  for (const auto& [name, v] : d.fields) {
    GridSeries s;
    s.time = t;
    for (int k = 0; k < t.size(); ++k) {
      ScalarGrid2D g(x, y);
      std::copy_n(v.data() + per * static_cast<std::size_t>(k), per, g.values().data());
      s.slices.push_back(std::move(g));
    }
    out[name] = std::move(s);
  }
  return out;
}

std::pair<GridSeries, GridSeries> load_velocity(const fs::path& path) {
  auto s = load_series(path);
  if (!s.count("u") || !s.count("v")) throw FormatError(path.string() + ": velocity files need fields u and v");
  return {std::move(s.at("u")), std::move(s.at("v"))};
}

std::pair<GridSeries, GridSeries> read_velocity_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  std::vector<std::string> cols = split(trim(line), ',');
  for (auto& c : cols) c = trim(c);
  const std::vector<std::string> want{"t", "x", "y", "u", "v"};
  int idx[5];
  for (int k = 0; k < 5; ++k) {
    auto it = std::find(cols.begin(), cols.end(), want[static_cast<std::size_t>(k)]);
    if (it == cols.end()) throw FormatError(path.string() + ": missing column '" + want[static_cast<std::size_t>(k)] + "'");
    idx[k] = static_cast<int>(it - cols.begin());
  }
  struct Row {
    double t, x, y, u, v;
  };
  std::vector<Row> rows;
  std::set<double> ts, xs, ys;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != cols.size()) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": wrong column count");
    double val[5];
    for (int k = 0; k < 5; ++k) val[k] = parse_double(trim(f[static_cast<std::size_t>(idx[k])]));
    rows.push_back({val[0], val[1], val[2], val[3], val[4]});
    ts.insert(val[0]);
    xs.insert(val[1]);
    ys.insert(val[2]);
  }
  const Axis t(std::vector<double>(ts.begin(), ts.end()), "time");
  const Axis x(std::vector<double>(xs.begin(), xs.end()), "x");
  const Axis y(std::vector<double>(ys.begin(), ys.end()), "y");
  if (rows.size() != ts.size() * xs.size() * ys.size())
    throw FormatError(path.string() + ": rows do not cover a full (t, x, y) grid");
  GridSeries u, v;
  u.time = v.time = t;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  u.slices.assign(ts.size(), ScalarGrid2D(x, y, nan));
  v.slices.assign(ts.size(), ScalarGrid2D(x, y, nan));
  auto index_of = [](const std::set<double>& s, double q) { return static_cast<int>(std::distance(s.begin(), s.find(q))); };
  std::vector<char> seen(rows.size(), 0);
  for (const auto& r : rows) {
    const int k = index_of(ts, r.t), i = index_of(xs, r.x), j = index_of(ys, r.y);
    const std::size_t flat = (static_cast<std::size_t>(k) * ys.size() + static_cast<std::size_t>(j)) * xs.size() +
                             static_cast<std::size_t>(i);
    if (seen[flat]) throw FormatError(path.string() + ": duplicate sample");
    seen[flat] = 1;
    u.slices[static_cast<std::size_t>(k)](i, j) = r.u;
    v.slices[static_cast<std::size_t>(k)](i, j) = r.v;
  }
  return {std::move(u), std::move(v)};
}

// ---------------------------------------------------------------------------
// Flow map and Cauchy-Green checkpoints

namespace {

const char* kCompanionNames[4] = {"xp", "xm", "yp", "ym"};

template <typename S>
std::vector<double> flatten(const Grid2D<S>& g) {
  std::vector<double> v(static_cast<std::size_t>(g.values().size()));
  for (Eigen::Index k = 0; k < g.values().size(); ++k) v[static_cast<std::size_t>(k)] = static_cast<double>(g.values().data()[k]);
  return v;
}

ScalarGrid2D unflatten(const std::vector<double>& v, const Axis& x, const Axis& y) {
  ScalarGrid2D g(x, y);
  std::copy(v.begin(), v.end(), g.values().data());
  return g;
}

MaskGrid unflatten_mask(const std::vector<double>& v, const Axis& x, const Axis& y) {
  MaskGrid g(x, y);
  for (std::size_t k = 0; k < v.size(); ++k) g.values().data()[k] = v[k] != 0 ? 1 : 0;
  return g;
}

std::pair<Axis, Axis> plane_axes(const GridHeader& h, const fs::path& path) {
  if (h.axes.size() != 2) throw FormatError(path.string() + ": expected axes (y, x)");
  return {h.axes[1], h.axes[0]};
}

void add_plane_axes(GridHeader& h, Axis x, Axis y) {
  if (x.name().empty()) x.set_name("x");
  if (y.name().empty()) y.set_name("y");
  h.axes = {y, x};
}

}  // namespace

void save_flow_map(const fs::path& path, const FlowMapGrid& fm) {
  GridData d;
  add_plane_axes(d.header, fm.x, fm.y);
  d.header.attrs["kind"] = "flowmap";
  d.header.attrs["rho"] = format_double(fm.rho);
  d.header.attrs["t0"] = format_double(fm.t0);
  d.header.attrs["T"] = format_double(fm.T);
  for (int c = 0; c < 4; ++c) {
    const std::string suffix = kCompanionNames[c];
    d.header.fields.emplace_back("x_" + suffix, "");
    d.header.fields.emplace_back("y_" + suffix, "");
    d.fields["x_" + suffix] = flatten(fm.final_x[static_cast<std::size_t>(c)]);
    d.fields["y_" + suffix] = flatten(fm.final_y[static_cast<std::size_t>(c)]);
  }
  d.header.fields.emplace_back("valid", "");
  d.fields["valid"] = flatten(fm.valid);
  write_grid(path, std::move(d));
}

FlowMapGrid load_flow_map(const fs::path& path) {
  const GridData d = read_grid(path);
  if (d.header.attrs.count("kind") && d.header.attr("kind") != "flowmap")
    throw FormatError(path.string() + ": not a flow-map checkpoint");
  FlowMapGrid fm;
  std::tie(fm.x, fm.y) = plane_axes(d.header, path);
  fm.rho = d.header.attr_double("rho");
  fm.t0 = d.header.attr_double("t0");
  fm.T = d.header.attr_double("T");
  for (int c = 0; c < 4; ++c) {
    const std::string suffix = kCompanionNames[c];
    fm.final_x[static_cast<std::size_t>(c)] = unflatten(d.field("x_" + suffix), fm.x, fm.y);
    fm.final_y[static_cast<std::size_t>(c)] = unflatten(d.field("y_" + suffix), fm.x, fm.y);
  }
  fm.valid = unflatten_mask(d.field("valid"), fm.x, fm.y);
  return fm;
}

void save_cauchy_green(const fs::path& path, const CauchyGreenFields& cg) {
  const auto& t = cg.tensor;
  const auto& e = cg.eigen;
  GridData d;
  add_plane_axes(d.header, t.x, t.y);
  d.header.attrs["kind"] = "cauchy_green";
  d.header.attrs["degeneracy_threshold"] = format_double(e.degeneracy_threshold);
  const std::vector<std::pair<std::string, std::vector<double>>> fields{
      {"c11", flatten(t.c11)},         {"c12", flatten(t.c12)},         {"c22", flatten(t.c22)},
      {"valid", flatten(t.valid)},     {"lambda1", flatten(e.lambda1)}, {"lambda2", flatten(e.lambda2)},
      {"xi1_x", flatten(e.xi1_x)},     {"xi1_y", flatten(e.xi1_y)},     {"xi2_x", flatten(e.xi2_x)},
      {"xi2_y", flatten(e.xi2_y)},     {"degenerate", flatten(e.degenerate)}, {"eigen_valid", flatten(e.valid)}};
  for (const auto& [name, v] : fields) {
    d.header.fields.emplace_back(name, "");
    d.fields[name] = v;
  }
  write_grid(path, std::move(d));
}

CauchyGreenFields load_cauchy_green(const fs::path& path) {
  const GridData d = read_grid(path);
  if (d.header.attrs.count("kind") && d.header.attr("kind") != "cauchy_green")
    throw FormatError(path.string() + ": not a Cauchy-Green checkpoint");
  CauchyGreenFields cg;
  auto& t = cg.tensor;
  auto& e = cg.eigen;
  std::tie(t.x, t.y) = plane_axes(d.header, path);
  e.x = t.x;
  e.y = t.y;
  t.c11 = unflatten(d.field("c11"), t.x, t.y);
  t.c12 = unflatten(d.field("c12"), t.x, t.y);
  t.c22 = unflatten(d.field("c22"), t.x, t.y);
  t.valid = unflatten_mask(d.field("valid"), t.x, t.y);
  e.lambda1 = unflatten(d.field("lambda1"), t.x, t.y);
  e.lambda2 = unflatten(d.field("lambda2"), t.x, t.y);
  e.xi1_x = unflatten(d.field("xi1_x"), t.x, t.y);
  e.xi1_y = unflatten(d.field("xi1_y"), t.x, t.y);
  e.xi2_x = unflatten(d.field("xi2_x"), t.x, t.y);
  e.xi2_y = unflatten(d.field("xi2_y"), t.x, t.y);
  e.degenerate = unflatten_mask(d.field("degenerate"), t.x, t.y);
  e.valid = unflatten_mask(d.field("eigen_valid"), t.x, t.y);
  e.degeneracy_threshold = d.header.attr_double("degeneracy_threshold");
  return cg;
}

// ---------------------------------------------------------------------------
// CSV outputs

void write_singularities_csv(const fs::path& path, std::span<const Singularity> sings) {
  auto out = open_out(path);
  out << "x,y,type,nn_distance\n";
  for (const auto& s : sings) {
    out << format_double(s.position.x()) << ',' << format_double(s.position.y()) << ',' << to_string(s.type) << ','
        << format_double(s.nn_distance) << '\n';
  }
}

std::vector<Singularity> read_singularities_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "x,y,type,nn_distance")
    throw FormatError(path.string() + ": expected header x,y,type,nn_distance");
  std::vector<Singularity> out;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 4) throw FormatError(path.string() + ": malformed row '" + line + "'");
    Singularity s;
    s.position = {parse_double(f[0]), parse_double(f[1])};
    s.type = singularity_type_from_string(f[2]);
    s.nn_distance = parse_double(f[3]);
    out.push_back(s);
  }
  return out;
}

void write_pairs_csv(const fs::path& path, std::span<const WedgePair> pairs) {
  auto out = open_out(path);
  out << "x1,y1,x2,y2,mx,my\n";
  for (const auto& p : pairs) {
    out << format_double(p.first.position.x()) << ',' << format_double(p.first.position.y()) << ','
        << format_double(p.second.position.x()) << ',' << format_double(p.second.position.y()) << ','
        << format_double(p.midpoint.x()) << ',' << format_double(p.midpoint.y()) << '\n';
  }
}

std::vector<WedgePair> read_pairs_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "x1,y1,x2,y2,mx,my")
    throw FormatError(path.string() + ": expected header x1,y1,x2,y2,mx,my");
  std::vector<WedgePair> out;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw FormatError(path.string() + ": malformed row '" + line + "'");
    WedgePair p;
    p.first.position = {parse_double(f[0]), parse_double(f[1])};
    p.second.position = {parse_double(f[2]), parse_double(f[3])};
    p.first.type = p.second.type = SingularityType::Wedge;
    p.midpoint = {parse_double(f[4]), parse_double(f[5])};
    p.separation = (p.first.position - p.second.position).norm();
    out.push_back(p);
  }
  return out;
}

}  // namespace lcs

#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>

#include "lcs/grid_io.hpp"
#include "lcs/pipeline.hpp"
#include "lcs/synthetic.hpp"

namespace lcs {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

double number(const std::string& key, const std::string& v) {
  // "pi" multiples keep the double-gyre horizon exact in config files.
  try {
    const auto star = v.find('*');
    if (star != std::string::npos) {
      return number(key, trim(v.substr(0, star))) * number(key, trim(v.substr(star + 1)));
    }
    const auto slash = v.find('/');
    if (slash != std::string::npos) {
      return number(key, trim(v.substr(0, slash))) / number(key, trim(v.substr(slash + 1)));
    }
    if (v == "pi") return std::numbers::pi;
    return parse_double(v);
  } catch (const FormatError&) {
    throw ConfigError("'" + key + "': expected a number, got '" + v + "'");
  }
}

int integer(const std::string& key, const std::string& v) {
  const double d = number(key, v);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError("'" + key + "': expected an integer, got '" + v + "'");
  return static_cast<int>(d);
}

std::string signs_text(const std::vector<EtaSign>& s) {
  if (s.size() == 2) return "both";
  return s.front() == EtaSign::Plus ? "plus" : "minus";
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const PipelineConfig&)>;

struct Key {
  const char* name;
  Setter set;
  Getter get;
};

#define LCS_NUM(key, member)                                                                           \
  Key {                                                                                                \
    key, [](PipelineConfig& c, const std::string& k, const std::string& v) { c.member = number(k, v); }, \
        [](const PipelineConfig& c) { return format_double(c.member); }                                \
  }
#define LCS_INT(key, member)                                                                            \
  Key {                                                                                                 \
    key, [](PipelineConfig& c, const std::string& k, const std::string& v) { c.member = integer(k, v); }, \
        [](const PipelineConfig& c) { return std::to_string(c.member); }                                \
  }
#define LCS_STR(key, member)                                                                    \
  Key {                                                                                         \
    key, [](PipelineConfig& c, const std::string&, const std::string& v) { c.member = v; }, \
        [](const PipelineConfig& c) { return c.member; }                                        \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      LCS_STR("model", model),
      LCS_NUM("gyre.A", gyre.A),
      LCS_NUM("gyre.epsilon", gyre.epsilon),
      LCS_NUM("gyre.omega", gyre.omega),
      LCS_NUM("field.xmin", field_domain.xmin),
      LCS_NUM("field.xmax", field_domain.xmax),
      LCS_NUM("field.ymin", field_domain.ymin),
      LCS_NUM("field.ymax", field_domain.ymax),
      LCS_STR("input.velocity", velocity_path),
      LCS_STR("input.ssh", ssh_path),
      LCS_NUM("geo.g", constants.g),
      LCS_NUM("geo.R", constants.R),
      LCS_NUM("geo.Omega", constants.Omega),
      LCS_NUM("geo.coriolis_floor", geostrophic.coriolis_floor),
      LCS_NUM("t0", integrator.t0),
      LCS_NUM("T", integrator.T),
      Key{"integrator.method",
          [](PipelineConfig& c, const std::string& k, const std::string& v) {
            if (v == "rk45") c.integrator.method = IntegratorMethod::RK45;
            else if (v == "rk4") c.integrator.method = IntegratorMethod::RK4;
            else throw ConfigError("'" + k + "': expected rk45 or rk4, got '" + v + "'");
          },
          [](const PipelineConfig& c) { return std::string(c.integrator.method == IntegratorMethod::RK45 ? "rk45" : "rk4"); }},
      LCS_NUM("integrator.abs_tol", integrator.abs_tol),
      LCS_NUM("integrator.rel_tol", integrator.rel_tol),
      LCS_INT("integrator.rk4_steps", integrator.rk4_steps),
      LCS_NUM("grid.xmin", grid.domain.xmin),
      LCS_NUM("grid.xmax", grid.domain.xmax),
      LCS_NUM("grid.ymin", grid.domain.ymin),
      LCS_NUM("grid.ymax", grid.domain.ymax),
      LCS_INT("grid.nx", grid.nx),
      LCS_INT("grid.ny", grid.ny),
      LCS_NUM("grid.rho", grid.rho),
      Key{"selection.delaunay_cutoff",
          [](PipelineConfig& c, const std::string& k, const std::string& v) {
            const int n = integer(k, v);
            if (n < 0) throw ConfigError("'" + k + "' must be non-negative");
            c.delaunay_cutoff = static_cast<std::size_t>(n);
          },
          [](const PipelineConfig& c) { return std::to_string(c.delaunay_cutoff); }},
      LCS_NUM("pairing.max_distance", max_pair_distance),
      LCS_NUM("section.length", section_length),
      LCS_INT("section.seeds", section_seeds),
      LCS_NUM("line.step_factor", line_step_factor),
      LCS_NUM("line.max_arclength_factor", max_arclength_factor),
      LCS_NUM("sweep.lambda_min", sweep.lambda_min),
      LCS_NUM("sweep.lambda_max", sweep.lambda_max),
      LCS_NUM("sweep.lambda_step", sweep.lambda_step),
      Key{"sweep.signs",
          [](PipelineConfig& c, const std::string& k, const std::string& v) {
            if (v == "both") c.sweep.signs = {EtaSign::Plus, EtaSign::Minus};
            else if (v == "plus") c.sweep.signs = {EtaSign::Plus};
            else if (v == "minus") c.sweep.signs = {EtaSign::Minus};
            else throw ConfigError("'" + k + "': expected both, plus or minus, got '" + v + "'");
          },
          [](const PipelineConfig& c) { return signs_text(c.sweep.signs); }},
      LCS_NUM("orbit.closure_factor", sweep.orbit.closure_factor),
      LCS_NUM("orbit.bisection_factor", sweep.orbit.bisection_factor),
      LCS_INT("orbit.max_bisections", sweep.orbit.max_bisections),
      LCS_STR("output.dir", output_dir),
      LCS_STR("output.checkpoints", checkpoint_dir),
      LCS_INT("threads", threads),
  };
  return k;
}

#undef LCS_NUM
#undef LCS_INT
#undef LCS_STR

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
  for (const auto& k : keys()) {
    if (key == k.name) {
      k.set(*this, key, trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : keys()) out.emplace_back(k.name, k.get(*this));
  return out;
}

void PipelineConfig::validate() const {
  static const std::set<std::string> models{"double_gyre", "gridded", "ssh", "synthetic_ocean", "zero"};
  if (!models.count(model)) throw ConfigError("unknown model '" + model + "'");
  try {
    if (model == "double_gyre") gyre.validate();
    integrator.validate();
    constants.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (model == "gridded" && !fs::exists(velocity_path)) throw ConfigError("input.velocity '" + velocity_path + "' does not exist");
  if (model == "ssh" && !fs::exists(ssh_path)) throw ConfigError("input.ssh '" + ssh_path + "' does not exist");
  if (!(field_domain.xmax > field_domain.xmin) || !(field_domain.ymax > field_domain.ymin))
    throw ConfigError("field domain is empty");
  if (!(grid.domain.xmax > grid.domain.xmin) || !(grid.domain.ymax > grid.domain.ymin))
    throw ConfigError("grid domain is empty");
  if (grid.nx < 3 || grid.ny < 3) throw ConfigError("grid needs at least 3 nodes per axis");
  if (!(grid.rho > 0) || !(grid.rho < 0.5)) throw ConfigError("grid.rho must lie in (0, 0.5)");
  if (!(geostrophic.coriolis_floor > 0)) throw ConfigError("geo.coriolis_floor must be positive");
  if (!(max_pair_distance > 0)) throw ConfigError("pairing.max_distance must be positive");
  if (!(section_length > 0)) throw ConfigError("section.length must be positive");
  if (section_seeds < 2) throw ConfigError("section.seeds must be at least 2");
  if (!(line_step_factor > 0) || line_step_factor > 1) throw ConfigError("line.step_factor must lie in (0, 1]");
  if (!(max_arclength_factor > 0)) throw ConfigError("line.max_arclength_factor must be positive");
  if (!(sweep.orbit.closure_factor > 0) || !(sweep.orbit.bisection_factor > 0) || sweep.orbit.max_bisections < 1)
    throw ConfigError("orbit settings must be positive");
  sweep.lambdas();
  if (threads < 0) throw ConfigError("threads must be non-negative");
  if (output_dir.empty()) throw ConfigError("output.dir is empty");
}

fs::path PipelineConfig::checkpoints() const {
  return checkpoint_dir.empty() ? fs::path(output_dir) / "checkpoints" : fs::path(checkpoint_dir);
}

void PipelineConfig::resolve_paths(const fs::path& base) {
  auto fix = [&](std::string& p) {
    if (!p.empty() && fs::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  fix(velocity_path);
  fix(ssh_path);
}

PipelineConfig default_config(const std::string& model) {
  PipelineConfig c;
  c.model = model;
  if (model == "double_gyre" || model == "zero") {
    c.integrator.T = 2.5 * std::numbers::pi;
    return c;
  }
  // Ocean-like defaults: degrees and days.
  c.field_domain = Bounds{-180, 180, -89, 89};
  c.integrator.T = 30.0;
  c.max_pair_distance = 2.0;
  c.section_length = 1.5;
  return c;
}

PipelineConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::vector<std::pair<std::string, std::string>> items;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    items.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  std::string model = "double_gyre";
  for (const auto& [k, v] : items) {
    if (k == "model") model = v;
  }
  PipelineConfig c = default_config(model);
  for (const auto& [k, v] : items) c.set(k, v);
  c.resolve_paths(path.parent_path());
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
    c.set(trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
  }
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) c.output_dir = env;
  c.validate();
  return c;
}

namespace {

class ZeroField final : public VelocityField {
 public:
  explicit ZeroField(Bounds b) : bounds_(b) {}
  Vec2 operator()(double, const Vec2&) const override { return Vec2::Zero(); }
  Bounds spatial_bounds() const override { return bounds_; }

 private:
  Bounds bounds_;
};

}  // namespace

std::unique_ptr<VelocityField> make_velocity_field(const PipelineConfig& cfg) {
  if (cfg.model == "double_gyre") return std::make_unique<DoubleGyreField>(cfg.gyre, cfg.field_domain);
  if (cfg.model == "zero") return std::make_unique<ZeroField>(cfg.field_domain);
  if (cfg.model == "gridded") {
    auto [u, v] = fs::path(cfg.velocity_path).extension() == ".csv" ? read_velocity_csv(cfg.velocity_path)
                                                                    : load_velocity(cfg.velocity_path);
    return std::make_unique<GriddedVelocityField>(std::move(u), std::move(v));
  }
  GridSeries h;
  if (cfg.model == "ssh") {
    auto s = load_series(cfg.ssh_path);
    if (!s.count("h")) throw FormatError(cfg.ssh_path + ": no field h");
    h = std::move(s.at("h"));
  } else {
    h = synthetic_ssh(default_synthetic_ocean());
  }
  return std::make_unique<GriddedVelocityField>(geostrophic_from_ssh(h, cfg.constants, cfg.geostrophic));
}

}  // namespace lcs

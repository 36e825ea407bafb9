// Command-line driver for the vortex census pipeline.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "lcs/grid_io.hpp"
#include "lcs/pipeline.hpp"
#include "lcs/synthetic.hpp"

namespace fs = std::filesystem;
using namespace lcs;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string output_dir;
  std::string checkpoint_dir;
  int threads = 0;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config, "key = value config file");
  app->add_option("--set", c.overrides, "override a config key (key=value), repeatable");
  app->add_option("-o,--output-dir", c.output_dir, "output directory (overrides output.dir)");
  app->add_option("--checkpoint-dir", c.checkpoint_dir, "checkpoint directory (default <output-dir>/checkpoints)");
  app->add_option("--threads", c.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
}

PipelineConfig make_config(const Common& c, const std::string& fallback_model = "double_gyre") {
  std::vector<std::string> overrides = c.overrides;
  if (!c.output_dir.empty()) overrides.push_back("output.dir=" + c.output_dir);
  if (!c.checkpoint_dir.empty()) overrides.push_back("output.checkpoints=" + c.checkpoint_dir);
  if (c.threads > 0) overrides.push_back("threads=" + std::to_string(c.threads));
  PipelineConfig cfg;
  if (!c.config.empty()) {
    cfg = load_config(c.config, overrides);
  } else {
    cfg = default_config(fallback_model);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
      cfg.set(o.substr(0, eq), o.substr(eq + 1));
    }
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) cfg.output_dir = env;
    cfg.validate();
  }
#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
  return cfg;
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary | std::ios::trunc) << text;
}

fs::path or_default(const std::string& given, const fs::path& fallback) { return given.empty() ? fallback : fs::path(given); }

void require_file(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw ConfigError(std::string(what) + " '" + p.string() + "' does not exist");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coherent Lagrangian vortex census"};
  app.require_subcommand(1);

  Common common;

  auto* flowmap = app.add_subcommand("compute-flowmap", "advect the auxiliary grid and write a flow-map checkpoint");
  add_common(flowmap, common);
  std::string flowmap_out;
  flowmap->add_option("--out", flowmap_out, "checkpoint header (default <checkpoints>/flowmap.hdr)");

  auto* cgcmd = app.add_subcommand("compute-cg", "Cauchy-Green tensor and eigenfields from a flow-map checkpoint");
  add_common(cgcmd, common);
  std::string cg_in, cg_out;
  cgcmd->add_option("--flowmap", cg_in, "flow-map header (default <checkpoints>/flowmap.hdr)");
  cgcmd->add_option("--out", cg_out, "checkpoint header (default <checkpoints>/cg.hdr)");

  auto* sing = app.add_subcommand("detect-singularities", "locate, select, classify and pair singularities");
  add_common(sing, common);
  std::string sing_cg;
  sing->add_option("--cg", sing_cg, "Cauchy-Green header (default <checkpoints>/cg.hdr)");

  auto* vort = app.add_subcommand("detect-vortices", "lambda sweep over Poincare sections of wedge pairs");
  add_common(vort, common);
  std::string vort_cg, vort_pairs, vort_sings, vort_located;
  double lmin = 0.85, lmax = 1.15, lstep = 0.01, slen = 0;
  int seeds = 100;
  std::string signs = "both";
  vort->add_option("--cg", vort_cg, "Cauchy-Green header (default <checkpoints>/cg.hdr)");
  vort->add_option("--pairs", vort_pairs, "pairs CSV (default <output-dir>/pairs.csv)");
  vort->add_option("--singularities", vort_sings, "classified singularities CSV (default <output-dir>/singularities.csv)");
  vort->add_option("--located", vort_located, "located singularities CSV (default <output-dir>/located.csv)");
  auto* o_lmin = vort->add_option("--lambda-min", lmin, "smallest lambda")->capture_default_str();
  auto* o_lmax = vort->add_option("--lambda-max", lmax, "largest lambda")->capture_default_str();
  auto* o_lstep = vort->add_option("--lambda-step", lstep, "lambda increment")->capture_default_str();
  auto* o_slen = vort->add_option("--section-length", slen, "section length (config value by default)");
  auto* o_seeds = vort->add_option("--seeds", seeds, "seeds per section")->capture_default_str();
  auto* o_signs = vort->add_option("--signs", signs, "both, plus or minus")
                      ->check(CLI::IsMember({"both", "plus", "minus"}))
                      ->capture_default_str();

  auto* census = app.add_subcommand("run-census", "run every stage and write the report");
  add_common(census, common);
  std::string resume = "none";
  bool no_render = false;
  census->add_option("--resume", resume, "start from a checkpoint: none, flowmap or cg")
      ->check(CLI::IsMember({"none", "flowmap", "cg"}))
      ->capture_default_str();
  census->add_flag("--no-render", no_render, "skip the SVG overlay");

  auto* render = app.add_subcommand("render", "SVG overlay of stored artifacts");
  add_common(render, common);
  std::string r_cg, r_located, r_sings, r_pairs, r_bounds, r_out;
  std::vector<std::string> r_layers{"backdrop", "singularities", "boundaries"};
  render->add_option("--cg", r_cg, "Cauchy-Green header for the backdrop");
  render->add_option("--located", r_located, "located singularities CSV");
  render->add_option("--singularities", r_sings, "classified singularities CSV");
  render->add_option("--pairs", r_pairs, "pairs CSV");
  render->add_option("--boundaries", r_bounds, "boundaries GeoJSON");
  render->add_option("--layers", r_layers, "backdrop, singularities, sections, boundaries")->delimiter(',');
  render->add_option("--out", r_out, "SVG path (default <output-dir>/render.svg)");

  auto* synth = app.add_subcommand("synthesize", "write the bundled three-vortex SSH series");
  std::string synth_out = "data/synthetic_ssh.hdr";
  synth->add_option("--out", synth_out, "header path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (synth->parsed()) {
      const GridSeries h = synthetic_ssh(default_synthetic_ocean());
      save_series(synth_out, {{"h", &h}});
      std::cout << "wrote " << synth_out << "\n";
      return 0;
    }

    const PipelineConfig cfg = make_config(common);
    const fs::path ck = cfg.checkpoints();
    const fs::path out = cfg.output_dir;

    if (flowmap->parsed()) {
      const fs::path dst = or_default(flowmap_out, ck / "flowmap.hdr");
      try {
        stage_flow_map(cfg, dst);
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        throw StageFailure("flowmap", e.what());
      }
      std::cout << "wrote " << dst.string() << "\n";
    } else if (cgcmd->parsed()) {
      const fs::path src = or_default(cg_in, ck / "flowmap.hdr");
      const fs::path dst = or_default(cg_out, ck / "cg.hdr");
      require_file(src, "flow-map checkpoint");
      try {
        stage_cauchy_green(src, dst);
      } catch (const Error& e) {
        throw StageFailure("cauchy_green", e.what());
      }
      std::cout << "wrote " << dst.string() << "\n";
    } else if (sing->parsed()) {
      const fs::path src = or_default(sing_cg, ck / "cg.hdr");
      require_file(src, "Cauchy-Green checkpoint");
      SingularityStage s;
      CauchyGreenFields cg;
      try {
        cg = load_cauchy_green(src);
        s = detect_singularities(cg, cfg);
      } catch (const Error& e) {
        throw StageFailure("detect-singularities", e.what());
      }
      write_singularities_csv(out / "located.csv", s.located);
      write_singularities_csv(out / "singularities.csv", s.classified);
      write_pairs_csv(out / "pairs.csv", s.pairs);
      RenderInput in{&cg.eigen, s.located, s.classified, s.pairs, {}, {}};
      write_file(out / "singularities.svg", render_svg(in, {Layer::Backdrop, Layer::Singularities}));
      std::cout << s.located.size() << " located, " << s.classified.size() << " isolated, " << s.pairs.size()
                << " wedge pairs\n";
    } else if (vort->parsed()) {
      PipelineConfig c = cfg;
      if (*o_lmin) c.sweep.lambda_min = lmin;
      if (*o_lmax) c.sweep.lambda_max = lmax;
      if (*o_lstep) c.sweep.lambda_step = lstep;
      if (*o_slen) c.section_length = slen;
      if (*o_seeds) c.section_seeds = seeds;
      if (*o_signs) c.set("sweep.signs", signs);
      c.validate();
      const fs::path cg_path = or_default(vort_cg, ck / "cg.hdr");
      const fs::path pairs_path = or_default(vort_pairs, out / "pairs.csv");
      const fs::path sings_path = or_default(vort_sings, out / "singularities.csv");
      const fs::path located_path = or_default(vort_located, out / "located.csv");
      for (const auto& [p, what] : {std::pair{cg_path, "Cauchy-Green checkpoint"}, {pairs_path, "pairs CSV"},
                                    {sings_path, "singularities CSV"}, {located_path, "located CSV"}})
        require_file(p, what);
      std::vector<VortexBoundary> bounds;
      try {
        const auto cg = load_cauchy_green(cg_path);
        bounds = detect_vortices(cg, read_pairs_csv(pairs_path), read_singularities_csv(located_path),
                                 read_singularities_csv(sings_path), c);
      } catch (const Error& e) {
        throw StageFailure("detect-vortices", e.what());
      }
      write_boundaries_geojson(out / "boundaries.geojson", bounds);
      write_boundary_vertices_csv(out / "boundary_vertices.csv", bounds);
      std::cout << bounds.size() << " vortex boundaries\n";
    } else if (census->parsed()) {
      RunOptions ro;
      ro.resume = resume == "flowmap" ? ResumePoint::FlowMap : resume == "cg" ? ResumePoint::CauchyGreen : ResumePoint::None;
      ro.render = !no_render;
      if (ro.resume == ResumePoint::FlowMap) require_file(ck / "flowmap.hdr", "flow-map checkpoint");
      if (ro.resume == ResumePoint::CauchyGreen) require_file(ck / "cg.hdr", "Cauchy-Green checkpoint");
      const StageReport report = run_census(cfg, ro);
      std::cout << report.table();
    } else if (render->parsed()) {
      std::set<Layer> layers;
      for (const auto& l : r_layers) {
        const auto layer = layer_from_string(l);
        if (!layer) throw ConfigError("unknown layer '" + l + "'");
        layers.insert(*layer);
      }
      RenderInput in;
      CauchyGreenFields cg;
      auto need = [&](Layer l, const std::string& path, const char* what) {
        if (!layers.count(l)) return false;
        if (path.empty() || !fs::exists(path)) throw MissingLayer(std::string("layer needs ") + what);
        return true;
      };
      if (need(Layer::Backdrop, r_cg, "a Cauchy-Green checkpoint (--cg)")) {
        cg = load_cauchy_green(r_cg);
        in.eigen = &cg.eigen;
      }
      if (layers.count(Layer::Singularities)) {
        if (r_located.empty() && r_sings.empty()) throw MissingLayer("singularities layer needs --located or --singularities");
        if (!r_located.empty()) in.located = read_singularities_csv(r_located);
        if (!r_sings.empty()) in.classified = read_singularities_csv(r_sings);
        if (!r_pairs.empty()) in.pairs = read_pairs_csv(r_pairs);
      }
      if (need(Layer::Sections, r_pairs, "a pairs CSV (--pairs)")) {
        const auto pairs = read_pairs_csv(r_pairs);
        for (const auto& p : pairs) in.sections.push_back(build_section(p, cfg.section_length, cfg.section_seeds));
      }
      if (need(Layer::Boundaries, r_bounds, "a boundaries GeoJSON (--boundaries)")) in.boundaries = read_boundaries_geojson(r_bounds);
      const fs::path dst = or_default(r_out, out / "render.svg");
      write_file(dst, render_svg(in, layers));
      std::cout << "wrote " << dst.string() << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const MissingLayer& e) {
    std::cerr << "missing layer: " << e.what() << "\n";
    return kExitConfig;
  } catch (const StageFailure& e) {
    std::cerr << e.what() << "\n";
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  }
  return 0;
}

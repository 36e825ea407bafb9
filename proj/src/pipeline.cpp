#include "lcs/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "lcs/delaunay.hpp"
#include "lcs/grid_io.hpp"

namespace lcs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + p.string());
  out << text;
}

Bounds grid_bounds(const SymmetricTensorField& tf) { return {tf.x.front(), tf.x.back(), tf.y.front(), tf.y.back()}; }

std::size_t count_type(std::span<const Singularity> s, SingularityType t) {
  std::size_t n = 0;
  for (const auto& x : s) n += x.type == t ? 1 : 0;
  return n;
}

std::size_t distinct_wedges(std::span<const WedgePair> pairs) {
  std::set<std::pair<double, double>> seen;
  for (const auto& p : pairs) {
    seen.emplace(p.first.position.x(), p.first.position.y());
    seen.emplace(p.second.position.x(), p.second.position.y());
  }
  return seen.size();
}

}  // namespace

// ---------------------------------------------------------------------------
// Stages

void stage_flow_map(const PipelineConfig& cfg, const fs::path& out) {
  const auto field = make_velocity_field(cfg);
  save_flow_map(out, compute_flow_map_grid(*field, cfg.grid, cfg.integrator));
}

void stage_cauchy_green(const fs::path& flowmap, const fs::path& out) {
  save_cauchy_green(out, build_tensor_field(load_flow_map(flowmap)));
}

SingularityStage detect_singularities(const CauchyGreenFields& cg, const PipelineConfig& cfg) {
  SingularityStage s;
  s.located = locate_singularities(cg.tensor);
  const double dx = std::min(cg.tensor.dx(), cg.tensor.dy());
  const auto isolated = select_isolated(s.located, dx, cfg.delaunay_cutoff);
  s.classified = classify_all(cg.tensor, isolated, dx, &s.samples);
  s.pairs = pair_wedges(s.classified, cfg.max_pair_distance);
  return s;
}

std::vector<VortexBoundary> detect_vortices(const CauchyGreenFields& cg, std::span<const WedgePair> pairs,
                                            std::span<const Singularity> located,
                                            std::span<const Singularity> classified, const PipelineConfig& cfg,
                                            std::vector<PoincareSection>* sections) {
  const Bounds domain = grid_bounds(cg.tensor);
  SweepOptions opts = cfg.sweep;
  opts.orbit.line.step = cfg.line_step_factor * std::min(cg.tensor.dx(), cg.tensor.dy());
  opts.orbit.line.max_arclength = cfg.max_arclength_factor * cfg.section_length;
  std::vector<VortexBoundary> out;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    PoincareSection section;
    try {
      section = build_section(pairs[k], cfg.section_length, cfg.section_seeds, &domain);
    } catch (const SectionLeavesDomain& e) {
      std::cerr << "warning: pair " << k << ": " << e.what() << "; skipped\n";
      continue;
    }
    if (section.truncated) std::cerr << "warning: pair " << k << ": section truncated at the domain edge\n";
    if (sections) sections->push_back(section);
    auto b = sweep_lambda(cg.tensor, cg.eigen, pairs[k], section, opts, located, classified);
    if (b) {
      b->pair_index = static_cast<int>(k);
      out.push_back(std::move(*b));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Geometry outputs

void write_boundaries_geojson(const fs::path& path, std::span<const VortexBoundary> boundaries) {
  json features = json::array();
  for (std::size_t k = 0; k < boundaries.size(); ++k) {
    const auto& b = boundaries[k];
    json ring = json::array();
    for (const auto& v : b.polygon.vertices()) ring.push_back({v.x(), v.y()});
    const auto& first = b.polygon.vertices().front();
    ring.push_back({first.x(), first.y()});
    features.push_back({
        {"type", "Feature"},
        {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({ring})}}},
        {"properties",
         {{"id", k},
          {"lambda", b.lambda},
          {"sign", to_string(b.sign)},
          {"census", {{"wedges", b.census.wedges}, {"trisectors", b.census.trisectors}}},
          {"area", b.polygon.area()},
          {"seed", b.seed},
          {"anchor", {b.anchor.x(), b.anchor.y()}},
          {"pair_index", b.pair_index}}},
    });
  }
  const json doc = {{"type", "FeatureCollection"}, {"features", features}};
  write_text(path, doc.dump(1) + "\n");
}

std::vector<VortexBoundary> read_boundaries_geojson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<VortexBoundary> out;
  try {
    const json doc = json::parse(in);
    for (const auto& f : doc.at("features")) {
      std::vector<Vec2> verts;
      for (const auto& c : f.at("geometry").at("coordinates").at(0)) verts.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
      const auto& p = f.at("properties");
      VortexBoundary b;
      b.polygon = ClosedPolygon(std::move(verts), false);
      b.lambda = p.at("lambda").get<double>();
      b.sign = p.at("sign").get<std::string>() == "+" ? EtaSign::Plus : EtaSign::Minus;
      b.census.wedges = p.at("census").at("wedges").get<int>();
      b.census.trisectors = p.at("census").at("trisectors").get<int>();
      b.seed = p.at("seed").get<double>();
      b.anchor = {p.at("anchor").at(0).get<double>(), p.at("anchor").at(1).get<double>()};
      b.pair_index = p.at("pair_index").get<int>();
      out.push_back(std::move(b));
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return out;
}

void write_boundary_vertices_csv(const fs::path& path, std::span<const VortexBoundary> boundaries) {
  std::ostringstream out;
  out << "boundary,vertex,x,y\n";
  for (std::size_t k = 0; k < boundaries.size(); ++k) {
    const auto& v = boundaries[k].polygon.vertices();
    for (std::size_t i = 0; i < v.size(); ++i)
      out << k << ',' << i << ',' << format_double(v[i].x()) << ',' << format_double(v[i].y()) << '\n';
  }
  write_text(path, out.str());
}

// ---------------------------------------------------------------------------
// Report

bool StageReport::funnel_monotone() const {
  return located >= isolated && isolated >= wedges && wedges >= wedges_kept && wedges_kept >= pairs && pairs >= eddies;
}

std::string StageReport::table() const {
  std::ostringstream out;
  char buf[160];
  out << "stage            seconds\n";
  double total = 0;
  for (const auto& s : stages) {
    std::snprintf(buf, sizeof buf, "%-16s %8.2f%s\n", s.name.c_str(), s.seconds, s.skipped ? "  (from checkpoint)" : "");
    out << buf;
    total += s.seconds;
  }
  std::snprintf(buf, sizeof buf, "%-16s %8.2f\n\n", "total", total);
  out << buf;
  const std::pair<const char*, std::size_t> rows[] = {
      {"singularities located", located}, {"isolated", isolated},   {"wedges", wedges},
      {"wedges in pairs", wedges_kept},   {"wedge pairs", pairs},   {"eddies", eddies},
  };
  for (const auto& [label, n] : rows) {
    std::snprintf(buf, sizeof buf, "%-22s %8zu\n", label, n);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-22s %8zu\n%-22s %8zu\n", "trisectors", trisectors, "unclassified", unclassified);
  out << buf;
  if (!eddy_records.empty()) {
    out << "\neddy  pair  lambda  sign  census  area        stretch\n";
    for (std::size_t k = 0; k < eddy_records.size(); ++k) {
      const auto& b = eddy_records[k].boundary;
      std::snprintf(buf, sizeof buf, "%4zu  %4d  %6.3f  %4s  (%d,%d)   %-10.4g  %.4f\n", k, b.pair_index, b.lambda,
                    to_string(b.sign).c_str(), b.census.wedges, b.census.trisectors, b.polygon.area(),
                    eddy_records[k].stretch_ratio);
      out << buf;
    }
  }
  return out.str();
}

std::string StageReport::json() const {
  nlohmann::json j;
  j["stages"] = nlohmann::json::array();
  for (const auto& s : stages) j["stages"].push_back({{"name", s.name}, {"seconds", s.seconds}, {"skipped", s.skipped}});
  j["counts"] = {{"located", located},       {"isolated", isolated}, {"wedges", wedges},
                 {"trisectors", trisectors}, {"unclassified", unclassified}, {"wedges_kept", wedges_kept},
                 {"pairs", pairs},           {"eddies", eddies},     {"classification_samples", classification_samples}};
  j["funnel_monotone"] = funnel_monotone();
  j["eddies"] = nlohmann::json::array();
  for (const auto& e : eddy_records) {
    const auto& b = e.boundary;
    nlohmann::json stretch = nullptr;
    if (std::isfinite(e.stretch_ratio)) stretch = e.stretch_ratio;
    j["eddies"].push_back({{"pair_index", b.pair_index},
                           {"lambda", b.lambda},
                           {"sign", to_string(b.sign)},
                           {"wedges", b.census.wedges},
                           {"trisectors", b.census.trisectors},
                           {"area", b.polygon.area()},
                           {"vertices", b.polygon.size()},
                           {"stretch_ratio", stretch}});
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

StageReport run_census(const PipelineConfig& cfg, const RunOptions& opts) {
#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
  const fs::path out = cfg.output_dir;
  const fs::path ck = cfg.checkpoints();
  fs::create_directories(out);
  fs::create_directories(ck);
  const fs::path flow_path = ck / "flowmap.hdr";
  const fs::path cg_path = ck / "cg.hdr";

  StageReport report;
  auto run = [&](const std::string& name, bool skipped, auto&& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const StageFailure&) {
      throw;
    } catch (const std::exception& e) {
      throw StageFailure(name, e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.stages.push_back({name, secs, skipped});
  };

  std::unique_ptr<VelocityField> field;
  FlowMapGrid fm;
  CauchyGreenFields cg;

  run("flowmap", opts.resume != ResumePoint::None, [&] {
    if (opts.resume != ResumePoint::None) return;
    field = make_velocity_field(cfg);
    fm = compute_flow_map_grid(*field, cfg.grid, cfg.integrator);
    save_flow_map(flow_path, fm);
  });
  run("cauchy_green", opts.resume == ResumePoint::CauchyGreen, [&] {
    if (opts.resume != ResumePoint::CauchyGreen) {
      if (opts.resume == ResumePoint::FlowMap) fm = load_flow_map(flow_path);
      save_cauchy_green(cg_path, build_tensor_field(fm));
      fm = FlowMapGrid{};
    }
    // Downstream stages always read the checkpoint so fresh and resumed runs see identical data.
    cg = load_cauchy_green(cg_path);
  });

  std::vector<Singularity> located, isolated, classified;
  std::vector<WedgePair> pairs;
  const double dx = std::min(cg.tensor.dx(), cg.tensor.dy());
  run("locate", false, [&] { located = locate_singularities(cg.tensor); });
  run("select", false, [&] { isolated = select_isolated(located, dx, cfg.delaunay_cutoff); });
  run("classify", false, [&] { classified = classify_all(cg.tensor, isolated, dx, &report.classification_samples); });
  run("pair", false, [&] { pairs = pair_wedges(classified, cfg.max_pair_distance); });

  std::vector<PoincareSection> sections;
  std::vector<VortexBoundary> boundaries;
  run("sweep", false, [&] {
    boundaries = detect_vortices(cg, pairs, located, classified, cfg, &sections);
    for (const auto& b : boundaries) {
      if (!(b.census == Census{2, 0, 0}))
        throw Error("boundary of pair " + std::to_string(b.pair_index) + " encloses census (" +
                    std::to_string(b.census.wedges) + "," + std::to_string(b.census.trisectors) + ")");
    }
  });

  report.located = located.size();
  report.isolated = isolated.size();
  report.wedges = count_type(classified, SingularityType::Wedge);
  report.trisectors = count_type(classified, SingularityType::Trisector);
  report.unclassified = count_type(classified, SingularityType::Unclassified);
  report.wedges_kept = distinct_wedges(pairs);
  report.pairs = pairs.size();
  report.eddies = boundaries.size();
  for (auto& b : boundaries) report.eddy_records.push_back({b, std::numeric_limits<double>::quiet_NaN()});

  if (opts.stretch_check && !boundaries.empty()) {
    run("stretch_check", false, [&] {
      if (!field) field = make_velocity_field(cfg);
      for (auto& e : report.eddy_records) {
        try {
          e.stretch_ratio = arclength_ratio(*field, e.boundary.polygon, cfg.integrator);
        } catch (const LeftDomain&) {
          std::cerr << "warning: boundary of pair " << e.boundary.pair_index << " leaves the domain when advected\n";
        }
      }
    });
  }

  run("write", false, [&] {
    std::vector<Singularity> all = located;
    const auto nn = nearest_neighbor_distances(
        [&] {
          std::vector<Vec2> p;
          for (const auto& s : all) p.push_back(s.position);
          return p;
        }(),
        cfg.delaunay_cutoff);
    for (std::size_t k = 0; k < all.size(); ++k) all[k].nn_distance = nn[k];
    write_singularities_csv(out / "located.csv", all);
    write_singularities_csv(out / "singularities.csv", classified);
    write_pairs_csv(out / "pairs.csv", pairs);
    write_boundaries_geojson(out / "boundaries.geojson", boundaries);
    write_boundary_vertices_csv(out / "boundary_vertices.csv", boundaries);
    if (opts.render) {
      RenderInput in{&cg.eigen, located, classified, pairs, sections, boundaries};
      write_text(out / "census.svg",
                 render_svg(in, {Layer::Backdrop, Layer::Singularities, Layer::Sections, Layer::Boundaries}));
    }
  });

  write_text(out / "report.txt", report.table());
  write_text(out / "report.json", report.json());
  return report;
}

}  // namespace lcs

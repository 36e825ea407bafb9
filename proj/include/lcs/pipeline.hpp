#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lcs/cauchy_green.hpp"
#include "lcs/errors.hpp"
#include "lcs/flowmap.hpp"
#include "lcs/lambda_lines.hpp"
#include "lcs/topology.hpp"
#include "lcs/velocity.hpp"

namespace lcs {

/// Environment variable that overrides output.dir.
inline constexpr const char* kOutputDirEnv = "LCS_OUTPUT_DIR";

/// Every pipeline parameter. Text form is `key = value` per line, `#` comments.
struct PipelineConfig {
  // input: double_gyre | gridded | ssh | synthetic_ocean | zero
  std::string model = "double_gyre";
  DoubleGyreParams gyre;
  Bounds field_domain{0.0, 2.0, 0.0, 1.0};  // analytic models only
  std::string velocity_path;                // gridded: header or .csv
  std::string ssh_path;                     // ssh: header with field h
  PhysicalConstants constants;
  GeostrophicOptions geostrophic;

  IntegratorConfig integrator;
  FlowGridSpec grid{Bounds{0.0, 1.0, 0.0, 1.0}, 400, 400, 0.1};

  std::size_t delaunay_cutoff = 1000;
  double max_pair_distance = 0.25;

  double section_length = 0.25;
  int section_seeds = 100;
  double line_step_factor = 0.4;       // lambda-line step in grid spacings
  double max_arclength_factor = 20.0;  // in section lengths
  SweepOptions sweep;

  std::string output_dir = "out";
  std::string checkpoint_dir;  // empty: <output_dir>/checkpoints
  int threads = 0;             // 0: all cores

  /// Applies one key; throws ConfigError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  void validate() const;
  std::filesystem::path checkpoints() const;
  /// Resolves relative input paths against `base`.
  void resolve_paths(const std::filesystem::path& base);
  /// All keys with their current values, in a stable order.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

/// Reads a config file, applies `overrides` ("key=value") and the output
/// directory environment override, then validates.
PipelineConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
PipelineConfig default_config(const std::string& model);

/// Builds the velocity field named by the config (the geostrophic field for ssh input).
std::unique_ptr<VelocityField> make_velocity_field(const PipelineConfig& cfg);

// ---------------------------------------------------------------------------

/// A stage failed; the checkpoints written so far remain usable.
class StageFailure : public Error {
 public:
  StageFailure(std::string stage, const std::string& what)
      : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct StageTiming {
  std::string name;
  double seconds = 0.0;
  bool skipped = false;
};

struct EddyRecord {
  VortexBoundary boundary;
  double stretch_ratio = std::numeric_limits<double>::quiet_NaN();  // advected / initial arclength
};

struct StageReport {
  std::vector<StageTiming> stages;
  std::size_t located = 0;
  std::size_t isolated = 0;
  std::size_t wedges = 0;
  std::size_t trisectors = 0;
  std::size_t unclassified = 0;
  std::size_t wedges_kept = 0;  // wedges inside some pair
  std::size_t pairs = 0;
  std::size_t eddies = 0;
  std::size_t classification_samples = 0;
  std::vector<EddyRecord> eddy_records;

  /// located >= isolated >= wedges >= wedges_kept >= pairs >= eddies.
  bool funnel_monotone() const;
  std::string table() const;
  std::string json() const;
};

enum class ResumePoint { None, FlowMap, CauchyGreen };

struct RunOptions {
  ResumePoint resume = ResumePoint::None;
  bool render = true;
  bool stretch_check = true;  // advect accepted boundaries to measure their stretching
};

/// Flow map -> Cauchy-Green -> locate -> select -> classify -> pair -> sweep.
/// Writes checkpoints, CSV/GeoJSON outputs, report.txt/report.json and an SVG.
/// Throws StageFailure.
StageReport run_census(const PipelineConfig& cfg, const RunOptions& opts = {});

// Individual stages as exposed by the command-line tool.

void stage_flow_map(const PipelineConfig& cfg, const std::filesystem::path& out);
void stage_cauchy_green(const std::filesystem::path& flowmap, const std::filesystem::path& out);

struct SingularityStage {
  std::vector<Singularity> located;
  std::vector<Singularity> classified;
  std::vector<WedgePair> pairs;
  std::size_t samples = 0;
};

SingularityStage detect_singularities(const CauchyGreenFields& cg, const PipelineConfig& cfg);
/// One sweep per pair; `sections`, when given, receives every section built.
std::vector<VortexBoundary> detect_vortices(const CauchyGreenFields& cg, std::span<const WedgePair> pairs,
                                            std::span<const Singularity> located,
                                            std::span<const Singularity> classified, const PipelineConfig& cfg,
                                            std::vector<PoincareSection>* sections = nullptr);

/// GeoJSON FeatureCollection, one Polygon per boundary with lambda, sign, census and area.
void write_boundaries_geojson(const std::filesystem::path& path, std::span<const VortexBoundary> boundaries);
std::vector<VortexBoundary> read_boundaries_geojson(const std::filesystem::path& path);
/// boundary,vertex,x,y rows.
void write_boundary_vertices_csv(const std::filesystem::path& path, std::span<const VortexBoundary> boundaries);

// ---------------------------------------------------------------------------
// Rendering

enum class Layer { Backdrop, Singularities, Sections, Boundaries };

std::optional<Layer> layer_from_string(const std::string& s);

struct RenderInput {
  const EigenField* eigen = nullptr;  // log10 lambda2 backdrop
  std::vector<Singularity> located;
  std::vector<Singularity> classified;
  std::vector<WedgePair> pairs;
  std::vector<PoincareSection> sections;
  std::vector<VortexBoundary> boundaries;
};

/// Deterministic SVG. Throws MissingLayer when a requested layer has no source
/// (backdrop without an eigen field); empty lists render as nothing.
std::string render_svg(const RenderInput& in, const std::set<Layer>& layers, int width_px = 800);

}  // namespace lcs

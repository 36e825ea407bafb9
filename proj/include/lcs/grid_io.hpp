#pragma once

#include <filesystem>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lcs/cauchy_green.hpp"
#include "lcs/flowmap.hpp"
#include "lcs/grid.hpp"
#include "lcs/topology.hpp"
#include "lcs/velocity.hpp"

namespace lcs {

// Header + binary grid format
//
//   lcsgrid 1
//   axis <name> <n> <units> start <s> step <h>
//   axis <name> <n> <units> values <c0> <c1> ...
//   fill <value>
//   field <name> <file>
//   attr <key> <value>
//
// Axes are listed slowest first. Each field file holds the row-major product of
// the axis lengths as little-endian float64. Samples equal to the fill value
// read back as NaN. Paths of field files are relative to the header.

struct GridHeader {
  std::vector<Axis> axes;
  double fill = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<std::string, std::string>> fields;  // name, file
  std::map<std::string, std::string> attrs;

  std::size_t sample_count() const;
  const std::string& attr(const std::string& key) const;  // throws FormatError
  double attr_double(const std::string& key) const;
};

GridHeader read_grid_header(const std::filesystem::path& path);
void write_grid_header(const std::filesystem::path& path, const GridHeader& header);

std::vector<double> read_raw(const std::filesystem::path& path, std::size_t count);
void write_raw(const std::filesystem::path& path, std::span<const double> values);

struct GridData {
  GridHeader header;
  std::map<std::string, std::vector<double>> fields;

  const std::vector<double>& field(const std::string& name) const;  // throws FormatError
};

GridData read_grid(const std::filesystem::path& header_path);

/// Writes `<stem>.<field>.bin` next to the header for every field in `data`,
/// in the order of data.header.fields when given, otherwise by name.
void write_grid(const std::filesystem::path& header_path, GridData data);

/// Shortest text that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

// ---------------------------------------------------------------------------
// Typed readers and writers

/// Fields named in `names`, each a (time, y, x) series sharing the axes.
void save_series(const std::filesystem::path& path, const std::vector<std::pair<std::string, const GridSeries*>>& fields);
std::map<std::string, GridSeries> load_series(const std::filesystem::path& path);

/// u and v series (velocity files) or the h series (sea surface height).
std::pair<GridSeries, GridSeries> load_velocity(const std::filesystem::path& path);

/// CSV with header t,x,y,u,v covering a full tensor-product grid in any order.
std::pair<GridSeries, GridSeries> read_velocity_csv(const std::filesystem::path& path);

void save_flow_map(const std::filesystem::path& path, const FlowMapGrid& fm);
FlowMapGrid load_flow_map(const std::filesystem::path& path);

void save_cauchy_green(const std::filesystem::path& path, const CauchyGreenFields& cg);
CauchyGreenFields load_cauchy_green(const std::filesystem::path& path);

void write_singularities_csv(const std::filesystem::path& path, std::span<const Singularity> sings);
std::vector<Singularity> read_singularities_csv(const std::filesystem::path& path);

void write_pairs_csv(const std::filesystem::path& path, std::span<const WedgePair> pairs);
std::vector<WedgePair> read_pairs_csv(const std::filesystem::path& path);

}  // namespace lcs

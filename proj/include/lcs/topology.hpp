#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lcs/cauchy_green.hpp"
#include "lcs/grid.hpp"

namespace lcs {

enum class SingularityType { Wedge, Trisector, Unclassified };

std::string to_string(SingularityType t);
SingularityType singularity_type_from_string(const std::string& s);

/// Isotropic point C = I of the Cauchy-Green field.
struct Singularity {
  Vec2 position = Vec2::Zero();
  SingularityType type = SingularityType::Unclassified;
  double nn_distance = std::numeric_limits<double>::infinity();
  int cell_i = -1;  // grid cell that detected it
  int cell_j = -1;
};

struct WedgePair {
  Singularity first;
  Singularity second;
  Vec2 midpoint = Vec2::Zero();
  double separation = 0.0;
};

/// Simple closed polygon, stored anticlockwise (the closing edge is implicit).
class ClosedPolygon {
 public:
  ClosedPolygon() = default;
  /// Drops a repeated closing vertex and reverses clockwise input.
  /// Throws InvalidPolygon when fewer than 3 vertices remain or when
  /// `require_simple` and two non-adjacent edges intersect.
  explicit ClosedPolygon(std::vector<Vec2> vertices, bool require_simple = true);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  bool reversed() const { return reversed_; }

  double signed_area() const;
  double area() const { return std::abs(signed_area()); }
  double perimeter() const;
  /// Ray casting; points on the boundary count as inside.
  bool contains(const Vec2& p) const;
  /// Points along the boundary, anticlockwise, `per_edge` per edge (vertex first).
  std::vector<Vec2> sample(int per_edge) const;

 private:
  std::vector<Vec2> vertices_;
  bool reversed_ = false;
};

bool is_simple(std::span<const Vec2> closed_vertices);

// ---------------------------------------------------------------------------
// Singularity location and selection

/// Intersections of the zero sets of c1 = C11 - C22 and c2 = C12 under bilinear
/// interpolation, one pass over the valid cells. Each point belongs to the cell
/// containing it (half-open cells, closed at the far edge of the grid).
std::vector<Singularity> locate_singularities(const SymmetricTensorField& tf);

/// Nearest-neighbour distances are written into every returned singularity.
/// Drops every singularity whose nearest neighbour is closer than 2*delta_x
/// (both members of a close pair go).
std::vector<Singularity> select_isolated(std::span<const Singularity> sings, double delta_x,
                                         std::size_t delaunay_cutoff = 1000);

// ---------------------------------------------------------------------------
// Classification

inline constexpr int kClassificationSamples = 1000;

struct ClassificationResult {
  SingularityType type = SingularityType::Unclassified;
  int orthogonal_zeros = 0;
  int parallel_zeros = 0;
  int samples_evaluated = 0;  // tensor evaluations on the circle
  double radius = 0.0;
};

/// Zero counts of r.xi2 and r x xi2 around the radius-r circle, with xi2
/// from the eigendecomposition of the bilinearly interpolated tensor.
/// Trisector iff both counts are 3, otherwise Wedge; Unclassified when the
/// circle touches masked or degenerate data. Throws RadiusTooLarge when a
/// singularity in `others` (other than s) lies within r.
ClassificationResult classify_singularity(const SymmetricTensorField& tf, const Singularity& s, double r,
                                          std::span<const Singularity> others = {});

/// Half the nearest-neighbour distance, capped at 5*dx; nothing below 2*dx.
std::optional<double> classification_radius(double nn_distance, double delta_x);

/// Classifies every singularity; nn_distance must be set (see select_isolated).
/// `total_samples`, when given, accumulates the number of circle evaluations.
std::vector<Singularity> classify_all(const SymmetricTensorField& tf, std::span<const Singularity> sings,
                                      double delta_x, std::size_t* total_samples = nullptr);

/// Keeps wedges whose nearest classified neighbour is not a trisector and which
/// have another such wedge within max_pair_distance; pairs each with its
/// nearest surviving wedge. A wedge may belong to two pairs.
std::vector<WedgePair> pair_wedges(std::span<const Singularity> wedges, std::span<const Singularity> trisectors,
                                   double max_pair_distance);

/// Splits by type and calls the above.
std::vector<WedgePair> pair_wedges(std::span<const Singularity> classified, double max_pair_distance);

// ---------------------------------------------------------------------------
// Indices

/// Turns of the sampled vectors over one traversal (samples taken anticlockwise,
/// closing back to the first). Throws CriticalPointOnCurve, UndersampledCurve.
int winding_number(std::span<const Vec2> samples);

/// Half the winding number of the angle-doubled lines. Each sample is any
/// nonzero representative of its line. Throws DegeneratePointOnCurve,
/// UndersampledCurve.
double line_winding_number(std::span<const Vec2> line_samples);

using PlanarField = std::function<Vec2(const Vec2&)>;

int vector_field_index(const ClosedPolygon& gamma, const PlanarField& v, int samples_per_edge = 64);
double line_field_index(const ClosedPolygon& gamma, const PlanarField& line, int samples_per_edge = 64);

/// Index of the xi2 line field of a tensor field along gamma.
double tensor_line_index(const SymmetricTensorField& tf, const ClosedPolygon& gamma, int samples_per_edge = 64);

struct Census {
  int wedges = 0;
  int trisectors = 0;
  int unclassified = 0;
  bool operator==(const Census&) const = default;
};

Census census_enclosed(const ClosedPolygon& gamma, std::span<const Singularity> sings);

}  // namespace lcs

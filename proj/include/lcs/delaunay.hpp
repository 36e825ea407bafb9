#pragma once

#include <array>
#include <span>
#include <vector>

#include "lcs/grid.hpp"

namespace lcs {

/// Counter-clockwise triangles indexing into the input point array.
struct Triangulation {
  std::vector<std::array<int, 3>> triangles;
};

/// Incremental Bowyer-Watson triangulation. Exact duplicates are inserted once;
/// the later copies do not appear in any triangle.
Triangulation delaunay_triangulation(std::span<const Vec2> points);

/// Distance from each point to its nearest other point (infinity for a lone
/// point). Uses Delaunay edges above `exhaustive_cutoff` points and an O(n^2)
/// scan otherwise.
std::vector<double> nearest_neighbor_distances(std::span<const Vec2> points, std::size_t exhaustive_cutoff = 1000);

/// Index of the nearest other point for each point (-1 for a lone point).
std::vector<int> nearest_neighbors(std::span<const Vec2> points, std::size_t exhaustive_cutoff = 1000);

}  // namespace lcs

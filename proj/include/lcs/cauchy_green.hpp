#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "lcs/errors.hpp"
#include "lcs/flowmap.hpp"
#include "lcs/grid.hpp"

namespace lcs {

/// Symmetric 2x2 tensor stored by its three independent components.
template <typename Scalar>
struct SymmetricTensor {
  Scalar c11{};
  Scalar c12{};
  Scalar c22{};

  Matrix2<Scalar> matrix() const {
    Matrix2<Scalar> m;
    m << c11, c12, c12, c22;
    return m;
  }
  Scalar det() const { return c11 * c22 - c12 * c12; }
  Scalar trace() const { return c11 + c22; }
};

/// C = DF^T DF.
template <typename Scalar>
SymmetricTensor<Scalar> cg_from_gradient(const Matrix2<Scalar>& df) {
  return {df.col(0).squaredNorm(), df.col(0).dot(df.col(1)), df.col(1).squaredNorm()};
}

/// Representative of the line spanned by v in the closed upper half-plane;
/// horizontal lines are represented with positive x.
template <typename Scalar>
Vector2<Scalar> upper_half_plane(const Vector2<Scalar>& v) {
  if (v.y() < 0 || (v.y() == 0 && v.x() < 0)) return -v;
  return v;
}

template <typename Scalar>
struct EigenDecomposition {
  Scalar lambda1{};  // smaller eigenvalue
  Scalar lambda2{};
  Vector2<Scalar> xi1 = Vector2<Scalar>::UnitX();
  Vector2<Scalar> xi2 = Vector2<Scalar>::UnitY();
  bool degenerate = false;
};

/// Closed-form eigensystem of a symmetric positive-definite 2x2 tensor.
///
/// The smaller eigenvalue is recovered as det/lambda2, which keeps full relative
/// precision when the tensor is strongly anisotropic. Callers that know the
/// determinant more accurately than c11*c22 - c12^2 (for Cauchy-Green tensors,
/// det(DF)^2) may pass it in. Eigenvectors follow the upper-half-plane sign
/// convention; xi1 is exactly orthogonal to xi2.
///
/// `degeneracy_threshold < 0` selects 1e-8 * lambda2 of this tensor.
template <typename Scalar>
EigenDecomposition<Scalar> eigen_decompose(const SymmetricTensor<Scalar>& c, Scalar degeneracy_threshold = Scalar(-1),
                                           std::optional<Scalar> det = std::nullopt) {
  using std::hypot;
  const Scalar d = det ? *det : c.det();
  if (!(c.c11 > 0) || !(c.c22 > 0) || !(d > 0)) throw NotPositiveDefinite("tensor is not positive definite");
  const Scalar half_diff = (c.c11 - c.c22) / 2;
  const Scalar q = hypot(half_diff, c.c12);
  const Scalar mean = (c.c11 + c.c22) / 2;

  EigenDecomposition<Scalar> e;
  e.lambda2 = mean + q;
  e.lambda1 = d / e.lambda2;
  if (e.lambda1 > e.lambda2) e.lambda1 = e.lambda2;
  const Scalar threshold = degeneracy_threshold < 0 ? Scalar(1e-8) * e.lambda2 : degeneracy_threshold;
  e.degenerate = (e.lambda2 - e.lambda1) < threshold;

  // (C - lambda2 I) v = 0, taking whichever row avoids cancellation
  Vector2<Scalar> v = half_diff >= 0 ? Vector2<Scalar>(q + half_diff, c.c12) : Vector2<Scalar>(c.c12, q - half_diff);
  const Scalar norm = v.norm();
  v = norm > 0 ? Vector2<Scalar>(v / norm) : Vector2<Scalar>::UnitX();
  e.xi2 = upper_half_plane<Scalar>(v);
  e.xi1 = upper_half_plane<Scalar>(Vector2<Scalar>(-e.xi2.y(), e.xi2.x()));
  return e;
}

/// Per-node Cauchy-Green components with a validity mask.
struct SymmetricTensorField {
  Axis x;
  Axis y;
  ScalarGrid2D c11;
  ScalarGrid2D c12;
  ScalarGrid2D c22;
  MaskGrid valid;

  int nx() const { return x.size(); }
  int ny() const { return y.size(); }
  double dx() const { return x.step(); }
  double dy() const { return y.step(); }
  SymmetricTensor<double> at(int i, int j) const { return {c11(i, j), c12(i, j), c22(i, j)}; }

  /// Bilinear interpolation of the components; nothing outside the grid or
  /// when any corner of the containing cell is invalid.
  std::optional<SymmetricTensor<double>> interpolate(const Vec2& p) const;
  bool cell_valid(int i, int j) const;
};

struct EigenField {
  Axis x;
  Axis y;
  ScalarGrid2D lambda1;
  ScalarGrid2D lambda2;
  ScalarGrid2D xi1_x, xi1_y;
  ScalarGrid2D xi2_x, xi2_y;
  MaskGrid degenerate;
  MaskGrid valid;
  double degeneracy_threshold = 0.0;

  Vec2 xi1(int i, int j) const { return {xi1_x(i, j), xi1_y(i, j)}; }
  Vec2 xi2(int i, int j) const { return {xi2_x(i, j), xi2_y(i, j)}; }
  /// True when any corner of the cell is degenerate.
  bool cell_degenerate(int i, int j) const;
};

struct CauchyGreenFields {
  SymmetricTensorField tensor;
  EigenField eigen;
};

/// Relative band used to flag degenerate nodes: lambda2 - lambda1 < factor * max(lambda2).
inline constexpr double kDegeneracyFactor = 1e-8;

/// Grid-wide C and eigensystem. Invalid flow-map nodes and non-positive-definite
/// tensors are masked.
CauchyGreenFields build_tensor_field(const FlowMapGrid& fm);

/// Eigensystem of an existing tensor field (max(lambda2) taken over valid nodes).
EigenField eigen_field_from_tensor(const SymmetricTensorField& tf);

}  // namespace lcs

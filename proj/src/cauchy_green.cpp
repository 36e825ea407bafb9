#include "lcs/cauchy_green.hpp"

#include <algorithm>
#include <limits>

namespace lcs {

bool SymmetricTensorField::cell_valid(int i, int j) const {
  return valid(i, j) && valid(i + 1, j) && valid(i, j + 1) && valid(i + 1, j + 1);
}

std::optional<SymmetricTensor<double>> SymmetricTensorField::interpolate(const Vec2& p) const {
  auto c = locate_cell(x, y, p);
  if (!c || !cell_valid(c->ix, c->iy)) return std::nullopt;
  const int i = c->ix;
  const int j = c->iy;
  auto lerp = [&](const ScalarGrid2D& g) {
    return bilinear_weights_apply(g(i, j), g(i + 1, j), g(i, j + 1), g(i + 1, j + 1), c->s, c->t);
  };
  return SymmetricTensor<double>{lerp(c11), lerp(c12), lerp(c22)};
}

bool EigenField::cell_degenerate(int i, int j) const {
  return degenerate(i, j) || degenerate(i + 1, j) || degenerate(i, j + 1) || degenerate(i + 1, j + 1);
}

namespace {

EigenField blank_eigen_field(const Axis& x, const Axis& y) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EigenField ef;
  ef.x = x;
  ef.y = y;
  for (ScalarGrid2D* g : {&ef.lambda1, &ef.lambda2, &ef.xi1_x, &ef.xi1_y, &ef.xi2_x, &ef.xi2_y}) {
    *g = ScalarGrid2D(x, y, nan);
  }
  ef.degenerate = MaskGrid(x, y, 0);
  ef.valid = MaskGrid(x, y, 0);
  return ef;
}

void store(EigenField& ef, int i, int j, const EigenDecomposition<double>& e) {
  ef.lambda1(i, j) = e.lambda1;
  ef.lambda2(i, j) = e.lambda2;
  ef.xi1_x(i, j) = e.xi1.x();
  ef.xi1_y(i, j) = e.xi1.y();
  ef.xi2_x(i, j) = e.xi2.x();
  ef.xi2_y(i, j) = e.xi2.y();
  ef.degenerate(i, j) = e.degenerate ? 1 : 0;
  ef.valid(i, j) = 1;
}

// lambda2 = mean + |deviator|; independent of the determinant.
double major_eigenvalue(const SymmetricTensor<double>& c) {
  return 0.5 * (c.c11 + c.c22) + std::hypot(0.5 * (c.c11 - c.c22), c.c12);
}

}  // namespace

CauchyGreenFields build_tensor_field(const FlowMapGrid& fm) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CauchyGreenFields out;
  SymmetricTensorField& tf = out.tensor;
  tf.x = fm.x;
  tf.y = fm.y;
  tf.c11 = ScalarGrid2D(fm.x, fm.y, nan);
  tf.c12 = ScalarGrid2D(fm.x, fm.y, nan);
  tf.c22 = ScalarGrid2D(fm.x, fm.y, nan);
  tf.valid = MaskGrid(fm.x, fm.y, 0);
  ScalarGrid2D det(fm.x, fm.y, nan);

  const int nx = fm.nx();
  const int ny = fm.ny();
#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (!fm.valid(i, j)) continue;
      const Mat2 df = deformation_gradient(fm, i, j);
      const auto c = cg_from_gradient(df);
      const double d = df.determinant();
      tf.c11(i, j) = c.c11;
      tf.c12(i, j) = c.c12;
      tf.c22(i, j) = c.c22;
      det(i, j) = d * d;
      tf.valid(i, j) = (std::isfinite(c.c11) && std::isfinite(c.c12) && std::isfinite(c.c22) && c.c11 > 0 &&
                        c.c22 > 0 && d * d > 0)
                           ? 1
                           : 0;
    }
  }

  double max_lambda2 = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (tf.valid(i, j)) max_lambda2 = std::max(max_lambda2, major_eigenvalue(tf.at(i, j)));
    }
  }

  EigenField& ef = out.eigen;
  ef = blank_eigen_field(fm.x, fm.y);
  ef.degeneracy_threshold = kDegeneracyFactor * max_lambda2;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (!tf.valid(i, j)) continue;
      try {
        store(ef, i, j, eigen_decompose(tf.at(i, j), ef.degeneracy_threshold, std::optional<double>(det(i, j))));
      } catch (const NotPositiveDefinite&) {
        tf.valid(i, j) = 0;
      }
    }
  }
  return out;
}

EigenField eigen_field_from_tensor(const SymmetricTensorField& tf) {
  double max_lambda2 = 0.0;
  for (int j = 0; j < tf.ny(); ++j) {
    for (int i = 0; i < tf.nx(); ++i) {
      if (tf.valid(i, j)) max_lambda2 = std::max(max_lambda2, major_eigenvalue(tf.at(i, j)));
    }
  }
  EigenField ef = blank_eigen_field(tf.x, tf.y);
  ef.degeneracy_threshold = kDegeneracyFactor * max_lambda2;
  for (int j = 0; j < tf.ny(); ++j) {
    for (int i = 0; i < tf.nx(); ++i) {
      if (!tf.valid(i, j)) continue;
      try {
        store(ef, i, j, eigen_decompose(tf.at(i, j), ef.degeneracy_threshold));
      } catch (const NotPositiveDefinite&) {
      }
    }
  }
  return ef;
}

}  // namespace lcs

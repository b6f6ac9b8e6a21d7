#pragma once

#include <vector>

#include "polydg/common.hpp"

namespace polydg {

/// Quadrature rule on a reference cell.
///
/// Triangle rules live on the reference triangle (0,0), (1,0), (0,1) and
/// their weights sum to 1/2. Edge rules live on [0,1] (stored in the x
/// coordinate) and their weights sum to 1.
struct QuadratureRule {
  std::vector<Point2> points;
  std::vector<double> weights;
  int degree = 0;

  [[nodiscard]] std::size_t size() const { return weights.size(); }
};

inline constexpr int kMinQuadratureDegree = 1;
inline constexpr int kMaxQuadratureDegree = 20;

/// Gauss-Legendre rule on [0,1] exact for polynomials up to `degree`.
QuadratureRule edge_quadrature(int degree);

/// Conical-product (Gauss-Jacobi x Gauss-Legendre) rule on the reference
/// triangle, exact up to `degree`. All weights are positive and all points
/// are interior.
QuadratureRule triangle_quadrature(int degree);

/// Default assembly degree for polynomial degree k.
constexpr int default_quadrature_degree(int k) { return 2 * k + 2; }

}  // namespace polydg

#pragma once

#include <functional>
#include <string>

#include "polydg/common.hpp"

namespace polydg {

using ScalarField = std::function<double(const Point2&)>;
using VectorField = std::function<Point2(const Point2&)>;
using TensorField = std::function<Matrix2(const Point2&)>;

/// Coefficients of -div(D grad u) + mu u = f in (0,1)^2, u = 0 on the
/// boundary, with the a priori bounds lower <= u <= kappa.
struct ProblemData {
  std::string name;
  TensorField diffusion;
  ScalarField reaction;
  ScalarField source;
  double kappa = 1.0;
  double lower = 0.0;
  ScalarField exact;           // optional
  VectorField exact_gradient;  // optional
  int min_error_quadrature = 0;

  [[nodiscard]] bool has_exact() const { return static_cast<bool>(exact); }

  /// Checks kappa > lower and samples D (SPD) and mu (>= 0) at the given points.
  void validate_at(const std::vector<Point2>& samples) const;
};

/// u = sin(c pi x) sin(c pi y), D = eps [[100, cos x], [cos x, 1]], mu = 1.
/// The bounds are [0, 1] for c = 1 and [-1, 1] otherwise.
ProblemData problem_example1(int c, double eps);
/// -eps Laplace u + u = 1.
ProblemData problem_example2(double eps);
/// -eps Laplace u + u = f, f = 1/2 on [1/4, 3/4]^2 and 1 elsewhere.
ProblemData problem_example3(double eps);

/// Problem with constant coefficients and a user source, used by tests.
ProblemData problem_constant(double diffusion, double reaction, ScalarField source,
                             double kappa = 1.0);

double spectral_norm(const Matrix2& d);
double inverse_spectral_norm(const Matrix2& d);

}  // namespace polydg

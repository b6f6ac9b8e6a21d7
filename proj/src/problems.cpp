#include "polydg/problems.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace polydg {
namespace {

constexpr double pi = std::numbers::pi;

void check_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw ProblemDataError("epsilon must be positive and finite");
  }
}

}  // namespace

double spectral_norm(const Matrix2& d) {
  const Eigen::SelfAdjointEigenSolver<Matrix2> eig(d, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

double inverse_spectral_norm(const Matrix2& d) {
  const Eigen::SelfAdjointEigenSolver<Matrix2> eig(d, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().cwiseAbs().minCoeff();
  if (!(lmin > 0.0)) {
    throw ProblemDataError("singular diffusion tensor sample");
  }
  return 1.0 / lmin;
}

void ProblemData::validate_at(const std::vector<Point2>& samples) const {
  if (!(kappa > lower)) {
    throw ProblemDataError("upper bound kappa must exceed the lower bound");
  }
  if (!(kappa > 0.0)) {
    throw ProblemDataError("kappa must be positive");
  }
  for (const auto& x : samples) {
    const Matrix2 d = diffusion(x);
    if (std::abs(d(0, 1) - d(1, 0)) > 1e-14 * d.norm()) {
      throw ProblemDataError("diffusion tensor is not symmetric");
    }
    const Eigen::SelfAdjointEigenSolver<Matrix2> eig(d, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) {
      throw ProblemDataError("diffusion tensor is not positive definite at (" +
                             std::to_string(x.x()) + ", " + std::to_string(x.y()) + ")");
    }
    if (!(reaction(x) >= 0.0)) {
      throw ProblemDataError("negative reaction coefficient");
    }
  }
}

ProblemData problem_example1(int c, double eps) {
  if (c < 1) {
    throw ProblemDataError("frequency c must be at least 1");
  }
  check_eps(eps);
  ProblemData p;
  p.name = "example1";
  const double w = c * pi;
  p.diffusion = [eps](const Point2& x) {
    Matrix2 d;
    d << 100.0, std::cos(x.x()), std::cos(x.x()), 1.0;
    return Matrix2(eps * d);
  };
  p.reaction = [](const Point2&) { return 1.0; };
  p.exact = [w](const Point2& x) { return std::sin(w * x.x()) * std::sin(w * x.y()); };
  p.exact_gradient = [w](const Point2& x) {
    return Point2(w * std::cos(w * x.x()) * std::sin(w * x.y()),
                  w * std::sin(w * x.x()) * std::cos(w * x.y()));
  };
  // div(D grad u) with D12 = eps cos x expands into the Hessian terms plus
  // the x-derivative of D12 acting on u_y.
  p.source = [w, eps](const Point2& x) {
    const double sx = std::sin(w * x.x()), cx = std::cos(w * x.x());
    const double sy = std::sin(w * x.y()), cy = std::cos(w * x.y());
    const double u = sx * sy;
    const double uy = w * sx * cy;
    const double uxx = -w * w * u;
    const double uyy = -w * w * u;
    const double uxy = w * w * cx * cy;
    const double div = eps * (100.0 * uxx - std::sin(x.x()) * uy + 2.0 * std::cos(x.x()) * uxy + uyy);
    return -div + u;
  };
  p.kappa = 1.0;
  p.lower = c == 1 ? 0.0 : -1.0;
  p.min_error_quadrature = c >= 4 ? 12 : 0;
  return p;
}

ProblemData problem_example2(double eps) {
  check_eps(eps);
  ProblemData p;
  p.name = "example2";
  p.diffusion = [eps](const Point2&) { return Matrix2(eps * Matrix2::Identity()); };
  p.reaction = [](const Point2&) { return 1.0; };
  p.source = [](const Point2&) { return 1.0; };
  return p;
}

ProblemData problem_example3(double eps) {
  check_eps(eps);
  ProblemData p;
  p.name = "example3";
  p.diffusion = [eps](const Point2&) { return Matrix2(eps * Matrix2::Identity()); };
  p.reaction = [](const Point2&) { return 1.0; };
  p.source = [](const Point2& x) {
    const bool inner = x.x() >= 0.25 && x.x() <= 0.75 && x.y() >= 0.25 && x.y() <= 0.75;
    return inner ? 0.5 : 1.0;
  };
  return p;
}

ProblemData problem_constant(double diffusion, double reaction, ScalarField source,
                             double kappa) {
  ProblemData p;
  p.name = "constant";
  p.diffusion = [diffusion](const Point2&) { return Matrix2(diffusion * Matrix2::Identity()); };
  p.reaction = [reaction](const Point2&) { return reaction; };
  p.source = std::move(source);
  p.kappa = kappa;
  return p;
}

}  // namespace polydg

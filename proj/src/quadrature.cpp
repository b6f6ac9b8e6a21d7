#include "polydg/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace polydg {
namespace {

void check_degree(int degree) {
  if (degree < kMinQuadratureDegree || degree > kMaxQuadratureDegree) {
    throw QuadratureError("unsupported quadrature degree " + std::to_string(degree) +
                          "; supported range is [" + std::to_string(kMinQuadratureDegree) +
                          ", " + std::to_string(kMaxQuadratureDegree) + "]");
  }
}

// n-point Gauss-Legendre on [-1,1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) {
        break;
      }
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

// n-point Gauss-Jacobi on [-1,1] for the weight (1-t), by Newton iteration
// on P_n^{(1,0)} started from the Legendre nodes.
void gauss_jacobi_10(int n, std::vector<double>& x, std::vector<double>& w) {
  constexpr double a = 1.0;
  constexpr double b = 0.0;
  auto eval = [&](double t, double& p, double& dp) {
    // Three-term recurrence for Jacobi polynomials P_j^{(a,b)}.
    double pm1 = 1.0;
    double p0 = 0.5 * (a - b + (a + b + 2.0) * t);
    if (n == 0) {
      p = pm1;
      dp = 0.0;
      return;
    }
    double prev = pm1;
    double cur = p0;
    for (int j = 2; j <= n; ++j) {
      const double c1 = 2.0 * j * (j + a + b) * (2.0 * j + a + b - 2.0);
      const double c2 = (2.0 * j + a + b - 1.0) * (a * a - b * b);
      const double c3 = (2.0 * j + a + b - 2.0) * (2.0 * j + a + b - 1.0) * (2.0 * j + a + b);
      const double c4 = 2.0 * (j + a - 1.0) * (j + b - 1.0) * (2.0 * j + a + b);
      const double next = ((c2 + c3 * t) * cur - c4 * prev) / c1;
      prev = cur;
      cur = next;
    }
    p = cur;
    // (2n+a+b)(1-t^2) P_n' = n(a-b-(2n+a+b)t) P_n + 2(n+a)(n+b) P_{n-1}
    const double nn = n;
    const double denom = (2.0 * nn + a + b) * (1.0 - t * t);
    dp = (nn * (a - b - (2.0 * nn + a + b) * t) * cur +
          2.0 * (nn + a) * (nn + b) * prev) /
         denom;
  };

  std::vector<double> xl, wl;
  gauss_legendre(n, xl, wl);
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = xl[i];
    double p = 0.0, dp = 0.0;
    for (int it = 0; it < 200; ++it) {
      eval(z, p, dp);
      // Deflate by the already-found roots so Newton does not revisit them.
      double s = 0.0;
      for (int j = 0; j < i; ++j) {
        s += 1.0 / (z - x[j]);
      }
      const double dz = p / (dp - s * p);
      z -= dz;
      if (std::abs(dz) < 1e-16) {
        break;
      }
    }
    eval(z, p, dp);
    x[i] = z;
    // Christoffel weight; the Gamma-function prefactor is 4 for (a,b) = (1,0).
    w[i] = 4.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace

QuadratureRule edge_quadrature(int degree) {
  check_degree(degree);
  const int n = (degree + 2) / 2;
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule rule;
  rule.degree = degree;
  for (int i = n - 1; i >= 0; --i) {
    rule.points.emplace_back(0.5 * (x[i] + 1.0), 0.0);
    rule.weights.push_back(0.5 * w[i]);
  }
  return rule;
}

QuadratureRule triangle_quadrature(int degree) {
  check_degree(degree);
  const int n = (degree + 2) / 2;
  std::vector<double> xj, wj, xl, wl;
  gauss_jacobi_10(n, xj, wj);
  gauss_legendre(n, xl, wl);
  QuadratureRule rule;
  rule.degree = degree;
  // Collapsed coordinates: x = (1+s)/2, y = (1-x)(1+t)/2 with the (1-x)
  // Jacobian factor absorbed by the Jacobi weight in s.
  for (int i = 0; i < n; ++i) {
    const double px = 0.5 * (1.0 + xj[i]);
    for (int j = 0; j < n; ++j) {
      const double py = (1.0 - px) * 0.5 * (1.0 + xl[j]);
      rule.points.emplace_back(px, py);
      rule.weights.push_back(0.125 * wj[i] * wl[j]);
    }
  }
  return rule;
}

}  // namespace polydg

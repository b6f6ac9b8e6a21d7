#include "polydg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "polydg/quadrature.hpp"

namespace polydg {
namespace {

constexpr int kMaxM = simplex_dimension(kMaxDegree);

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Point uniformly distributed in element `el`, by area-weighted triangle
// choice and the square-root barycentric trick.
Point2 random_point(const PolytopicMesh& mesh, Index el, const std::vector<double>& cumulative,
                    std::mt19937_64& rng) {
  const auto& tris = mesh.elements[el].tris;
  const double r = uniform01(rng) * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
  const std::size_t idx = std::min<std::size_t>(it - cumulative.begin(), tris.size() - 1);
  const Index t = tris[idx];
  const double s = std::sqrt(uniform01(rng));
  const double v = uniform01(rng);
  const double l1 = s * (1.0 - v);
  const double l2 = s * v;
  return (1.0 - l1 - l2) * mesh.vertex(t, 0) + l1 * mesh.vertex(t, 1) + l2 * mesh.vertex(t, 2);
}

std::vector<double> area_cumulative(const PolytopicMesh& mesh, Index el) {
  std::vector<double> c;
  double s = 0.0;
  for (Index t : mesh.elements[el].tris) {
    s += mesh.triangle_area(t);
    c.push_back(s);
  }
  return c;
}

double trace(const PolytopicMesh& mesh, const CompositeSpaces& spaces, std::span<const double> w,
             Index tri, const Point2& x) {
  const auto map = triangle_map(mesh, tri);
  double phi[kMaxM];
  spaces.lagrange.eval(map.to_reference(x), phi);
  double s = 0.0;
  for (int l = 0; l < spaces.lagrange.m; ++l) {
    s += w[spaces.dofmap.node(tri, l)] * phi[l];
  }
  return s;
}

// Modal coefficients of element `el` reproducing the values f at the
// element's composite nodes (exact for polynomials of degree k).
void fit_modal(const CompositeSpaces& spaces, Index el, const std::vector<double>& values,
               std::vector<double>& out) {
  const int m = spaces.modal.m;
  const Index first = spaces.dofmap.element_offset[el];
  const Index n = spaces.dofmap.element_size(el);
  Eigen::MatrixXd v(n, m);
  double psi[kMaxM];
  for (Index i = 0; i < n; ++i) {
    spaces.modal.eval(el, spaces.dofmap.node_coords[first + i], psi);
    for (int j = 0; j < m; ++j) {
      v(i, j) = psi[j];
    }
  }
  const Eigen::Map<const Eigen::VectorXd> b(values.data(), n);
  const Eigen::VectorXd c = v.colPivHouseholderQr().solve(b);
  for (int j = 0; j < m; ++j) {
    out[el * m + j] = c(j);
  }
}

}  // namespace

int error_quadrature_degree(int k, const ProblemData& problem) {
  return std::min(kMaxQuadratureDegree, std::max(2 * k + 6, problem.min_error_quadrature));
}

ErrorReport field_errors(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                         const ProblemData& problem, std::span<const double> sigma,
                         std::span<const double> w, int quad_degree) {
  if (!problem.has_exact() || !problem.exact_gradient) {
    throw ProblemDataError("problem '" + problem.name + "' has no exact solution");
  }
  if (static_cast<Index>(w.size()) != spaces.N_sharp()) {
    throw DimensionError("field_errors: nodal vector has the wrong length");
  }
  const auto tri_rule = triangle_quadrature(quad_degree);
  const auto edge_rule = edge_quadrature(quad_degree);
  const int m = spaces.lagrange.m;
  double phi[kMaxM];
  Point2 ref_grad[kMaxM];
  double l2 = 0.0, h1 = 0.0, dg = 0.0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto map = triangle_map(mesh, t);
    for (std::size_t q = 0; q < tri_rule.size(); ++q) {
      const Point2 x = map.to_physical(tri_rule.points[q]);
      const double wq = tri_rule.weights[q] * std::abs(map.det);
      spaces.lagrange.eval_grad(tri_rule.points[q], phi, ref_grad);
      double val = 0.0;
      Point2 grad = Point2::Zero();
      for (int l = 0; l < m; ++l) {
        const double c = w[spaces.dofmap.node(t, l)];
        val += c * phi[l];
        grad += c * map.physical_gradient(ref_grad[l]);
      }
      const double e = problem.exact(x) - val;
      const Point2 ge = problem.exact_gradient(x) - grad;
      l2 += wq * e * e;
      h1 += wq * ge.squaredNorm();
      dg += wq * (ge.dot(problem.diffusion(x) * ge) + problem.reaction(x) * e * e);
    }
  }
  for (const auto& e : mesh.skeleton) {
    if (e.face < 0) {
      continue;
    }
    const Point2 a = mesh.points[e.v[0]];
    const Point2 tangent = mesh.points[e.v[1]] - a;
    const double len = tangent.norm();
    for (std::size_t q = 0; q < edge_rule.size(); ++q) {
      const Point2 x = a + edge_rule.points[q].x() * tangent;
      double jump = trace(mesh, spaces, w, e.tri_plus, x);
      if (e.is_boundary()) {
        jump -= problem.exact(x);
      } else {
        jump -= trace(mesh, spaces, w, e.tri_minus, x);
      }
      dg += edge_rule.weights[q] * len * sigma[e.face] * jump * jump;
    }
  }
  ErrorReport r;
  r.has_exact = true;
  r.L2 = std::sqrt(l2);
  r.H1_broken = std::sqrt(h1);
  r.DG = std::sqrt(dg);
  return r;
}

ErrorReport compute_errors(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                           const ProblemData& problem, const AssembledSystem& sys,
                           const SolveReport& solution) {
  ErrorReport r;
  if (problem.has_exact() && problem.exact_gradient) {
    r = field_errors(mesh, spaces, problem, sys.penalty.sigma, solution.W_plus,
                     error_quadrature_degree(sys.config.k, problem));
  }
  r.stab = solution.stab_norm;
  if (!solution.W_plus.empty()) {
    const auto [mn, mx] = std::minmax_element(solution.W_plus.begin(), solution.W_plus.end());
    r.nodal_min = *mn;
    r.nodal_max = *mx;
  }
  return r;
}

double eoc(double e1, double n1, double e2, double n2) {
  if (!(e1 > 0.0) || !(e2 > 0.0)) {
    throw std::invalid_argument("eoc: errors must be positive");
  }
  if (!(n1 > 0.0) || !(n2 > 0.0) || n1 == n2) {
    throw std::invalid_argument("eoc: element counts must be positive and distinct");
  }
  return std::log(e1 / e2) / std::log(std::sqrt(n2 / n1));
}

void fill_eoc(std::vector<EOCRow>& rows) {
  auto rate = [](double e1, Index n1, double e2, Index n2) -> std::optional<double> {
    if (!(e1 > 0.0) || !(e2 > 0.0) || n1 == n2 || n1 <= 0 || n2 <= 0) {
      return std::nullopt;
    }
    return eoc(e1, static_cast<double>(n1), e2, static_cast<double>(n2));
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& r = rows[i];
    r.l2_eoc = r.h1_eoc = r.dg_eoc = r.stab_eoc = std::nullopt;
    if (i == 0 || r.iterations < 0 || rows[i - 1].iterations < 0) {
      continue;
    }
    const auto& p = rows[i - 1];
    if (r.errors.has_exact && p.errors.has_exact) {
      r.l2_eoc = rate(p.errors.L2, p.n_elements, r.errors.L2, r.n_elements);
      r.h1_eoc = rate(p.errors.H1_broken, p.n_elements, r.errors.H1_broken, r.n_elements);
      r.dg_eoc = rate(p.errors.DG, p.n_elements, r.errors.DG, r.n_elements);
    }
    r.stab_eoc = rate(p.errors.stab, p.n_elements, r.errors.stab, r.n_elements);
  }
}

std::array<Point2, 3> covering_triangle(const PolytopicMesh& mesh, Index element) {
  const auto poly = element_polygon(mesh, element);
  Point2 lo = poly.front(), hi = poly.front();
  for (const auto& p : poly) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double a = hi.x() - lo.x();
  const double b = hi.y() - lo.y();
  // Right angle at a bounding-box corner; the hypotenuse must clear the
  // opposite corner, a / L1 + b / L2 <= 1. Legs (2a, 2b) minimize the area.
  double best = std::numeric_limits<double>::infinity();
  std::array<Point2, 3> out{};
  for (int right = 0; right < 2; ++right) {
    for (int up = 0; up < 2; ++up) {
      const double rx = right ? 1.0 - lo.x() : hi.x();
      const double ry = up ? 1.0 - lo.y() : hi.y();
      double l1 = 2.0 * a, l2 = 2.0 * b;
      if (l1 > rx || l2 > ry) {
        if (a / rx + b / ry > 1.0) {
          continue;
        }
        l1 = rx;
        l2 = std::min(ry, b / (1.0 - a / rx));
      }
      if (l1 * l2 < best) {
        best = l1 * l2;
        const Point2 corner(right ? lo.x() : hi.x(), up ? lo.y() : hi.y());
        out = {corner, Point2(corner.x() + (right ? l1 : -l1), corner.y()),
               Point2(corner.x(), corner.y() + (up ? l2 : -l2))};
      }
    }
  }
  if (!std::isfinite(best)) {
    throw MeshError("no right triangle inside the domain covers element " +
                    std::to_string(element));
  }
  return out;
}

InterpolantResult bp_interpolant(const ScalarField& u, const PolytopicMesh& mesh,
                                 const CompositeSpaces& spaces, double kappa) {
  if (!(kappa > 0.0)) {
    throw ProblemDataError("kappa must be positive");
  }
  const int k = spaces.lagrange.k;
  const int m = spaces.lagrange.m;
  InterpolantResult res;
  res.coefficients.assign(spaces.N_P(), 0.0);
  res.beta.assign(mesh.num_elements(), 1.0);
  res.samples_per_element = 50 * m;
  double phi[kMaxM];
  for (Index el = 0; el < mesh.num_elements(); ++el) {
    const auto cover = covering_triangle(mesh, el);
    Matrix2 jac;
    jac.col(0) = cover[1] - cover[0];
    jac.col(1) = cover[2] - cover[0];
    const Matrix2 inv = jac.inverse();
    std::vector<double> nodal(m);
    for (int l = 0; l < m; ++l) {
      const Point2 x = cover[0] + jac * spaces.lagrange.nodes[l];
      nodal[l] = u(x);
      if (nodal[l] < -1e-12 || nodal[l] > kappa + 1e-12) {
        throw ProblemDataError("interpolated function leaves [0, kappa] at (" +
                               std::to_string(x.x()) + ", " + std::to_string(x.y()) + ")");
      }
    }
    auto interp = [&](const Point2& x) {
      spaces.lagrange.eval(inv * (x - cover[0]), phi);
      double s = 0.0;
      for (int l = 0; l < m; ++l) {
        s += nodal[l] * phi[l];
      }
      return s;
    };
    double beta = 1.0;
    if (k > 1) {
      const auto poly = element_polygon(mesh, el);
      std::vector<Point2> pts(poly.begin(), poly.end());
      const Index first = spaces.dofmap.element_offset[el];
      for (Index i = 0; i < spaces.dofmap.element_size(el); ++i) {
        pts.push_back(spaces.dofmap.node_coords[first + i]);
      }
      std::mt19937_64 rng(0x5DEECE66DULL + static_cast<unsigned long long>(el));
      const auto cum = area_cumulative(mesh, el);
      for (int s = 0; s < res.samples_per_element; ++s) {
        pts.push_back(random_point(mesh, el, cum, rng));
      }
      auto err = [&](const Point2& x) { return std::abs(u(x) - interp(x)); };
      std::vector<std::pair<double, Point2>> ranked;
      ranked.reserve(pts.size());
      for (const auto& p : pts) {
        ranked.emplace_back(err(p), p);
      }
      std::partial_sort(ranked.begin(), ranked.begin() + std::min<std::size_t>(3, ranked.size()),
                        ranked.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
      double delta = ranked.front().first;
      // Pattern search polishes the sampled maxima.
      const double H = mesh.elements[el].H;
      for (std::size_t i = 0; i < std::min<std::size_t>(3, ranked.size()); ++i) {
        Point2 p = ranked[i].second;
        double best = ranked[i].first;
        for (double step = H / 16.0; step > 1e-6 * H; step *= 0.5) {
          bool moved = true;
          while (moved) {
            moved = false;
            for (const Point2& d : {Point2(1, 0), Point2(-1, 0), Point2(0, 1), Point2(0, -1)}) {
              const Point2 c = p + step * d;
              if (!point_in_polygon(poly, c)) {
                continue;
              }
              const double v = err(c);
              if (v > best) {
                best = v;
                p = c;
                moved = true;
              }
            }
          }
        }
        delta = std::max(delta, best);
      }
      beta = kappa / (kappa + 2.0 * delta);
    }
    res.beta[el] = beta;
    const Index first = spaces.dofmap.element_offset[el];
    std::vector<double> values(spaces.dofmap.element_size(el));
    for (std::size_t i = 0; i < values.size(); ++i) {
      const Point2 x = spaces.dofmap.node_coords[first + i];
      values[i] = 0.5 * kappa + beta * (interp(x) - 0.5 * kappa);
    }
    fit_modal(spaces, el, values, res.coefficients);
  }
  return res;
}

double modal_l2_error(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                      std::span<const double> coefficients, const ScalarField& u,
                      int quad_degree) {
  const auto rule = triangle_quadrature(quad_degree);
  double s = 0.0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto map = triangle_map(mesh, t);
    const Index el = mesh.triangles[t].parent;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point2 x = map.to_physical(rule.points[q]);
      const double e = u(x) - eval_modal(spaces, coefficients, el, x);
      s += rule.weights[q] * std::abs(map.det) * e * e;
    }
  }
  return std::sqrt(s);
}

std::pair<double, double> modal_range(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                                      std::span<const double> coefficients, int per_element,
                                      unsigned long long seed) {
  double mn = std::numeric_limits<double>::infinity();
  double mx = -mn;
  std::mt19937_64 rng(seed);
  for (Index el = 0; el < mesh.num_elements(); ++el) {
    const auto cum = area_cumulative(mesh, el);
    for (int s = 0; s < per_element; ++s) {
      const double v = eval_modal(spaces, coefficients, el, random_point(mesh, el, cum, rng));
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
  }
  return {mn, mx};
}

PointLocator::PointLocator(const PolytopicMesh& mesh) : mesh_(&mesh) {
  lo_ = hi_ = mesh.points.front();
  for (const auto& p : mesh.points) {
    lo_ = lo_.cwiseMin(p);
    hi_ = hi_.cwiseMax(p);
  }
  n_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_triangles()))));
  buckets_.resize(static_cast<std::size_t>(n_) * n_);
  const Point2 size = hi_ - lo_;
  auto cell = [&](double v, double l, double s) {
    return std::clamp(static_cast<int>((v - l) / s * n_), 0, n_ - 1);
  };
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    Point2 a = mesh.vertex(t, 0), b = a;
    for (int c = 1; c < 3; ++c) {
      a = a.cwiseMin(mesh.vertex(t, c));
      b = b.cwiseMax(mesh.vertex(t, c));
    }
    const double pad = 1e-9 * size.maxCoeff();
    const int i0 = cell(a.x() - pad, lo_.x(), size.x()), i1 = cell(b.x() + pad, lo_.x(), size.x());
    const int j0 = cell(a.y() - pad, lo_.y(), size.y()), j1 = cell(b.y() + pad, lo_.y(), size.y());
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        buckets_[static_cast<std::size_t>(j) * n_ + i].push_back(t);
      }
    }
  }
}

Index PointLocator::locate(const Point2& x, double tol) const {
  const Point2 size = hi_ - lo_;
  const int i = std::clamp(static_cast<int>((x.x() - lo_.x()) / size.x() * n_), 0, n_ - 1);
  const int j = std::clamp(static_cast<int>((x.y() - lo_.y()) / size.y() * n_), 0, n_ - 1);
  for (Index t : buckets_[static_cast<std::size_t>(j) * n_ + i]) {
    const auto map = triangle_map(*mesh_, t);
    const Point2 r = map.to_reference(x);
    if (r.x() >= -tol && r.y() >= -tol && r.x() + r.y() <= 1.0 + tol) {
      return t;
    }
  }
  throw MeshError("point (" + std::to_string(x.x()) + ", " + std::to_string(x.y()) +
                  ") lies outside every submesh triangle");
}

std::vector<SectionSample> cross_section(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                                         std::span<const double> w_plus,
                                         std::span<const double> u_dg, const Point2& p0,
                                         const Point2& p1, int n) {
  if (n < 2) {
    throw ConfigError("a cross-section needs at least 2 samples");
  }
  const PointLocator locator(mesh);
  std::vector<SectionSample> out(n);
  for (int i = 0; i < n; ++i) {
    auto& s = out[i];
    s.t = static_cast<double>(i) / (n - 1);
    s.x = i == n - 1 ? p1 : Point2(p0 + s.t * (p1 - p0));
    const Index tri = locator.locate(s.x);
    s.value_bp = eval_composite(mesh, spaces, w_plus, tri, s.x);
    if (!u_dg.empty()) {
      s.value_dg = eval_modal(spaces, u_dg, mesh.triangles[tri].parent, s.x);
    }
  }
  return out;
}

SparseOperator dg_norm_gram(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                            const ProblemData& problem, std::span<const double> sigma,
                            int quad_degree) {
  const auto tri_rule = triangle_quadrature(quad_degree);
  const auto edge_rule = edge_quadrature(quad_degree);
  const int m = spaces.lagrange.m;
  std::vector<Triplet> triplets;
  double phi[kMaxM];
  Point2 ref_grad[kMaxM];
  Point2 grad[kMaxM];
  Eigen::MatrixXd local(m, m);
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto map = triangle_map(mesh, t);
    local.setZero();
    for (std::size_t q = 0; q < tri_rule.size(); ++q) {
      const Point2 x = map.to_physical(tri_rule.points[q]);
      const double w = tri_rule.weights[q] * std::abs(map.det);
      const Matrix2 d = problem.diffusion(x);
      const double mu = problem.reaction(x);
      spaces.lagrange.eval_grad(tri_rule.points[q], phi, ref_grad);
      for (int l = 0; l < m; ++l) {
        grad[l] = map.physical_gradient(ref_grad[l]);
      }
      for (int i = 0; i < m; ++i) {
        const Point2 dgi = d * grad[i];
        for (int j = 0; j < m; ++j) {
          local(i, j) += w * (dgi.dot(grad[j]) + mu * phi[i] * phi[j]);
        }
      }
    }
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        triplets.push_back({t * m + i, t * m + j, local(i, j)});
      }
    }
  }
  double side[2][kMaxM];
  for (const auto& e : mesh.skeleton) {
    if (e.face < 0) {
      continue;
    }
    const Point2 a = mesh.points[e.v[0]];
    const Point2 tangent = mesh.points[e.v[1]] - a;
    const double len = tangent.norm();
    const int nsides = e.is_boundary() ? 1 : 2;
    const Index tris[2] = {e.tri_plus, e.tri_minus};
    const double sign[2] = {1.0, -1.0};
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(nsides * m, nsides * m);
    for (std::size_t q = 0; q < edge_rule.size(); ++q) {
      const Point2 x = a + edge_rule.points[q].x() * tangent;
      for (int s = 0; s < nsides; ++s) {
        spaces.lagrange.eval(triangle_map(mesh, tris[s]).to_reference(x), side[s]);
      }
      const double w = edge_rule.weights[q] * len * sigma[e.face];
      for (int sa = 0; sa < nsides; ++sa) {
        for (int sb = 0; sb < nsides; ++sb) {
          for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
              block(sa * m + i, sb * m + j) +=
                  w * sign[sa] * sign[sb] * side[sa][i] * side[sb][j];
            }
          }
        }
      }
    }
    for (int sa = 0; sa < nsides; ++sa) {
      for (int sb = 0; sb < nsides; ++sb) {
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < m; ++j) {
            triplets.push_back(
                {tris[sa] * m + i, tris[sb] * m + j, block(sa * m + i, sb * m + j)});
          }
        }
      }
    }
  }
  const auto fine = SparseOperator::from_triplets(spaces.N_T(), spaces.N_T(), std::move(triplets));
  return galerkin_transform(fine, spaces.O);
}

SparseOperator dg_norm_gram_modal(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                                  const ProblemData& problem, std::span<const double> sigma,
                                  int quad_degree) {
  return galerkin_transform(dg_norm_gram(mesh, spaces, problem, sigma, quad_degree), spaces.Q);
}

double equivalence_constant(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                            const ProblemData& problem, const AssembledSystem& sys,
                            int iterations) {
  const auto gram = dg_norm_gram(mesh, spaces, problem, sys.penalty.sigma, sys.config.quad_degree());
  const Index n = spaces.N_sharp();
  std::vector<double> scale(n), x(n, 1.0), y(n);
  for (Index i = 0; i < n; ++i) {
    const double s = sys.s_diag[i] / sys.stab.alpha[spaces.dofmap.node_element[i]];
    if (!(s > 0.0)) {
      throw ProblemDataError("stabilization weight vanishes at node " + std::to_string(i));
    }
    scale[i] = 1.0 / std::sqrt(s);
  }
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    for (Index i = 0; i < n; ++i) {
      y[i] = scale[i] * x[i];
    }
    auto z = gram.apply(y);
    double nz = 0.0;
    for (Index i = 0; i < n; ++i) {
      z[i] *= scale[i];
      nz += z[i] * z[i];
    }
    nz = std::sqrt(nz);
    if (nz == 0.0) {
      return 0.0;
    }
    const bool settled = std::abs(nz - lambda) <= 1e-10 * nz;
    lambda = nz;
    for (Index i = 0; i < n; ++i) {
      x[i] = z[i] / nz;
    }
    if (settled) {
      break;
    }
  }
  return lambda;
}

std::string field_svg(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                      std::span<const double> w, double vmin, double vmax) {
  constexpr double size = 800.0;
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n",
                static_cast<int>(size), static_cast<int>(size), static_cast<int>(size),
                static_cast<int>(size));
  out += buf;
  const double span = vmax > vmin ? vmax - vmin : 1.0;
  const int m = spaces.lagrange.m;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    double mean = 0.0;
    for (int l = 0; l < m; ++l) {
      mean += w[spaces.dofmap.node(t, l)];
    }
    mean /= m;
    const double s = std::clamp((mean - vmin) / span, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(255.0 * s));
    const int g = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(2.0 * s - 1.0))));
    const int b = static_cast<int>(std::lround(255.0 * (1.0 - s)));
    const Point2 p0 = mesh.vertex(t, 0), p1 = mesh.vertex(t, 1), p2 = mesh.vertex(t, 2);
    std::snprintf(buf, sizeof buf,
                  "<polygon points=\"%.2f,%.2f %.2f,%.2f %.2f,%.2f\" fill=\"rgb(%d,%d,%d)\"/>\n",
                  size * p0.x(), size * (1.0 - p0.y()), size * p1.x(), size * (1.0 - p1.y()),
                  size * p2.x(), size * (1.0 - p2.y()), r, g, b);
    out += buf;
  }
  for (const auto& el : mesh.elements) {
    out += "<polygon fill=\"none\" stroke=\"black\" stroke-width=\"0.8\" points=\"";
    for (std::size_t i = 0; i < el.loop.size(); ++i) {
      const Point2 p = mesh.points[el.loop[i]];
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", size * p.x(),
                    size * (1.0 - p.y()));
      out += buf;
    }
    out += "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace polydg

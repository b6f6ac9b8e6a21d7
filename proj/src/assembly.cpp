#include "polydg/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "polydg/quadrature.hpp"

namespace polydg {
namespace {

constexpr int kMaxM = simplex_dimension(kMaxDegree);

struct SideValues {
  double phi[kMaxM];
  double flux[kMaxM];  // (D grad phi) . n
};

void check_config(const AssemblyConfig& config) {
  if (config.k < kMinDegree || config.k > kMaxDegree) {
    throw ConfigError("polynomial degree " + std::to_string(config.k) + " outside [1, 4]");
  }
  if (config.quad_degree() < 2 * config.k + 2) {
    throw ConfigError("quadrature degree " + std::to_string(config.quad_degree()) +
                      " too low for k = " + std::to_string(config.k) + " (need >= 2k+2)");
  }
  if (config.theta < -1.0 || config.theta > 1.0) {
    throw ConfigError("theta must lie in [-1, 1]");
  }
  if (!(config.gamma > 0.0)) {
    throw ConfigError("gamma must be positive");
  }
}

void side_values(const PolytopicMesh& mesh, const CompositeSpaces& spaces, Index tri,
                 const Point2& x, const Matrix2& d, const Point2& n, SideValues& out) {
  const auto map = triangle_map(mesh, tri);
  Point2 grad[kMaxM];
  spaces.lagrange.eval_grad(map.to_reference(x), out.phi, grad);
  const Point2 dn = d * n;
  for (int l = 0; l < spaces.lagrange.m; ++l) {
    out.flux[l] = map.physical_gradient(grad[l]).dot(dn);
  }
}

}  // namespace

std::vector<Point2> element_samples(const PolytopicMesh& mesh, Index element) {
  const auto poly = element_polygon(mesh, element);
  std::vector<Point2> samples = poly;
  Point2 lo = poly.front(), hi = poly.front();
  for (const auto& p : poly) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  constexpr int n = 8;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Point2 p(lo.x() + (hi.x() - lo.x()) * (i + 0.5) / n,
                     lo.y() + (hi.y() - lo.y()) * (j + 0.5) / n);
      if (point_in_polygon(poly, p)) {
        samples.push_back(p);
      }
    }
  }
  return samples;
}

double penalty_formula(double C_star, int k, double ratio) {
  constexpr int d = 2;
  return 8.0 * C_star * k * (k - 1.0 + d) / d * ratio;
}

double alpha_formula(double gamma, double C_star, double H, double max_ratio) {
  return gamma * std::max(1.0, H / (8.0 * C_star) * max_ratio);
}

double element_delta(const PolytopicMesh& mesh, const ProblemData& problem, Index element,
                     DeltaRule rule) {
  double dmax = 0.0;
  double dinv = 0.0;
  for (const auto& x : element_samples(mesh, element)) {
    const Matrix2 d = problem.diffusion(x);
    dmax = std::max(dmax, spectral_norm(d));
    dinv = std::max(dinv, inverse_spectral_norm(d));
  }
  const double delta = rule == DeltaRule::Contrast ? dmax * dmax * dinv : dmax;
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw ProblemDataError("non-positive penalty scale on element " + std::to_string(element));
  }
  return delta;
}

double compute_sigma(const InterfaceFace& face, const PolytopicMesh& mesh,
                     const ProblemData& problem, int k, DeltaRule rule) {
  double ratio = element_delta(mesh, problem, face.kplus, rule) / mesh.elements[face.kplus].H;
  if (!face.is_boundary()) {
    ratio = std::max(ratio, element_delta(mesh, problem, face.kminus, rule) /
                                mesh.elements[face.kminus].H);
  }
  return penalty_formula(mesh.C_star, k, ratio);
}

PenaltyField compute_penalty(const PolytopicMesh& mesh, const ProblemData& problem, int k,
                             DeltaRule rule) {
  PenaltyField field;
  field.delta.resize(mesh.num_elements());
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    field.delta[e] = element_delta(mesh, problem, e, rule);
  }
  field.sigma_interior.assign(mesh.num_elements(), 0.0);
  for (const auto& f : mesh.faces) {
    double ratio = field.delta[f.kplus] / mesh.elements[f.kplus].H;
    if (!f.is_boundary()) {
      ratio = std::max(ratio, field.delta[f.kminus] / mesh.elements[f.kminus].H);
    }
    const double sigma = penalty_formula(mesh.C_star, k, ratio);
    field.sigma.push_back(sigma);
    field.sigma_interior[f.kplus] = std::max(field.sigma_interior[f.kplus], sigma);
    if (!f.is_boundary()) {
      field.sigma_interior[f.kminus] = std::max(field.sigma_interior[f.kminus], sigma);
    }
  }
  return field;
}

double boundary_facet_ratio(const PolytopicMesh& mesh, Index element) {
  double ratio = 0.0;
  for (const auto& f : mesh.faces) {
    const bool plus = f.kplus == element;
    const bool minus = f.kminus == element;
    if (!plus && !minus) {
      continue;
    }
    for (std::size_t i = 0; i < f.edges.size(); ++i) {
      const double len = (mesh.points[f.edges[i][1]] - mesh.points[f.edges[i][0]]).norm();
      const Index t = plus ? f.tri_plus[i] : f.tri_minus[i];
      ratio = std::max(ratio, len / mesh.triangle_area(t));
    }
  }
  if (!(ratio > 0.0)) {
    throw MeshError("element " + std::to_string(element) + " has no boundary triangles");
  }
  return ratio;
}

double compute_alpha(const PolytopicMesh& mesh, Index element, double gamma) {
  return alpha_formula(gamma, mesh.C_star, mesh.elements[element].H,
                       boundary_facet_ratio(mesh, element));
}

StabWeights compute_stab_weights(const PolytopicMesh& mesh, const ProblemData& problem,
                                 double gamma) {
  StabWeights w;
  w.gamma = gamma;
  const Index ne = mesh.num_elements();
  std::vector<double> dmax(ne, 0.0);
  for (Index e = 0; e < ne; ++e) {
    for (const auto& x : element_samples(mesh, e)) {
      dmax[e] = std::max(dmax[e], spectral_norm(problem.diffusion(x)));
    }
  }
  w.alpha.resize(ne);
  w.D_omega.resize(ne);
  for (Index e = 0; e < ne; ++e) {
    w.alpha[e] = compute_alpha(mesh, e, gamma);
    double d = dmax[e];
    for (Index nb : mesh.elements[e].neighbors) {
      d = std::max(d, dmax[nb]);
    }
    w.D_omega[e] = d;
  }
  return w;
}

namespace {

void volume_triplets(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                     const ProblemData& problem, const QuadratureRule& tri_rule,
                     std::vector<Triplet>& triplets, std::vector<double>& load) {
  const int m = spaces.lagrange.m;
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
      const double f = problem.source(x);
      spaces.lagrange.eval_grad(tri_rule.points[q], phi, ref_grad);
      for (int l = 0; l < m; ++l) {
        grad[l] = map.physical_gradient(ref_grad[l]);
        load[t * m + l] += w * f * phi[l];
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
}

}  // namespace

FineSystem assemble_volume_fine(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                                const ProblemData& problem, int quad_degree) {
  FineSystem out;
  out.b.assign(spaces.N_T(), 0.0);
  std::vector<Triplet> triplets;
  volume_triplets(mesh, spaces, problem, triangle_quadrature(quad_degree), triplets, out.b);
  out.A = SparseOperator::from_triplets(spaces.N_T(), spaces.N_T(), std::move(triplets));
  return out;
}

FineSystem assemble_dg_fine(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                            const ProblemData& problem, const PenaltyField& penalty,
                            const AssemblyConfig& config) {
  check_config(config);
  const int m = spaces.lagrange.m;
  const auto edge_rule = edge_quadrature(config.quad_degree());
  FineSystem out;
  out.b.assign(spaces.N_T(), 0.0);
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_triangles()) * m * m * 4);
  volume_triplets(mesh, spaces, problem, triangle_quadrature(config.quad_degree()), triplets,
                  out.b);

  const double theta = config.theta;
  SideValues side[2];
  for (const auto& e : mesh.skeleton) {
    const Point2 a = mesh.points[e.v[0]];
    const Point2 b = mesh.points[e.v[1]];
    const Point2 tangent = b - a;
    const double len = tangent.norm();
    const Point2 n(tangent.y() / len, -tangent.x() / len);
    const double sigma = e.face >= 0 ? penalty.sigma[e.face]
                                     : penalty.sigma_interior[mesh.triangles[e.tri_plus].parent];
    const bool boundary = e.is_boundary();
    const int nsides = boundary ? 1 : 2;
    const double avg = boundary ? 1.0 : 0.5;
    const Index tris[2] = {e.tri_plus, e.tri_minus};
    const double sign[2] = {1.0, -1.0};
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(nsides * m, nsides * m);
    for (std::size_t q = 0; q < edge_rule.size(); ++q) {
      const Point2 x = a + edge_rule.points[q].x() * tangent;
      const double w = edge_rule.weights[q] * len;
      const Matrix2 d = problem.diffusion(x);
      for (int s = 0; s < nsides; ++s) {
        side_values(mesh, spaces, tris[s], x, d, n, side[s]);
      }
      for (int sa = 0; sa < nsides; ++sa) {
        for (int sb = 0; sb < nsides; ++sb) {
          const double ja = sign[sa];
          const double jb = sign[sb];
          for (int i = 0; i < m; ++i) {
            const double vi = side[sa].phi[i];
            const double gi = side[sa].flux[i];
            for (int j = 0; j < m; ++j) {
              const double uj = side[sb].phi[j];
              const double gj = side[sb].flux[j];
              block(sa * m + i, sb * m + j) +=
                  w * (sigma * ja * jb * vi * uj - avg * gj * ja * vi - theta * avg * gi * jb * uj);
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
  out.A = SparseOperator::from_triplets(spaces.N_T(), spaces.N_T(), std::move(triplets));
  return out;
}

std::vector<double> assemble_stab_fine(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                                       const ProblemData& problem, const StabWeights& weights,
                                       int quad_degree) {
  const auto rule = triangle_quadrature(quad_degree);
  std::vector<double> s(spaces.N_sharp(), 0.0);
  const int m = spaces.lagrange.m;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto map = triangle_map(mesh, t);
    double mu = 0.0;
    for (const auto& p : rule.points) {
      mu = std::max(mu, problem.reaction(map.to_physical(p)));
    }
    const Index k_el = mesh.triangles[t].parent;
    const double h = mesh.triangle_diameter(t);
    // d = 2: the diffusion weight carries h^0 and the reaction weight h^2.
    const double value = weights.alpha[k_el] * (weights.D_omega[k_el] + mu * h * h);
    for (int l = 0; l < m; ++l) {
      s[spaces.dofmap.node(t, l)] += value;
    }
  }
  return s;
}

SparseOperator assemble_mass_fine(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                                  int quad_degree) {
  const auto rule = triangle_quadrature(quad_degree);
  const int m = spaces.lagrange.m;
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_triangles()) * m * m);
  double phi[kMaxM];
  Eigen::MatrixXd local(m, m);
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto map = triangle_map(mesh, t);
    local.setZero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * std::abs(map.det);
      spaces.lagrange.eval(rule.points[q], phi);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          local(i, j) += w * phi[i] * phi[j];
        }
      }
    }
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        triplets.push_back({t * m + i, t * m + j, local(i, j)});
      }
    }
  }
  return SparseOperator::from_triplets(spaces.N_T(), spaces.N_T(), std::move(triplets));
}

AssembledSystem assemble_system(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                                const ProblemData& problem, const AssemblyConfig& config) {
  check_config(config);
  if (spaces.lagrange.k != config.k) {
    throw ConfigError("spaces built for k = " + std::to_string(spaces.lagrange.k) +
                      " but assembly requested k = " + std::to_string(config.k));
  }
  std::vector<Point2> samples;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto s = element_samples(mesh, e);
    samples.insert(samples.end(), s.begin(), s.end());
  }
  problem.validate_at(samples);

  AssembledSystem sys;
  sys.config = config;
  sys.kappa = problem.kappa;
  sys.lower = problem.lower;
  sys.C_star = mesh.C_star;
  sys.O = spaces.O;
  sys.Q = spaces.Q;
  sys.penalty = compute_penalty(mesh, problem, config.k, config.delta_rule);
  sys.stab = compute_stab_weights(mesh, problem, config.gamma);

  auto fine = assemble_dg_fine(mesh, spaces, problem, sys.penalty, config);
  sys.A_DG = std::move(fine.A);
  sys.b = std::move(fine.b);
  sys.A_sharp = galerkin_transform(sys.A_DG, sys.O);
  sys.b_sharp = sys.O.apply(sys.b);
  sys.A_P = galerkin_transform(sys.A_sharp, sys.Q);
  sys.F_P = sys.Q.apply(sys.b_sharp);
  sys.s_diag = assemble_stab_fine(mesh, spaces, problem, sys.stab, config.quad_degree());
  sys.S_sharp = SparseOperator::diagonal(sys.s_diag);
  sys.M_sharp =
      galerkin_transform(assemble_mass_fine(mesh, spaces, config.quad_degree()), sys.O);
  return sys;
}

}  // namespace polydg

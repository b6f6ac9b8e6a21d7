#pragma once

// Independent reference assemblies shared by the unit and acceptance tests.
// They integrate straight onto W_T nodes or V_P modes, touch only the
// interface faces and never use O or Q.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "polydg/assembly.hpp"
#include "polydg/quadrature.hpp"

namespace polydg::oracle {

// Values, gradients and the element of one side of a facet or a volume point.
using BasisEval = std::function<void(Index tri, const Point2& x, std::vector<double>& v,
                                     std::vector<Point2>& g)>;
using DofIndex = std::function<Index(Index tri, int local)>;

inline Eigen::MatrixXd assemble_direct(const PolytopicMesh& mesh, const ProblemData& problem,
                                       const std::vector<double>& sigma, double theta, int qdeg,
                                       Index n, int m, const BasisEval& basis,
                                       const DofIndex& dof) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  const auto tri_rule = triangle_quadrature(qdeg);
  const auto edge_rule = edge_quadrature(qdeg);
  std::vector<double> v(m), va(m), vb(m);
  std::vector<Point2> g(m), ga(m), gb(m);
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const Point2 p0 = mesh.vertex(t, 0), p1 = mesh.vertex(t, 1), p2 = mesh.vertex(t, 2);
    const double area = 0.5 * std::abs((p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x());
    for (std::size_t q = 0; q < tri_rule.size(); ++q) {
      const Point2 r = tri_rule.points[q];
      const Point2 x = p0 + r.x() * (p1 - p0) + r.y() * (p2 - p0);
      const double w = tri_rule.weights[q] * 2.0 * area;
      basis(t, x, v, g);
      const Matrix2 d = problem.diffusion(x);
      const double mu = problem.reaction(x);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          a(dof(t, i), dof(t, j)) += w * ((d * g[j]).dot(g[i]) + mu * v[i] * v[j]);
        }
      }
    }
  }
  for (const auto& e : mesh.skeleton) {
    if (e.face < 0) {
      continue;
    }
    const Point2 pa = mesh.points[e.v[0]];
    const Point2 tan = mesh.points[e.v[1]] - pa;
    const double len = tan.norm();
    const Point2 nrm(tan.y() / len, -tan.x() / len);
    const double s = sigma[e.face];
    for (std::size_t q = 0; q < edge_rule.size(); ++q) {
      const Point2 x = pa + edge_rule.points[q].x() * tan;
      const double w = edge_rule.weights[q] * len;
      const Matrix2 d = problem.diffusion(x);
      basis(e.tri_plus, x, va, ga);
      const bool interior = !e.is_boundary();
      if (interior) {
        basis(e.tri_minus, x, vb, gb);
      }
      // Side 0 is K+, side 1 is K-; jump = v+ - v-, mean = (g+ + g-)/2 (g+ on the boundary).
      struct Side {
        Index tri;
        const std::vector<double>* v;
        const std::vector<Point2>* g;
        double sign;
      };
      std::vector<Side> sides = {{e.tri_plus, &va, &ga, 1.0}};
      if (interior) {
        sides.push_back({e.tri_minus, &vb, &gb, -1.0});
      }
      const double avg = interior ? 0.5 : 1.0;
      for (const auto& sa : sides) {
        for (const auto& sb : sides) {
          for (int i = 0; i < m; ++i) {
            const double jv = sa.sign * (*sa.v)[i];
            const double fv = avg * (d * (*sa.g)[i]).dot(nrm);
            for (int j = 0; j < m; ++j) {
              const double ju = sb.sign * (*sb.v)[j];
              const double fu = avg * (d * (*sb.g)[j]).dot(nrm);
              a(dof(sa.tri, i), dof(sb.tri, j)) += w * (s * ju * jv - fu * jv - theta * fv * ju);
            }
          }
        }
      }
    }
  }
  return a;
}

/// a_# on W_T from the per-triangle nodal basis and the interface faces.
inline Eigen::MatrixXd direct_sharp(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                                    const ProblemData& problem, const std::vector<double>& sigma,
                                    double theta, int qdeg) {
  const int m = spaces.lagrange.m;
  BasisEval basis = [&](Index tri, const Point2& x, std::vector<double>& v,
                        std::vector<Point2>& g) {
    const auto map = triangle_map(mesh, tri);
    std::vector<Point2> rg(m);
    spaces.lagrange.eval_grad(map.to_reference(x), v.data(), rg.data());
    for (int l = 0; l < m; ++l) {
      g[l] = map.physical_gradient(rg[l]);
    }
  };
  DofIndex dof = [&](Index tri, int l) { return spaces.dofmap.node(tri, l); };
  return assemble_direct(mesh, problem, sigma, theta, qdeg, spaces.N_sharp(), m, basis, dof);
}

/// a_DG on V_P from the modal basis of each element.
inline Eigen::MatrixXd direct_modal(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                                    const ProblemData& problem, const std::vector<double>& sigma,
                                    double theta, int qdeg) {
  const int m = spaces.modal.m;
  BasisEval basis = [&](Index tri, const Point2& x, std::vector<double>& v,
                        std::vector<Point2>& g) {
    spaces.modal.eval_grad(mesh.triangles[tri].parent, x, v.data(), g.data());
  };
  DofIndex dof = [&](Index tri, int l) { return mesh.triangles[tri].parent * m + l; };
  return assemble_direct(mesh, problem, sigma, theta, qdeg, spaces.N_P(), m, basis, dof);
}

/// Load vector against the modal basis.
inline std::vector<double> direct_modal_load(const PolytopicMesh& mesh,
                                             const CompositeSpaces& spaces,
                                             const ProblemData& problem, int qdeg) {
  const int m = spaces.modal.m;
  std::vector<double> b(spaces.N_P(), 0.0), psi(m);
  const auto rule = triangle_quadrature(qdeg);
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto map = triangle_map(mesh, t);
    const Index el = mesh.triangles[t].parent;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point2 x = map.to_physical(rule.points[q]);
      spaces.modal.eval(el, x, psi.data());
      const double w = rule.weights[q] * std::abs(map.det) * problem.source(x);
      for (int j = 0; j < m; ++j) {
        b[el * m + j] += w * psi[j];
      }
    }
  }
  return b;
}

inline double max_abs(const Eigen::MatrixXd& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace polydg::oracle

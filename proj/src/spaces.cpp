#include "polydg/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "polydg/quadrature.hpp"

namespace polydg {
namespace {

// l(a, t) = prod_{s<a} (k t - s) / (s + 1) and its derivative.
void lattice_factor(int k, int a, double t, double& value, double& deriv) {
  value = 1.0;
  deriv = 0.0;
  for (int s = 0; s < a; ++s) {
    const double f = (k * t - s) / (s + 1.0);
    deriv = deriv * f + value * k / (s + 1.0);
    value *= f;
  }
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) {
    r *= x;
  }
  return r;
}

}  // namespace

LagrangeLayout lagrange_layout(int k) {
  if (k < kMinDegree || k > kMaxDegree) {
    throw SpaceError("polynomial degree " + std::to_string(k) + " outside supported range [" +
                     std::to_string(kMinDegree) + ", " + std::to_string(kMaxDegree) + "]");
  }
  LagrangeLayout layout;
  layout.k = k;
  layout.m = simplex_dimension(k);
  for (int j = 0; j <= k; ++j) {
    for (int i = 0; i + j <= k; ++i) {
      layout.multi.push_back({k - i - j, i, j});
      layout.nodes.emplace_back(static_cast<double>(i) / k, static_cast<double>(j) / k);
    }
  }
  return layout;
}

void LagrangeLayout::eval(const Point2& ref, double* values) const {
  const double lam[3] = {1.0 - ref.x() - ref.y(), ref.x(), ref.y()};
  for (int l = 0; l < m; ++l) {
    double v = 1.0;
    for (int c = 0; c < 3; ++c) {
      double f, d;
      lattice_factor(k, multi[l][c], lam[c], f, d);
      v *= f;
    }
    values[l] = v;
  }
}

void LagrangeLayout::eval_grad(const Point2& ref, double* values, Point2* grads) const {
  const double lam[3] = {1.0 - ref.x() - ref.y(), ref.x(), ref.y()};
  for (int l = 0; l < m; ++l) {
    double f[3], d[3];
    for (int c = 0; c < 3; ++c) {
      lattice_factor(k, multi[l][c], lam[c], f[c], d[c]);
    }
    values[l] = f[0] * f[1] * f[2];
    const double d0 = d[0] * f[1] * f[2];
    grads[l] = Point2(-d0 + f[0] * d[1] * f[2], -d0 + f[0] * f[1] * d[2]);
  }
}

TriangleMap triangle_map(const PolytopicMesh& mesh, Index tri) {
  TriangleMap map;
  const Point2 p0 = mesh.vertex(tri, 0);
  map.origin = p0;
  map.jacobian.col(0) = mesh.vertex(tri, 1) - p0;
  map.jacobian.col(1) = mesh.vertex(tri, 2) - p0;
  map.det = map.jacobian.determinant();
  map.inverse_transpose = map.jacobian.inverse().transpose();
  return map;
}

Point2 lagrange_node(const PolytopicMesh& mesh, const LagrangeLayout& layout, Index tri,
                     int local) {
  const auto& a = layout.multi[local];
  const auto& v = mesh.triangles[tri].v;
  const int k = layout.k;
  int zeros = 0;
  for (int c = 0; c < 3; ++c) {
    if (a[c] == k) {
      return mesh.points[v[c]];
    }
    zeros += a[c] == 0 ? 1 : 0;
  }
  if (zeros == 1) {
    int i = -1, j = -1;
    for (int c = 0; c < 3; ++c) {
      if (a[c] != 0) {
        (i < 0 ? i : j) = c;
      }
    }
    if (v[j] < v[i]) {
      std::swap(i, j);
    }
    const Point2& lo = mesh.points[v[i]];
    const Point2& hi = mesh.points[v[j]];
    return lo + (static_cast<double>(a[j]) / k) * (hi - lo);
  }
  return (a[0] * mesh.points[v[0]] + a[1] * mesh.points[v[1]] + a[2] * mesh.points[v[2]]) /
         static_cast<double>(k);
}

CompositeDofMap build_composite_dofmap(const PolytopicMesh& mesh, const LagrangeLayout& layout) {
  CompositeDofMap map;
  map.k = layout.k;
  map.m = layout.m;
  map.num_dofs = mesh.num_triangles() * layout.m;
  map.dof_to_node.assign(map.num_dofs, -1);
  map.element_offset.assign(mesh.num_elements() + 1, 0);

  struct Entry {
    Point2 x;
    Index dof;
  };
  for (const auto& el : mesh.elements) {
    std::vector<Entry> entries;
    entries.reserve(el.tris.size() * layout.m);
    for (Index t : el.tris) {
      for (int l = 0; l < layout.m; ++l) {
        entries.push_back({lagrange_node(mesh, layout, t, l), t * layout.m + l});
      }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.x.x() != b.x.x()) return a.x.x() < b.x.x();
      if (a.x.y() != b.x.y()) return a.x.y() < b.x.y();
      return a.dof < b.dof;
    });
    const auto first_node = static_cast<Index>(map.node_coords.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (i == 0 || entries[i].x != entries[i - 1].x) {
        map.node_coords.push_back(entries[i].x);
        map.node_element.push_back(el.id);
        map.multiplicity.push_back(0);
      }
      const auto node = static_cast<Index>(map.node_coords.size()) - 1;
      map.dof_to_node[entries[i].dof] = node;
      ++map.multiplicity[node];
    }
    // Distinct nodes closer than the merge tolerance signal a degenerate submesh.
    const double tol = 1e-12 * el.H;
    const auto last_node = static_cast<Index>(map.node_coords.size());
    for (Index i = first_node; i < last_node; ++i) {
      for (Index j = i + 1; j < last_node; ++j) {
        if (map.node_coords[j].x() - map.node_coords[i].x() > tol) {
          break;
        }
        if ((map.node_coords[j] - map.node_coords[i]).cwiseAbs().maxCoeff() <= tol) {
          throw MeshError("element " + std::to_string(el.id) +
                          ": distinct Lagrange nodes closer than 1e-12 H_K");
        }
      }
    }
    map.element_offset[el.id + 1] = last_node;
  }
  map.num_nodes = static_cast<Index>(map.node_coords.size());
  return map;
}

ModalLayout build_modal_layout(const PolytopicMesh& mesh, int k) {
  if (k < kMinDegree || k > kMaxDegree) {
    throw SpaceError("polynomial degree " + std::to_string(k) + " outside supported range");
  }
  ModalLayout modal;
  modal.k = k;
  modal.m = simplex_dimension(k);
  for (int d = 0; d <= k; ++d) {
    for (int b = 0; b <= d; ++b) {
      modal.exponents.push_back({d - b, b});
    }
  }
  for (const auto& el : mesh.elements) {
    Point2 lo = mesh.points[el.loop.front()];
    Point2 hi = lo;
    for (Index v : el.loop) {
      lo = lo.cwiseMin(mesh.points[v]);
      hi = hi.cwiseMax(mesh.points[v]);
    }
    modal.center.push_back(0.5 * (lo + hi));
    modal.half_width.push_back(0.5 * (hi - lo));
  }
  return modal;
}

void ModalLayout::eval(Index element, const Point2& x, double* values) const {
  const Point2& c = center[element];
  const Point2& h = half_width[element];
  const double sx = (x.x() - c.x()) / h.x();
  const double sy = (x.y() - c.y()) / h.y();
  for (int j = 0; j < m; ++j) {
    values[j] = ipow(sx, exponents[j][0]) * ipow(sy, exponents[j][1]);
  }
}

void ModalLayout::eval_grad(Index element, const Point2& x, double* values,
                            Point2* grads) const {
  const Point2& c = center[element];
  const Point2& h = half_width[element];
  const double sx = (x.x() - c.x()) / h.x();
  const double sy = (x.y() - c.y()) / h.y();
  for (int j = 0; j < m; ++j) {
    const int a = exponents[j][0];
    const int b = exponents[j][1];
    const double px = ipow(sx, a);
    const double py = ipow(sy, b);
    values[j] = px * py;
    const double dx = a > 0 ? a * ipow(sx, a - 1) * py / h.x() : 0.0;
    const double dy = b > 0 ? b * px * ipow(sy, b - 1) / h.y() : 0.0;
    grads[j] = Point2(dx, dy);
  }
}

SparseOperator build_O(const CompositeDofMap& dofmap) {
  std::vector<Triplet> t;
  t.reserve(dofmap.num_dofs);
  for (Index dof = 0; dof < dofmap.num_dofs; ++dof) {
    t.push_back({dofmap.dof_to_node[dof], dof, 1.0});
  }
  return SparseOperator::from_triplets(dofmap.num_nodes, dofmap.num_dofs, std::move(t));
}

SparseOperator build_Q(const PolytopicMesh& mesh, const CompositeDofMap& dofmap,
                       const ModalLayout& modal) {
  const int m = modal.m;
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(dofmap.num_nodes) * m);
  std::vector<double> psi(m);
  for (const auto& el : mesh.elements) {
    const Index begin = dofmap.element_offset[el.id];
    const Index end = dofmap.element_offset[el.id + 1];
    if (end - begin < m) {
      throw SpaceError("element " + std::to_string(el.id) + " has " +
                       std::to_string(end - begin) + " nodes, fewer than dim P_k = " +
                       std::to_string(m) + "; submesh too coarse");
    }
    Eigen::MatrixXd block(m, end - begin);
    for (Index i = begin; i < end; ++i) {
      modal.eval(el.id, dofmap.node_coords[i], psi.data());
      for (int j = 0; j < m; ++j) {
        block(j, i - begin) = psi[j];
        t.push_back({el.id * m + j, i, psi[j]});
      }
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(block);
    const auto& s = svd.singularValues();
    if (!(s(m - 1) > 1e-12 * s(0))) {
      throw SpaceError("element " + std::to_string(el.id) +
                       ": nodal block of Q is rank deficient; submesh too coarse");
    }
  }
  return SparseOperator::from_triplets(mesh.num_elements() * m, dofmap.num_nodes, std::move(t));
}

CompositeSpaces build_spaces(const PolytopicMesh& mesh, int k) {
  CompositeSpaces spaces;
  spaces.lagrange = lagrange_layout(k);
  spaces.dofmap = build_composite_dofmap(mesh, spaces.lagrange);
  spaces.modal = build_modal_layout(mesh, k);
  spaces.O = build_O(spaces.dofmap);
  spaces.Q = build_Q(mesh, spaces.dofmap, spaces.modal);
  return spaces;
}

double eval_composite(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                      std::span<const double> w, Index tri, const Point2& x) {
  const int m = spaces.lagrange.m;
  for (int l = 0; l < m; ++l) {
    const Index node = spaces.dofmap.node(tri, l);
    if (spaces.dofmap.node_coords[node] == x) {
      return w[node];
    }
  }
  const auto map = triangle_map(mesh, tri);
  double phi[simplex_dimension(kMaxDegree)];
  spaces.lagrange.eval(map.to_reference(x), phi);
  double s = 0.0;
  for (int l = 0; l < m; ++l) {
    s += w[spaces.dofmap.node(tri, l)] * phi[l];
  }
  return s;
}

double eval_modal(const CompositeSpaces& spaces, std::span<const double> u, Index element,
                  const Point2& x) {
  const int m = spaces.modal.m;
  double psi[simplex_dimension(kMaxDegree)];
  spaces.modal.eval(element, x, psi);
  double s = 0.0;
  for (int j = 0; j < m; ++j) {
    s += u[element * m + j] * psi[j];
  }
  return s;
}

double modal_gram_condition(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                            Index element) {
  const int m = spaces.modal.m;
  const auto rule = triangle_quadrature(2 * spaces.modal.k);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  std::vector<double> psi(m);
  for (Index t : mesh.elements[element].tris) {
    const auto map = triangle_map(mesh, t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      spaces.modal.eval(element, map.to_physical(rule.points[q]), psi.data());
      const double w = rule.weights[q] * std::abs(map.det);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          gram(i, j) += w * psi[i] * psi[j];
        }
      }
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  return eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
}

}  // namespace polydg

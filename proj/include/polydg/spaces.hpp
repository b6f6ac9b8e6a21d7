#pragma once

#include <array>
#include <vector>

#include "polydg/common.hpp"
#include "polydg/mesh.hpp"
#include "polydg/sparse.hpp"

namespace polydg {

inline constexpr int kMinDegree = 1;
inline constexpr int kMaxDegree = 4;

constexpr int simplex_dimension(int k) { return (k + 1) * (k + 2) / 2; }

/// Degree-k nodal basis on the reference triangle (0,0), (1,0), (0,1) with
/// equispaced principal-lattice nodes. Node l has barycentric multi-index
/// multi[l] = (a0, a1, a2), a0 + a1 + a2 = k, attached to the vertices in
/// triangle order.
struct LagrangeLayout {
  int k = 0;
  int m = 0;
  std::vector<std::array<int, 3>> multi;
  std::vector<Point2> nodes;

  void eval(const Point2& ref, double* values) const;
  /// Values and reference gradients.
  void eval_grad(const Point2& ref, double* values, Point2* grads) const;
};

LagrangeLayout lagrange_layout(int k);

/// Affine map of a submesh triangle onto the reference triangle.
struct TriangleMap {
  Point2 origin;
  Matrix2 jacobian;  // columns p1 - p0, p2 - p0
  Matrix2 inverse_transpose;
  double det = 0.0;

  [[nodiscard]] Point2 to_physical(const Point2& ref) const { return origin + jacobian * ref; }
  [[nodiscard]] Point2 to_reference(const Point2& x) const {
    return inverse_transpose.transpose() * (x - origin);
  }
  [[nodiscard]] Point2 physical_gradient(const Point2& ref_grad) const {
    return inverse_transpose * ref_grad;
  }
};

TriangleMap triangle_map(const PolytopicMesh& mesh, Index tri);

/// Nodes of W_T: submesh Lagrange nodes merged within each element, never
/// across elements. Nodes of one element are contiguous and sorted by
/// coordinates.
struct CompositeDofMap {
  int k = 0;
  int m = 0;
  Index num_dofs = 0;   // N_T
  Index num_nodes = 0;  // N_#
  std::vector<Point2> node_coords;
  std::vector<Index> node_element;
  std::vector<Index> element_offset;  // size #elements + 1
  std::vector<Index> dof_to_node;     // dof t*m + l -> node
  std::vector<int> multiplicity;

  [[nodiscard]] Index node(Index tri, int local) const { return dof_to_node[tri * m + local]; }
  [[nodiscard]] Index element_size(Index k_el) const {
    return element_offset[k_el + 1] - element_offset[k_el];
  }
};

/// Coordinates of local node `local` of `tri`, computed so that coincident
/// nodes of neighbouring triangles are bitwise equal.
Point2 lagrange_node(const PolytopicMesh& mesh, const LagrangeLayout& layout, Index tri,
                     int local);

CompositeDofMap build_composite_dofmap(const PolytopicMesh& mesh, const LagrangeLayout& layout);

/// Monomials of total degree <= k in bounding-box centred and scaled
/// coordinates, one set per element.
struct ModalLayout {
  int k = 0;
  int m = 0;
  std::vector<std::array<int, 2>> exponents;
  std::vector<Point2> center;
  std::vector<Point2> half_width;

  void eval(Index element, const Point2& x, double* values) const;
  void eval_grad(Index element, const Point2& x, double* values, Point2* grads) const;
};

ModalLayout build_modal_layout(const PolytopicMesh& mesh, int k);

/// O: N_# x N_T merge matrix.
SparseOperator build_O(const CompositeDofMap& dofmap);
/// Q: N_P x N_# block-diagonal matrix, Q(jK, i) = psi_j^K(x_i).
SparseOperator build_Q(const PolytopicMesh& mesh, const CompositeDofMap& dofmap,
                       const ModalLayout& modal);

struct CompositeSpaces {
  LagrangeLayout lagrange;
  CompositeDofMap dofmap;
  ModalLayout modal;
  SparseOperator O;
  SparseOperator Q;

  [[nodiscard]] Index N_T() const { return dofmap.num_dofs; }
  [[nodiscard]] Index N_sharp() const { return dofmap.num_nodes; }
  [[nodiscard]] Index N_P() const { return Q.rows(); }
};

CompositeSpaces build_spaces(const PolytopicMesh& mesh, int k);

/// Value at x (inside triangle tri) of the W_T function with nodal values w.
/// At a Lagrange node of tri the nodal value is returned unchanged.
double eval_composite(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                      std::span<const double> w, Index tri, const Point2& x);
/// Value at x (inside element el) of the V_P function with coefficients u.
double eval_modal(const CompositeSpaces& spaces, std::span<const double> u, Index element,
                  const Point2& x);

/// 2-norm condition number of the modal mass matrix of one element.
double modal_gram_condition(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                            Index element);

}  // namespace polydg

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polydg/assembly.hpp"
#include "polydg/mesh.hpp"
#include "polydg/problems.hpp"
#include "polydg/solver.hpp"
#include "polydg/spaces.hpp"

namespace polydg {

struct ErrorReport {
  bool has_exact = false;
  double L2 = 0.0;
  double H1_broken = 0.0;
  double DG = 0.0;
  double stab = 0.0;
  double nodal_min = 0.0;
  double nodal_max = 0.0;
};

/// max(2k + 6, problem floor).
int error_quadrature_degree(int k, const ProblemData& problem);

/// Errors u - w of a W_T field w. Jumps are taken over the interface faces
/// with the face penalties sigma; u = 0 outside the domain.
ErrorReport field_errors(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                         const ProblemData& problem, std::span<const double> sigma,
                         std::span<const double> w, int quad_degree);

/// Error columns for E+(u_H) plus |E-(u_H)|_s and the nodal range of E+.
ErrorReport compute_errors(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                           const ProblemData& problem, const AssembledSystem& sys,
                           const SolveReport& solution);

/// log(e1/e2) / log(sqrt(n2/n1)).
double eoc(double e1, double n1, double e2, double n2);

struct EOCRow {
  Index n_elements = 0;
  int iterations = 0;
  ErrorReport errors;
  std::optional<double> l2_eoc;
  std::optional<double> h1_eoc;
  std::optional<double> dg_eoc;
  std::optional<double> stab_eoc;
};

/// Fills the EOC columns from consecutive rows; a column stays empty when
/// either error is zero or the element counts coincide.
void fill_eoc(std::vector<EOCRow>& rows);

/// Degree-k interpolant on a right triangle covering each element, pulled
/// towards kappa/2 so that its range stays in [0, kappa].
struct InterpolantResult {
  std::vector<double> coefficients;  // V_P modal coefficients
  std::vector<double> beta;          // per element
  int samples_per_element = 0;
};

/// Vertices of the covering right triangle used for element `element`:
/// legs twice the bounding-box sides, oriented to stay in the unit square,
/// or the smallest fitting legs when that is impossible. Throws MeshError
/// when no axis-aligned right triangle inside the square covers K.
std::array<Point2, 3> covering_triangle(const PolytopicMesh& mesh, Index element);

InterpolantResult bp_interpolant(const ScalarField& u, const PolytopicMesh& mesh,
                                 const CompositeSpaces& spaces, double kappa);

/// L2 norm of u - v for a V_P function v.
double modal_l2_error(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                      std::span<const double> coefficients, const ScalarField& u,
                      int quad_degree);

/// Min and max of a V_P function over `per_element` pseudo-random points
/// of every element.
std::pair<double, double> modal_range(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                                      std::span<const double> coefficients, int per_element,
                                      unsigned long long seed);

/// Submesh triangle lookup through a uniform bucket grid.
class PointLocator {
 public:
  explicit PointLocator(const PolytopicMesh& mesh);
  /// Smallest triangle id containing x within tol (barycentric); throws
  /// MeshError when x lies in no triangle.
  [[nodiscard]] Index locate(const Point2& x, double tol = 1e-10) const;

 private:
  const PolytopicMesh* mesh_;
  int n_ = 1;
  Point2 lo_, hi_;
  std::vector<std::vector<Index>> buckets_;
};

struct SectionSample {
  double t = 0.0;
  Point2 x;
  double value_bp = 0.0;
  double value_dg = 0.0;
};

/// n evenly spaced samples of p0 + t (p1 - p0), t in [0, 1]. value_bp is
/// the composite field w_plus, value_dg the V_P field u_dg (skipped when
/// empty).
std::vector<SectionSample> cross_section(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                                         std::span<const double> w_plus,
                                         std::span<const double> u_dg, const Point2& p0,
                                         const Point2& p1, int n);

/// N with w^T N w = |w|_DG^2 on W_T (jumps over interface faces only).
SparseOperator dg_norm_gram(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                            const ProblemData& problem, std::span<const double> sigma,
                            int quad_degree);

/// Gram operator of the DG norm on V_P: Q N Q^T.
SparseOperator dg_norm_gram_modal(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                                  const ProblemData& problem, std::span<const double> sigma,
                                  int quad_degree);

/// Largest w^T N w / sum_i (s_i / alpha_i) w_i^2 over W_T by power
/// iteration: the constant bounding the DG norm by the unweighted
/// stabilization.
double equivalence_constant(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                            const ProblemData& problem, const AssembledSystem& sys,
                            int iterations = 2000);

/// Heat map of a W_T field over the submesh, one flat-shaded polygon per
/// triangle coloured by its mean nodal value.
std::string field_svg(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                      std::span<const double> w, double vmin, double vmax);

}  // namespace polydg

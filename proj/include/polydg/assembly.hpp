#pragma once

#include <vector>

#include "polydg/mesh.hpp"
#include "polydg/problems.hpp"
#include "polydg/sparse.hpp"
#include "polydg/spaces.hpp"

namespace polydg {

/// Coefficient scale delta_K entering the penalty. Contrast is
/// |D|^2 |D^-1| (contrast-robust); Norm is |D| alone.
enum class DeltaRule { Contrast, Norm };

struct AssemblyConfig {
  int k = 1;
  double gamma = 1.0;
  double theta = 1.0;
  int quadrature_degree = 0;  // 0 selects 2k+2
  DeltaRule delta_rule = DeltaRule::Contrast;

  [[nodiscard]] int quad_degree() const {
    return quadrature_degree > 0 ? quadrature_degree : 2 * k + 2;
  }
};

struct PenaltyField {
  std::vector<double> sigma;           // per interface face
  std::vector<double> delta;           // per element
  std::vector<double> sigma_interior;  // per element, for facets inside it
};

struct StabWeights {
  double gamma = 1.0;
  std::vector<double> alpha;    // per element
  std::vector<double> D_omega;  // per element, max |D| over the patch
};

struct FineSystem {
  SparseOperator A;
  std::vector<double> b;
};

struct AssembledSystem {
  AssemblyConfig config;
  double kappa = 1.0;
  double lower = 0.0;
  double C_star = 0.0;

  SparseOperator O;
  SparseOperator Q;
  SparseOperator A_DG;
  std::vector<double> b;
  SparseOperator A_sharp;
  std::vector<double> b_sharp;
  SparseOperator A_P;
  std::vector<double> F_P;
  std::vector<double> s_diag;  // diagonal of S_#
  SparseOperator S_sharp;
  SparseOperator M_sharp;      // W_T mass matrix

  PenaltyField penalty;
  StabWeights stab;
};

/// Points at which coefficient sup-norms on an element are sampled: the
/// loop vertices and the points of an 8x8 bounding-box lattice inside the
/// polygon. They depend on the polygon only, never on its submesh.
std::vector<Point2> element_samples(const PolytopicMesh& mesh, Index element);

/// 8 C_star k(k+1)/2 * ratio, with ratio = max over the owners of delta_K / H_K.
double penalty_formula(double C_star, int k, double ratio);

/// gamma * max{1, H_K / (8 C_star) * max_ratio}, max_ratio = max |f|/|T|.
double alpha_formula(double gamma, double C_star, double H, double max_ratio);

double element_delta(const PolytopicMesh& mesh, const ProblemData& problem, Index element,
                     DeltaRule rule = DeltaRule::Contrast);

double compute_sigma(const InterfaceFace& face, const PolytopicMesh& mesh,
                     const ProblemData& problem, int k, DeltaRule rule = DeltaRule::Contrast);
PenaltyField compute_penalty(const PolytopicMesh& mesh, const ProblemData& problem, int k,
                             DeltaRule rule = DeltaRule::Contrast);

/// Largest |f|/|T| over submesh triangles of K with a facet f on the
/// element boundary.
double boundary_facet_ratio(const PolytopicMesh& mesh, Index element);
double compute_alpha(const PolytopicMesh& mesh, Index element, double gamma);
StabWeights compute_stab_weights(const PolytopicMesh& mesh, const ProblemData& problem,
                                 double gamma);

/// Volume part of the fine form, int D grad u . grad v + mu u v, and the load.
FineSystem assemble_volume_fine(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                                const ProblemData& problem, int quad_degree);

/// Interior penalty operator on V_T over the whole skeleton Gamma_T
/// (row = test function, column = trial function) and the load vector.
FineSystem assemble_dg_fine(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                            const ProblemData& problem, const PenaltyField& penalty,
                            const AssemblyConfig& config);

/// Diagonal of S_# on W_T.
std::vector<double> assemble_stab_fine(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                                       const ProblemData& problem, const StabWeights& weights,
                                       int quad_degree);

/// Block-diagonal L2 mass matrix on V_T.
SparseOperator assemble_mass_fine(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                                  int quad_degree);

AssembledSystem assemble_system(const PolytopicMesh& mesh, const CompositeSpaces& spaces,
                                const ProblemData& problem, const AssemblyConfig& config);

}  // namespace polydg

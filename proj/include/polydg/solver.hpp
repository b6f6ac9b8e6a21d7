#pragma once

#include <span>
#include <string>
#include <vector>

#include "polydg/assembly.hpp"
#include "polydg/sparse.hpp"

namespace polydg {

/// Componentwise clip into [lower, kappa].
std::vector<double> recover_plus(std::span<const double> w, double kappa, double lower = 0.0);
/// w - recover_plus(w).
std::vector<double> recover_minus(std::span<const double> w, double kappa, double lower = 0.0);

/// Generalized derivatives of the clip: D1 = 1 on [lower, kappa] (kinks
/// included), D2 = 1 - D1.
struct IndicatorDiag {
  std::vector<double> D1;
  std::vector<double> D2;
};
IndicatorDiag indicators(std::span<const double> w, double kappa, double lower = 0.0);

struct NewtonConfig {
  double tol = 1e-8;
  int max_iter = 100;
  double damping = 1.0;   // initial step length
  int max_backtracks = 0;  // step halvings allowed when |F| does not decrease; 0 = plain Newton
  // When the pass from the A_# start fails (no convergence within
  // restart_after steps, or |F| above divergence_factor times its first
  // value), Newton reruns with max_iter steps from the plain polytopic DG
  // solution.
  bool restart_from_dg = true;
  int restart_after = 30;
  double divergence_factor = 10.0;
};

struct SolveReport {
  std::vector<double> U;
  std::vector<double> W;
  std::vector<double> W_plus;
  std::vector<double> W_minus;
  int iterations = 0;
  std::vector<double> residual_history;  // |F(U^n)|_2 before each update
  std::vector<double> update_history;    // L2 norm of each nodal update
  double stab_norm = 0.0;
  bool converged = false;
  bool initial_solve_failed = false;
  bool restarted = false;
  std::string message;
};

/// Sparse LU with iterative refinement. Throws LinearSolveError when the
/// factorization breaks down.
std::vector<double> linear_solve(const SparseOperator& a, std::span<const double> rhs);

/// F(U) = F_P - Q A_# E+(W) - Q S_# E-(W), W = Q^T U.
std::vector<double> residual(std::span<const double> U, const AssembledSystem& sys);

/// sqrt(w^T S_# w) for a nodal vector.
double stab_norm(const AssembledSystem& sys, std::span<const double> w);

/// Per-element least-squares fit of modal coefficients to nodal values.
std::vector<double> nodal_to_modal(const AssembledSystem& sys, std::span<const double> w);

/// Plain polytopic interior penalty solution: A_P U = F_P.
std::vector<double> solve_polytopic_dg(const AssembledSystem& sys);

/// Starts from the nodal fit of the A_# solution. iterations counts both
/// passes when a restart happens.
SolveReport newton_solve(const AssembledSystem& sys, const NewtonConfig& config = {});

}  // namespace polydg

#include "polydg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SparseLU>

namespace polydg {
namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) {
    s += x * x;
  }
  return std::sqrt(s);
}

int modal_block_size(const AssembledSystem& sys) { return simplex_dimension(sys.config.k); }

}  // namespace

std::vector<double> recover_plus(std::span<const double> w, double kappa, double lower) {
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    out[i] = std::max(lower, std::min(w[i], kappa));
  }
  return out;
}

std::vector<double> recover_minus(std::span<const double> w, double kappa, double lower) {
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    out[i] = w[i] - std::max(lower, std::min(w[i], kappa));
  }
  return out;
}

IndicatorDiag indicators(std::span<const double> w, double kappa, double lower) {
  IndicatorDiag d;
  d.D1.resize(w.size());
  d.D2.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const bool inside = w[i] >= lower && w[i] <= kappa;
    d.D1[i] = inside ? 1.0 : 0.0;
    d.D2[i] = inside ? 0.0 : 1.0;
  }
  return d;
}

std::vector<double> linear_solve(const SparseOperator& a, std::span<const double> rhs) {
  if (a.rows() != a.cols()) {
    throw DimensionError("linear_solve: matrix is not square");
  }
  if (static_cast<Index>(rhs.size()) != a.rows()) {
    throw DimensionError("linear_solve: right-hand side length mismatch");
  }
  const double bnorm = norm2(rhs);
  if (bnorm == 0.0) {
    return std::vector<double>(rhs.size(), 0.0);
  }
  const Eigen::SparseMatrix<double> m = a.to_eigen();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(m);
  lu.factorize(m);
  if (lu.info() != Eigen::Success) {
    throw LinearSolveError("sparse LU failed: " + lu.lastErrorMessage());
  }
  const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  Eigen::VectorXd x = lu.solve(b);
  for (int it = 0; it < 3; ++it) {
    const Eigen::VectorXd r = b - m * x;
    if (r.norm() <= 1e-15 * bnorm) {
      break;
    }
    x += lu.solve(r);
  }
  if (!x.allFinite()) {
    throw LinearSolveError("sparse LU produced non-finite values (numerically singular matrix)");
  }
  return {x.data(), x.data() + x.size()};
}

std::vector<double> residual(std::span<const double> U, const AssembledSystem& sys) {
  if (static_cast<Index>(U.size()) != sys.Q.rows()) {
    throw DimensionError("residual: coefficient vector has length " + std::to_string(U.size()) +
                         ", expected " + std::to_string(sys.Q.rows()));
  }
  const auto w = sys.Q.apply_transpose(U);
  const auto wp = recover_plus(w, sys.kappa, sys.lower);
  auto wm = recover_minus(w, sys.kappa, sys.lower);
  auto aw = sys.A_sharp.apply(wp);
  for (std::size_t i = 0; i < aw.size(); ++i) {
    aw[i] += sys.s_diag[i] * wm[i];
  }
  const auto qaw = sys.Q.apply(aw);
  std::vector<double> f(sys.F_P.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = sys.F_P[i] - qaw[i];
  }
  return f;
}

double stab_norm(const AssembledSystem& sys, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    s += sys.s_diag[i] * w[i] * w[i];
  }
  return std::sqrt(s);
}

std::vector<double> nodal_to_modal(const AssembledSystem& sys, std::span<const double> w) {
  const int m = modal_block_size(sys);
  const Index ne = sys.Q.rows() / m;
  std::vector<double> u(sys.Q.rows(), 0.0);
  const auto rp = sys.Q.row_ptr();
  const auto ci = sys.Q.col_idx();
  const auto val = sys.Q.values();
  for (Index e = 0; e < ne; ++e) {
    // Rows of one element share the node range of that element.
    Index first = std::numeric_limits<Index>::max();
    Index last = -1;
    for (Index r = e * m; r < (e + 1) * m; ++r) {
      for (Index p = rp[r]; p < rp[r + 1]; ++p) {
        first = std::min(first, ci[p]);
        last = std::max(last, ci[p]);
      }
    }
    const Index n = last - first + 1;
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(m, n);
    for (Index r = e * m; r < (e + 1) * m; ++r) {
      for (Index p = rp[r]; p < rp[r + 1]; ++p) {
        block(r - e * m, ci[p] - first) = val[p];
      }
    }
    const Eigen::Map<const Eigen::VectorXd> we(w.data() + first, n);
    const Eigen::VectorXd ue = (block * block.transpose()).ldlt().solve(block * we);
    for (int j = 0; j < m; ++j) {
      u[e * m + j] = ue(j);
    }
  }
  return u;
}

std::vector<double> solve_polytopic_dg(const AssembledSystem& sys) {
  return linear_solve(sys.A_P, sys.F_P);
}

namespace {

// Semi-smooth Newton iterations from report.U; appends to the histories.
void newton_iterate(const AssembledSystem& sys, const NewtonConfig& config,
                    const SparseOperator& G, const SparseOperator& Qt, const SparseOperator& QS,
                    int max_iter, double divergence_factor, SolveReport& report) {
  const std::size_t start = report.residual_history.size();
  for (int it = 0; it < max_iter; ++it) {
    const auto w = sys.Q.apply_transpose(report.U);
    const auto f = residual(report.U, sys);
    report.residual_history.push_back(norm2(f));
    if (report.residual_history.back() > divergence_factor * report.residual_history[start]) {
      report.message = "residual grew by more than a factor " + std::to_string(divergence_factor);
      return;
    }
    const auto ind = indicators(w, sys.kappa, sys.lower);
    const SparseOperator J =
        add(multiply(G.scale_columns(ind.D1), Qt), multiply(QS.scale_columns(ind.D2), Qt));
    std::vector<double> delta;
    try {
      delta = linear_solve(J, f);
    } catch (const LinearSolveError& e) {
      std::size_t active = 0;
      for (double d : ind.D2) {
        active += d > 0.0 ? 1 : 0;
      }
      std::ostringstream msg;
      msg << "singular Jacobian at iteration " << it << " (" << active
          << " nodes outside the bounds, " << (w.size() - active) << " inside): " << e.what();
      report.message = msg.str();
      return;
    }
    double t = config.damping;
    std::vector<double> trial(report.U.size());
    const double fnorm = report.residual_history.back();
    for (int ls = 0;; ++ls) {
      for (std::size_t i = 0; i < trial.size(); ++i) {
        trial[i] = report.U[i] + t * delta[i];
      }
      if (ls >= config.max_backtracks || norm2(residual(trial, sys)) <= (1.0 - 1e-4 * t) * fnorm) {
        break;
      }
      t *= 0.5;
    }
    for (double& d : delta) {
      d *= t;
    }
    report.U = std::move(trial);
    ++report.iterations;
    const auto dw = sys.Q.apply_transpose(delta);
    const double change = std::sqrt(std::max(0.0, sys.M_sharp.quadratic_form(dw)));
    report.update_history.push_back(change);
    if (change <= config.tol) {
      report.converged = true;
      report.message.clear();
      return;
    }
  }
  report.message = "no convergence within " + std::to_string(max_iter) + " iterations";
}

}  // namespace

SolveReport newton_solve(const AssembledSystem& sys, const NewtonConfig& config) {
  if (!(config.tol > 0.0)) {
    throw ConfigError("Newton tolerance must be positive");
  }
  if (config.max_iter < 1) {
    throw ConfigError("max_iter must be at least 1");
  }
  if (!(config.damping > 0.0 && config.damping <= 1.0)) {
    throw ConfigError("damping must lie in (0, 1]");
  }
  SolveReport report;
  try {
    const auto w0 = linear_solve(sys.A_sharp, sys.b_sharp);
    report.U = nodal_to_modal(sys, w0);
  } catch (const LinearSolveError&) {
    report.initial_solve_failed = true;
    report.U.assign(sys.Q.rows(), 0.0);
  }

  const SparseOperator G = multiply(sys.Q, sys.A_sharp);
  const SparseOperator Qt = sys.Q.transpose();
  const SparseOperator QS = sys.Q.scale_columns(sys.s_diag);

  const bool restart = config.restart_from_dg && config.restart_after > 0;
  newton_iterate(sys, config, G, Qt, QS,
                 restart ? std::min(config.restart_after, config.max_iter) : config.max_iter,
                 restart ? config.divergence_factor : std::numeric_limits<double>::infinity(),
                 report);
  if (!report.converged && restart) {
    try {
      report.U = solve_polytopic_dg(sys);
      report.restarted = true;
      newton_iterate(sys, config, G, Qt, QS, config.max_iter,
                     std::numeric_limits<double>::infinity(), report);
    } catch (const LinearSolveError& e) {
      report.message += std::string("; restart failed: ") + e.what();
    }
  }
  report.W = sys.Q.apply_transpose(report.U);
  report.W_plus = recover_plus(report.W, sys.kappa, sys.lower);
  report.W_minus = recover_minus(report.W, sys.kappa, sys.lower);
  report.stab_norm = stab_norm(sys, report.W_minus);
  return report;
}

}  // namespace polydg

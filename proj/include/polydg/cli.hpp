#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "polydg/analysis.hpp"
#include "polydg/assembly.hpp"
#include "polydg/problems.hpp"
#include "polydg/solver.hpp"

namespace polydg {

/// Settings of one experiment. Parsed from a JSON document with
/// "schema": 1; command-line flags override individual fields.
struct RunConfig {
  std::string problem = "example1";
  int c = 8;
  double epsilon = 1e-6;
  std::vector<double> epsilons = {1e-2, 1e-4, 1e-6};

  int k = 1;
  int n_base = 0;
  int n_poly = 64;
  std::uint64_t seed = 1;
  int refine = 0;
  std::vector<int> n_poly_list = {8, 16, 32, 64, 128, 256, 512, 1024};

  std::optional<double> kappa;
  double gamma = 1.0;
  double theta = 1.0;
  DeltaRule delta_rule = DeltaRule::Contrast;
  int quadrature_degree = 0;

  double newton_tol = 1e-8;
  int newton_max_iter = 100;

  std::filesystem::path out = ".";
  std::optional<std::filesystem::path> dump_matrices;
  bool svg = false;
  int cross_section_samples = 201;
};

/// Throws ConfigError naming the offending key for unknown keys, wrong
/// types or an unsupported schema version.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& file);

/// Problem data of the configuration with the kappa override applied.
ProblemData make_problem(const RunConfig& config, double epsilon);
AssemblyConfig assembly_config(const RunConfig& config);
NewtonConfig newton_config(const RunConfig& config);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Sparse matrix in MatrixMarket coordinate format (1-based indices).
std::string matrix_market(const SparseOperator& a);

/// Convergence table, header
/// n_elements,iterations,l2,l2_eoc,h1,h1_eoc,dg,dg_eoc,stab,stab_eoc,nodal_min,nodal_max.
std::string convergence_csv(const std::vector<EOCRow>& rows);

/// One row per mesh of `n_poly_list`, solved with the BP method. A mesh
/// whose solve throws or does not converge gets iterations = -1.
std::vector<EOCRow> run_convergence(const RunConfig& config);

struct CompareResult {
  double epsilon = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<SectionSample> samples;
  double bp_nodal_min = 0.0;
  double bp_nodal_max = 0.0;
  double dg_nodal_min = 0.0;
};

/// BP and plain DG solves for every epsilon of the config on one mesh,
/// sampled along the anti-diagonal (0,1)-(1,0).
std::vector<CompareResult> run_compare_dg(const RunConfig& config);

struct InterpRow {
  Index n_elements = 0;
  int samples_per_element = 0;
  double l2 = 0.0;
  std::optional<double> l2_eoc;
  double range_min = 0.0;
  double range_max = 0.0;
  double beta_min = 1.0;
};

/// bp_interpolant of the exact solution on every mesh of n_poly_list.
std::vector<InterpRow> run_interp_study(const RunConfig& config);

int cmd_mesh_gen(const RunConfig& config);
int cmd_solve(const RunConfig& config);
int cmd_convergence(const RunConfig& config);
int cmd_compare_dg(const RunConfig& config);
int cmd_interp_study(const RunConfig& config);

/// Entry point of polydg-bp. 0 on success, 2 when a Newton solve did not
/// converge, 1 on errors.
int run_cli(int argc, char** argv);

}  // namespace polydg

#include "polydg/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

namespace polydg {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) {
    throw ConfigError(where + " must be a JSON object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const std::string& where, const char* key, T& out) {
  if (!obj.contains(key)) {
    return;
  }
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + (where.empty() ? std::string(key) : where + "." + key) +
                      "' has the wrong type");
  }
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string eps_tag(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", eps);
  return buf;
}

const char* rule_name(DeltaRule r) { return r == DeltaRule::Norm ? "norm" : "contrast"; }

DeltaRule parse_rule(const std::string& s) {
  if (s == "contrast") {
    return DeltaRule::Contrast;
  }
  if (s == "norm") {
    return DeltaRule::Norm;
  }
  throw ConfigError("penalty_delta must be 'contrast' or 'norm', got '" + s + "'");
}

PolytopicMesh make_mesh(const RunConfig& config, int n_poly) {
  MeshGenOptions opts;
  opts.n_base = config.n_base;
  opts.n_poly = n_poly;
  opts.seed = config.seed;
  auto mesh = generate_agglomerated_mesh(opts);
  if (config.refine > 0) {
    mesh = refine_submesh(mesh, config.refine);
  }
  return mesh;
}

std::vector<double> nodal_coords_flat(const std::vector<Point2>& pts) {
  std::vector<double> out;
  out.reserve(2 * pts.size());
  for (const auto& p : pts) {
    out.push_back(p.x());
    out.push_back(p.y());
  }
  return out;
}

template <typename F>
void parallel_for(std::size_t n, F&& body) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

void dump_system(const std::filesystem::path& dir, const AssembledSystem& sys) {
  std::filesystem::create_directories(dir);
  const std::pair<const char*, const SparseOperator*> mats[] = {
      {"O", &sys.O},         {"Q", &sys.Q},         {"A_DG", &sys.A_DG},
      {"A_sharp", &sys.A_sharp}, {"A_P", &sys.A_P}, {"S_sharp", &sys.S_sharp},
      {"M_sharp", &sys.M_sharp}};
  for (const auto& [name, m] : mats) {
    write_file_atomic(dir / (std::string(name) + ".mtx"), matrix_market(*m));
  }
  auto vec = [](const std::vector<double>& v) {
    std::string s;
    for (double x : v) {
      s += num(x) + "\n";
    }
    return s;
  };
  write_file_atomic(dir / "F_P.txt", vec(sys.F_P));
  write_file_atomic(dir / "b_sharp.txt", vec(sys.b_sharp));
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "", {"schema", "problem", "k", "mesh", "n_poly_list", "epsilons", "kappa", "gamma",
                     "theta", "penalty_delta", "quadrature_degree", "newton", "output", "svg",
                     "dump_matrices", "cross_section_samples"});
  if (!j.contains("schema")) {
    throw ConfigError("config key 'schema' is required");
  }
  int schema = 0;
  read(j, "", "schema", schema);
  if (schema != 1) {
    throw ConfigError("unsupported config schema " + std::to_string(schema));
  }
  RunConfig c;
  if (j.contains("problem")) {
    const auto& p = j["problem"];
    check_keys(p, "problem", {"id", "c", "epsilon"});
    read(p, "problem", "id", c.problem);
    read(p, "problem", "c", c.c);
    read(p, "problem", "epsilon", c.epsilon);
  }
  read(j, "", "k", c.k);
  if (j.contains("mesh")) {
    const auto& m = j["mesh"];
    check_keys(m, "mesh", {"n_base", "n_poly", "seed", "refine"});
    read(m, "mesh", "n_base", c.n_base);
    read(m, "mesh", "n_poly", c.n_poly);
    read(m, "mesh", "seed", c.seed);
    read(m, "mesh", "refine", c.refine);
  }
  read(j, "", "n_poly_list", c.n_poly_list);
  read(j, "", "epsilons", c.epsilons);
  if (j.contains("kappa")) {
    double kappa = 0.0;
    read(j, "", "kappa", kappa);
    c.kappa = kappa;
  }
  read(j, "", "gamma", c.gamma);
  read(j, "", "theta", c.theta);
  if (j.contains("penalty_delta")) {
    std::string r;
    read(j, "", "penalty_delta", r);
    c.delta_rule = parse_rule(r);
  }
  read(j, "", "quadrature_degree", c.quadrature_degree);
  if (j.contains("newton")) {
    const auto& n = j["newton"];
    check_keys(n, "newton", {"tol", "max_iter"});
    read(n, "newton", "tol", c.newton_tol);
    read(n, "newton", "max_iter", c.newton_max_iter);
  }
  if (j.contains("output")) {
    std::string o;
    read(j, "", "output", o);
    c.out = o;
  }
  if (j.contains("dump_matrices")) {
    std::string d;
    read(j, "", "dump_matrices", d);
    c.dump_matrices = d;
  }
  read(j, "", "svg", c.svg);
  read(j, "", "cross_section_samples", c.cross_section_samples);
  return c;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw ConfigError("cannot read config file " + file.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ProblemData make_problem(const RunConfig& config, double epsilon) {
  ProblemData p;
  if (config.problem == "example1") {
    p = problem_example1(config.c, epsilon);
  } else if (config.problem == "example2") {
    p = problem_example2(epsilon);
  } else if (config.problem == "example3") {
    p = problem_example3(epsilon);
  } else {
    throw ConfigError("unknown problem id '" + config.problem + "'");
  }
  if (config.kappa) {
    p.kappa = *config.kappa;
  }
  return p;
}

AssemblyConfig assembly_config(const RunConfig& config) {
  AssemblyConfig a;
  a.k = config.k;
  a.gamma = config.gamma;
  a.theta = config.theta;
  a.quadrature_degree = config.quadrature_degree;
  a.delta_rule = config.delta_rule;
  return a;
}

NewtonConfig newton_config(const RunConfig& config) {
  NewtonConfig n;
  n.tol = config.newton_tol;
  n.max_iter = config.newton_max_iter;
  return n;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot open " + tmp.string() + " for writing");
    }
    out << content;
    out.flush();
    if (!out) {
      throw Error("write to " + tmp.string() + " failed");
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string matrix_market(const SparseOperator& a) {
  std::string s = "%%MatrixMarket matrix coordinate real general\n";
  s += std::to_string(a.rows()) + " " + std::to_string(a.cols()) + " " +
       std::to_string(a.nnz()) + "\n";
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  char buf[96];
  for (Index r = 0; r < a.rows(); ++r) {
    for (Index p = rp[r]; p < rp[r + 1]; ++p) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", r + 1, ci[p] + 1, v[p]);
      s += buf;
    }
  }
  return s;
}

std::string convergence_csv(const std::vector<EOCRow>& rows) {
  std::string s =
      "n_elements,iterations,l2,l2_eoc,h1,h1_eoc,dg,dg_eoc,stab,stab_eoc,nodal_min,nodal_max\n";
  for (const auto& r : rows) {
    const auto& e = r.errors;
    const bool ok = r.iterations >= 0;
    auto col = [&](double v) { return ok && e.has_exact ? num(v) : std::string(); };
    s += std::to_string(r.n_elements) + "," + std::to_string(r.iterations) + "," + col(e.L2) +
         "," + opt(r.l2_eoc) + "," + col(e.H1_broken) + "," + opt(r.h1_eoc) + "," + col(e.DG) +
         "," + opt(r.dg_eoc) + "," + (ok ? num(e.stab) : "") + "," + opt(r.stab_eoc) + "," +
         (ok ? num(e.nodal_min) : "") + "," + (ok ? num(e.nodal_max) : "") + "\n";
  }
  return s;
}

std::vector<EOCRow> run_convergence(const RunConfig& config) {
  const auto problem = make_problem(config, config.epsilon);
  std::vector<EOCRow> rows(config.n_poly_list.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    auto& row = rows[i];
    try {
      const auto mesh = make_mesh(config, config.n_poly_list[i]);
      row.n_elements = mesh.num_elements();
      const auto spaces = build_spaces(mesh, config.k);
      const auto sys = assemble_system(mesh, spaces, problem, assembly_config(config));
      const auto sol = newton_solve(sys, newton_config(config));
      if (!sol.converged) {
        row.iterations = -1;
        return;
      }
      row.iterations = sol.iterations;
      row.errors = compute_errors(mesh, spaces, problem, sys, sol);
    } catch (const Error&) {
      row.iterations = -1;
      if (row.n_elements == 0) {
        row.n_elements = config.n_poly_list[i];
      }
    }
  });
  fill_eoc(rows);
  return rows;
}

int cmd_mesh_gen(const RunConfig& config) {
  const auto mesh = make_mesh(config, config.n_poly);
  write_file_atomic(config.out / "mesh.json", mesh_to_json(mesh));
  std::cout << "mesh: " << mesh.num_elements() << " elements, " << mesh.num_triangles()
            << " triangles, " << mesh.faces.size() << " faces, C_star " << mesh.C_star << "\n";
  return 0;
}

int cmd_solve(const RunConfig& config) {
  const auto problem = make_problem(config, config.epsilon);
  const auto mesh = make_mesh(config, config.n_poly);
  const auto spaces = build_spaces(mesh, config.k);
  const auto acfg = assembly_config(config);
  const auto sys = assemble_system(mesh, spaces, problem, acfg);
  if (config.dump_matrices) {
    dump_system(*config.dump_matrices, sys);
  }
  const auto sol = newton_solve(sys, newton_config(config));

  write_file_atomic(config.out / "mesh.json", mesh_to_json(mesh));

  ordered_json j;
  j["schema"] = 1;
  j["problem"] = {{"id", config.problem}, {"c", config.c}, {"epsilon", config.epsilon}};
  j["k"] = config.k;
  j["n_elements"] = mesh.num_elements();
  j["converged"] = sol.converged;
  j["iterations"] = sol.iterations;
  j["restarted"] = sol.restarted;
  j["message"] = sol.message;
  j["residual_history"] = sol.residual_history;
  j["stab_norm"] = sol.stab_norm;
  j["U"] = sol.U;
  j["W_plus"] = sol.W_plus;
  j["node_coords"] = nodal_coords_flat(spaces.dofmap.node_coords);
  j["provenance"] = {{"C_star", sys.C_star},
                     {"gamma", acfg.gamma},
                     {"theta", acfg.theta},
                     {"penalty_delta", rule_name(acfg.delta_rule)},
                     {"quadrature_degree", acfg.quad_degree()},
                     {"kappa", sys.kappa},
                     {"lower", sys.lower},
                     {"sigma", sys.penalty.sigma},
                     {"alpha", sys.stab.alpha}};
  write_file_atomic(config.out / "solution.json", j.dump(1) + "\n");

  EOCRow row;
  row.n_elements = mesh.num_elements();
  row.iterations = sol.converged ? sol.iterations : -1;
  row.errors = compute_errors(mesh, spaces, problem, sys, sol);
  const std::vector<EOCRow> rows = {row};
  write_file_atomic(config.out / "errors.csv", convergence_csv(rows));
  if (config.svg) {
    write_file_atomic(config.out / "field.svg",
                      field_svg(mesh, spaces, sol.W_plus, sys.lower, sys.kappa));
  }
  std::cout << (sol.converged ? "converged" : "not converged") << " after " << sol.iterations
            << " iterations" << (sol.message.empty() ? "" : " (" + sol.message + ")") << "\n";
  return sol.converged ? 0 : 2;
}

int cmd_convergence(const RunConfig& config) {
  const auto rows = run_convergence(config);
  const auto csv = convergence_csv(rows);
  write_file_atomic(config.out / "convergence.csv", csv);
  std::cout << csv;
  const bool failed = std::any_of(rows.begin(), rows.end(), [](const EOCRow& r) {
    return r.iterations < 0;
  });
  return failed ? 2 : 0;
}

std::vector<CompareResult> run_compare_dg(const RunConfig& config) {
  const auto mesh = make_mesh(config, config.n_poly);
  const auto spaces = build_spaces(mesh, config.k);
  std::vector<CompareResult> out(config.epsilons.size());
  parallel_for(out.size(), [&](std::size_t i) {
    auto& r = out[i];
    r.epsilon = config.epsilons[i];
    const auto problem = make_problem(config, r.epsilon);
    const auto sys = assemble_system(mesh, spaces, problem, assembly_config(config));
    const auto sol = newton_solve(sys, newton_config(config));
    const auto dg = solve_polytopic_dg(sys);
    r.converged = sol.converged;
    r.iterations = sol.iterations;
    r.samples = cross_section(mesh, spaces, sol.W_plus, dg, Point2(0.0, 1.0), Point2(1.0, 0.0),
                              config.cross_section_samples);
    const auto [lo, hi] = std::minmax_element(sol.W_plus.begin(), sol.W_plus.end());
    r.bp_nodal_min = *lo;
    r.bp_nodal_max = *hi;
    const auto w_dg = sys.Q.apply_transpose(dg);
    r.dg_nodal_min = *std::min_element(w_dg.begin(), w_dg.end());
  });
  return out;
}

int cmd_compare_dg(const RunConfig& config) {
  const auto results = run_compare_dg(config);
  std::string iters = "epsilon,k,iterations\n";
  ordered_json meta;
  meta["schema"] = 1;
  meta["line"] = {{"from", {0.0, 1.0}}, {"to", {1.0, 0.0}}};
  meta["line_note"] = "anti-diagonal of the unit square, standing in for the line y = -x";
  meta["samples"] = config.cross_section_samples;
  meta["runs"] = ordered_json::array();
  bool all_converged = true;
  for (const auto& r : results) {
    std::string csv = "t,x,y,value_bp,value_dg\n";
    double bp_min = INFINITY, bp_max = -INFINITY, dg_min = INFINITY;
    for (const auto& s : r.samples) {
      csv += num(s.t) + "," + num(s.x.x()) + "," + num(s.x.y()) + "," + num(s.value_bp) + "," +
             num(s.value_dg) + "\n";
      bp_min = std::min(bp_min, s.value_bp);
      bp_max = std::max(bp_max, s.value_bp);
      dg_min = std::min(dg_min, s.value_dg);
    }
    const std::string name = "cross_section_eps" + eps_tag(r.epsilon) + ".csv";
    write_file_atomic(config.out / name, csv);
    iters += eps_tag(r.epsilon) + "," + std::to_string(config.k) + "," +
             std::to_string(r.converged ? r.iterations : -1) + "\n";
    meta["runs"].push_back({{"epsilon", r.epsilon},
                            {"converged", r.converged},
                            {"iterations", r.iterations},
                            {"cross_section", name},
                            {"bp_sample_min", bp_min},
                            {"bp_sample_max", bp_max},
                            {"dg_sample_min", dg_min},
                            {"bp_nodal_min", r.bp_nodal_min},
                            {"bp_nodal_max", r.bp_nodal_max},
                            {"dg_nodal_min", r.dg_nodal_min}});
    all_converged = all_converged && r.converged;
    std::cout << "eps " << eps_tag(r.epsilon) << ": " << r.iterations << " iterations, BP samples ["
              << bp_min << ", " << bp_max << "], DG sample min " << dg_min << "\n";
  }
  write_file_atomic(config.out / "iterations.csv", iters);
  write_file_atomic(config.out / "compare_dg.json", meta.dump(1) + "\n");
  return all_converged ? 0 : 2;
}

std::vector<InterpRow> run_interp_study(const RunConfig& config) {
  const auto problem = make_problem(config, config.epsilon);
  if (!problem.has_exact()) {
    throw ConfigError("interp-study needs a problem with an exact solution");
  }
  if (problem.lower != 0.0) {
    throw ConfigError("interp-study needs bounds [0, kappa]; example1 with c = 1 qualifies");
  }
  std::vector<InterpRow> rows(config.n_poly_list.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    const auto mesh = make_mesh(config, config.n_poly_list[i]);
    const auto spaces = build_spaces(mesh, config.k);
    const auto r = bp_interpolant(problem.exact, mesh, spaces, problem.kappa);
    auto& row = rows[i];
    row.n_elements = mesh.num_elements();
    row.samples_per_element = r.samples_per_element;
    row.l2 = modal_l2_error(mesh, spaces, r.coefficients, problem.exact,
                            error_quadrature_degree(config.k, problem));
    std::tie(row.range_min, row.range_max) =
        modal_range(mesh, spaces, r.coefficients, 200, config.seed);
    row.beta_min = *std::min_element(r.beta.begin(), r.beta.end());
  });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].n_elements != rows[i - 1].n_elements && rows[i].l2 > 0.0 && rows[i - 1].l2 > 0.0) {
      rows[i].l2_eoc = eoc(rows[i - 1].l2, rows[i - 1].n_elements, rows[i].l2, rows[i].n_elements);
    }
  }
  return rows;
}

int cmd_interp_study(const RunConfig& config) {
  const auto rows = run_interp_study(config);
  std::string csv = "n_elements,samples_per_element,l2,l2_eoc,range_min,range_max,beta_min\n";
  for (const auto& r : rows) {
    csv += std::to_string(r.n_elements) + "," + std::to_string(r.samples_per_element) + "," +
           num(r.l2) + "," + opt(r.l2_eoc) + "," + num(r.range_min) + "," + num(r.range_max) +
           "," + num(r.beta_min) + "\n";
  }
  write_file_atomic(config.out / "interp.csv", csv);
  std::cout << csv;
  return 0;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Bound-preserving composite DG solver on polytopic meshes"};
  app.require_subcommand(1);
  std::string config_file, out_dir, dump_dir, penalty_delta, problem_id;
  std::optional<int> k, seed, refine, n_poly, c;
  std::optional<double> kappa, gamma, theta, epsilon;
  std::vector<int> n_poly_list;
  std::vector<double> epsilons;
  bool svg = false;

  const std::pair<const char*, const char*> commands[] = {
      {"mesh-gen", "generate an agglomerated mesh and write mesh.json"},
      {"solve", "solve one problem with the bound-preserving method"},
      {"convergence", "convergence table over a mesh sequence"},
      {"compare-dg", "cross-sections and iteration counts against plain DG"},
      {"interp-study", "rates and range of the bound-preserving interpolant"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_file, "JSON config file (schema 1)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--problem", problem_id, "example1 | example2 | example3");
    sub->add_option("--c", c, "frequency of the example1 solution");
    sub->add_option("--epsilon", epsilon, "diffusion scale");
    sub->add_option("--epsilons", epsilons, "diffusion scales for compare-dg");
    sub->add_option("--k", k, "polynomial degree (1-3)");
    sub->add_option("--kappa", kappa, "upper bound");
    sub->add_option("--gamma", gamma, "stabilization scale");
    sub->add_option("--theta", theta, "symmetry parameter (1 symmetric, -1 non-symmetric)");
    sub->add_option("--seed", seed, "mesh seed");
    sub->add_option("--refine", refine, "uniform submesh refinement levels");
    sub->add_option("--n-poly", n_poly, "number of polygons");
    sub->add_option("--n-poly-list", n_poly_list, "mesh sequence");
    sub->add_option("--penalty-delta", penalty_delta, "contrast | norm");
    sub->add_option("--dump-matrices", dump_dir, "write the assembled matrices here");
    sub->add_flag("--svg", svg, "write field.svg");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    RunConfig cfg = config_file.empty() ? RunConfig{} : load_config(config_file);
    if (!out_dir.empty()) cfg.out = out_dir;
    if (!problem_id.empty()) cfg.problem = problem_id;
    if (c) cfg.c = *c;
    if (epsilon) cfg.epsilon = *epsilon;
    if (!epsilons.empty()) cfg.epsilons = epsilons;
    if (k) cfg.k = *k;
    if (kappa) cfg.kappa = *kappa;
    if (gamma) cfg.gamma = *gamma;
    if (theta) cfg.theta = *theta;
    if (seed) cfg.seed = static_cast<std::uint64_t>(*seed);
    if (refine) cfg.refine = *refine;
    if (n_poly) cfg.n_poly = *n_poly;
    if (!n_poly_list.empty()) cfg.n_poly_list = n_poly_list;
    if (!penalty_delta.empty()) cfg.delta_rule = parse_rule(penalty_delta);
    if (!dump_dir.empty()) cfg.dump_matrices = dump_dir;
    if (svg) cfg.svg = true;

    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "mesh-gen") return cmd_mesh_gen(cfg);
    if (name == "solve") return cmd_solve(cfg);
    if (name == "convergence") return cmd_convergence(cfg);
    if (name == "compare-dg") return cmd_compare_dg(cfg);
    return cmd_interp_study(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace polydg

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "polydg/analysis.hpp"

using namespace polydg;

namespace {

ProblemData with_exact(double value) {
  auto p = problem_constant(1.0, 1.0, [](const Point2&) { return 0.0; });
  p.exact = [value](const Point2&) { return value; };
  p.exact_gradient = [](const Point2&) { return Point2(0.0, 0.0); };
  return p;
}

}  // namespace

TEST(Eoc, HandValues) {
  EXPECT_NEAR(eoc(8.76e-2, 512, 4.33e-2, 1024), 2.03, 5e-3);
  EXPECT_DOUBLE_EQ(eoc(4.0, 1, 1.0, 4), 2.0);
  EXPECT_DOUBLE_EQ(eoc(0.3, 10, 0.3, 40), 0.0);
}

TEST(Eoc, RejectsBadInput) {
  EXPECT_THROW(eoc(0.0, 1, 1.0, 4), std::invalid_argument);
  EXPECT_THROW(eoc(1.0, 1, -1.0, 4), std::invalid_argument);
  EXPECT_THROW(eoc(1.0, 4, 0.5, 4), std::invalid_argument);
}

TEST(Eoc, FillLeavesUndefinedColumnsEmpty) {
  std::vector<EOCRow> rows(3);
  rows[0].n_elements = 16;
  rows[1].n_elements = 16;
  rows[2].n_elements = 64;
  for (auto& r : rows) {
    r.errors.L2 = 1.0 / r.n_elements;
    r.errors.DG = 2.0 / std::sqrt(static_cast<double>(r.n_elements));
    r.errors.stab = 0.0;
    r.errors.has_exact = true;
  }
  fill_eoc(rows);
  EXPECT_FALSE(rows[0].l2_eoc.has_value());
  EXPECT_FALSE(rows[1].l2_eoc.has_value());
  ASSERT_TRUE(rows[2].l2_eoc.has_value());
  EXPECT_NEAR(*rows[2].l2_eoc, 2.0, 1e-12);
  EXPECT_NEAR(*rows[2].dg_eoc, 1.0, 1e-12);
  EXPECT_FALSE(rows[2].stab_eoc.has_value());
}

TEST(Errors, ConstantAgainstZeroField) {
  const auto mesh = generate_agglomerated_mesh(4, 6, 1);
  const auto spaces = build_spaces(mesh, 1);
  const auto p = with_exact(0.7);
  const auto sigma = compute_penalty(mesh, p, 1).sigma;
  const std::vector<double> w(spaces.N_sharp(), 0.0);
  const auto e = field_errors(mesh, spaces, p, sigma, w, 6);
  EXPECT_NEAR(e.L2, 0.7, 1e-13);
  EXPECT_NEAR(e.H1_broken, 0.0, 1e-13);
}

TEST(Errors, ExactFieldHasNoError) {
  const auto mesh = generate_agglomerated_mesh(4, 6, 1);
  const auto spaces = build_spaces(mesh, 2);
  auto p = problem_constant(1.0, 1.0, [](const Point2&) { return 0.0; });
  p.exact = [](const Point2& x) { return x.x() * x.y() + x.x() * x.x(); };
  p.exact_gradient = [](const Point2& x) { return Point2(x.y() + 2.0 * x.x(), x.x()); };
  const auto sigma = compute_penalty(mesh, p, 2).sigma;
  std::vector<double> w(spaces.N_sharp());
  for (Index i = 0; i < spaces.N_sharp(); ++i) w[i] = p.exact(spaces.dofmap.node_coords[i]);
  const auto e = field_errors(mesh, spaces, p, sigma, w, 8);
  EXPECT_LE(e.L2, 1e-12);
  EXPECT_LE(e.H1_broken, 1e-12);
}

TEST(Errors, MissingExactSolutionThrows) {
  const auto mesh = generate_agglomerated_mesh(3, 2, 1);
  const auto spaces = build_spaces(mesh, 1);
  const auto p = problem_example2(1e-2);
  const std::vector<double> w(spaces.N_sharp(), 0.0);
  EXPECT_THROW(field_errors(mesh, spaces, p, compute_penalty(mesh, p, 1).sigma, w, 4),
               ProblemDataError);
}

TEST(Errors, DGNormMatchesGram) {
  const auto mesh = generate_agglomerated_mesh(4, 8, 2);
  const auto p = with_exact(0.0);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n01;
  for (int k : {1, 2}) {
    const auto spaces = build_spaces(mesh, k);
    const auto sigma = compute_penalty(mesh, p, k).sigma;
    const int q = 2 * k + 2;
    const auto gram = dg_norm_gram(mesh, spaces, p, sigma, q);
    std::vector<double> w(spaces.N_sharp());
    for (double& x : w) x = n01(rng);
    const double dg = field_errors(mesh, spaces, p, sigma, w, q).DG;
    EXPECT_NEAR(dg, std::sqrt(gram.quadratic_form(w)), 1e-11 * dg);
  }
}

TEST(Errors, GramIsPositiveSemidefinite) {
  const auto mesh = generate_agglomerated_mesh(4, 8, 2);
  const auto p = problem_example1(8, 1e-6);
  const auto spaces = build_spaces(mesh, 2);
  const auto gram = dg_norm_gram(mesh, spaces, p, compute_penalty(mesh, p, 2).sigma, 6);
  EXPECT_LE(relative_asymmetry(gram), 1e-12);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> w(spaces.N_sharp());
    for (double& x : w) x = n01(rng);
    EXPECT_GE(gram.quadratic_form(w), 0.0);
  }
}

TEST(Errors, SingleElementLinearField) {
  // One square element, D = I, mu = 1, w = x: |grad|^2 + |w|^2 + boundary
  // penalty sigma * int w^2 over the sides x = 1 (length 1) and y = 0, y = 1.
  auto grid = structured_triangle_mesh(2);
  auto tris = grid.triangles;
  for (auto& t : tris) t.parent = 0;
  const auto mesh = build_mesh(grid.points, tris, 1);
  const auto spaces = build_spaces(mesh, 1);
  const auto p = with_exact(0.0);
  const auto sigma = compute_penalty(mesh, p, 1).sigma;
  std::vector<double> w(spaces.N_sharp());
  for (Index i = 0; i < spaces.N_sharp(); ++i) w[i] = spaces.dofmap.node_coords[i].x();
  double jumps = 0.0;
  for (const auto& f : mesh.faces) {
    for (const auto& e : f.edges) {
      const Point2 a = mesh.points[e[0]], b = mesh.points[e[1]];
      const double len = (b - a).norm();
      jumps += sigma[f.id] * len * (a.x() * a.x() + a.x() * b.x() + b.x() * b.x()) / 3.0;
    }
  }
  const double expected = 1.0 + 1.0 / 3.0 + jumps;
  const double dg = field_errors(mesh, spaces, p, sigma, w, 4).DG;
  EXPECT_NEAR(dg * dg, expected, 1e-12 * expected);
}

TEST(Interpolant, ConstantIsReproduced) {
  const auto mesh = generate_agglomerated_mesh(0, 32, 3);
  for (int k : {1, 2, 3}) {
    const auto spaces = build_spaces(mesh, k);
    const auto r = bp_interpolant([](const Point2&) { return 0.4; }, mesh, spaces, 1.0);
    for (double b : r.beta) EXPECT_NEAR(b, 1.0, 1e-13);
    EXPECT_LE(modal_l2_error(mesh, spaces, r.coefficients, [](const Point2&) { return 0.4; }, 8),
              1e-12);
  }
}

TEST(Interpolant, LinearDegreeNeedsNoScaling) {
  const auto mesh = generate_agglomerated_mesh(0, 32, 3);
  const auto spaces = build_spaces(mesh, 1);
  const auto p = problem_example1(1, 1e-2);
  const auto r = bp_interpolant(p.exact, mesh, spaces, 1.0);
  for (double b : r.beta) EXPECT_EQ(b, 1.0);
}

TEST(Interpolant, RangeStaysInBounds) {
  const auto mesh = generate_agglomerated_mesh(0, 32, 5);
  const auto p = problem_example1(1, 1e-2);
  for (int k : {1, 2, 3}) {
    const auto spaces = build_spaces(mesh, k);
    const auto r = bp_interpolant(p.exact, mesh, spaces, 1.0);
    const auto [lo, hi] = modal_range(mesh, spaces, r.coefficients, 200, 99);
    EXPECT_GE(lo, -1e-12) << "k = " << k;
    EXPECT_LE(hi, 1.0 + 1e-12) << "k = " << k;
    for (double b : r.beta) {
      EXPECT_GT(b, 0.0);
      EXPECT_LE(b, 1.0);
    }
  }
}

TEST(Interpolant, WholeDomainElementHasNoCover) {
  auto grid = structured_triangle_mesh(2);
  auto tris = grid.triangles;
  for (auto& t : tris) t.parent = 0;
  const auto mesh = build_mesh(grid.points, tris, 1);
  EXPECT_THROW(covering_triangle(mesh, 0), MeshError);
}

TEST(Interpolant, RejectsOutOfRangeData) {
  const auto mesh = generate_agglomerated_mesh(4, 4, 1);
  const auto spaces = build_spaces(mesh, 2);
  EXPECT_THROW(bp_interpolant([](const Point2&) { return 1.5; }, mesh, spaces, 1.0),
               ProblemDataError);
}

TEST(Interpolant, CoveringTriangleContainsElement) {
  const auto mesh = generate_agglomerated_mesh(0, 20, 8);
  for (Index el = 0; el < mesh.num_elements(); ++el) {
    const auto t = covering_triangle(mesh, el);
    for (Index v : mesh.elements[el].loop) {
      const Point2 x = mesh.points[v];
      double lo = 0.0, hi = 0.0;
      for (int c = 0; c < 3; ++c) {
        const Point2 a = t[c], b = t[(c + 1) % 3];
        const double s = (b - a).x() * (x - a).y() - (b - a).y() * (x - a).x();
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
      EXPECT_TRUE(lo >= -1e-14 || hi <= 1e-14);
    }
    for (const auto& c : t) {
      EXPECT_GE(c.x(), -1e-14);
      EXPECT_LE(c.x(), 1.0 + 1e-14);
      EXPECT_GE(c.y(), -1e-14);
      EXPECT_LE(c.y(), 1.0 + 1e-14);
    }
  }
}

TEST(CrossSection, ConstantField) {
  const auto mesh = generate_agglomerated_mesh(0, 16, 1);
  const auto spaces = build_spaces(mesh, 2);
  const std::vector<double> w(spaces.N_sharp(), 0.25);
  const auto s = cross_section(mesh, spaces, w, {}, {0.0, 1.0}, {1.0, 0.0}, 41);
  ASSERT_EQ(s.size(), 41u);
  for (const auto& x : s) EXPECT_NEAR(x.value_bp, 0.25, 1e-14);
  EXPECT_EQ(s.front().x, Point2(0.0, 1.0));
  EXPECT_EQ(s.back().x, Point2(1.0, 0.0));
}

TEST(CrossSection, NodeSampleIsExact) {
  const auto mesh = generate_agglomerated_mesh(0, 16, 1);
  const auto spaces = build_spaces(mesh, 2);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u01;
  std::vector<double> w(spaces.N_sharp());
  for (double& x : w) x = u01(rng);
  const PointLocator locator(mesh);
  int checked = 0;
  for (Index i = 0; i < spaces.N_sharp() && checked < 10; ++i) {
    const Point2 x = spaces.dofmap.node_coords[i];
    if (mesh.triangles[locator.locate(x)].parent != spaces.dofmap.node_element[i]) continue;
    const auto s = cross_section(mesh, spaces, w, {}, x, Point2(0.5, 0.5), 3);
    EXPECT_EQ(s.front().value_bp, w[i]);
    ++checked;
  }
  EXPECT_EQ(checked, 10);
}

TEST(CrossSection, OutsidePointThrows) {
  const auto mesh = generate_agglomerated_mesh(3, 4, 1);
  const auto spaces = build_spaces(mesh, 1);
  const std::vector<double> w(spaces.N_sharp(), 0.0);
  EXPECT_THROW(cross_section(mesh, spaces, w, {}, {-0.5, 0.0}, {1.0, 0.0}, 4), MeshError);
}

TEST(Svg, WellFormedHeader) {
  const auto mesh = generate_agglomerated_mesh(3, 4, 1);
  const auto spaces = build_spaces(mesh, 1);
  const std::vector<double> w(spaces.N_sharp(), 0.5);
  const auto svg = field_svg(mesh, spaces, w, 0.0, 1.0);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

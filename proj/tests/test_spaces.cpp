#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "polydg/quadrature.hpp"
#include "polydg/spaces.hpp"

using namespace polydg;

namespace {

Point2 random_reference_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double a = u(rng), b = u(rng);
  if (a + b > 1.0) {
    a = 1.0 - a;
    b = 1.0 - b;
  }
  return {a, b};
}

}  // namespace

TEST(Spaces, LagrangeCardinality) {
  EXPECT_EQ(lagrange_layout(1).m, 3);
  EXPECT_EQ(lagrange_layout(2).m, 6);
  EXPECT_EQ(lagrange_layout(3).m, 10);
  EXPECT_EQ(lagrange_layout(4).m, 15);
  EXPECT_THROW(lagrange_layout(0), SpaceError);
  EXPECT_THROW(lagrange_layout(5), SpaceError);
}

TEST(Spaces, LagrangeNodalAndPartitionOfUnity) {
  std::mt19937_64 rng(1);
  for (int k = 1; k <= 4; ++k) {
    const auto layout = lagrange_layout(k);
    std::vector<double> phi(layout.m);
    for (int j = 0; j < layout.m; ++j) {
      layout.eval(layout.nodes[j], phi.data());
      for (int i = 0; i < layout.m; ++i) {
        EXPECT_NEAR(phi[i], i == j ? 1.0 : 0.0, 1e-13);
      }
    }
    for (int s = 0; s < 50; ++s) {
      layout.eval(random_reference_point(rng), phi.data());
      double sum = 0.0;
      for (double v : phi) sum += v;
      EXPECT_NEAR(sum, 1.0, 1e-13);
    }
  }
}

TEST(Spaces, LagrangeGradientMatchesFiniteDifference) {
  std::mt19937_64 rng(2);
  for (int k = 1; k <= 4; ++k) {
    const auto layout = lagrange_layout(k);
    std::vector<double> v(layout.m), vp(layout.m), vm(layout.m);
    std::vector<Point2> g(layout.m);
    const double h = 1e-6;
    for (int s = 0; s < 10; ++s) {
      const Point2 p = random_reference_point(rng) * 0.9 + Point2(0.02, 0.02);
      layout.eval_grad(p, v.data(), g.data());
      for (int dir = 0; dir < 2; ++dir) {
        Point2 e = Point2::Zero();
        e[dir] = h;
        layout.eval(p + e, vp.data());
        layout.eval(p - e, vm.data());
        for (int l = 0; l < layout.m; ++l) {
          EXPECT_NEAR(g[l][dir], (vp[l] - vm[l]) / (2 * h), 1e-6);
        }
      }
    }
  }
}

TEST(Spaces, TwoTrianglePolytopeMergesSharedEdge) {
  const auto mesh = generate_agglomerated_mesh(1, 1, 1);
  const auto spaces = build_spaces(mesh, 1);
  EXPECT_EQ(spaces.N_T(), 6);
  EXPECT_EQ(spaces.N_sharp(), 4);
  int merged = 0;
  for (int mult : spaces.dofmap.multiplicity) merged += mult == 2;
  EXPECT_EQ(merged, 2);
}

TEST(Spaces, SingleTrianglePolytopes) {
  const auto mesh = generate_agglomerated_mesh(1, 2, 1);
  const auto s2 = build_spaces(mesh, 2);
  EXPECT_EQ(s2.dofmap.element_size(0), 6);
  const auto s1 = build_spaces(mesh, 1);
  const Eigen::MatrixXd o = s1.O.to_dense();
  ASSERT_EQ(o.rows(), 6);
  const Eigen::MatrixXd block = o.topLeftCorner(3, 3);
  EXPECT_EQ((block * block.transpose() - Eigen::MatrixXd::Identity(3, 3)).norm(), 0.0);
  EXPECT_EQ(o.topRightCorner(3, 3).norm(), 0.0);
}

TEST(Spaces, ORowSumsMatchCoincidenceCount) {
  const auto mesh = refine_submesh(generate_agglomerated_mesh(4, 6, 3), 1);
  for (int k = 1; k <= 3; ++k) {
    const auto spaces = build_spaces(mesh, k);
    const auto& layout = spaces.lagrange;
    // All-pairs comparison of discontinuous dofs within each element.
    std::vector<Point2> x(spaces.N_T());
    std::vector<Index> parent(spaces.N_T());
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
      const auto map = triangle_map(mesh, t);
      for (int l = 0; l < layout.m; ++l) {
        x[t * layout.m + l] = map.to_physical(layout.nodes[l]);
        parent[t * layout.m + l] = mesh.triangles[t].parent;
      }
    }
    std::vector<int> count(spaces.N_T(), 0);
    for (Index a = 0; a < spaces.N_T(); ++a) {
      for (Index b = 0; b < spaces.N_T(); ++b) {
        if (parent[a] == parent[b] && (x[a] - x[b]).norm() < 1e-10) ++count[a];
      }
    }
    const auto ones = std::vector<double>(spaces.N_T(), 1.0);
    const auto rows = spaces.O.apply(ones);
    for (Index dof = 0; dof < spaces.N_T(); ++dof) {
      EXPECT_EQ(rows[spaces.dofmap.dof_to_node[dof]], count[dof]);
    }
    const auto ooT = multiply(spaces.O, spaces.O.transpose());
    for (Index i = 0; i < ooT.rows(); ++i) {
      EXPECT_EQ(ooT.row_ptr()[i + 1] - ooT.row_ptr()[i], 1);
      EXPECT_EQ(ooT.coeff(i, i), spaces.dofmap.multiplicity[i]);
    }
    const auto colsum = spaces.O.apply_transpose(std::vector<double>(spaces.N_sharp(), 1.0));
    for (double c : colsum) EXPECT_EQ(c, 1.0);
  }
}

TEST(Spaces, DimensionBookkeeping) {
  const auto mesh = refine_submesh(generate_agglomerated_mesh(5, 32, 1), 1);
  EXPECT_EQ(mesh.num_triangles(), 200);
  for (int k = 1; k <= 3; ++k) {
    const auto spaces = build_spaces(mesh, k);
    EXPECT_EQ(spaces.N_T(), simplex_dimension(k) * mesh.num_triangles());
    EXPECT_EQ(spaces.N_P(), 32 * simplex_dimension(k));
    EXPECT_EQ(spaces.O.rows(), spaces.N_sharp());
    EXPECT_EQ(spaces.O.cols(), spaces.N_T());
    EXPECT_EQ(spaces.Q.cols(), spaces.N_sharp());
    EXPECT_LT(spaces.N_sharp(), spaces.N_T());
    EXPECT_GT(spaces.N_sharp(), spaces.N_P());
  }
}

TEST(Spaces, QBlockDiagonalAndConstantRow) {
  const auto mesh = generate_agglomerated_mesh(4, 5, 8);
  const auto spaces = build_spaces(mesh, 2);
  const int m = spaces.modal.m;
  for (Index row = 0; row < spaces.Q.rows(); ++row) {
    const Index el = row / m;
    for (auto p = spaces.Q.row_ptr()[row]; p < spaces.Q.row_ptr()[row + 1]; ++p) {
      EXPECT_EQ(spaces.dofmap.node_element[spaces.Q.col_idx()[p]], el);
    }
    if (row % m == 0) {
      EXPECT_EQ(spaces.Q.row_ptr()[row + 1] - spaces.Q.row_ptr()[row],
                spaces.dofmap.element_size(el));
      for (auto p = spaces.Q.row_ptr()[row]; p < spaces.Q.row_ptr()[row + 1]; ++p) {
        EXPECT_EQ(spaces.Q.values()[p], 1.0);
      }
    }
  }
}

TEST(Spaces, QReproducesLinearFunctionAtNodes) {
  const auto mesh = generate_agglomerated_mesh(1, 2, 1);
  const auto spaces = build_spaces(mesh, 1);
  std::vector<double> u(spaces.N_P(), 0.0);
  for (Index el = 0; el < 2; ++el) {
    u[el * 3 + 0] = spaces.modal.center[el].x();
    u[el * 3 + 1] = spaces.modal.half_width[el].x();
  }
  const auto w = spaces.Q.apply_transpose(u);
  for (Index i = 0; i < spaces.N_sharp(); ++i) {
    EXPECT_NEAR(w[i], spaces.dofmap.node_coords[i].x(), 1e-15);
  }
}

TEST(Spaces, ModalRoundTripAtRandomPoints) {
  std::mt19937_64 rng(4);
  const auto mesh = refine_submesh(generate_agglomerated_mesh(4, 6, 2), 1);
  for (int k = 1; k <= 4; ++k) {
    const auto spaces = build_spaces(mesh, k);
    const int m = spaces.modal.m;
    for (Index el = 0; el < mesh.num_elements(); ++el) {
      for (int j = 0; j < m; ++j) {
        std::vector<double> u(spaces.N_P(), 0.0);
        u[el * m + j] = 1.0;
        const auto w = spaces.Q.apply_transpose(u);
        const auto& tris = mesh.elements[el].tris;
        for (int s = 0; s < 50; ++s) {
          const Index t = tris[rng() % tris.size()];
          const Point2 x = triangle_map(mesh, t).to_physical(random_reference_point(rng));
          EXPECT_NEAR(eval_composite(mesh, spaces, w, t, x), eval_modal(spaces, u, el, x), 1e-10);
        }
      }
      EXPECT_TRUE(std::isfinite(modal_gram_condition(mesh, spaces, el)));
    }
  }
}

TEST(Spaces, CompositePartitionOfUnity) {
  std::mt19937_64 rng(6);
  const auto mesh = refine_submesh(generate_agglomerated_mesh(3, 4, 2), 1);
  const auto spaces = build_spaces(mesh, 3);
  const std::vector<double> ones(spaces.N_sharp(), 1.0);
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const Point2 x = triangle_map(mesh, t).to_physical(random_reference_point(rng));
    EXPECT_NEAR(eval_composite(mesh, spaces, ones, t, x), 1.0, 1e-12);
  }
}

TEST(Spaces, InterfaceTracesOfContinuousPolynomialAgree) {
  const auto mesh = refine_submesh(generate_agglomerated_mesh(4, 7, 5), 1);
  const int k = 2;
  const auto spaces = build_spaces(mesh, k);
  auto p = [](const Point2& x) { return 1.0 + 2.0 * x.x() - x.y() + x.x() * x.y() - 3 * x.y() * x.y(); };
  std::vector<double> w(spaces.N_sharp());
  for (Index i = 0; i < spaces.N_sharp(); ++i) w[i] = p(spaces.dofmap.node_coords[i]);
  const auto rule = edge_quadrature(2 * k);
  for (const auto& e : mesh.skeleton) {
    if (e.is_boundary()) continue;
    const Point2 a = mesh.points[e.v[0]], b = mesh.points[e.v[1]];
    for (const auto& q : rule.points) {
      const Point2 x = a + q.x() * (b - a);
      EXPECT_NEAR(eval_composite(mesh, spaces, w, e.tri_plus, x),
                  eval_composite(mesh, spaces, w, e.tri_minus, x), 1e-12);
    }
  }
}

TEST(Spaces, TraceInverseInequality) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto mesh = generate_agglomerated_mesh(3, 5, 4);
  for (int k = 1; k <= 4; ++k) {
    const auto layout = lagrange_layout(k);
    const auto tri_rule = triangle_quadrature(2 * k);
    const auto edge_rule = edge_quadrature(2 * k);
    std::vector<double> phi(layout.m);
    for (int trial = 0; trial < 200; ++trial) {
      const Index t = static_cast<Index>(rng() % mesh.num_triangles());
      const auto map = triangle_map(mesh, t);
      std::vector<double> c(layout.m);
      for (double& v : c) v = g(rng);
      auto value = [&](const Point2& ref) {
        layout.eval(ref, phi.data());
        double s = 0.0;
        for (int l = 0; l < layout.m; ++l) s += c[l] * phi[l];
        return s;
      };
      double vol = 0.0;
      for (std::size_t q = 0; q < tri_rule.size(); ++q) {
        vol += tri_rule.weights[q] * std::abs(map.det) * std::pow(value(tri_rule.points[q]), 2);
      }
      const double area = mesh.triangle_area(t);
      const Point2 ref_vertices[3] = {{0, 0}, {1, 0}, {0, 1}};
      for (int e = 0; e < 3; ++e) {
        const Point2 ra = ref_vertices[e], rb = ref_vertices[(e + 1) % 3];
        const double len = (map.to_physical(rb) - map.to_physical(ra)).norm();
        double face = 0.0;
        for (std::size_t q = 0; q < edge_rule.size(); ++q) {
          face += edge_rule.weights[q] * len *
                  std::pow(value(ra + edge_rule.points[q].x() * (rb - ra)), 2);
        }
        EXPECT_LE(face, (k + 1.0) * (k + 2.0) * len / (2.0 * area) * vol + 1e-10);
      }
    }
  }
}

#include "polydg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <tuple>
#include <unordered_map>

namespace polydg {
namespace {

std::uint64_t edge_key(Index a, Index b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

double cross(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const Point2& a, const Point2& b, const Point2& c) {
  return 0.5 * cross(b - a, c - a);
}

double segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 d = b - a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

double boundary_distance(const std::vector<Point2>& poly, const Point2& p) {
  double d = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    d = std::min(d, segment_distance(p, poly[i], poly[(i + 1) % n]));
  }
  return d;
}

// Drops vertices lying on the segment between their neighbours.
std::vector<Point2> strip_collinear(const std::vector<Point2>& poly) {
  const double scale = polygon_diameter(poly);
  std::vector<Point2> out = poly;
  bool changed = true;
  while (changed && out.size() > 3) {
    changed = false;
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& a = out[(i + n - 1) % n];
      const Point2& b = out[i];
      const Point2& c = out[(i + 1) % n];
      if (std::abs(cross(b - a, c - b)) <= 1e-12 * scale * scale) {
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return out;
}

double convex_inscribed_radius(const std::vector<Point2>& poly) {
  const std::size_t n = poly.size();
  std::vector<Point2> normal(n);
  std::vector<double> offset(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 d = poly[(i + 1) % n] - poly[i];
    normal[i] = Point2(-d.y(), d.x()) / d.norm();
    offset[i] = normal[i].dot(poly[i]);
  }
  const double tol = 1e-12 * polygon_diameter(poly);
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t l = j + 1; l < n; ++l) {
        Eigen::Matrix3d m;
        Eigen::Vector3d rhs;
        const std::size_t idx[3] = {i, j, l};
        for (int r = 0; r < 3; ++r) {
          m(r, 0) = normal[idx[r]].x();
          m(r, 1) = normal[idx[r]].y();
          m(r, 2) = -1.0;
          rhs(r) = offset[idx[r]];
        }
        Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
        if (!lu.isInvertible()) {
          continue;
        }
        const Eigen::Vector3d sol = lu.solve(rhs);
        const Point2 c(sol(0), sol(1));
        const double r = sol(2);
        if (r <= best) {
          continue;
        }
        bool feasible = true;
        for (std::size_t e = 0; e < n && feasible; ++e) {
          feasible = normal[e].dot(c) - r >= offset[e] - tol;
        }
        if (feasible) {
          best = r;
        }
      }
    }
  }
  return best;
}

double sampled_inscribed_radius(const std::vector<Point2>& poly) {
  const double H = polygon_diameter(poly);
  Point2 lo = poly.front();
  Point2 hi = poly.front();
  for (const auto& p : poly) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  auto value = [&](const Point2& p) {
    return point_in_polygon(poly, p) ? boundary_distance(poly, p) : -1.0;
  };

  struct Sample {
    Point2 p;
    double f;
  };
  std::vector<Sample> candidates;
  double step = H / 64.0;
  double best = -1.0;
  for (double y = lo.y(); y <= hi.y() + 0.5 * step; y += step) {
    for (double x = lo.x(); x <= hi.x() + 0.5 * step; x += step) {
      const Point2 p(x, y);
      candidates.push_back({p, value(p)});
      best = std::max(best, candidates.back().f);
    }
  }

  constexpr std::size_t kMaxCandidates = 128;
  const double target = 1e-4 * H;
  while (step > target) {
    // The distance function is 1-Lipschitz, so the maximiser lies within
    // step/sqrt(2) of some sample whose value is at least best - step/sqrt(2).
    const double keep = best - step / std::sqrt(2.0) - 1e-15;
    std::vector<Sample> kept;
    for (const auto& s : candidates) {
      if (s.f >= keep) {
        kept.push_back(s);
      }
    }
    std::sort(kept.begin(), kept.end(), [](const Sample& a, const Sample& b) {
      if (a.f != b.f) return a.f > b.f;
      if (a.p.x() != b.p.x()) return a.p.x() < b.p.x();
      return a.p.y() < b.p.y();
    });
    if (kept.size() > kMaxCandidates) {
      kept.resize(kMaxCandidates);
    }
    const double fine = step / 4.0;
    candidates.clear();
    for (const auto& s : kept) {
      for (int j = -4; j <= 4; ++j) {
        for (int i = -4; i <= 4; ++i) {
          const Point2 p = s.p + Point2(i * fine, j * fine);
          candidates.push_back({p, value(p)});
          best = std::max(best, candidates.back().f);
        }
      }
    }
    step = fine;
  }
  return best;
}

struct EdgeOwner {
  std::uint64_t key;
  Index tri;
  Index a;
  Index b;
};

// Counter-clockwise boundary cycle of one element derived from its
// triangles, starting from the smallest vertex id.
std::vector<Index> element_boundary_cycle(const PolytopicMesh& mesh, Index k) {
  const auto& el = mesh.elements[k];
  std::unordered_map<std::uint64_t, int> count;
  for (Index t : el.tris) {
    const auto& v = mesh.triangles[t].v;
    for (int e = 0; e < 3; ++e) {
      ++count[edge_key(v[e], v[(e + 1) % 3])];
    }
  }
  std::map<Index, Index> next;
  for (Index t : el.tris) {
    const auto& v = mesh.triangles[t].v;
    for (int e = 0; e < 3; ++e) {
      const Index a = v[e];
      const Index b = v[(e + 1) % 3];
      if (count[edge_key(a, b)] == 1) {
        if (!next.emplace(a, b).second) {
          throw MeshError("element " + std::to_string(k) +
                          " has a non-simple boundary (pinched at vertex " + std::to_string(a) +
                          ")");
        }
      }
    }
  }
  if (next.empty()) {
    throw MeshError("element " + std::to_string(k) + " has no boundary");
  }
  std::vector<Index> cycle;
  Index cur = next.begin()->first;
  const Index start = cur;
  do {
    cycle.push_back(cur);
    const auto it = next.find(cur);
    if (it == next.end()) {
      throw MeshError("element " + std::to_string(k) + " has an open boundary");
    }
    cur = it->second;
    if (cycle.size() > next.size()) {
      break;
    }
  } while (cur != start);
  if (cycle.size() != next.size()) {
    throw MeshError("element " + std::to_string(k) +
                    " is not simply connected (boundary has several components)");
  }
  return cycle;
}

void finalize(PolytopicMesh& mesh) {
  build_interfaces(mesh);
  compute_geometry(mesh);
  validate_mesh(mesh);
}

void check_triangles(const std::vector<Point2>& points, const std::vector<Triangle>& tris,
                     Index num_elements) {
  const auto np = static_cast<Index>(points.size());
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& v = tris[t].v;
    for (Index i : v) {
      if (i < 0 || i >= np) {
        throw MeshError("triangle " + std::to_string(t) + " references missing point " +
                        std::to_string(i));
      }
    }
    if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2]) {
      throw MeshError("triangle " + std::to_string(t) + " has repeated vertices");
    }
    if (!(signed_area(points[v[0]], points[v[1]], points[v[2]]) > 0.0)) {
      throw MeshError("triangle " + std::to_string(t) + " has non-positive signed area");
    }
    if (tris[t].parent < 0 || tris[t].parent >= num_elements) {
      throw MeshError("triangle " + std::to_string(t) + " has invalid parent " +
                      std::to_string(tris[t].parent));
    }
  }
  for (const auto& p : points) {
    if (!std::isfinite(p.x()) || !std::isfinite(p.y())) {
      throw MeshError("non-finite point coordinate");
    }
  }
}

void structured_grid(int n, std::vector<Point2>& points, std::vector<Triangle>& tris) {
  points.clear();
  tris.clear();
  const auto idx = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      points.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Index p00 = idx(i, j);
      const Index p10 = idx(i + 1, j);
      const Index p11 = idx(i + 1, j + 1);
      const Index p01 = idx(i, j + 1);
      tris.push_back({{p00, p10, p11}, -1});
      tris.push_back({{p00, p11, p01}, -1});
    }
  }
}

// ---------------------------------------------------------------------------
// Region growing on the structured grid.

class Agglomerator {
 public:
  Agglomerator(const std::vector<Point2>& points, const std::vector<Triangle>& tris)
      : points_(points), tris_(tris) {
    const auto nt = static_cast<Index>(tris.size());
    centroid_.resize(nt);
    neighbor_.assign(nt, {-1, -1, -1});
    std::unordered_map<std::uint64_t, std::pair<Index, int>> first;
    for (Index t = 0; t < nt; ++t) {
      const auto& v = tris[t].v;
      centroid_[t] = (points[v[0]] + points[v[1]] + points[v[2]]) / 3.0;
      for (int e = 0; e < 3; ++e) {
        const auto key = edge_key(v[e], v[(e + 1) % 3]);
        const auto it = first.find(key);
        if (it == first.end()) {
          first.emplace(key, std::make_pair(t, e));
        } else {
          neighbor_[t][e] = it->second.first;
          neighbor_[it->second.first][it->second.second] = t;
        }
      }
    }
  }

  // Returns per-triangle labels in [0, n_poly), or an empty vector on failure.
  std::vector<Index> run(int n_poly, std::mt19937_64& rng, int recenter_iterations) {
    auto seeds = pick_seeds(n_poly, rng);
    auto labels = grow(seeds);
    if (labels.empty()) {
      return labels;
    }
    for (int it = 0; it < recenter_iterations; ++it) {
      const auto moved = recenter(labels, n_poly);
      if (moved == seeds) {
        break;
      }
      auto next = grow(moved);
      if (next.empty()) {
        break;
      }
      seeds = moved;
      labels = std::move(next);
    }
    return labels;
  }

 private:
  std::vector<Index> pick_seeds(int n_poly, std::mt19937_64& rng) const {
    const auto nt = static_cast<Index>(tris_.size());
    std::vector<Index> seeds;
    if (n_poly == nt) {
      seeds.resize(nt);
      std::iota(seeds.begin(), seeds.end(), 0);
      return seeds;
    }
    std::vector<char> used(nt, 0);
    std::vector<double> dist(nt, std::numeric_limits<double>::infinity());
    auto take = [&](Index t) {
      seeds.push_back(t);
      used[t] = 1;
      for (Index s = 0; s < nt; ++s) {
        dist[s] = std::min(dist[s], (centroid_[s] - centroid_[t]).squaredNorm());
      }
    };
    take(static_cast<Index>(rng() % static_cast<std::uint64_t>(nt)));
    constexpr int kCandidates = 12;
    while (static_cast<int>(seeds.size()) < n_poly) {
      Index pick = -1;
      for (int c = 0; c < kCandidates; ++c) {
        const auto t = static_cast<Index>(rng() % static_cast<std::uint64_t>(nt));
        if (!used[t] && (pick < 0 || dist[t] > dist[pick])) {
          pick = t;
        }
      }
      if (pick < 0) {
        for (Index t = 0; t < nt; ++t) {
          if (!used[t] && (pick < 0 || dist[t] > dist[pick])) {
            pick = t;
          }
        }
      }
      take(pick);
    }
    return seeds;
  }

  std::vector<Index> recenter(const std::vector<Index>& labels, int n_poly) const {
    std::vector<Point2> mean(n_poly, Point2::Zero());
    std::vector<int> count(n_poly, 0);
    for (std::size_t t = 0; t < labels.size(); ++t) {
      mean[labels[t]] += centroid_[t];
      ++count[labels[t]];
    }
    std::vector<Index> seeds(n_poly, -1);
    std::vector<double> best(n_poly, std::numeric_limits<double>::infinity());
    for (std::size_t t = 0; t < labels.size(); ++t) {
      const Index r = labels[t];
      const double d = (centroid_[t] - mean[r] / count[r]).squaredNorm();
      if (d < best[r]) {
        best[r] = d;
        seeds[r] = static_cast<Index>(t);
      }
    }
    return seeds;
  }

  // A triangle may join region r only if the region stays a topological disk.
  bool can_join(Index t, Index r, const std::vector<Index>& labels,
                const std::vector<std::vector<Index>>& vertex_regions) const {
    int shared = 0;
    int shared_edge = -1;
    for (int e = 0; e < 3; ++e) {
      const Index nb = neighbor_[t][e];
      if (nb >= 0 && labels[nb] == r) {
        ++shared;
        shared_edge = e;
      }
    }
    if (shared == 1) {
      const Index opposite = tris_[t].v[(shared_edge + 2) % 3];
      const auto& regs = vertex_regions[opposite];
      return std::find(regs.begin(), regs.end(), r) == regs.end();
    }
    return shared == 2;
  }

  std::vector<Index> grow(const std::vector<Index>& seeds) const {
    const auto nt = static_cast<Index>(tris_.size());
    std::vector<Index> labels(nt, -1);
    std::vector<std::vector<Index>> vertex_regions(points_.size());
    auto assign = [&](Index t, Index r) {
      labels[t] = r;
      for (Index v : tris_[t].v) {
        auto& regs = vertex_regions[v];
        if (std::find(regs.begin(), regs.end(), r) == regs.end()) {
          regs.push_back(r);
        }
      }
    };
    using Entry = std::tuple<double, Index, Index>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    auto push_neighbors = [&](Index t, Index r) {
      for (Index nb : neighbor_[t]) {
        if (nb >= 0 && labels[nb] < 0) {
          queue.emplace((centroid_[nb] - centroid_[seeds[r]]).norm(), nb, r);
        }
      }
    };
    for (std::size_t r = 0; r < seeds.size(); ++r) {
      assign(seeds[r], static_cast<Index>(r));
    }
    for (std::size_t r = 0; r < seeds.size(); ++r) {
      push_neighbors(seeds[r], static_cast<Index>(r));
    }
    while (!queue.empty()) {
      const auto [d, t, r] = queue.top();
      queue.pop();
      if (labels[t] >= 0 || !can_join(t, r, labels, vertex_regions)) {
        continue;
      }
      assign(t, r);
      push_neighbors(t, r);
    }
    // Leftovers join any adjacent region that accepts them.
    bool changed = true;
    while (changed) {
      changed = false;
      for (Index t = 0; t < nt; ++t) {
        if (labels[t] >= 0) {
          continue;
        }
        for (Index nb : neighbor_[t]) {
          if (nb >= 0 && labels[nb] >= 0 && can_join(t, labels[nb], labels, vertex_regions)) {
            assign(t, labels[nb]);
            changed = true;
            break;
          }
        }
      }
    }
    if (std::find(labels.begin(), labels.end(), -1) != labels.end()) {
      return {};
    }
    return labels;
  }

  const std::vector<Point2>& points_;
  const std::vector<Triangle>& tris_;
  std::vector<Point2> centroid_;
  std::vector<std::array<Index, 3>> neighbor_;
};

}  // namespace

// ---------------------------------------------------------------------------

double PolytopicMesh::triangle_area(Index tri) const {
  return signed_area(vertex(tri, 0), vertex(tri, 1), vertex(tri, 2));
}

double PolytopicMesh::triangle_diameter(Index tri) const {
  const Point2 a = vertex(tri, 0), b = vertex(tri, 1), c = vertex(tri, 2);
  return std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
}

double PolytopicMesh::triangle_inradius(Index tri) const {
  const Point2 a = vertex(tri, 0), b = vertex(tri, 1), c = vertex(tri, 2);
  const double perimeter = (a - b).norm() + (b - c).norm() + (c - a).norm();
  return 2.0 * triangle_area(tri) / perimeter;
}

Point2 PolytopicMesh::triangle_centroid(Index tri) const {
  return (vertex(tri, 0) + vertex(tri, 1) + vertex(tri, 2)) / 3.0;
}

double polygon_area(const std::vector<Point2>& polygon) {
  double a = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    a += cross(polygon[i], polygon[(i + 1) % n]);
  }
  return 0.5 * a;
}

double polygon_diameter(const std::vector<Point2>& polygon) {
  double h = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    for (std::size_t j = i + 1; j < polygon.size(); ++j) {
      h = std::max(h, (polygon[i] - polygon[j]).norm());
    }
  }
  return h;
}

bool polygon_is_convex(const std::vector<Point2>& polygon) {
  const auto poly = strip_collinear(polygon);
  const std::size_t n = poly.size();
  const double scale = polygon_diameter(poly);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % n];
    const Point2& c = poly[(i + 2) % n];
    if (cross(b - a, c - b) < -1e-12 * scale * scale) {
      return false;
    }
  }
  return true;
}

bool point_in_polygon(const std::vector<Point2>& polygon, const Point2& p) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = polygon[i];
    const Point2& b = polygon[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) {
        inside = !inside;
      }
    }
  }
  return inside;
}

double inscribed_radius(const std::vector<Point2>& polygon) {
  if (polygon.size() < 3) {
    throw MeshError("polygon with fewer than 3 vertices");
  }
  const auto poly = strip_collinear(polygon);
  if (polygon_is_convex(poly)) {
    const double r = convex_inscribed_radius(poly);
    if (r > 0.0) {
      return r;
    }
  }
  return sampled_inscribed_radius(poly);
}

std::vector<Point2> element_polygon(const PolytopicMesh& mesh, Index element) {
  std::vector<Point2> poly;
  for (Index v : mesh.elements[element].loop) {
    poly.push_back(mesh.points[v]);
  }
  return poly;
}

void build_interfaces(PolytopicMesh& mesh) {
  std::vector<EdgeOwner> owners;
  owners.reserve(3 * mesh.triangles.size());
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto& v = mesh.triangles[t].v;
    for (int e = 0; e < 3; ++e) {
      owners.push_back({edge_key(v[e], v[(e + 1) % 3]), t, v[e], v[(e + 1) % 3]});
    }
  }
  std::sort(owners.begin(), owners.end(), [](const EdgeOwner& a, const EdgeOwner& b) {
    return a.key != b.key ? a.key < b.key : a.tri < b.tri;
  });

  mesh.skeleton.clear();
  struct FaceEdge {
    Index kplus, kminus, a, b, tplus, tminus;
    std::size_t skeleton;
  };
  std::vector<FaceEdge> face_edges;
  for (std::size_t i = 0; i < owners.size();) {
    std::size_t j = i;
    while (j < owners.size() && owners[j].key == owners[i].key) {
      ++j;
    }
    const std::size_t n = j - i;
    if (n > 2) {
      throw MeshError("non-manifold edge (" + std::to_string(owners[i].a) + ", " +
                      std::to_string(owners[i].b) + ") shared by " + std::to_string(n) +
                      " triangles");
    }
    SkeletonEdge edge;
    if (n == 1) {
      edge.v = {owners[i].a, owners[i].b};
      edge.tri_plus = owners[i].tri;
    } else {
      const EdgeOwner& o1 = owners[i];
      const EdgeOwner& o2 = owners[i + 1];
      if (o1.a == o2.a) {
        throw MeshError("triangles " + std::to_string(o1.tri) + " and " +
                        std::to_string(o2.tri) + " have inconsistent orientation");
      }
      const Index p1 = mesh.triangles[o1.tri].parent;
      const Index p2 = mesh.triangles[o2.tri].parent;
      const bool first_plus = p1 < p2 || (p1 == p2 && o1.tri < o2.tri);
      const EdgeOwner& plus = first_plus ? o1 : o2;
      const EdgeOwner& minus = first_plus ? o2 : o1;
      edge.v = {plus.a, plus.b};
      edge.tri_plus = plus.tri;
      edge.tri_minus = minus.tri;
    }
    const Index kp = mesh.triangles[edge.tri_plus].parent;
    const Index km = edge.tri_minus >= 0 ? mesh.triangles[edge.tri_minus].parent : -1;
    if (kp != km) {
      face_edges.push_back({kp, km, edge.v[0], edge.v[1], edge.tri_plus, edge.tri_minus,
                            mesh.skeleton.size()});
    }
    mesh.skeleton.push_back(edge);
    i = j;
  }

  std::stable_sort(face_edges.begin(), face_edges.end(),
                   [](const FaceEdge& a, const FaceEdge& b) {
                     return std::tie(a.kplus, a.kminus) < std::tie(b.kplus, b.kminus);
                   });

  struct Run {
    Index kplus, kminus, min_vertex;
    std::vector<std::size_t> edges;  // indices into face_edges, in chain order
  };
  std::vector<Run> runs;
  for (std::size_t i = 0; i < face_edges.size();) {
    std::size_t j = i;
    while (j < face_edges.size() && face_edges[j].kplus == face_edges[i].kplus &&
           face_edges[j].kminus == face_edges[i].kminus) {
      ++j;
    }
    // Directed edges of one pair form disjoint paths along the loop of kplus.
    std::map<Index, std::size_t> by_start;
    std::map<Index, int> in_degree;
    for (std::size_t e = i; e < j; ++e) {
      by_start[face_edges[e].a] = e;
      ++in_degree[face_edges[e].b];
    }
    std::vector<char> used(j - i, 0);
    // Boundary runs are split at corners of the domain.
    const bool boundary = face_edges[i].kminus < 0;
    auto turns = [&](std::size_t e1, std::size_t e2) {
      const Point2 d1 = mesh.points[face_edges[e1].b] - mesh.points[face_edges[e1].a];
      const Point2 d2 = mesh.points[face_edges[e2].b] - mesh.points[face_edges[e2].a];
      return std::abs(cross(d1, d2)) > 1e-12 * d1.norm() * d2.norm();
    };
    auto follow = [&](std::size_t e0) {
      Run run{face_edges[i].kplus, face_edges[i].kminus, std::numeric_limits<Index>::max(), {}};
      std::size_t e = e0;
      while (!used[e - i]) {
        used[e - i] = 1;
        run.edges.push_back(e);
        run.min_vertex = std::min({run.min_vertex, face_edges[e].a, face_edges[e].b});
        const auto it = by_start.find(face_edges[e].b);
        if (it == by_start.end()) {
          break;
        }
        if (boundary && turns(e, it->second) && !used[it->second - i]) {
          runs.push_back(std::move(run));
          run = Run{face_edges[i].kplus, face_edges[i].kminus,
                    std::numeric_limits<Index>::max(), {}};
        }
        e = it->second;
      }
      if (!run.edges.empty()) {
        runs.push_back(std::move(run));
      }
    };
    for (const auto& [start, e] : by_start) {
      if (in_degree.find(start) == in_degree.end()) {
        follow(e);
      }
    }
    for (const auto& [start, e] : by_start) {
      if (!used[e - i]) {
        follow(e);
      }
    }
    i = j;
  }
  std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) {
    return std::tie(a.kplus, a.kminus, a.min_vertex) < std::tie(b.kplus, b.kminus, b.min_vertex);
  });

  mesh.faces.clear();
  for (const auto& run : runs) {
    InterfaceFace face;
    face.id = static_cast<Index>(mesh.faces.size());
    face.kplus = run.kplus;
    face.kminus = run.kminus;
    for (std::size_t e : run.edges) {
      const auto& fe = face_edges[e];
      face.edges.push_back({fe.a, fe.b});
      const Point2 d = mesh.points[fe.b] - mesh.points[fe.a];
      face.normals.emplace_back(d.y() / d.norm(), -d.x() / d.norm());
      face.tri_plus.push_back(fe.tplus);
      face.tri_minus.push_back(fe.tminus);
      mesh.skeleton[fe.skeleton].face = face.id;
    }
    mesh.faces.push_back(std::move(face));
  }
}

void compute_geometry(PolytopicMesh& mesh) {
  mesh.C_star = 0.0;
  for (auto& el : mesh.elements) {
    const auto poly = element_polygon(mesh, el.id);
    el.area = polygon_area(poly);
    el.H = polygon_diameter(poly);
    el.convex = polygon_is_convex(poly);
    el.rho = inscribed_radius(poly);
    if (!(el.rho >= 1e-12 * el.H)) {
      throw MeshError("degenerate element " + std::to_string(el.id) + ": rho = " +
                      std::to_string(el.rho) + ", H = " + std::to_string(el.H));
    }
    el.neighbors.clear();
    mesh.C_star = std::max(mesh.C_star, el.H / el.rho);
  }
  mesh.C_qu = 1.0;
  for (const auto& f : mesh.faces) {
    if (f.is_boundary()) {
      continue;
    }
    auto& a = mesh.elements[f.kplus];
    auto& b = mesh.elements[f.kminus];
    a.neighbors.push_back(b.id);
    b.neighbors.push_back(a.id);
    mesh.C_qu = std::max({mesh.C_qu, a.H / b.H, b.H / a.H});
  }
  for (auto& el : mesh.elements) {
    std::sort(el.neighbors.begin(), el.neighbors.end());
    el.neighbors.erase(std::unique(el.neighbors.begin(), el.neighbors.end()),
                       el.neighbors.end());
  }
  mesh.C_sh = 0.0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    mesh.C_sh = std::max(mesh.C_sh, mesh.triangle_diameter(t) / mesh.triangle_inradius(t));
  }
}

void validate_mesh(const PolytopicMesh& mesh) {
  check_triangles(mesh.points, mesh.triangles, mesh.num_elements());
  double tri_total = 0.0;
  double element_total = 0.0;
  for (const auto& el : mesh.elements) {
    if (el.tris.empty()) {
      throw MeshError("element " + std::to_string(el.id) + " has an empty submesh");
    }
    double a = 0.0;
    for (Index t : el.tris) {
      if (mesh.triangles[t].parent != el.id) {
        throw MeshError("triangle " + std::to_string(t) + " listed in element " +
                        std::to_string(el.id) + " has a different parent");
      }
      a += mesh.triangle_area(t);
    }
    if (std::abs(a - el.area) > 1e-12 * std::max(a, el.area)) {
      throw MeshError("submesh of element " + std::to_string(el.id) +
                      " does not tile its polygon");
    }
    tri_total += a;
    element_total += el.area;

    // The stored loop must visit its vertices in the order of the
    // boundary cycle of the submesh.
    const auto cycle = element_boundary_cycle(mesh, el.id);
    std::unordered_map<Index, std::size_t> pos;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      pos[cycle[i]] = i;
    }
    std::size_t wraps = 0;
    for (std::size_t i = 0; i < el.loop.size(); ++i) {
      const auto it = pos.find(el.loop[i]);
      if (it == pos.end()) {
        throw MeshError("loop vertex " + std::to_string(el.loop[i]) + " of element " +
                        std::to_string(el.id) + " is not on its submesh boundary");
      }
      const auto jt = pos.find(el.loop[(i + 1) % el.loop.size()]);
      if (jt != pos.end() && jt->second <= it->second) {
        ++wraps;
      }
    }
    if (wraps != 1) {
      throw MeshError("loop of element " + std::to_string(el.id) +
                      " is inconsistent with its submesh boundary");
    }
    if (!(el.rho > 0.0) || el.H < 2.0 * el.rho * (1.0 - 1e-9)) {
      throw MeshError("element " + std::to_string(el.id) + " violates H >= 2 rho > 0");
    }
  }
  if (std::abs(tri_total - element_total) > 1e-12 * tri_total) {
    throw MeshError("element areas do not sum to the submesh area");
  }

  // Every submesh edge on a polytope boundary belongs to exactly one face.
  std::size_t expected = 0;
  for (const auto& e : mesh.skeleton) {
    const Index kp = mesh.triangles[e.tri_plus].parent;
    const Index km = e.tri_minus >= 0 ? mesh.triangles[e.tri_minus].parent : -1;
    if (kp != km) {
      ++expected;
      if (e.face < 0) {
        throw MeshError("polytope boundary edge without face");
      }
    } else if (e.face >= 0) {
      throw MeshError("polytope interior edge assigned to a face");
    }
  }
  std::size_t assigned = 0;
  for (const auto& f : mesh.faces) {
    assigned += f.edges.size();
    for (std::size_t i = 0; i < f.edges.size(); ++i) {
      if (mesh.triangles[f.tri_plus[i]].parent != f.kplus ||
          (f.tri_minus[i] >= 0 ? mesh.triangles[f.tri_minus[i]].parent : -1) != f.kminus) {
        throw MeshError("face " + std::to_string(f.id) + " has a facet with wrong owners");
      }
    }
    // Local quasi-uniformity of the submesh at the interface.
    if (!f.is_boundary()) {
      const double Hp = mesh.elements[f.kplus].H;
      const double Hm = mesh.elements[f.kminus].H;
      for (std::size_t i = 0; i < f.edges.size(); ++i) {
        if (mesh.triangle_diameter(f.tri_plus[i]) > Hm * (1.0 + 1e-12) ||
            mesh.triangle_diameter(f.tri_minus[i]) > Hp * (1.0 + 1e-12)) {
          throw MeshError("face " + std::to_string(f.id) +
                          ": boundary triangle larger than the neighbouring element");
        }
      }
    }
  }
  if (assigned != expected) {
    throw MeshError("face audit: " + std::to_string(assigned) + " facets assigned, " +
                    std::to_string(expected) + " expected");
  }
}

PolytopicMesh build_mesh(std::vector<Point2> points, std::vector<Triangle> triangles,
                         Index num_elements) {
  if (num_elements <= 0) {
    throw MeshError("mesh needs at least one element");
  }
  check_triangles(points, triangles, num_elements);
  PolytopicMesh mesh;
  mesh.points = std::move(points);
  mesh.triangles = std::move(triangles);
  mesh.elements.resize(num_elements);
  for (Index k = 0; k < num_elements; ++k) {
    mesh.elements[k].id = k;
  }
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    mesh.elements[mesh.triangles[t].parent].tris.push_back(t);
  }
  for (auto& el : mesh.elements) {
    if (el.tris.empty()) {
      throw MeshError("element " + std::to_string(el.id) + " has no triangles");
    }
    el.loop = element_boundary_cycle(mesh, el.id);
  }
  finalize(mesh);
  return mesh;
}

PolytopicMesh structured_triangle_mesh(int n_base) {
  if (n_base < 1) {
    throw MeshError("n_base must be at least 1");
  }
  std::vector<Point2> points;
  std::vector<Triangle> tris;
  structured_grid(n_base, points, tris);
  for (std::size_t t = 0; t < tris.size(); ++t) {
    tris[t].parent = static_cast<Index>(t);
  }
  const auto n = static_cast<Index>(tris.size());
  return build_mesh(std::move(points), std::move(tris), n);
}

PolytopicMesh generate_agglomerated_mesh(const MeshGenOptions& options) {
  if (options.n_poly < 1) {
    throw MeshError("n_poly must be at least 1");
  }
  int n_base = options.n_base;
  if (n_base <= 0) {
    n_base = std::max(1, static_cast<int>(std::lround(std::sqrt(3.0 * options.n_poly))));
    while (2 * n_base * n_base < options.n_poly) {
      ++n_base;
    }
  }
  if (options.n_poly > 2 * n_base * n_base) {
    throw MeshError("n_poly = " + std::to_string(options.n_poly) + " exceeds 2 n_base^2 = " +
                    std::to_string(2 * n_base * n_base));
  }
  std::vector<Point2> points;
  std::vector<Triangle> tris;
  structured_grid(n_base, points, tris);
  Agglomerator agg(points, tris);

  std::string last_error = "region growing left unassigned triangles";
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    std::mt19937_64 rng(options.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(attempt));
    auto labels = agg.run(options.n_poly, rng, options.lloyd_iterations);
    if (labels.empty()) {
      continue;
    }
    // Number regions by their smallest triangle id.
    std::vector<Index> first(options.n_poly, std::numeric_limits<Index>::max());
    for (std::size_t t = 0; t < labels.size(); ++t) {
      first[labels[t]] = std::min(first[labels[t]], static_cast<Index>(t));
    }
    std::vector<Index> order(options.n_poly);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return first[a] < first[b]; });
    std::vector<Index> rename(options.n_poly);
    for (Index i = 0; i < options.n_poly; ++i) {
      rename[order[i]] = i;
    }
    auto local = tris;
    for (std::size_t t = 0; t < local.size(); ++t) {
      local[t].parent = rename[labels[t]];
    }
    try {
      return build_mesh(points, std::move(local), options.n_poly);
    } catch (const MeshError& e) {
      last_error = e.what();
    }
  }
  throw MeshError("agglomeration failed after " + std::to_string(options.max_attempts) +
                  " attempts (n_base = " + std::to_string(n_base) + ", n_poly = " +
                  std::to_string(options.n_poly) + ", seed = " + std::to_string(options.seed) +
                  "): " + last_error);
}

PolytopicMesh generate_agglomerated_mesh(int n_base, int n_poly, std::uint64_t seed) {
  MeshGenOptions options;
  options.n_base = n_base;
  options.n_poly = n_poly;
  options.seed = seed;
  return generate_agglomerated_mesh(options);
}

PolytopicMesh refine_submesh(const PolytopicMesh& mesh, int levels) {
  if (levels < 0) {
    throw MeshError("refinement levels must be non-negative");
  }
  PolytopicMesh out = mesh;
  for (int level = 0; level < levels; ++level) {
    std::unordered_map<std::uint64_t, Index> midpoint;
    auto mid = [&](Index a, Index b) {
      const auto key = edge_key(a, b);
      const auto it = midpoint.find(key);
      if (it != midpoint.end()) {
        return it->second;
      }
      const auto id = static_cast<Index>(out.points.size());
      out.points.push_back(0.5 * (out.points[a] + out.points[b]));
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Triangle> tris;
    tris.reserve(4 * out.triangles.size());
    for (const auto& t : out.triangles) {
      const Index a = t.v[0], b = t.v[1], c = t.v[2];
      const Index ab = mid(a, b);
      const Index bc = mid(b, c);
      const Index ca = mid(c, a);
      tris.push_back({{a, ab, ca}, t.parent});
      tris.push_back({{ab, b, bc}, t.parent});
      tris.push_back({{ca, bc, c}, t.parent});
      tris.push_back({{ab, bc, ca}, t.parent});
    }
    out.triangles = std::move(tris);
    for (auto& el : out.elements) {
      std::vector<Index> children;
      children.reserve(4 * el.tris.size());
      for (Index t : el.tris) {
        for (Index c = 0; c < 4; ++c) {
          children.push_back(4 * t + c);
        }
      }
      el.tris = std::move(children);
    }
  }
  if (levels > 0) {
    finalize(out);
  }
  return out;
}

}  // namespace polydg

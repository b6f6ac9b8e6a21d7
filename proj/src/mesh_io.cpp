#include "json.hpp"

#include "polydg/mesh.hpp"

namespace polydg {

using ordered_json = nlohmann::ordered_json;

std::string mesh_to_json(const PolytopicMesh& mesh) {
  ordered_json j;
  auto& points = j["points"] = ordered_json::array();
  for (const auto& p : mesh.points) {
    points.push_back({p.x(), p.y()});
  }
  auto& elements = j["elements"] = ordered_json::array();
  for (const auto& el : mesh.elements) {
    elements.push_back({{"loop", el.loop}, {"tris", el.tris}});
  }
  auto& tris = j["tris"] = ordered_json::array();
  for (const auto& t : mesh.triangles) {
    tris.push_back({t.v[0], t.v[1], t.v[2], t.parent});
  }
  auto& faces = j["faces"] = ordered_json::array();
  for (const auto& f : mesh.faces) {
    ordered_json edges = ordered_json::array();
    for (const auto& e : f.edges) {
      edges.push_back({e[0], e[1]});
    }
    faces.push_back({{"kplus", f.kplus}, {"kminus", f.kminus}, {"edges", std::move(edges)}});
  }
  return j.dump() + "\n";
}

PolytopicMesh mesh_from_json(const std::string& text) {
  PolytopicMesh mesh;
  std::vector<std::vector<std::array<Index, 2>>> face_edges;
  std::vector<std::array<Index, 2>> face_owners;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& p : j.at("points")) {
      mesh.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    for (const auto& t : j.at("tris")) {
      mesh.triangles.push_back(
          {{t.at(0).get<Index>(), t.at(1).get<Index>(), t.at(2).get<Index>()},
           t.at(3).get<Index>()});
    }
    const auto& elements = j.at("elements");
    for (std::size_t k = 0; k < elements.size(); ++k) {
      PolytopicElement el;
      el.id = static_cast<Index>(k);
      el.loop = elements[k].at("loop").get<std::vector<Index>>();
      el.tris = elements[k].at("tris").get<std::vector<Index>>();
      mesh.elements.push_back(std::move(el));
    }
    for (const auto& f : j.at("faces")) {
      face_owners.push_back({f.at("kplus").get<Index>(), f.at("kminus").get<Index>()});
      face_edges.push_back(f.at("edges").get<std::vector<std::array<Index, 2>>>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw MeshError(std::string("malformed mesh file: ") + e.what());
  }
  const auto nt = mesh.num_triangles();
  for (const auto& el : mesh.elements) {
    for (Index t : el.tris) {
      if (t < 0 || t >= nt) {
        throw MeshError("element " + std::to_string(el.id) + " lists missing triangle " +
                        std::to_string(t));
      }
    }
    for (Index v : el.loop) {
      if (v < 0 || v >= static_cast<Index>(mesh.points.size())) {
        throw MeshError("element " + std::to_string(el.id) + " loop lists missing point " +
                        std::to_string(v));
      }
    }
    if (el.loop.size() < 3) {
      throw MeshError("element " + std::to_string(el.id) + " loop has fewer than 3 vertices");
    }
  }
  build_interfaces(mesh);
  compute_geometry(mesh);
  validate_mesh(mesh);

  bool same = face_owners.size() == mesh.faces.size();
  for (std::size_t f = 0; same && f < mesh.faces.size(); ++f) {
    same = face_owners[f][0] == mesh.faces[f].kplus &&
           face_owners[f][1] == mesh.faces[f].kminus && face_edges[f] == mesh.faces[f].edges;
  }
  if (!same) {
    throw MeshError("face list in mesh file does not match its connectivity");
  }
  return mesh;
}

}  // namespace polydg

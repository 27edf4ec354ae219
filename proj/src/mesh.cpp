#include "lps/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace lps {

Vec3 SimplicialMesh::reference_vertex(int k) {
  switch (k) {
    case 0: return Vec3(0, 0, 0);
    case 1: return Vec3(1, 0, 0);
    case 2: return Vec3(0, 1, 0);
    default: return Vec3(0, 0, 1);
  }
}

int SimplicialMesh::ref_vertex_of_position(int c, int pos) const {
  const auto& order = cell_map_order[c];
  for (int k = 0; k <= dim; ++k)
    if (order[k] == pos) return k;
  throw std::logic_error("ref_vertex_of_position: bad position");
}

namespace {

void finalize_topology(SimplicialMesh& mesh) {
  const int nv = mesh.dim + 1;
  // Facets: sorted sub-tuples of each cell.
  std::map<std::array<int, 3>, int> facet_ids;
  mesh.cell_facets.assign(mesh.cells.size(), {-1, -1, -1, -1});
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    for (int k = 0; k < nv; ++k) {
      std::array<int, 3> f{-1, -1, -1};
      int m = 0;
      for (int j = 0; j < nv; ++j)
        if (j != k) f[m++] = mesh.cells[c][j];
      auto it = facet_ids.find(f);
      int id;
      if (it == facet_ids.end()) {
        id = static_cast<int>(mesh.facets.size());
        facet_ids.emplace(f, id);
        mesh.facets.push_back(f);
        mesh.facet_cells.push_back({static_cast<int>(c), -1});
      } else {
        id = it->second;
        auto& fc = mesh.facet_cells[id];
        if (fc[1] != -1) throw std::logic_error("facet with more than two cells");
        fc[1] = static_cast<int>(c);
        if (fc[0] > fc[1]) std::swap(fc[0], fc[1]);
      }
      mesh.cell_facets[c][k] = id;
    }
  }
  // Normals and areas; n_f is outward for K+.
  mesh.facet_normals.resize(mesh.facets.size());
  mesh.facet_areas.resize(mesh.facets.size());
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    const auto& fv = mesh.facets[f];
    Vec3 a = mesh.vertices[fv[0]], b = mesh.vertices[fv[1]];
    Vec3 n, centroid;
    if (mesh.dim == 2) {
      Vec3 t = b - a;
      mesh.facet_areas[f] = t.norm();
      n = Vec3(t.y(), -t.x(), 0).normalized();
      centroid = 0.5 * (a + b);
    } else {
      Vec3 cvx = mesh.vertices[fv[2]];
      Vec3 cr = (b - a).cross(cvx - a);
      mesh.facet_areas[f] = 0.5 * cr.norm();
      n = cr.normalized();
      centroid = (a + b + cvx) / 3.0;
    }
    int kplus = mesh.facet_cells[f][0];
    Vec3 cell_centroid = Vec3::Zero();
    for (int j = 0; j < nv; ++j) cell_centroid += mesh.vertices[mesh.cells[kplus][j]];
    cell_centroid /= nv;
    if (n.dot(centroid - cell_centroid) < 0) n = -n;
    mesh.facet_normals[f] = n;
  }
  // Edges (3D).
  if (mesh.dim == 3) {
    static const int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    std::map<std::array<int, 2>, int> edge_ids;
    mesh.cell_edges.assign(mesh.cells.size(), {});
    for (std::size_t c = 0; c < mesh.cells.size(); ++c)
      for (int e = 0; e < 6; ++e) {
        std::array<int, 2> key{mesh.cells[c][pairs[e][0]], mesh.cells[c][pairs[e][1]]};
        auto it = edge_ids.find(key);
        int id;
        if (it == edge_ids.end()) {
          id = static_cast<int>(mesh.edges.size());
          edge_ids.emplace(key, id);
          mesh.edges.push_back(key);
        } else {
          id = it->second;
        }
        mesh.cell_edges[c][e] = id;
      }
  }
  // Affine maps with positive determinant; a single vertex swap restores
  // orientation when the sorted tuple is negatively oriented.
  mesh.cell_maps.resize(mesh.cells.size());
  mesh.cell_map_order.resize(mesh.cells.size());
  mesh.cell_diameters.resize(mesh.cells.size());
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    std::array<int, 4> order{0, 1, 2, 3};
    auto build = [&](const std::array<int, 4>& ord) {
      Vec3 v0 = mesh.vertices[mesh.cells[c][ord[0]]];
      Vec3 v1 = mesh.vertices[mesh.cells[c][ord[1]]];
      Vec3 v2 = mesh.vertices[mesh.cells[c][ord[2]]];
      Vec3 v3 = mesh.dim == 3 ? Vec3(mesh.vertices[mesh.cells[c][ord[3]]]) : Vec3::UnitZ();
      Mat3 B;
      B.col(0) = v1 - v0;
      B.col(1) = v2 - v0;
      B.col(2) = mesh.dim == 3 ? Vec3(v3 - v0) : Vec3::UnitZ();
      return std::make_pair(B, v0);
    };
    auto [B, v0] = build(order);
    if (B.determinant() < 0) {
      if (mesh.dim == 2)
        std::swap(order[1], order[2]);
      else
        std::swap(order[2], order[3]);
      std::tie(B, v0) = build(order);
    }
    AffineCellMap m;
    m.linear = B;
    m.offset = v0;
    m.det = B.determinant();
    if (m.det <= 0) throw std::logic_error("cell map not orientable");
    m.inverse = B.inverse();
    m.inverse_transpose = m.inverse.transpose();
    mesh.cell_maps[c] = m;
    mesh.cell_map_order[c] = order;
    double diam = 0;
    for (int i = 0; i < nv; ++i)
      for (int j = i + 1; j < nv; ++j)
        diam = std::max(diam, (mesh.cell_vertex(c, i) - mesh.cell_vertex(c, j)).norm());
    mesh.cell_diameters[c] = diam;
  }
}

}  // namespace

SimplicialMesh build_structured_mesh(int dim, int n) {
  if (n < 1) throw std::invalid_argument("build_structured_mesh: n must be >= 1");
  if (dim != 2 && dim != 3)
    throw std::invalid_argument("build_structured_mesh: dim must be 2 or 3");
  SimplicialMesh mesh;
  mesh.dim = dim;
  const double h = 1.0 / n;
  if (dim == 2) {
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        mesh.vertices.push_back(Vec3(i * h, j * h, 0));
    auto vid = [n](int i, int j) { return i + j * (n + 1); };
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
        // Alternate the cut diagonal between rows of squares so neither
        // diagonal direction dominates globally.
        if (j % 2 == 1) {
          mesh.cells.push_back({a, b, c, -1});
          mesh.cells.push_back({a, c, d, -1});
        } else {
          mesh.cells.push_back({a, b, d, -1});
          mesh.cells.push_back({b, c, d, -1});
        }
      }
  } else {
    for (int k = 0; k <= n; ++k)
      for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
          mesh.vertices.push_back(Vec3(i * h, j * h, k * h));
    auto vid = [n](int i, int j, int k) {
      return i + j * (n + 1) + k * (n + 1) * (n + 1);
    };
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                    {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          for (const auto& p : perms) {
            std::array<int, 3> pos{i, j, k};
            std::array<int, 4> tet;
            tet[0] = vid(pos[0], pos[1], pos[2]);
            for (int s = 0; s < 3; ++s) {
              pos[p[s]] += 1;
              tet[s + 1] = vid(pos[0], pos[1], pos[2]);
            }
            // The Kuhn path has strictly increasing vertex ids.
            mesh.cells.push_back(tet);
          }
  }
  for (auto& c : mesh.cells)
    std::sort(c.begin(), c.begin() + dim + 1);
  finalize_topology(mesh);
  return mesh;
}

FacetQuadrature facet_quadrature(const SimplicialMesh& mesh, int facet_id,
                                 int degree) {
  if (facet_id < 0 || facet_id >= static_cast<int>(mesh.n_facets()))
    throw std::out_of_range("facet_quadrature: invalid facet id");
  FacetQuadrature fq;
  const QuadratureRule& rule = simplex_rule(mesh.dim - 1, degree);
  fq.param_rule = &rule;
  const auto& fv = mesh.facets[facet_id];
  Vec3 a = mesh.vertices[fv[0]], b = mesh.vertices[fv[1]];
  if (mesh.dim == 2) {
    double len = (b - a).norm();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      double t = rule.points[q][0];
      fq.points.push_back(a + t * (b - a));
      fq.weights.push_back(rule.weights[q] * len);
    }
  } else {
    Vec3 c = mesh.vertices[fv[2]];
    double jac = (b - a).cross(c - a).norm();  // = 2 * area
    for (std::size_t q = 0; q < rule.size(); ++q) {
      double x = rule.points[q][0], y = rule.points[q][1];
      fq.points.push_back(a + x * (b - a) + y * (c - a));
      fq.weights.push_back(rule.weights[q] * jac);
    }
  }
  return fq;
}

double facet_beta_normal_integral(const SimplicialMesh& mesh, int facet_id,
                                  const VectorField& beta, int quad_degree) {
  FacetQuadrature fq = facet_quadrature(mesh, facet_id, quad_degree);
  const Vec3& n = mesh.facet_normals[facet_id];
  double s = 0;
  for (std::size_t q = 0; q < fq.points.size(); ++q)
    s += fq.weights[q] * beta(fq.points[q]).dot(n);
  return s;
}

BoundaryClassification classify_boundary(const SimplicialMesh& mesh,
                                         const VectorField& beta,
                                         int quad_degree) {
  BoundaryClassification bc;
  bc.is_inflow.assign(mesh.n_facets(), 0);
  for (int f = 0; f < static_cast<int>(mesh.n_facets()); ++f) {
    if (!mesh.facet_on_boundary(f)) continue;
    FacetQuadrature fq = facet_quadrature(mesh, f, quad_degree);
    const Vec3& n = mesh.facet_normals[f];
    double integral = 0, beta_max = 0;
    for (std::size_t q = 0; q < fq.points.size(); ++q) {
      Vec3 bv = beta(fq.points[q]);
      integral += fq.weights[q] * bv.dot(n);
      beta_max = std::max(beta_max, bv.lpNorm<Eigen::Infinity>());
    }
    double eps = 1e-12 * mesh.facet_areas[f] * beta_max;
    if (integral < -eps) {
      bc.inflow_facets.push_back(f);
      bc.is_inflow[f] = 1;
    } else {
      bc.outflow_facets.push_back(f);
    }
  }
  return bc;
}

FacetGeometry facet_geometry(const SimplicialMesh& mesh, int facet_id) {
  if (facet_id < 0 || facet_id >= static_cast<int>(mesh.n_facets()))
    throw std::out_of_range("facet_geometry: invalid facet id");
  FacetGeometry g;
  g.area = mesh.facet_areas[facet_id];
  g.normal = mesh.facet_normals[facet_id];
  g.adjacent_cells = mesh.facet_cells[facet_id];
  g.local_facet_indices = {-1, -1};
  for (int side = 0; side < 2; ++side) {
    int c = g.adjacent_cells[side];
    if (c < 0) continue;
    for (int k = 0; k < mesh.facets_per_cell(); ++k)
      if (mesh.cell_facets[c][k] == facet_id) g.local_facet_indices[side] = k;
  }
  return g;
}

double shape_regularity(const SimplicialMesh& mesh) {
  double worst = 0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const int nv = mesh.dim + 1;
    Vec3 v0 = mesh.cell_vertex(c, 0);
    Eigen::MatrixXd A(mesh.dim, mesh.dim);
    Eigen::VectorXd rhs(mesh.dim);
    for (int i = 1; i < nv; ++i) {
      Vec3 d = mesh.cell_vertex(c, i) - v0;
      for (int j = 0; j < mesh.dim; ++j) A(i - 1, j) = 2.0 * d[j];
      rhs(i - 1) = d.squaredNorm();
    }
    Eigen::VectorXd x = A.fullPivLu().solve(rhs);
    double circum = x.norm();
    double surface = 0;
    for (int k = 0; k < nv; ++k)
      surface += mesh.facet_areas[mesh.cell_facets[c][k]];
    double inradius = mesh.dim * mesh.cell_volume(c) / surface;
    worst = std::max(worst, circum / inradius);
  }
  return worst;
}

void dump_mesh(const SimplicialMesh& mesh, std::ostream& os) {
  os << "VERTICES " << mesh.vertices.size() << "\n";
  for (const Vec3& v : mesh.vertices) {
    os << v.x() << " " << v.y();
    if (mesh.dim == 3) os << " " << v.z();
    os << "\n";
  }
  os << "CELLS " << mesh.n_cells() << "\n";
  for (const auto& c : mesh.cells) {
    for (int k = 0; k <= mesh.dim; ++k) os << (k ? " " : "") << c[k];
    os << "\n";
  }
  os << "FACETS " << mesh.n_facets() << "\n";
  for (std::size_t f = 0; f < mesh.n_facets(); ++f) {
    for (int k = 0; k < mesh.dim; ++k) os << (k ? " " : "") << mesh.facets[f][k];
    os << " cells " << mesh.facet_cells[f][0] << " " << mesh.facet_cells[f][1] << "\n";
  }
}

}  // namespace lps

#pragma once

#include "lps/geometry.hpp"
#include "lps/quadrature.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

namespace lps {

using VectorField = std::function<Vec3(const Vec3&)>;

/// Structured simplicial mesh of the unit square/cube with full facet
/// topology. Immutable after construction; safe for concurrent reads.
struct SimplicialMesh {
  int dim = 2;
  std::vector<Vec3> vertices;
  // Cell vertex tuples, sorted ascending; [3] = -1 in 2D.
  std::vector<std::array<int, 4>> cells;
  // Facet vertex tuples, sorted ascending; [2] = -1 in 2D.
  std::vector<std::array<int, 3>> facets;
  // Adjacent cells [K+, K-]; K- = -1 on boundary facets. n_f is the outward
  // normal of K+ (the smaller cell index on interior facets).
  std::vector<std::array<int, 2>> facet_cells;
  std::vector<Vec3> facet_normals;   // unit; outward on the boundary
  std::vector<double> facet_areas;   // length in 2D
  // Local facet k of a cell is the tuple with vertex k removed.
  std::vector<std::array<int, 4>> cell_facets;
  // 3D only: global edges (sorted pairs) and the six cell edges in local
  // pair order (0,1),(0,2),(0,3),(1,2),(1,3),(2,3) of the sorted tuple.
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 6>> cell_edges;

  std::vector<AffineCellMap> cell_maps;      // positive determinant
  // map_order[k] = position in the sorted tuple of the vertex that reference
  // vertex k maps to (identity or a single swap restoring orientation).
  std::vector<std::array<int, 4>> cell_map_order;
  std::vector<double> cell_diameters;        // longest edge

  std::size_t n_cells() const { return cells.size(); }
  std::size_t n_facets() const { return facets.size(); }
  std::size_t n_edges() const { return dim == 2 ? facets.size() : edges.size(); }
  bool facet_on_boundary(int f) const { return facet_cells[f][1] < 0; }
  int vertices_per_cell() const { return dim + 1; }
  int facets_per_cell() const { return dim + 1; }
  double cell_volume(int c) const {
    return cell_maps[c].det / (dim == 2 ? 2.0 : 6.0);
  }
  Vec3 cell_vertex(int c, int k) const { return vertices[cells[c][k]]; }
  /// Reference vertex index that maps onto the cell vertex at tuple
  /// position `pos` under the cell map.
  int ref_vertex_of_position(int c, int pos) const;
  static Vec3 reference_vertex(int k);
};

/// Unit square split into 2 n^2 triangles (cut diagonal alternating between
/// rows of squares) or unit cube split into 6 n^3 tetrahedra (Kuhn
/// subdivision with fixed permutation order). Deterministic.
SimplicialMesh build_structured_mesh(int dim, int n);

struct BoundaryClassification {
  std::vector<int> inflow_facets;
  std::vector<int> outflow_facets;
  std::vector<char> is_inflow;  // indexed by facet id, 0 for interior facets
};

/// Facet f is inflow iff the facet integral of beta . n_f is below
/// -eps_char with eps_char = 1e-12 * area * max |beta|; characteristic
/// facets (beta . n ~ 0) count as outflow.
BoundaryClassification classify_boundary(const SimplicialMesh& mesh,
                                         const VectorField& beta,
                                         int quad_degree = 6);

struct FacetGeometry {
  double area;
  Vec3 normal;
  std::array<int, 2> adjacent_cells;       // [K+, K-]
  std::array<int, 2> local_facet_indices;  // position within cell_facets, -1 if none
};

FacetGeometry facet_geometry(const SimplicialMesh& mesh, int facet_id);

/// Physical quadrature points and weights on a facet; weights sum to the
/// facet area. Points are affine combinations of the sorted facet vertices,
/// identical from either adjacent cell.
struct FacetQuadrature {
  std::vector<Vec3> points;
  std::vector<double> weights;
  const QuadratureRule* param_rule;  // rule on the (dim-1) reference simplex
};
FacetQuadrature facet_quadrature(const SimplicialMesh& mesh, int facet_id,
                                 int degree);

/// Signed facet integral of beta . n_f.
double facet_beta_normal_integral(const SimplicialMesh& mesh, int facet_id,
                                  const VectorField& beta, int quad_degree);

/// Max over cells of circumradius / inradius.
double shape_regularity(const SimplicialMesh& mesh);

/// Plain-text dump with VERTICES, CELLS, FACETS sections.
void dump_mesh(const SimplicialMesh& mesh, std::ostream& os);

}  // namespace lps

#include "lps/fe_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lps {

namespace {

constexpr int kDofQuadDegree = 12;

const int kPairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

int local_edge_of_positions(int p, int q) {
  if (p > q) std::swap(p, q);
  for (int e = 0; e < 6; ++e)
    if (kPairs[e][0] == p && kPairs[e][1] == q) return e;
  throw std::logic_error("local_edge_of_positions: bad pair");
}

// Inverse Piola: recover the reference-frame value from a physical value.
Vec3 piola_pullback(FieldKind kind, const AffineCellMap& m, const Vec3& v) {
  return kind == FieldKind::curl ? Vec3(m.linear.transpose() * v)
                                 : Vec3(m.det * (m.inverse * v));
}

}  // namespace

int FeSpace::dofs_per_facet() const {
  return dim_ == 2 ? r_ + 1 : (r_ + 1) * (r_ + 2) / 2;
}

FeSpace::FeSpace(const SimplicialMesh& mesh, FieldKind kind, int r, bool enriched)
    : mesh_(&mesh), kind_(kind), r_(r), enriched_(enriched), dim_(mesh.dim) {
  const ReferenceBasis& rb = reference_basis(kind, r, dim_);
  span_ = rb.functions;
  n_shared_ = rb.n_shared;
  shared_signature_.assign(rb.trace_signature.begin(),
                           rb.trace_signature.begin() + n_shared_);
  std::vector<VectorPoly> interior(rb.functions.begin() + n_shared_,
                                   rb.functions.end());
  if (enriched) {
    const BubbleBasis& bb = bubble_basis(kind, r, dim_);
    for (int idx : bb.retained) {
      span_.push_back(bb.functions[idx]);
      interior.push_back(bb.functions[idx]);
    }
  }
  n_span_ = static_cast<int>(span_.size());
  if (!interior.empty())
    interior_weights_ = orthonormalize_fields(interior, dim_, 2 * (r + 2) + 2);
  build_dof_map();
  build_cell_coefficients();
}

void FeSpace::build_dof_map() {
  const SimplicialMesh& m = *mesh_;
  const int n_int = n_span_ - n_shared_;
  long edge_base = 0, face_base = 0, interior_base = 0;
  if (kind_ == FieldKind::curl && dim_ == 3) {
    face_base = static_cast<long>(m.n_edges()) * dofs_per_edge();
    interior_base = face_base + static_cast<long>(m.n_facets()) * dofs_per_face();
  } else if (kind_ == FieldKind::curl) {
    interior_base = static_cast<long>(m.n_facets()) * dofs_per_edge();
  } else {
    interior_base = static_cast<long>(m.n_facets()) * dofs_per_facet();
  }
  n_global_ = static_cast<int>(interior_base + m.n_cells() * n_int);

  cell_dofs_.assign(m.n_cells(), {});
  for (std::size_t c = 0; c < m.n_cells(); ++c) {
    auto& dofs = cell_dofs_[c];
    dofs.reserve(n_span_);
    const auto& order = m.cell_map_order[c];
    for (int i = 0; i < n_shared_; ++i) {
      const TraceSignature& sig = shared_signature_[i];
      switch (sig.entity) {
        case TraceSignature::Entity::edge: {
          int e = local_edge_of_positions(order[kPairs[sig.entity_index][0]],
                                          order[kPairs[sig.entity_index][1]]);
          dofs.push_back(static_cast<int>(edge_base) +
                         m.cell_edges[c][e] * dofs_per_edge() + sig.moment);
          break;
        }
        case TraceSignature::Entity::face: {
          int f = m.cell_facets[c][order[sig.entity_index]];
          dofs.push_back(static_cast<int>(face_base) + f * dofs_per_face() +
                         sig.moment);
          break;
        }
        case TraceSignature::Entity::facet: {
          int f = m.cell_facets[c][order[sig.entity_index]];
          int per = (kind_ == FieldKind::curl) ? dofs_per_edge() : dofs_per_facet();
          dofs.push_back(static_cast<int>(
              (kind_ == FieldKind::curl ? edge_base : 0) +
              static_cast<long>(f) * per + sig.moment));
          break;
        }
        case TraceSignature::Entity::interior:
          throw std::logic_error("interior signature among shared dofs");
      }
    }
    for (int i = 0; i < n_int; ++i)
      dofs.push_back(static_cast<int>(interior_base + c * n_int + i));
  }
}

double FeSpace::shared_functional_field(int row, int cell,
                                        const VectorField& v) const {
  const SimplicialMesh& m = *mesh_;
  const TraceSignature& sig = shared_signature_[row];
  const auto& order = m.cell_map_order[cell];
  const QuadratureRule& r1 = simplex_rule(1, kDofQuadDegree);

  auto edge_moment = [&](const Vec3& a, const Vec3& b, int mm) {
    double s = 0;
    for (std::size_t q = 0; q < r1.size(); ++q) {
      double t = r1.points[q][0];
      s += r1.weights[q] * v(a + t * (b - a)).dot(b - a) * legendre01(mm, t);
    }
    return s;
  };

  if (sig.entity == TraceSignature::Entity::edge) {
    int e = local_edge_of_positions(order[kPairs[sig.entity_index][0]],
                                    order[kPairs[sig.entity_index][1]]);
    const auto& ev = m.edges[m.cell_edges[cell][e]];
    return edge_moment(m.vertices[ev[0]], m.vertices[ev[1]], sig.moment);
  }

  int f = m.cell_facets[cell][order[sig.entity_index]];
  const auto& fv = m.facets[f];
  if (kind_ == FieldKind::curl && dim_ == 2)
    return edge_moment(m.vertices[fv[0]], m.vertices[fv[1]], sig.moment);

  if (sig.entity == TraceSignature::Entity::face) {
    const auto& t0 = face_interior_tangential_basis(r_);
    const QuadratureRule& r2 = simplex_rule(2, kDofQuadDegree);
    Vec3 a = m.vertices[fv[0]];
    Eigen::Matrix<double, 3, 2> A;
    A.col(0) = m.vertices[fv[1]] - a;
    A.col(1) = m.vertices[fv[2]] - a;
    double s = 0;
    for (std::size_t q = 0; q < r2.size(); ++q) {
      const Vec3& xi = r2.points[q];
      Eigen::Vector2d tangential = A.transpose() * v(a + A * xi.head<2>());
      s += r2.weights[q] * tangential.dot(t0[sig.moment].value(xi).head<2>());
    }
    return s;
  }

  // div: facet normal moments against the fixed global normal.
  Vec3 n = m.facet_normals[f];
  if (dim_ == 2) {
    Vec3 a = m.vertices[fv[0]], b = m.vertices[fv[1]];
    double len = (b - a).norm(), s = 0;
    for (std::size_t q = 0; q < r1.size(); ++q) {
      double t = r1.points[q][0];
      s += r1.weights[q] * v(a + t * (b - a)).dot(n) * legendre01(sig.moment, t) * len;
    }
    return s;
  }
  const auto& scal = face_scalar_basis(r_);
  const QuadratureRule& r2 = simplex_rule(2, kDofQuadDegree);
  Vec3 a = m.vertices[fv[0]];
  Eigen::Matrix<double, 3, 2> A;
  A.col(0) = m.vertices[fv[1]] - a;
  A.col(1) = m.vertices[fv[2]] - a;
  double jac = A.col(0).cross(A.col(1)).norm();
  double s = 0;
  for (std::size_t q = 0; q < r2.size(); ++q) {
    const Vec3& xi = r2.points[q];
    s += r2.weights[q] * v(a + A * xi.head<2>()).dot(n) *
         scal[sig.moment].evaluate(xi) * jac;
  }
  return s;
}

double FeSpace::shared_functional(int row, int cell, const VectorPoly& shat) const {
  const AffineCellMap& map = mesh_->cell_maps[cell];
  FieldKind kind = kind_;
  VectorField v = [&map, &shat, kind](const Vec3& x) {
    return piola_value(kind, map, shat.value(map.to_reference(x)));
  };
  return shared_functional_field(row, cell, v);
}

void FeSpace::build_cell_coefficients() {
  const SimplicialMesh& m = *mesh_;
  const int n = n_span_;
  const int n_int = n - n_shared_;
  const QuadratureRule& vol = simplex_rule(dim_, 2 * (r_ + 2) + 2);

  // Reference-side interior moment rows are cell-independent.
  Eigen::MatrixXd Vint(n_int, n);
  for (int i = 0; i < n_int; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t q = 0; q < vol.size(); ++q)
        s += vol.weights[q] * span_[j].value(vol.points[q])
                                  .dot(interior_weights_[i].value(vol.points[q]));
      Vint(i, j) = s;
    }

  // Cells of identical shape (vertex offsets and facet normal orientation)
  // share the coefficient matrix.
  std::map<std::vector<long>, std::shared_ptr<Eigen::MatrixXd>> shape_cache;
  cell_coeff_.resize(m.n_cells());
  for (std::size_t c = 0; c < m.n_cells(); ++c) {
    std::vector<long> key;
    Vec3 v0 = m.cell_vertex(c, 0);
    double diam = m.cell_diameters[c];
    key.push_back(std::lround(diam * 1e12));
    for (int k = 1; k <= dim_; ++k) {
      Vec3 d = m.cell_vertex(c, k) - v0;
      for (int x = 0; x < 3; ++x)
        key.push_back(std::lround(d[x] / diam * 1e9));
    }
    Vec3 centroid = Vec3::Zero();
    for (int k = 0; k <= dim_; ++k) centroid += m.cell_vertex(c, k);
    centroid /= dim_ + 1;
    for (int k = 0; k <= dim_; ++k) {
      int f = m.cell_facets[c][k];
      Vec3 fc = Vec3::Zero();
      for (int j = 0; j < dim_; ++j) fc += m.vertices[m.facets[f][j]];
      fc /= dim_;
      key.push_back(m.facet_normals[f].dot(fc - centroid) > 0 ? 1 : -1);
    }

    auto it = shape_cache.find(key);
    if (it != shape_cache.end()) {
      cell_coeff_[c] = it->second;
      continue;
    }
    Eigen::MatrixXd V(n, n);
    for (int i = 0; i < n_shared_; ++i)
      for (int j = 0; j < n; ++j) V(i, j) = shared_functional(i, c, span_[j]);
    V.bottomRows(n_int) = Vint;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(V);
    auto C = std::make_shared<Eigen::MatrixXd>(
        lu.solve(Eigen::MatrixXd::Identity(n, n)));
    double residual = (V * (*C) - Eigen::MatrixXd::Identity(n, n)).norm();
    if (!(residual < 1e-7 * n))
      throw std::runtime_error("ill-conditioned-basis: cell moment matrix");
    cell_coeff_[c] = C;
    shape_cache.emplace(std::move(key), cell_coeff_[c]);
  }
}

BasisTabulation FeSpace::tabulate_span(const std::vector<Vec3>& ref_points) const {
  BasisTabulation tab;
  const int nq = static_cast<int>(ref_points.size());
  tab.values.resize(3 * nq, n_span_);
  tab.jacobians.resize(9 * nq, n_span_);
  for (int j = 0; j < n_span_; ++j)
    for (int q = 0; q < nq; ++q) {
      tab.values.block<3, 1>(3 * q, j) = span_[j].value(ref_points[q]);
      Mat3 J = span_[j].jacobian(ref_points[q]);
      for (int col = 0; col < 3; ++col)
        tab.jacobians.block<3, 1>(9 * q + 3 * col, j) = J.col(col);
    }
  return tab;
}

const BasisTabulation& FeSpace::facet_span_tabulation(
    int cell, int local_facet_pos, const QuadratureRule& param_rule) const {
  const SimplicialMesh& m = *mesh_;
  // Positions of the facet's sorted vertices within the cell tuple.
  std::array<int, 3> ref_idx{-1, -1, -1};
  int slot = 0;
  for (int p = 0; p <= dim_; ++p)
    if (p != local_facet_pos) ref_idx[slot++] = m.ref_vertex_of_position(cell, p);
  auto key = std::make_tuple(ref_idx[0], ref_idx[1], ref_idx[2],
                             param_rule.exactness_degree);
  {
    std::lock_guard<std::mutex> lock(facet_tab_mutex_);
    auto it = facet_tab_cache_.find(key);
    if (it != facet_tab_cache_.end()) return it->second;
  }
  std::vector<Vec3> pts(param_rule.size());
  for (std::size_t q = 0; q < param_rule.size(); ++q) {
    auto bary = param_rule.barycentric(q);
    Vec3 p = Vec3::Zero();
    for (int j = 0; j < dim_; ++j)
      p += bary[j] * SimplicialMesh::reference_vertex(ref_idx[j]);
    pts[q] = p;
  }
  BasisTabulation tab = tabulate_span(pts);
  std::lock_guard<std::mutex> lock(facet_tab_mutex_);
  return facet_tab_cache_.emplace(key, std::move(tab)).first->second;
}

Eigen::VectorXd FeSpace::interpolate(const VectorField& v) const {
  const SimplicialMesh& m = *mesh_;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n_global_);
  std::vector<char> done(n_global_, 0);
  const QuadratureRule& vol = simplex_rule(dim_, kDofQuadDegree);
  const int n_int = n_span_ - n_shared_;
  for (std::size_t c = 0; c < m.n_cells(); ++c) {
    const auto& dofs = cell_dofs_[c];
    for (int i = 0; i < n_shared_; ++i) {
      if (done[dofs[i]]) continue;
      u[dofs[i]] = shared_functional_field(i, c, v);
      done[dofs[i]] = 1;
    }
    const AffineCellMap& map = m.cell_maps[c];
    for (int i = 0; i < n_int; ++i) {
      double s = 0;
      for (std::size_t q = 0; q < vol.size(); ++q) {
        Vec3 ref_val = piola_pullback(kind_, map, v(map.to_physical(vol.points[q])));
        s += vol.weights[q] * ref_val.dot(interior_weights_[i].value(vol.points[q]));
      }
      u[dofs[n_shared_ + i]] = s;
    }
  }
  return u;
}

Vec3 FeSpace::eval(const Eigen::VectorXd& u, int cell, const Vec3& xref) const {
  const auto& dofs = cell_dofs_[cell];
  const Eigen::MatrixXd& C = *cell_coeff_[cell];
  Eigen::VectorXd local(n_span_);
  for (int i = 0; i < n_span_; ++i) local[i] = u[dofs[i]];
  Eigen::VectorXd span_coeff = C * local;
  Vec3 ref_val = Vec3::Zero();
  for (int j = 0; j < n_span_; ++j)
    if (span_coeff[j] != 0.0) ref_val += span_coeff[j] * span_[j].value(xref);
  return piola_value(kind_, mesh_->cell_maps[cell], ref_val);
}

Mat3 FeSpace::eval_jacobian(const Eigen::VectorXd& u, int cell,
                            const Vec3& xref) const {
  const auto& dofs = cell_dofs_[cell];
  const Eigen::MatrixXd& C = *cell_coeff_[cell];
  Eigen::VectorXd local(n_span_);
  for (int i = 0; i < n_span_; ++i) local[i] = u[dofs[i]];
  Eigen::VectorXd span_coeff = C * local;
  Mat3 J = Mat3::Zero();
  for (int j = 0; j < n_span_; ++j)
    if (span_coeff[j] != 0.0) J += span_coeff[j] * span_[j].jacobian(xref);
  return piola_jacobian(kind_, mesh_->cell_maps[cell], J);
}

}  // namespace lps

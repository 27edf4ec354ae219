#pragma once

#include "lps/fe_space.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace lps {

/// Solution sampled on a uniform lattice over the unit square/cube,
/// together with the range statistics used by the layer examples.
struct FieldDump {
  int dim = 2;
  int samples_per_side = 0;  // lattice has (samples_per_side + 1)^dim points
  std::vector<Vec3> points;
  std::vector<Vec3> values;      // full sampled field
  std::vector<double> component;  // first component, the quantity plotted

  double min_value = 0;  // of the first component
  double max_value = 0;
  // Excess beyond a reference range [ref_min, ref_max], zero when inside.
  double ref_min = 0;
  double ref_max = 0;
  double overshoot = 0;   // max(0, max_value - ref_max)
  double undershoot = 0;  // max(0, ref_min - min_value)
};

/// Sample the discrete field on a uniform lattice with `samples_per_side`
/// cells per side. The reference range defaults to the sampled range itself;
/// call set_reference_range afterwards to compute meaningful overshoots.
FieldDump sample_field(const Eigen::VectorXd& solution, const SimplicialMesh& mesh,
                       const FeSpace& space, int samples_per_side);

void set_reference_range(FieldDump& dump, double ref_min, double ref_max);

/// Legacy VTK ASCII unstructured grid: lattice points as VTK_QUAD /
/// VTK_HEXAHEDRON cells, the sampled vectors and their first component as
/// point data. All reals are written as double with 17 significant digits.
void write_vtk(const FieldDump& dump, const std::string& field_name,
               std::ostream& os);

/// The computational mesh itself (no point data); handy for inspecting the
/// triangulation in a viewer.
void write_mesh_vtk(const SimplicialMesh& mesh, std::ostream& os);

}  // namespace lps

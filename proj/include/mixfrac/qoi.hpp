#pragma once

#include "mixfrac/assembly.hpp"

#include <vector>

namespace mixfrac {

enum class StressEval {
  undegraded,  ///< 2 mu E + lambda tr(E) I
  degraded,    ///< g(phi) sigma+ + sigma-
};

/// Integral of sigma n over the tagged boundary, plus the boundary length.
struct ForceRecord {
  Vec2 integral = Vec2::Zero();
  double length = 0.0;
  BoundaryTag tag = BoundaryTag::none;

  Vec2 mean_traction() const { return length > 0.0 ? Vec2(integral / length) : Vec2::Zero(); }
};

/// Throws std::invalid_argument for a tag with no boundary edges.
ForceRecord boundary_force(const Assembler& asmb, const Vector& x, BoundaryTag tag, StressEval eval);

struct Energies {
  double elastic = 0.0;
  double crack = 0.0;
};
/// Elastic energy 1/2 (g(phi) sigma+ + sigma-) : E and crack energy, with the current phi.
Energies energies(const Assembler& asmb, const Vector& x);

struct CrackPath {
  std::vector<Vec2> points;
  bool touches_left = false;
  bool touches_hole = false;
  bool touches_right = false;
  bool simple = true;

  double max_height() const;
};

/// Nodal phi values of the Q1 field.
Vector phi_nodes(const DofMap& dofs, const Vector& x);

/// Medial polyline of {phi < threshold}: centroids of the sub-threshold nodes
/// binned along the dominant axis of the region. bin_width <= 0 uses twice the
/// smallest cell diameter.
CrackPath crack_path(const Mesh& mesh, const DofMap& dofs, const Vector& phi, double threshold = 0.1,
                     double bin_width = 0.0);

/// Arc length of the polyline.
double crack_length(const CrackPath& path);

/// Connected components of {phi < threshold}; nodes sharing a cell are adjacent.
std::vector<std::vector<int>> broken_components(const Mesh& mesh, const DofMap& dofs, const Vector& phi,
                                                double threshold = 0.1);

/// True if some sub-threshold component touches boundaries of both tag sets.
bool band_connects(const Mesh& mesh, const DofMap& dofs, const Vector& phi, const std::vector<BoundaryTag>& a,
                   const std::vector<BoundaryTag>& b, double threshold = 0.1);

/// True if nodes with phi >= threshold link the two boundaries along leaf edges.
bool intact_connects(const Mesh& mesh, const DofMap& dofs, const Vector& phi, BoundaryTag a, BoundaryTag b,
                     double threshold = 0.1);

}  // namespace mixfrac

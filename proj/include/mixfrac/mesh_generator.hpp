#pragma once

#include "mixfrac/mesh.hpp"

#include <optional>
#include <vector>

namespace mixfrac {

struct PrerefineRegion {
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Zero();
  int levels = 0;
};

/// Rectangle [0,width] x [0,height], optionally with a circular hole and a slit
/// notch entering from the left boundary. Lengths in mm.
struct MeshSpec {
  double width = 20.0;
  double height = 28.0;
  std::optional<Vec2> hole_center;
  double hole_diameter = 0.0;
  std::optional<double> notch_height;
  double notch_length = 0.0;
  double target_h = 1.0;
  std::vector<PrerefineRegion> prerefine_regions;
  /// Radial layers of the ring around the hole; 0 picks the smallest count that meets target_h.
  int ring_layers = 0;
  /// Half-width of the square block replaced by the ring; 0 means 1.5 radii, clipped.
  double block_half_width = 0.0;

  bool has_hole() const { return hole_center.has_value() && hole_diameter > 0.0; }
  bool has_notch() const { return notch_height.has_value() && notch_length > 0.0; }
};

/// Throws MeshError describing the first violated geometric requirement.
void validate(const MeshSpec& spec);

/// Interval counts for a tensor grid with the given breakpoints such that every
/// cell diagonal is at most `target_h` and the total cell count is minimal.
struct GridSubdivision {
  std::vector<double> x;  ///< grid line coordinates
  std::vector<double> y;
};
GridSubdivision subdivide(const std::vector<double>& xbreaks, const std::vector<double>& ybreaks,
                          double target_h);

Mesh generate_mesh(const MeshSpec& spec);

}  // namespace mixfrac

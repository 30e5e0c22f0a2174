#pragma once

#include <vector>

#include "lcdd/phase_space.hpp"

namespace lcdd {

/// Reproducing-kernel node set. coords is N x dim (dim 1 or 2); the kernel
/// support is circular with radius support_a, basis order fixed at 1.
struct NodeSet {
  Mat coords;
  double support_a = 0.0;
  int basis_order = 1;

  int dim() const { return static_cast<int>(coords.cols()); }
  long count() const { return coords.rows(); }
};

/// Shape-function values of the covering nodes at one point.
struct ShapeEval {
  Vec point;
  std::vector<long> node_ids;
  Vec values;
};

struct BoundarySegment {
  Eigen::Vector2d a;
  Eigen::Vector2d b;
  Eigen::Vector2d normal;  // outward unit normal
  double length() const { return (b - a).norm(); }
};

/// Axis-aligned conforming integration cell owned by one node.
struct ConformingCell {
  long node_id = -1;
  std::vector<Eigen::Vector2d> polygon;  // counterclockwise vertex loop
  double volume = 0.0;                   // area x unit thickness
  std::vector<BoundarySegment> boundary_segments;
};

/// Regular node lattice over the rectangle [0, length_x] x [0, length_y].
struct LatticeSpec {
  double length_x = 0.0;
  double length_y = 0.0;
  double spacing = 0.0;

  int nx() const;  // nodes along x
  int ny() const;
  long node_count() const { return static_cast<long>(nx()) * ny(); }
  long node_index(int ix, int iy) const { return static_cast<long>(iy) * nx() + ix; }
};

/// Cubic B-spline kernel of the normalized distance z >= 0; C^2, zero at z >= 1.
double cubic_bspline(double z);

/// Lattice nodes with support radius support_scale * spacing.
NodeSet lattice_nodes(const LatticeSpec& lattice, double support_scale = 1.75);

/// RK shape-function values at x (linear basis, cubic B-spline kernel).
/// Throws a coverage error if the moment matrix is singular at x.
ShapeEval rk_shape(const Vec& x, const NodeSet& nodes);

/// Voronoi cells of the regular lattice: axis-aligned rectangles, half cells
/// on edges and quarter cells at corners; a conforming partition, one cell
/// per node.
std::vector<ConformingCell> build_cells(const LatticeSpec& lattice);

/// Smoothed gradient rows of one cell: b_tilde components per covering node
/// from the boundary integral (two-point trapezoidal rule per segment).
struct SmoothedB {
  long node_id = -1;            // owner cell node
  std::vector<long> node_ids;   // covering nodes
  Mat grad;                     // 2 x cover: rows are b_tilde_1, b_tilde_2

  /// Assembled 3 x (2 cover) strain-displacement block
  /// [b1 0; 0 b2; b2 b1] per covering node.
  Mat bmat() const;
};

SmoothedB smoothed_gradient(const ConformingCell& cell, const NodeSet& nodes);

}  // namespace lcdd

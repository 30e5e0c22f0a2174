#pragma once

#include <vector>

#include "lcdd/meshfree.hpp"
#include "lcdd/phase_space.hpp"

namespace lcdd {

struct EssentialBC {
  int dof = -1;
  double value = 0.0;
};

/// One integration point: quadrature weight and its strain-displacement rows
/// over the supporting dofs.
struct PointRecord {
  double weight = 0.0;        // V_alpha
  std::vector<int> dofs;      // global dof ids of the columns of b
  Mat b;                      // q x dofs.size()
};

/// Discrete problem: integration-point rows, metric, essential BCs (with the
/// evaluation rows used by the transformation method), and the load vector.
struct Discretization {
  enum class Kind { truss, continuum2d };

  Kind kind = Kind::truss;
  int dof_count = 0;
  std::vector<PointRecord> points;
  Metric metric = Metric::uniaxial(1.0);
  std::vector<EssentialBC> bcs;
  // general constraint rows G d = bc_values (RK evaluation functionals for
  // continuum problems); when empty, unit rows are derived from bcs
  Mat bc_shape;
  Vec bc_values;
  Vec load;       // dof_count

  std::vector<double> member_length;  // truss only, for RMS weighting

  int q() const { return metric.q(); }
  long point_count() const { return static_cast<long>(points.size()); }
};

/// Stiffness K = sum V B^T M^eps B with the essential-BC transformation
/// baked in and the reduced block factored once; shared by the kinematic
/// and multiplier solves.
class AssembledSystem {
 public:
  explicit AssembledSystem(const Discretization& disc);

  const Mat& stiffness() const { return k_; }
  /// Full-space solution of K d = rhs with the essential values imposed
  /// through the transformation map.
  Vec solve(const Vec& rhs, double bc_scale) const;
  /// Residual of r projected onto the admissible (reduced) test space,
  /// normalized by the same projection of the reference vector.
  double reduced_residual(const Vec& r, const Vec& reference) const;

 private:
  Mat k_;
  Mat transform_;      // dof_count x n_free, orthonormal null-space basis of G
  Vec particular_;     // bc_scale = 1 particular solution of the constraints
  Eigen::LDLT<Mat> k_red_;
};

struct GlobalState {
  Vec displacement;
  Vec multiplier;
  std::vector<LocalState> states;
  double equilibrium_residual = 0.0;  // relative, on the admissible test space
  double compat_residual = 0.0;       // max |eps - B d| over points
};

/// One global step: solve the kinematic system for d, the multiplier system
/// for lambda, then update per-point strain (B d) and stress
/// (sig_hat + M^eps B lambda). load_factor scales both loads and prescribed
/// displacements.
GlobalState global_step(const Discretization& disc, const AssembledSystem& sys,
                        const std::vector<LocalState>& assigned,
                        double load_factor = 1.0);

/// Model-based reference: solve K d = f with the metric as elasticity tensor,
/// sigma = M^eps eps.
GlobalState model_solve(const Discretization& disc, const AssembledSystem& sys,
                        double load_factor = 1.0);

struct TrussTopology {
  struct Member {
    int i = 0;
    int j = 0;
    double area = 1.0;
  };

  Mat nodes;  // n x 2 coordinates
  std::vector<Member> members;
  std::vector<EssentialBC> bcs;  // dof = 2*node + comp
  Vec loads;                     // 2n
};

/// One integration point per member, B row (1/l)[-c, -s, c, s], V = A l.
Discretization build_truss(const TrussTopology& topo, double modulus);

/// Single horizontal bar, left node fixed, axial force at the right node.
TrussTopology one_bar_topology(double area = 0.02, double force = 10e3,
                               double length = 1.0);

/// Two-chord planar truss over 3 bays (15 members): pinned bottom-left
/// support, bottom-right support with prescribed horizontal displacement,
/// vertical force at a top chord node.
TrussTopology truss15_topology(double bay = 4.0, double height = 2.0,
                               double prescribed_ux = 0.01,
                               double force = 100e3);

/// Plane-stress cantilever on a regular lattice with SCNI cells: clamped
/// left edge, uniform shear traction on the right edge totaling force.
Discretization build_beam(double length, double height, double spacing,
                          double youngs, double poisson, double force,
                          double support_scale = 1.75);

}  // namespace lcdd

#pragma once

#include <vector>

#include "lcdd/datagen.hpp"
#include "lcdd/phase_space.hpp"

namespace lcdd {

/// k nearest dataset points to a query state, columns in distance order.
struct Neighborhood {
  std::vector<long> indices;  // dataset ordinals, distinct
  Mat matrix;                 // 2q x k, column j = dataset point indices[j]
  int k() const { return static_cast<int>(indices.size()); }
};

struct ProjectionResult {
  Vec weights;         // length k, all >= 0
  LocalState state;    // S_hat * w
  double pu_residual;  // |1^T w - 1|
  double objective;    // squared residual of the regularized NNLS system
};

struct SolverParams {
  int k = 6;
  double xi_bar = 1e5;    // partition-of-unity penalty scale
  double mu_bar = 1e-4;   // ridge scale
  double nnls_tol = 1e-10;
};

/// Lawson-Hanson active-set non-negative least squares:
/// min ||A y - z|| subject to y >= 0. Ties in the gradient selection break
/// to the lowest index; the outer loop is capped at 3p iterations.
Vec nnls(const Mat& a, const Vec& z, double tol = 1e-10);

/// Exact linear-scan k-NN in the metric norm, ties broken by lower index.
Neighborhood knn(const MaterialDataset& data, const LocalState& s,
                 const Metric& m, int k);

/// Caches the rescaled dataset so repeated queries cost O(p q) each.
class NeighborSearch {
 public:
  NeighborSearch(const MaterialDataset& data, const Metric& m);
  Neighborhood query(const LocalState& s, int k) const;

 private:
  const MaterialDataset& data_;
  const Metric& metric_;
  Mat scaled_;  // p x 2q, row i = sqrt_factor * s_i
};

/// Projection of s onto the convex hull of the neighborhood, solved as a
/// penalty-relaxed, ridge-regularized NNLS in the rescaled space.
ProjectionResult convex_project(const LocalState& s, const Neighborhood& nbhd,
                                const Metric& m, const SolverParams& params);

/// Single nearest dataset point and its metric distance (knn with k = 1).
std::pair<DatasetPoint, double> nearest_point(const MaterialDataset& data,
                                              const LocalState& s,
                                              const Metric& m);

}  // namespace lcdd

#include "lcdd/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lcdd {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Least squares on the active columns, zeros elsewhere.
Vec solve_active(const Mat& a, const Vec& z, const std::vector<int>& active) {
  Vec s = Vec::Zero(a.cols());
  if (active.empty()) return s;
  Mat sub(a.rows(), active.size());
  for (size_t c = 0; c < active.size(); ++c) sub.col(c) = a.col(active[c]);
  Vec sol = sub.colPivHouseholderQr().solve(z);
  for (size_t c = 0; c < active.size(); ++c) s(active[c]) = sol(c);
  return s;
}

// Least squares over the face spanned by `support` with sum(w) = 1 enforced
// through null-space elimination; unconstrained in sign.
Vec face_ls(const Mat& z_hat, const Vec& z, const std::vector<int>& support) {
  const long k = z_hat.cols();
  const long m = static_cast<long>(support.size());
  Vec w = Vec::Zero(k);
  if (m == 1) {
    w(support[0]) = 1.0;
    return w;
  }
  Mat sub(z_hat.rows(), m);
  for (long c = 0; c < m; ++c) sub.col(c) = z_hat.col(support[c]);
  // w = (1/m) 1 + N u with N spanning the zero-sum subspace
  Mat n = Mat::Zero(m, m - 1);
  for (long c = 0; c < m - 1; ++c) {
    n(c, c) = 1.0;
    n(m - 1, c) = -1.0;
  }
  Vec w0 = Vec::Constant(m, 1.0 / m);
  Vec u = (sub * n).colPivHouseholderQr().solve(z - sub * w0);
  Vec w_sub = w0 + n * u;
  for (long c = 0; c < m; ++c) w(support[c]) = w_sub(c);
  return w;
}

// Exact projection of z onto the convex hull of the columns of z_hat:
// active-set iteration in Lawson-Hanson form on the simplex, warm-started
// from a feasible weight vector. Monotone descent, so it terminates; makes
// the projection exactly idempotent, which the penalty-relaxed solve alone
// cannot provide.
Vec simplex_project(const Mat& z_hat, const Vec& z, Vec w) {
  const int k = static_cast<int>(z_hat.cols());
  double grad_tol =
      1e-10 * (1.0 + std::max((z_hat.transpose() * z).cwiseAbs().maxCoeff(),
                              z_hat.squaredNorm()));
  std::vector<int> support;
  for (int i = 0; i < k; ++i)
    if (w(i) > 0) support.push_back(i);

  for (int outer = 0; outer < 3 * k; ++outer) {
    Vec w_eq = face_ls(z_hat, z, support);
    // back off along w -> w_eq until the face weights are feasible
    for (int inner = 0; inner <= k && w_eq.minCoeff() < 0.0; ++inner) {
      double alpha = 1.0;
      for (int i : support)
        if (w_eq(i) < 0.0 && w(i) - w_eq(i) > 0.0)
          alpha = std::min(alpha, w(i) / (w(i) - w_eq(i)));
      w += alpha * (w_eq - w);
      std::vector<int> kept;
      for (int i : support) {
        if (w(i) > std::numeric_limits<double>::epsilon() * 16) {
          kept.push_back(i);
        } else {
          w(i) = 0.0;
        }
      }
      if (kept.size() == support.size()) kept.pop_back();
      support = std::move(kept);
      w_eq = face_ls(z_hat, z, support);
    }
    w = w_eq.cwiseMax(0.0);
    w /= w.sum();

    // optimality over the whole hull: a zero-weight column with reduced
    // gradient below the face multiplier offers strict descent
    Vec g = z_hat.transpose() * (z_hat * w - z);
    double lambda = 0.0;
    for (int i : support) lambda += g(i);
    lambda /= static_cast<double>(support.size());
    int enter = -1;
    double best = lambda - grad_tol;
    for (int i = 0; i < k; ++i)
      if (w(i) == 0.0 && g(i) < best) {
        best = g(i);
        enter = i;
      }
    if (enter < 0) break;
    support.push_back(enter);
  }
  return w;
}

}  // namespace

Vec nnls(const Mat& a, const Vec& z, double tol) {
  require(a.rows() >= 1 && a.cols() >= 1, "nnls: empty system");
  require(a.allFinite() && z.allFinite(), "nnls: non-finite input");
  require(z.size() == a.rows(), "nnls: dimension mismatch");

  const long p = a.cols();
  Vec y = Vec::Zero(p);
  const double z_norm = z.norm();
  if (z_norm == 0.0) return y;
  const double grad_ref = (a.transpose() * z).norm();

  std::vector<bool> in_active(p, false);
  std::vector<int> active;
  Vec r = z;

  const int cap = std::max<int>(10, 3 * static_cast<int>(p));
  for (int outer = 0; outer < cap; ++outer) {
    if (r.norm() <= tol * z_norm) return y;
    if (active.size() == static_cast<size_t>(p)) return y;

    // most negative gradient direction, lowest index on ties
    Vec grad = a.transpose() * r;
    int j = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < p; ++i) {
      if (!in_active[i] && grad(i) > best) {
        best = grad(i);
        j = i;
      }
    }
    if (j < 0 || best <= tol * grad_ref) return y;

    in_active[j] = true;
    active.push_back(j);

    Vec s = solve_active(a, z, active);
    // back-off loop: retreat along y -> s until the active set is feasible
    for (int inner = 0; inner <= p; ++inner) {
      double s_min = std::numeric_limits<double>::infinity();
      for (int i : active) s_min = std::min(s_min, s(i));
      if (s_min > 0.0) break;

      double alpha = std::numeric_limits<double>::infinity();
      for (int i : active)
        if (s(i) <= 0.0) alpha = std::min(alpha, y(i) / (y(i) - s(i)));
      y += alpha * (s - y);

      std::vector<int> still_active;
      for (int i : active) {
        if (y(i) > std::numeric_limits<double>::epsilon() * 16) {
          still_active.push_back(i);
        } else {
          y(i) = 0.0;
          in_active[i] = false;
        }
      }
      active = std::move(still_active);
      if (active.empty()) break;
      s = solve_active(a, z, active);
    }
    y = s.cwiseMax(0.0);
    r = z - a * y;
  }
  throw std::runtime_error("nnls: iteration cap reached (3p outer steps)");
}

NeighborSearch::NeighborSearch(const MaterialDataset& data, const Metric& m)
    : data_(data), metric_(m) {
  require(data.q() == m.q(), "NeighborSearch: dataset/metric dimension mismatch");
  scaled_ = data.states() * m.sqrt_factor().transpose();
}

Neighborhood NeighborSearch::query(const LocalState& s, int k) const {
  require(k >= 1, "knn: k must be >= 1");
  require(k <= data_.size(), "knn: k exceeds dataset size");
  require(s.q() == metric_.q(), "knn: dimension mismatch");

  const long p = data_.size();
  Vec zq = metric_.sqrt_factor() * s.packed();
  Vec dist(p);
  for (long i = 0; i < p; ++i)
    dist(i) = (scaled_.row(i).transpose() - zq).squaredNorm();

  std::vector<long> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](long lhs, long rhs) {
                      if (dist(lhs) != dist(rhs)) return dist(lhs) < dist(rhs);
                      return lhs < rhs;
                    });

  Neighborhood nbhd;
  nbhd.indices.assign(order.begin(), order.begin() + k);
  nbhd.matrix.resize(2 * data_.q(), k);
  for (int c = 0; c < k; ++c)
    nbhd.matrix.col(c) = data_.states().row(nbhd.indices[c]).transpose();
  return nbhd;
}

Neighborhood knn(const MaterialDataset& data, const LocalState& s,
                 const Metric& m, int k) {
  return NeighborSearch(data, m).query(s, k);
}

ProjectionResult convex_project(const LocalState& s, const Neighborhood& nbhd,
                                const Metric& m, const SolverParams& params) {
  require(nbhd.k() >= 1, "convex_project: empty neighborhood");
  require(nbhd.matrix.rows() == 2 * m.q(),
          "convex_project: neighborhood/metric dimension mismatch");
  require(s.q() == m.q(), "convex_project: dimension mismatch");
  require(s.packed().allFinite() && nbhd.matrix.allFinite(),
          "convex_project: non-finite input");
  require(params.xi_bar > 0 && params.mu_bar >= 0,
          "convex_project: invalid penalty parameters");

  const int k = nbhd.k();
  if (k == 1) {
    // hull of one point is the point itself
    ProjectionResult res;
    res.weights = Vec::Ones(1);
    res.state = LocalState::from_packed(nbhd.matrix.col(0));
    res.pu_residual = 0.0;
    res.objective = (rescale(s - res.state, m)).squaredNorm();
    return res;
  }

  Mat z_hat = m.sqrt_factor() * nbhd.matrix;  // 2q x k
  Vec z = m.sqrt_factor() * s.packed();

  double scale = z_hat.squaredNorm() / k;  // tr(Z^T Z) / k
  if (scale <= 0.0) scale = std::max(z.squaredNorm(), 1.0);
  double xi = params.xi_bar * scale;
  double mu = params.mu_bar * scale;

  const long n = z_hat.rows();
  long rows = n + 1 + (mu > 0 ? k : 0);
  Mat a = Mat::Zero(rows, k);
  Vec rhs = Vec::Zero(rows);
  a.topRows(n) = z_hat;
  rhs.head(n) = z;
  a.row(n).setConstant(std::sqrt(xi));
  rhs(n) = std::sqrt(xi);
  if (mu > 0)
    a.bottomRows(k).diagonal().setConstant(std::sqrt(mu));

  ProjectionResult res;
  // the relaxed solve supplies a warm start; the exact simplex projection
  // then enforces sum(w) = 1 and full hull optimality
  Vec w0 = nnls(a, rhs, params.nnls_tol).cwiseMax(0.0);
  double w0_sum = w0.sum();
  if (w0_sum > 0) {
    w0 /= w0_sum;
  } else {
    w0.setConstant(1.0 / k);
  }
  res.weights = simplex_project(z_hat, z, std::move(w0));
  res.state = LocalState::from_packed(nbhd.matrix * res.weights);
  res.pu_residual = std::abs(res.weights.sum() - 1.0);
  res.objective = (a * res.weights - rhs).squaredNorm();
  return res;
}

std::pair<DatasetPoint, double> nearest_point(const MaterialDataset& data,
                                              const LocalState& s,
                                              const Metric& m) {
  Neighborhood nbhd = knn(data, s, m, 1);
  DatasetPoint pt = data.point(nbhd.indices[0]);
  return {pt, m_norm(s - pt.state, m)};
}

}  // namespace lcdd

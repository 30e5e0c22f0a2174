#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "lcdd/nnls.hpp"
#include "lcdd/rng.hpp"

using namespace lcdd;

namespace {

// Exhaustive oracle: solve the unconstrained LS on every support subset,
// keep the feasible minimizer. Exponential, fine for p <= 6.
double nnls_oracle_objective(const Mat& a, const Vec& z) {
  int p = static_cast<int>(a.cols());
  double best = z.norm();  // empty support
  for (unsigned mask = 1; mask < (1u << p); ++mask) {
    std::vector<int> cols;
    for (int j = 0; j < p; ++j)
      if (mask & (1u << j)) cols.push_back(j);
    Mat sub(a.rows(), cols.size());
    for (size_t j = 0; j < cols.size(); ++j) sub.col(j) = a.col(cols[j]);
    Vec y = sub.colPivHouseholderQr().solve(z);
    if ((y.array() < -1e-9).any()) continue;
    best = std::min(best, (sub * y - z).norm());
  }
  return best;
}

double kkt_residual(const Mat& a, const Vec& z, const Vec& y) {
  Vec g = a.transpose() * (a * y - z);
  double scale = (a.transpose() * z).norm() + 1.0;
  double worst = 0.0;
  for (int i = 0; i < y.size(); ++i) {
    if (y(i) > 0)
      worst = std::max(worst, std::abs(g(i)) / scale);
    else
      worst = std::max(worst, std::max(0.0, -g(i)) / scale);
  }
  return worst;
}

MaterialDataset scalar_dataset(const std::vector<std::pair<double, double>>& pts) {
  Mat states(pts.size(), 2);
  for (size_t i = 0; i < pts.size(); ++i) {
    states(i, 0) = pts[i].first;
    states(i, 1) = pts[i].second;
  }
  return MaterialDataset(std::move(states), {});
}

Neighborhood make_nbhd(const std::vector<LocalState>& states) {
  Neighborhood n;
  n.matrix.resize(2 * states[0].q(), states.size());
  for (size_t j = 0; j < states.size(); ++j) {
    n.indices.push_back(static_cast<long>(j));
    n.matrix.col(j) = states[j].packed();
  }
  return n;
}

}  // namespace

TEST_CASE("nnls identity and clipping cases") {
  Mat eye = Mat::Identity(2, 2);
  Vec z(2);
  z << 1, 2;
  Vec y = nnls(eye, z);
  CHECK(y(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(y(1) == doctest::Approx(2.0).epsilon(1e-12));

  z << 1, -2;
  y = nnls(eye, z);
  CHECK(y(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(y(1) == 0.0);
}

TEST_CASE("nnls gradient tie breaks to the lowest index") {
  Mat a(1, 2);
  a << 1, 1;
  Vec z(1);
  z << 1;
  Vec y = nnls(a, z);
  CHECK(y(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(y(1) == 0.0);
}

TEST_CASE("nnls matches the exhaustive active-set oracle") {
  Rng rng(1234);
  for (int t = 0; t < 500; ++t) {
    int n = 1 + static_cast<int>(rng.uniform01() * 6);
    int p = 1 + static_cast<int>(rng.uniform01() * 6);
    Mat a(n, p);
    Vec z(n);
    for (int i = 0; i < n; ++i) {
      z(i) = rng.uniform(-2, 2);
      for (int j = 0; j < p; ++j) a(i, j) = rng.uniform(-2, 2);
    }
    // every fifth instance gets duplicated columns to exercise degeneracy
    if (t % 5 == 0 && p >= 2) a.col(p - 1) = a.col(0);

    Vec y = nnls(a, z);
    REQUIRE(y.size() == p);
    CHECK(y.minCoeff() >= 0.0);
    double obj = (a * y - z).norm();
    CHECK(obj <= z.norm() + 1e-12);
    CHECK(obj <= nnls_oracle_objective(a, z) + 1e-8);
    CHECK(kkt_residual(a, z, y) <= 1e-8);
  }
}

TEST_CASE("nnls rejects non-finite input") {
  Mat a(1, 1);
  a << std::numeric_limits<double>::quiet_NaN();
  Vec z(1);
  z << 1;
  CHECK_THROWS_AS(nnls(a, z), std::invalid_argument);
}

TEST_CASE("knn basic geometry and tie-breaking") {
  Metric m = Metric::uniaxial(1.0);
  MaterialDataset d = scalar_dataset({{0, 0}, {1, 0}, {2, 0}, {3, 0}});

  Neighborhood n = knn(d, LocalState::uniaxial(1.2, 0), m, 2);
  REQUIRE(n.k() == 2);
  CHECK(n.indices[0] == 1);
  CHECK(n.indices[1] == 2);
  CHECK(n.matrix(0, 0) == 1.0);
  CHECK(n.matrix(0, 1) == 2.0);

  // member query
  Neighborhood n0 = knn(d, LocalState::uniaxial(0, 0), m, 1);
  CHECK(n0.indices[0] == 0);

  // duplicated points at equal distance: lower index wins
  MaterialDataset dup = scalar_dataset({{1, 0}, {1, 0}, {2, 0}});
  Neighborhood nt = knn(dup, LocalState::uniaxial(1, 0), m, 2);
  CHECK(nt.indices[0] == 0);
  CHECK(nt.indices[1] == 1);

  CHECK_THROWS_AS(knn(d, LocalState::uniaxial(0, 0), m, 5),
                  std::invalid_argument);
}

TEST_CASE("NeighborSearch agrees with knn") {
  Rng rng(5);
  Metric m = Metric::uniaxial(100e6);
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 200; ++i)
    pts.push_back({rng.uniform(-0.01, 0.01), rng.uniform(-1e6, 1e6)});
  MaterialDataset d = scalar_dataset(pts);
  NeighborSearch search(d, m);
  for (int t = 0; t < 50; ++t) {
    LocalState s =
        LocalState::uniaxial(rng.uniform(-0.01, 0.01), rng.uniform(-1e6, 1e6));
    Neighborhood a = search.query(s, 7);
    Neighborhood b = knn(d, s, m, 7);
    CHECK(a.indices == b.indices);
  }
}

TEST_CASE("nearest_point equals brute-force scan") {
  Rng rng(6);
  Metric m = Metric::uniaxial(100e6);
  MaterialDataset d = gen_linear_truss(300, 100e6, 0.01, {0.1, 21});
  for (int t = 0; t < 50; ++t) {
    LocalState s =
        LocalState::uniaxial(rng.uniform(-0.012, 0.012), rng.uniform(-1.2e6, 1.2e6));
    auto [point, dist] = nearest_point(d, s, m);
    double best = std::numeric_limits<double>::infinity();
    long best_i = -1;
    for (long i = 0; i < d.size(); ++i) {
      double di = m_norm(s - d.state(i), m);
      if (di < best) {
        best = di;
        best_i = i;
      }
    }
    CHECK(point.index == best_i);
    CHECK(dist == doctest::Approx(m_norm(s - point.state, m)).epsilon(1e-14));
  }

  auto [p0, d0] = nearest_point(d, d.state(17), m);
  CHECK(p0.index == 17);
  CHECK(d0 == 0.0);
}

TEST_CASE("convex projection: interior point reproduced") {
  Metric m = Metric::uniaxial(1.0);
  Neighborhood n = make_nbhd({LocalState::uniaxial(0, 0),
                              LocalState::uniaxial(2, 0),
                              LocalState::uniaxial(0, 2)});
  SolverParams params;
  params.k = 3;
  ProjectionResult r = convex_project(LocalState::uniaxial(0.5, 0.5), n, m, params);
  CHECK(r.state.strain(0) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(r.state.stress(0) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(r.weights.minCoeff() >= 0.0);
  CHECK(r.pu_residual <= 10.0 / params.xi_bar);

  // interior with no ridge: near-exact fit
  params.mu_bar = 0.0;
  ProjectionResult r0 =
      convex_project(LocalState::uniaxial(0.5, 0.5), n, m, params);
  double z2 = rescale(LocalState::uniaxial(0.5, 0.5), m).squaredNorm();
  double resid2 = (r0.state - LocalState::uniaxial(0.5, 0.5)).packed().squaredNorm();
  CHECK(resid2 <= 1e-6 * z2 + 1e-12);
}

TEST_CASE("convex projection onto a segment matches the grid-search oracle") {
  Metric m = Metric::uniaxial(1.0);
  LocalState a = LocalState::uniaxial(0, 0), b = LocalState::uniaxial(1, 0);
  Neighborhood n = make_nbhd({a, b});
  SolverParams params;
  params.k = 2;
  LocalState s = LocalState::uniaxial(0.5, 1.0);
  ProjectionResult r = convex_project(s, n, m, params);
  CHECK(r.state.strain(0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.state.stress(0) == doctest::Approx(0.0));
  CHECK(r.weights(0) == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(r.weights(1) == doctest::Approx(0.5).epsilon(1e-5));

  // dense search over the 1-simplex, coarse pass then refinement
  auto dist = [&](double w) {
    LocalState hull(w * b.strain + (1 - w) * a.strain,
                    w * b.stress + (1 - w) * a.stress);
    return m_norm(s - hull, m);
  };
  double best_w = 0, best_d = std::numeric_limits<double>::infinity();
  for (double w = 0; w <= 1.0; w += 1e-3)
    if (dist(w) < best_d) best_d = dist(w), best_w = w;
  for (double w = std::max(0.0, best_w - 2e-3); w <= std::min(1.0, best_w + 2e-3);
       w += 1e-7)
    if (dist(w) < best_d) best_d = dist(w), best_w = w;
  CHECK(r.weights(1) == doctest::Approx(best_w).epsilon(1e-6));
}

TEST_CASE("convex projection with k=1 returns the neighbor exactly") {
  Metric m = Metric::uniaxial(100e6);
  LocalState only = LocalState::uniaxial(0.003, 2.9e5);
  Neighborhood n = make_nbhd({only});
  SolverParams params;
  params.k = 1;
  ProjectionResult r = convex_project(LocalState::uniaxial(0.01, -1e6), n, m, params);
  CHECK(r.state.strain(0) == only.strain(0));
  CHECK(r.state.stress(0) == only.stress(0));
  REQUIRE(r.weights.size() == 1);
  CHECK(r.weights(0) == 1.0);
}

TEST_CASE("convex projection properties on random neighborhoods") {
  Rng rng(99);
  Metric m = Metric::uniaxial(1.0);
  SolverParams params;
  int idempotence_checked = 0;
  for (int t = 0; t < 1000; ++t) {
    int k = 2 + static_cast<int>(rng.uniform01() * 7);
    params.k = k;
    std::vector<LocalState> pts;
    for (int j = 0; j < k; ++j)
      pts.push_back(LocalState::uniaxial(rng.uniform(-2, 2), rng.uniform(-2, 2)));
    Neighborhood n = make_nbhd(pts);
    LocalState s = LocalState::uniaxial(rng.uniform(-3, 3), rng.uniform(-3, 3));

    ProjectionResult r = convex_project(s, n, m, params);
    CHECK(r.weights.minCoeff() >= 0.0);
    CHECK(r.pu_residual <= 10.0 / params.xi_bar);

    ProjectionResult again = convex_project(r.state, n, m, params);
    double drift = m_norm(again.state - r.state, m);
    CHECK(drift <= 1e-8 * (1.0 + m_norm(r.state, m)));
    ++idempotence_checked;

    // common positive rescaling of neighbors and query leaves weights alone
    double c = std::exp(rng.uniform(-2, 2));
    std::vector<LocalState> scaled;
    for (const auto& p : pts)
      scaled.push_back(LocalState(c * p.strain, c * p.stress));
    ProjectionResult rs = convex_project(LocalState(c * s.strain, c * s.stress),
                                         make_nbhd(scaled), m, params);
    CHECK((rs.weights - r.weights).cwiseAbs().maxCoeff() <=
          1e-6 * (1.0 + r.weights.cwiseAbs().maxCoeff()));
  }
  CHECK(idempotence_checked == 1000);
}

TEST_CASE("projection argmin is rotation-invariant when the ridge is off") {
  Rng rng(314);
  Metric m = Metric::uniaxial(1.0);
  SolverParams params;
  params.mu_bar = 0.0;
  for (int t = 0; t < 100; ++t) {
    // k <= 3 keeps the unregularized argmin unique in the 2D phase space
    int k = 2 + static_cast<int>(rng.uniform01() * 2);
    params.k = k;
    std::vector<LocalState> pts, rotated;
    double theta = rng.uniform(0, 6.28);
    Eigen::Matrix2d rot;
    rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    for (int j = 0; j < k; ++j) {
      LocalState p = LocalState::uniaxial(rng.uniform(-2, 2), rng.uniform(-2, 2));
      pts.push_back(p);
      rotated.push_back(LocalState::from_packed(rot * p.packed()));
    }
    LocalState s = LocalState::uniaxial(rng.uniform(-3, 3), rng.uniform(-3, 3));
    LocalState sr = LocalState::from_packed(rot * s.packed());

    // with the identity-block metric, sqrt_factor commutes with the rotation,
    // so this rotates {Z, z} jointly
    ProjectionResult a = convex_project(s, make_nbhd(pts), m, params);
    ProjectionResult b = convex_project(sr, make_nbhd(rotated), m, params);
    CHECK((a.weights - b.weights).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

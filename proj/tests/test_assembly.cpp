#include "doctest.h"

#include <cmath>

#include "lcdd/assembly.hpp"
#include "lcdd/rng.hpp"

using namespace lcdd;

namespace {

// prescribe a linear displacement field on every boundary node of a beam
// lattice (replacing the clamped-edge constraints)
Discretization patch_discretization(double lx, double ly, double h) {
  Discretization disc = build_beam(lx, ly, h, 30e6, 0.3, 0.0);
  LatticeSpec lattice{lx, ly, h};
  NodeSet nodes = lattice_nodes(lattice);

  auto ux = [](double x, double y) { return 0.003 * x + 0.001 * y; };
  auto uy = [](double x, double y) { return -0.002 * x + 0.004 * y; };

  // pin the boundary nodes and the half-spacing points between them, which
  // are exactly the boundary integration points of the edge cells
  std::vector<Eigen::Vector2d> pins;
  for (double x = 0; x <= lx + 1e-12; x += h / 2) {
    pins.emplace_back(x, 0.0);
    pins.emplace_back(x, ly);
  }
  for (double y = h / 2; y < ly - 1e-12; y += h / 2) {
    pins.emplace_back(0.0, y);
    pins.emplace_back(lx, y);
  }

  disc.bcs.clear();
  disc.bc_shape = Mat::Zero(2 * pins.size(), disc.dof_count);
  disc.bc_values = Vec::Zero(2 * pins.size());
  long row = 0;
  for (const Eigen::Vector2d& pin : pins) {
    ShapeEval eval = rk_shape(pin, nodes);
    for (int comp = 0; comp < 2; ++comp, ++row) {
      disc.bc_values(row) =
          comp == 0 ? ux(pin.x(), pin.y()) : uy(pin.x(), pin.y());
      for (long i = 0; i < eval.values.size(); ++i)
        disc.bc_shape(row, 2 * eval.node_ids[i] + comp) = eval.values(i);
    }
  }
  return disc;
}

}  // namespace

TEST_CASE("one-bar stiffness assembles to the hand value") {
  Discretization disc = build_truss(one_bar_topology(), 100e6);
  REQUIRE(disc.point_count() == 1);
  CHECK(disc.points[0].weight == doctest::Approx(0.02));
  AssembledSystem one_bar_sys(disc);
  const Mat& k = one_bar_sys.stiffness();
  CHECK(k(0, 0) == doctest::Approx(2e6).epsilon(1e-12));
  CHECK(k(2, 2) == doctest::Approx(2e6).epsilon(1e-12));
  CHECK(k(0, 2) == doctest::Approx(-2e6).epsilon(1e-12));
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);

  // reduced system: d = F / K_red = 10e3 / 2e6
  AssembledSystem sys(disc);
  GlobalState gs = model_solve(disc, sys);
  CHECK(gs.displacement(2) == doctest::Approx(5e-3).epsilon(1e-12));
  CHECK(gs.states[0].stress(0) == doctest::Approx(0.5e6).epsilon(1e-12));
}

TEST_CASE("two collinear bars: tridiagonal pattern, zero row sums") {
  TrussTopology topo;
  topo.nodes.resize(3, 2);
  topo.nodes << 0, 0, 1, 0, 2, 0;
  topo.members = {{0, 1, 0.02}, {1, 2, 0.02}};
  topo.bcs = {{0, 0.0}, {1, 0.0}, {3, 0.0}, {5, 0.0}};
  topo.loads = Vec::Zero(6);
  Discretization disc = build_truss(topo, 100e6);
  AssembledSystem two_bar_sys(disc);
  const Mat& k = two_bar_sys.stiffness();
  // x-dof rows: free-free stiffness annihilates rigid translation
  for (int r : {0, 2, 4})
    CHECK(std::abs(k(r, 0) + k(r, 2) + k(r, 4)) <= 1e-9);
  CHECK(k(2, 2) == doctest::Approx(4e6).epsilon(1e-12));
  CHECK(k(0, 2) == doctest::Approx(-2e6).epsilon(1e-12));
  CHECK(k(0, 4) == 0.0);
}

TEST_CASE("inclined member direction cosines") {
  TrussTopology topo;
  topo.nodes.resize(2, 2);
  topo.nodes << 0, 0, 3, 4;
  topo.members = {{0, 1, 1.0}};
  topo.bcs = {{0, 0.0}, {1, 0.0}};
  topo.loads = Vec::Zero(4);
  Discretization disc = build_truss(topo, 100e6);
  REQUIRE(disc.member_length[0] == doctest::Approx(5.0));
  Vec expected(4);
  expected << -0.6 / 5, -0.8 / 5, 0.6 / 5, 0.8 / 5;
  CHECK((disc.points[0].b.row(0).transpose() - expected).cwiseAbs().maxCoeff() <=
        1e-15);
  // rigid translation produces no strain
  Vec rigid(4);
  rigid << 1, 0, 1, 0;
  CHECK(std::abs((disc.points[0].b * rigid)(0)) <= 1e-15);
}

TEST_CASE("global step hand solve on the one-bar problem") {
  Discretization disc = build_truss(one_bar_topology(), 100e6);
  AssembledSystem sys(disc);
  std::vector<LocalState> zeros{LocalState::uniaxial(0, 0)};
  GlobalState gs = global_step(disc, sys, zeros);
  CHECK(gs.displacement.cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(gs.multiplier(2) == doctest::Approx(5e-3).epsilon(1e-12));
  CHECK(gs.states[0].strain(0) == doctest::Approx(0.0));
  CHECK(gs.states[0].stress(0) == doctest::Approx(0.5e6).epsilon(1e-12));
  CHECK(gs.equilibrium_residual <= 1e-12);
  CHECK(gs.compat_residual <= 1e-15);
}

TEST_CASE("global step: admissible assignment is a fixed point") {
  Discretization disc = build_truss(truss15_topology(), 100e6);
  AssembledSystem sys(disc);
  GlobalState reference = model_solve(disc, sys);
  GlobalState gs = global_step(disc, sys, reference.states);
  double scale = 0.0;
  for (const auto& s : reference.states)
    scale = std::max(scale, m_norm(s, disc.metric));
  for (long a = 0; a < disc.point_count(); ++a)
    CHECK(m_norm(gs.states[a] - reference.states[a], disc.metric) <=
          1e-9 * scale);
  CHECK(gs.multiplier.cwiseAbs().maxCoeff() <=
        1e-9 * reference.displacement.cwiseAbs().maxCoeff());
}

TEST_CASE("global step: zero data, zero load gives the zero state") {
  TrussTopology topo = one_bar_topology();
  topo.loads.setZero();
  Discretization disc = build_truss(topo, 100e6);
  AssembledSystem sys(disc);
  GlobalState gs = global_step(disc, sys, {LocalState::uniaxial(0, 0)});
  CHECK(gs.displacement.cwiseAbs().maxCoeff() == 0.0);
  CHECK(gs.multiplier.cwiseAbs().maxCoeff() == 0.0);
  CHECK(gs.states[0].stress(0) == 0.0);
}

TEST_CASE("global step equilibrium holds for arbitrary assigned data") {
  Discretization disc = build_truss(truss15_topology(), 100e6);
  AssembledSystem sys(disc);
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    std::vector<LocalState> assigned;
    for (long a = 0; a < disc.point_count(); ++a)
      assigned.push_back(LocalState::uniaxial(rng.uniform(-0.02, 0.02),
                                              rng.uniform(-2e6, 2e6)));
    GlobalState gs = global_step(disc, sys, assigned);
    CHECK(gs.equilibrium_residual <= 1e-9);
    CHECK(gs.compat_residual <= 1e-12);
    // idempotence: re-applying the global map keeps the states
    GlobalState gs2 = global_step(disc, sys, gs.states);
    for (long a = 0; a < disc.point_count(); ++a)
      CHECK(m_norm(gs2.states[a] - gs.states[a], disc.metric) <=
            1e-8 * (1.0 + m_norm(gs.states[a], disc.metric)));
  }
}

TEST_CASE("prescribed displacement is reproduced exactly on the truss") {
  Discretization disc = build_truss(truss15_topology(), 100e6);
  REQUIRE(disc.point_count() == 15);
  AssembledSystem sys(disc);
  GlobalState gs = model_solve(disc, sys);
  CHECK(gs.displacement(6) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(gs.displacement(0) == 0.0);
  CHECK(gs.displacement(7) == 0.0);
}

TEST_CASE("under-constrained systems are diagnosed") {
  TrussTopology topo = one_bar_topology();
  topo.bcs = {{0, 0.0}};  // rigid modes remain
  Discretization disc = build_truss(topo, 100e6);
  CHECK_THROWS_AS(AssembledSystem{disc}, std::runtime_error);

  topo.bcs = {};
  Discretization floating = build_truss(topo, 100e6);
  CHECK_THROWS_AS(AssembledSystem{floating}, std::invalid_argument);

  TrussTopology conflict = one_bar_topology();
  conflict.bcs.push_back({0, 1.0});
  Discretization dup = build_truss(conflict, 100e6);
  CHECK_THROWS_AS(AssembledSystem{dup}, std::invalid_argument);
}

TEST_CASE("beam discretization: loads, volumes, clamped edge") {
  const double lx = 48, ly = 12, h = 2, force = 1000;
  Discretization disc = build_beam(lx, ly, h, 30e6, 0.3, force);
  LatticeSpec lattice{lx, ly, h};
  REQUIRE(disc.point_count() == lattice.node_count());  // m = N

  double fx = 0, fy = 0, volume = 0;
  for (int d = 0; d < disc.dof_count; d += 2) fx += disc.load(d);
  for (int d = 1; d < disc.dof_count; d += 2) fy += disc.load(d);
  CHECK(fx == 0.0);
  CHECK(fy == doctest::Approx(-force).epsilon(1e-12));
  for (const auto& pt : disc.points) volume += pt.weight;
  CHECK(volume == doctest::Approx(lx * ly).epsilon(1e-12));

  AssembledSystem sys(disc);
  GlobalState gs = model_solve(disc, sys);
  CHECK(gs.equilibrium_residual <= 1e-9);

  // the RK field itself vanishes at the clamped nodes
  NodeSet nodes = lattice_nodes(lattice);
  double dmax = gs.displacement.cwiseAbs().maxCoeff();
  for (int iy = 0; iy < lattice.ny(); ++iy) {
    long id = lattice.node_index(0, iy);
    ShapeEval eval = rk_shape(nodes.coords.row(id).transpose(), nodes);
    double ux = 0, uy = 0;
    for (long i = 0; i < eval.values.size(); ++i) {
      ux += eval.values(i) * gs.displacement(2 * eval.node_ids[i]);
      uy += eval.values(i) * gs.displacement(2 * eval.node_ids[i] + 1);
    }
    CHECK(std::abs(ux) <= 1e-10 * dmax);
    CHECK(std::abs(uy) <= 1e-10 * dmax);
  }
  // the tip deflects downward under the shear load
  long tip = lattice.node_index(lattice.nx() - 1, lattice.ny() / 2);
  CHECK(gs.displacement(2 * tip + 1) < 0.0);
}

TEST_CASE("linear patch test on the SCNI lattice") {
  Discretization disc = patch_discretization(8.0, 4.0, 1.0);
  AssembledSystem sys(disc);
  GlobalState gs = model_solve(disc, sys);
  Vec expected(3);
  expected << 0.003, 0.004, -0.001;
  for (long a = 0; a < disc.point_count(); ++a)
    CHECK((gs.states[a].strain - expected).cwiseAbs().maxCoeff() <=
          1e-8 * 0.004);
}

#include "lcdd/assembly.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lcdd {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

Mat assemble_stiffness(const Discretization& disc) {
  Mat k = Mat::Zero(disc.dof_count, disc.dof_count);
  for (const PointRecord& pt : disc.points) {
    Mat local = pt.weight * pt.b.transpose() * disc.metric.m_eps() * pt.b;
    for (size_t r = 0; r < pt.dofs.size(); ++r)
      for (size_t c = 0; c < pt.dofs.size(); ++c)
        k(pt.dofs[r], pt.dofs[c]) += local(r, c);
  }
  return k;
}

// sum_alpha V_alpha B^T v_alpha scattered into a global vector
Vec scatter_bt(const Discretization& disc,
               const std::vector<Vec>& per_point) {
  Vec out = Vec::Zero(disc.dof_count);
  for (long a = 0; a < disc.point_count(); ++a) {
    const PointRecord& pt = disc.points[a];
    Vec local = pt.weight * pt.b.transpose() * per_point[a];
    for (size_t r = 0; r < pt.dofs.size(); ++r) out(pt.dofs[r]) += local(r);
  }
  return out;
}

Vec gather_b(const PointRecord& pt, const Vec& d) {
  Vec local(pt.dofs.size());
  for (size_t r = 0; r < pt.dofs.size(); ++r) local(r) = d(pt.dofs[r]);
  return pt.b * local;
}

}  // namespace

AssembledSystem::AssembledSystem(const Discretization& disc) {
  require(disc.dof_count > 0, "assemble: empty discretization");
  const int ndof = disc.dof_count;

  k_ = assemble_stiffness(disc);

  // constraint rows: evaluation functionals when given, otherwise unit rows
  // derived from the interpolatory per-dof BC list
  Mat g;
  Vec values;
  if (disc.bc_shape.rows() > 0) {
    require(disc.bc_shape.cols() == ndof &&
                disc.bc_values.size() == disc.bc_shape.rows(),
            "assemble: bc_shape/bc_values size mismatch");
    g = disc.bc_shape;
    values = disc.bc_values;
  } else {
    const int nc = static_cast<int>(disc.bcs.size());
    require(nc >= 1, "assemble: insufficient BCs (floating structure)");
    g = Mat::Zero(nc, ndof);
    values = Vec::Zero(nc);
    std::vector<bool> constrained(ndof, false);
    for (int r = 0; r < nc; ++r) {
      const EssentialBC& bc = disc.bcs[r];
      require(bc.dof >= 0 && bc.dof < ndof, "assemble: BC dof out of range");
      require(!constrained[bc.dof], "assemble: conflicting BCs on same dof");
      constrained[bc.dof] = true;
      g(r, bc.dof) = 1.0;
      values(r) = bc.value;
    }
  }

  // rank-revealing null-space method: d = T y + bc_scale * particular with
  // T an orthonormal basis of null(G); tolerates redundant (consistent)
  // constraint rows, which arise when constraints are collocated at both the
  // boundary nodes and the boundary integration points
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(g);
  particular_ = cod.solve(values);
  double scale = values.norm() + g.cwiseAbs().maxCoeff() *
                                     (particular_.norm() + 1.0);
  require((g * particular_ - values).norm() <= 1e-8 * scale,
          "assemble: conflicting BCs (inconsistent constraint rows)");

  Eigen::ColPivHouseholderQR<Mat> qr(g.transpose());
  const int rank = static_cast<int>(qr.rank());
  const int nf = ndof - rank;
  require(nf >= 1, "assemble: constraints leave no free dofs");
  Mat q = qr.householderQ();
  transform_ = q.rightCols(nf);

  Mat k_red = transform_.transpose() * k_ * transform_;
  k_red_.compute(k_red);
  Vec diag = k_red_.vectorD();
  double dmax = diag.cwiseAbs().maxCoeff();
  if (!(diag.minCoeff() > 1e-12 * dmax)) {
    Eigen::SelfAdjointEigenSolver<Mat> es(k_red);
    Vec mode = transform_ * es.eigenvectors().col(0);
    int worst;
    mode.cwiseAbs().maxCoeff(&worst);
    std::ostringstream msg;
    msg << "assemble: singular system (near-null-space mode peaks at dof "
        << worst << ", eigenvalue " << es.eigenvalues()(0) << ")";
    throw std::runtime_error(msg.str());
  }
}

Vec AssembledSystem::solve(const Vec& rhs, double bc_scale) const {
  Vec part = bc_scale * particular_;
  Vec reduced = transform_.transpose() * (rhs - k_ * part);
  return transform_ * k_red_.solve(reduced) + part;
}

double AssembledSystem::reduced_residual(const Vec& r,
                                         const Vec& reference) const {
  double num = (transform_.transpose() * r).norm();
  double den = (transform_.transpose() * reference).norm();
  return den > 0 ? num / den : num;
}

GlobalState global_step(const Discretization& disc, const AssembledSystem& sys,
                        const std::vector<LocalState>& assigned,
                        double load_factor) {
  require(assigned.size() == disc.points.size(),
          "global_step: assigned states must match point count");
  const long m = disc.point_count();
  for (long a = 0; a < m; ++a)
    require(assigned[a].q() == disc.q(), "global_step: dimension mismatch");

  std::vector<Vec> m_eps_hat(m), sig_hat(m);
  for (long a = 0; a < m; ++a) {
    m_eps_hat[a] = disc.metric.m_eps() * assigned[a].strain;
    sig_hat[a] = assigned[a].stress;
  }

  GlobalState out;
  out.displacement = sys.solve(scatter_bt(disc, m_eps_hat), load_factor);
  Vec f = load_factor * disc.load;
  out.multiplier = sys.solve(f - scatter_bt(disc, sig_hat), 0.0);

  out.states.resize(m);
  std::vector<Vec> sigma(m);
  double compat = 0.0;
  for (long a = 0; a < m; ++a) {
    Vec eps = gather_b(disc.points[a], out.displacement);
    Vec sig = assigned[a].stress +
              disc.metric.m_eps() * gather_b(disc.points[a], out.multiplier);
    out.states[a] = LocalState(eps, sig);
    sigma[a] = std::move(sig);
    compat = std::max(
        compat, (out.states[a].strain - gather_b(disc.points[a], out.displacement))
                    .cwiseAbs()
                    .maxCoeff());
  }
  out.compat_residual = compat;
  Vec ref = load_factor != 0.0 ? Vec(load_factor * disc.load) : disc.load;
  out.equilibrium_residual = sys.reduced_residual(f - scatter_bt(disc, sigma), ref);
  return out;
}

GlobalState model_solve(const Discretization& disc, const AssembledSystem& sys,
                        double load_factor) {
  GlobalState out;
  Vec f = load_factor * disc.load;
  out.displacement = sys.solve(f, load_factor);
  out.multiplier = Vec::Zero(disc.dof_count);

  const long m = disc.point_count();
  out.states.resize(m);
  std::vector<Vec> sigma(m);
  for (long a = 0; a < m; ++a) {
    Vec eps = gather_b(disc.points[a], out.displacement);
    Vec sig = disc.metric.m_eps() * eps;
    out.states[a] = LocalState(eps, sig);
    sigma[a] = std::move(sig);
  }
  out.equilibrium_residual =
      sys.reduced_residual(f - scatter_bt(disc, sigma), f);
  return out;
}

Discretization build_truss(const TrussTopology& topo, double modulus) {
  const long n = topo.nodes.rows();
  require(n >= 2 && topo.nodes.cols() == 2, "build_truss: need planar nodes");
  require(!topo.members.empty(), "build_truss: no members");
  require(topo.loads.size() == 2 * n, "build_truss: load vector size mismatch");

  Discretization disc;
  disc.kind = Discretization::Kind::truss;
  disc.dof_count = static_cast<int>(2 * n);
  disc.metric = Metric::uniaxial(modulus);
  disc.bcs = topo.bcs;
  disc.load = topo.loads;

  for (const TrussTopology::Member& mem : topo.members) {
    require(mem.i >= 0 && mem.i < n && mem.j >= 0 && mem.j < n && mem.i != mem.j,
            "build_truss: bad member connectivity");
    Eigen::Vector2d delta =
        topo.nodes.row(mem.j).transpose() - topo.nodes.row(mem.i).transpose();
    double l = delta.norm();
    require(l > 0, "build_truss: zero-length member");
    double c = delta.x() / l, s = delta.y() / l;

    PointRecord pt;
    pt.weight = mem.area * l;
    pt.dofs = {2 * mem.i, 2 * mem.i + 1, 2 * mem.j, 2 * mem.j + 1};
    pt.b.resize(1, 4);
    pt.b << -c / l, -s / l, c / l, s / l;
    disc.points.push_back(std::move(pt));
    disc.member_length.push_back(l);
  }
  return disc;
}

TrussTopology one_bar_topology(double area, double force, double length) {
  TrussTopology topo;
  topo.nodes.resize(2, 2);
  topo.nodes << 0, 0, length, 0;
  topo.members = {{0, 1, area}};
  topo.bcs = {{0, 0.0}, {1, 0.0}, {3, 0.0}};  // left node pinned, right node y
  topo.loads = Vec::Zero(4);
  topo.loads(2) = force;
  return topo;
}

TrussTopology truss15_topology(double bay, double height, double prescribed_ux,
                               double force) {
  TrussTopology topo;
  topo.nodes.resize(8, 2);
  for (int i = 0; i < 4; ++i) {
    topo.nodes.row(i) << i * bay, 0.0;           // bottom chord: nodes 0..3
    topo.nodes.row(4 + i) << i * bay, height;    // top chord: nodes 4..7
  }
  topo.members = {
      {0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0},  // bottom chords
      {4, 5, 1.0}, {5, 6, 1.0}, {6, 7, 1.0},  // top chords
      {0, 4, 1.0}, {1, 5, 1.0}, {2, 6, 1.0}, {3, 7, 1.0},  // verticals
      {0, 5, 1.0}, {4, 1, 1.0}, {1, 6, 1.0}, {5, 2, 1.0}, {2, 7, 1.0},
  };
  topo.bcs = {{0, 0.0}, {1, 0.0}, {6, prescribed_ux}, {7, 0.0}};
  topo.loads = Vec::Zero(16);
  topo.loads(2 * 6 + 1) = -force;  // vertical load at a top chord node
  return topo;
}

Discretization build_beam(double length, double height, double spacing,
                          double youngs, double poisson, double force,
                          double support_scale) {
  LatticeSpec lattice{length, height, spacing};
  NodeSet nodes = lattice_nodes(lattice, support_scale);
  std::vector<ConformingCell> cells = build_cells(lattice);
  const int nx = lattice.nx(), ny = lattice.ny();

  Discretization disc;
  disc.kind = Discretization::Kind::continuum2d;
  disc.dof_count = static_cast<int>(2 * nodes.count());
  disc.metric = plane_stress_metric(youngs, poisson);
  disc.load = Vec::Zero(disc.dof_count);

  for (const ConformingCell& cell : cells) {
    SmoothedB sb = smoothed_gradient(cell, nodes);
    PointRecord pt;
    pt.weight = cell.volume;
    for (long id : sb.node_ids) {
      pt.dofs.push_back(static_cast<int>(2 * id));
      pt.dofs.push_back(static_cast<int>(2 * id + 1));
    }
    pt.b = sb.bmat();
    disc.points.push_back(std::move(pt));
  }

  // clamped left edge: u^h pinned at the edge nodes and at the edge cell
  // corners (the boundary integration points), which keeps the admissible
  // test fields zero at every quadrature point on the constrained boundary
  std::vector<Eigen::Vector2d> pins;
  for (int iy = 0; iy < ny; ++iy) pins.emplace_back(0.0, iy * spacing);
  for (int iy = 0; iy + 1 < ny; ++iy)
    pins.emplace_back(0.0, (iy + 0.5) * spacing);
  disc.bc_shape = Mat::Zero(2 * pins.size(), disc.dof_count);
  disc.bc_values = Vec::Zero(2 * pins.size());
  long row = 0;
  for (const Eigen::Vector2d& pin : pins) {
    ShapeEval eval = rk_shape(pin, nodes);
    for (int comp = 0; comp < 2; ++comp, ++row)
      for (long i = 0; i < eval.values.size(); ++i)
        disc.bc_shape(row, 2 * eval.node_ids[i] + comp) = eval.values(i);
  }
  for (int iy = 0; iy < ny; ++iy)
    for (int comp = 0; comp < 2; ++comp)
      disc.bcs.push_back(
          {static_cast<int>(2 * lattice.node_index(0, iy) + comp), 0.0});

  // uniform shear traction on the right edge, consistent nodal forces from
  // two-point trapezoidal integration per edge segment
  double traction_y = -force / height;
  for (int iy = 0; iy + 1 < ny; ++iy) {
    Eigen::Vector2d a(length, iy * spacing), b(length, (iy + 1) * spacing);
    double w = (b - a).norm() / 2.0;
    for (const Eigen::Vector2d& pt : {a, b}) {
      ShapeEval eval = rk_shape(pt, nodes);
      for (long i = 0; i < eval.values.size(); ++i)
        disc.load(2 * eval.node_ids[i] + 1) += w * eval.values(i) * traction_y;
    }
  }
  return disc;
}

}  // namespace lcdd

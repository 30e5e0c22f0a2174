#include "lcdd/meshfree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lcdd {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

int axis_count(double length, double spacing) {
  double n = length / spacing;
  int rounded = static_cast<int>(std::lround(n));
  if (std::abs(n - rounded) > 1e-9 * std::max(1.0, n))
    throw std::invalid_argument(
        "lattice: domain lengths must be multiples of the spacing");
  return rounded + 1;
}

}  // namespace

int LatticeSpec::nx() const { return axis_count(length_x, spacing); }
int LatticeSpec::ny() const { return axis_count(length_y, spacing); }

double cubic_bspline(double z) {
  require(z >= 0.0, "cubic_bspline: z must be >= 0");
  if (z < 0.5) return 2.0 / 3.0 - 4.0 * z * z + 4.0 * z * z * z;
  if (z < 1.0) {
    double w = 1.0 - z;
    return 4.0 / 3.0 * w * w * w;
  }
  return 0.0;
}

NodeSet lattice_nodes(const LatticeSpec& lattice, double support_scale) {
  require(lattice.spacing > 0, "lattice: spacing must be positive");
  require(support_scale > 1.0, "lattice: support must exceed the spacing");
  int nx = lattice.nx(), ny = lattice.ny();
  require(nx >= 2 && ny >= 2, "lattice: need at least 2 nodes per axis");

  NodeSet nodes;
  nodes.coords.resize(static_cast<long>(nx) * ny, 2);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      long id = lattice.node_index(ix, iy);
      nodes.coords(id, 0) = ix * lattice.spacing;
      nodes.coords(id, 1) = iy * lattice.spacing;
    }
  nodes.support_a = support_scale * lattice.spacing;
  return nodes;
}

ShapeEval rk_shape(const Vec& x, const NodeSet& nodes) {
  const int dim = nodes.dim();
  require(x.size() == dim, "rk_shape: point dimension mismatch");
  require(nodes.support_a > 0, "rk_shape: support radius not set");
  require(nodes.basis_order == 1, "rk_shape: only linear basis supported");

  ShapeEval eval;
  eval.point = x;

  const int nb = 1 + dim;  // linear basis: (1, dx[, dy])
  std::vector<Vec> hs;
  std::vector<double> phis;
  for (long id = 0; id < nodes.count(); ++id) {
    Vec d = x - nodes.coords.row(id).transpose();
    double z = d.norm() / nodes.support_a;
    if (z >= 1.0) continue;
    double phi = cubic_bspline(z);
    Vec h(nb);
    h(0) = 1.0;
    h.tail(dim) = d;
    eval.node_ids.push_back(id);
    hs.push_back(std::move(h));
    phis.push_back(phi);
  }

  Mat moment = Mat::Zero(nb, nb);
  for (size_t i = 0; i < hs.size(); ++i)
    moment += phis[i] * hs[i] * hs[i].transpose();

  Eigen::SelfAdjointEigenSolver<Mat> es(moment);
  double emax = es.eigenvalues().maxCoeff();
  double emin = es.eigenvalues().minCoeff();
  if (!(emin > 0) || emax / emin > 1e12) {
    std::ostringstream msg;
    msg << "rk_shape: singular moment matrix (insufficient coverage) at (";
    for (int c = 0; c < dim; ++c) msg << (c ? ", " : "") << x(c);
    msg << ")";
    throw std::runtime_error(msg.str());
  }

  // Psi_I = H(0)^T M^{-1} H(x - x_I) Phi; H(0) = e_0
  Vec row0 = es.eigenvectors() *
             es.eigenvalues().cwiseInverse().asDiagonal() *
             es.eigenvectors().transpose().col(0);
  eval.values.resize(static_cast<long>(hs.size()));
  for (size_t i = 0; i < hs.size(); ++i)
    eval.values(static_cast<long>(i)) = row0.dot(hs[i]) * phis[i];
  return eval;
}

std::vector<ConformingCell> build_cells(const LatticeSpec& lattice) {
  int nx = lattice.nx(), ny = lattice.ny();
  double h = lattice.spacing;

  std::vector<ConformingCell> cells(lattice.node_count());
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      long id = lattice.node_index(ix, iy);
      double x = ix * h, y = iy * h;
      double x0 = std::max(0.0, x - h / 2), x1 = std::min(lattice.length_x, x + h / 2);
      double y0 = std::max(0.0, y - h / 2), y1 = std::min(lattice.length_y, y + h / 2);

      ConformingCell& cell = cells[id];
      cell.node_id = id;
      cell.polygon = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
      cell.volume = (x1 - x0) * (y1 - y0);  // unit thickness
      cell.boundary_segments = {
          {{x0, y0}, {x1, y0}, {0.0, -1.0}},
          {{x1, y0}, {x1, y1}, {1.0, 0.0}},
          {{x1, y1}, {x0, y1}, {0.0, 1.0}},
          {{x0, y1}, {x0, y0}, {-1.0, 0.0}},
      };
    }
  }
  return cells;
}

Mat SmoothedB::bmat() const {
  long cover = static_cast<long>(node_ids.size());
  Mat b = Mat::Zero(3, 2 * cover);
  for (long c = 0; c < cover; ++c) {
    b(0, 2 * c) = grad(0, c);
    b(1, 2 * c + 1) = grad(1, c);
    b(2, 2 * c) = grad(1, c);
    b(2, 2 * c + 1) = grad(0, c);
  }
  return b;
}

SmoothedB smoothed_gradient(const ConformingCell& cell, const NodeSet& nodes) {
  require(cell.volume > 0, "smoothed_gradient: cell has no volume");
  std::map<long, Eigen::Vector2d> acc;

  for (const BoundarySegment& seg : cell.boundary_segments) {
    double w = seg.length() / 2.0;  // two-point trapezoidal rule
    for (const Eigen::Vector2d& pt : {seg.a, seg.b}) {
      ShapeEval eval = rk_shape(pt, nodes);
      for (long i = 0; i < eval.values.size(); ++i) {
        auto [it, inserted] =
            acc.try_emplace(eval.node_ids[i], Eigen::Vector2d::Zero());
        it->second += (w / cell.volume) * eval.values(i) * seg.normal;
      }
    }
  }

  SmoothedB sb;
  sb.node_id = cell.node_id;
  sb.grad.resize(2, static_cast<long>(acc.size()));
  long c = 0;
  for (const auto& [id, g] : acc) {
    sb.node_ids.push_back(id);
    sb.grad.col(c++) = g;
  }
  return sb;
}

}  // namespace lcdd

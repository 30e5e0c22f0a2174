#include "lcdd/phase_space.hpp"

#include <cmath>
#include <stdexcept>

namespace lcdd {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

Mat spd_sqrt(const Mat& a, const char* name) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  require(es.info() == Eigen::Success, "metric: eigendecomposition failed");
  const Vec& ev = es.eigenvalues();
  double emax = ev.maxCoeff();
  require(emax > 0 && ev.minCoeff() > 1e-12 * emax, name);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

LocalState::LocalState(Vec eps, Vec sig)
    : strain(std::move(eps)), stress(std::move(sig)) {
  require(strain.size() == stress.size() && strain.size() >= 1,
          "LocalState: strain and stress must share length q >= 1");
  require(strain.allFinite() && stress.allFinite(),
          "LocalState: entries must be finite");
}

LocalState LocalState::uniaxial(double eps, double sig) {
  Vec e(1), s(1);
  e << eps;
  s << sig;
  return LocalState(std::move(e), std::move(s));
}

Vec LocalState::packed() const {
  Vec z(2 * q());
  z << strain, stress;
  return z;
}

LocalState LocalState::from_packed(const Vec& z) {
  require(z.size() % 2 == 0 && z.size() >= 2, "from_packed: length must be 2q");
  long q = z.size() / 2;
  return LocalState(z.head(q), z.tail(q));
}

LocalState LocalState::operator-(const LocalState& other) const {
  require(q() == other.q(), "LocalState: dimension mismatch");
  return LocalState(strain - other.strain, stress - other.stress);
}

LocalState LocalState::operator+(const LocalState& other) const {
  require(q() == other.q(), "LocalState: dimension mismatch");
  return LocalState(strain + other.strain, stress + other.stress);
}

Metric Metric::from_strain_matrix(const Mat& m_eps) {
  require(m_eps.rows() == m_eps.cols() && m_eps.rows() >= 1,
          "Metric: strain block must be square");
  require(m_eps.allFinite(), "Metric: entries must be finite");
  require((m_eps - m_eps.transpose()).cwiseAbs().maxCoeff() <=
              1e-12 * (1.0 + m_eps.cwiseAbs().maxCoeff()),
          "Metric: strain block must be symmetric");

  Metric m;
  m.m_eps_ = 0.5 * (m_eps + m_eps.transpose());
  Mat sqrt_eps = spd_sqrt(m.m_eps_, "Metric: strain block must be SPD");
  m.m_sig_ = m.m_eps_.inverse();
  m.m_sig_ = 0.5 * (m.m_sig_ + m.m_sig_.transpose());
  Mat sqrt_sig = spd_sqrt(m.m_sig_, "Metric: stress block must be SPD");

  int q = static_cast<int>(m_eps.rows());
  m.sqrt_factor_ = Mat::Zero(2 * q, 2 * q);
  double half = std::sqrt(0.5);
  m.sqrt_factor_.topLeftCorner(q, q) = half * sqrt_eps;
  m.sqrt_factor_.bottomRightCorner(q, q) = half * sqrt_sig;
  return m;
}

Metric Metric::uniaxial(double modulus) {
  require(modulus > 0, "Metric: modulus must be positive");
  Mat m(1, 1);
  m << modulus;
  return from_strain_matrix(m);
}

double m_norm(const LocalState& s, const Metric& m) {
  require(s.q() == m.q(), "m_norm: dimension mismatch");
  double e = s.strain.dot(m.m_eps() * s.strain);
  double t = s.stress.dot(m.m_sig() * s.stress);
  return std::sqrt(0.5 * (e + t));
}

Vec rescale(const LocalState& s, const Metric& m) {
  require(s.q() == m.q(), "rescale: dimension mismatch");
  return m.sqrt_factor() * s.packed();
}

Metric plane_stress_metric(double youngs, double poisson) {
  require(youngs > 0, "plane_stress_metric: E must be positive");
  require(poisson >= 0 && poisson < 0.5,
          "plane_stress_metric: nu must be in [0, 0.5)");
  double c = youngs / (1.0 - poisson * poisson);
  Mat m(3, 3);
  m << c, c * poisson, 0,
       c * poisson, c, 0,
       0, 0, c * (1.0 - poisson) / 2.0;
  return Metric::from_strain_matrix(m);
}

}  // namespace lcdd

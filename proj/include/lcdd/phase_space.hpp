#pragma once

#include <Eigen/Dense>

namespace lcdd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// One strain-stress pair in the 2q-dimensional phase space.
/// Voigt order for q=3 is [xx, yy, xy] with engineering shear strain.
struct LocalState {
  Vec strain;
  Vec stress;

  LocalState() = default;
  LocalState(Vec eps, Vec sig);
  static LocalState uniaxial(double eps, double sig);

  int q() const { return static_cast<int>(strain.size()); }

  /// [strain; stress] stacked into a 2q vector.
  Vec packed() const;
  static LocalState from_packed(const Vec& z);

  LocalState operator-(const LocalState& other) const;
  LocalState operator+(const LocalState& other) const;
};

/// Energy-weighted metric: strain block m_eps, stress block m_sig = m_eps^{-1}.
/// The cached square-root factor folds in the 1/2 of the energy norm, so
/// ||sqrt_factor() * s.packed()|| equals m_norm(s, *this) exactly.
class Metric {
 public:
  /// Build from the strain-block matrix; the stress block is its inverse.
  static Metric from_strain_matrix(const Mat& m_eps);
  /// q = 1 convenience, modulus analogous to a Young's modulus.
  static Metric uniaxial(double modulus);

  const Mat& m_eps() const { return m_eps_; }
  const Mat& m_sig() const { return m_sig_; }
  const Mat& sqrt_factor() const { return sqrt_factor_; }
  int q() const { return static_cast<int>(m_eps_.rows()); }

 private:
  Metric() = default;
  Mat m_eps_;
  Mat m_sig_;
  Mat sqrt_factor_;  // 2q x 2q
};

struct DatasetPoint {
  LocalState state;
  long index = -1;
};

/// Energy norm (1/2 e^T M e + 1/2 s^T M^{-1} s)^{1/2}.
double m_norm(const LocalState& s, const Metric& m);

/// z = sqrt_factor * s.packed(); Euclidean norm of the result equals m_norm.
Vec rescale(const LocalState& s, const Metric& m);

/// Plane-stress elasticity matrix E/(1-nu^2) [[1,nu,0],[nu,1,0],[0,0,(1-nu)/2]]
/// as the strain block of the metric.
Metric plane_stress_metric(double youngs, double poisson);

}  // namespace lcdd

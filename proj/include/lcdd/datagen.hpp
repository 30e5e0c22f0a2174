#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "lcdd/phase_space.hpp"

namespace lcdd {

struct NoiseSpec {
  double chi = 0.0;  // random level, >= 0
  std::uint64_t seed = 0;
};

enum class NoiseRule { none, scaled };

/// p experimental strain-stress samples plus provenance metadata.
/// Row i of states() is [eps_1..eps_q, sig_1..sig_q].
class MaterialDataset {
 public:
  MaterialDataset(Mat states, std::map<std::string, std::string> meta);

  long size() const { return states_.rows(); }
  int q() const { return static_cast<int>(states_.cols() / 2); }
  const Mat& states() const { return states_; }
  LocalState state(long i) const;
  DatasetPoint point(long i) const { return {state(i), i}; }
  const std::map<std::string, std::string>& meta() const { return meta_; }

 private:
  Mat states_;
  std::map<std::string, std::string> meta_;
};

/// Linear graph sigma = modulus * eps with strains uniform on
/// [-eps_max, eps_max]; Gaussian noise with std chi*eps_max on strain and
/// chi*modulus*eps_max on stress.
MaterialDataset gen_linear_truss(long p, double modulus, double eps_max,
                                 const NoiseSpec& noise);

/// Noiseless sigmoid graph sigma = sp * tanh(M eps / sp), plateau
/// sp = 0.51 MPa, origin slope M = 100 MPa, strains uniform on [-0.03, 0.03].
MaterialDataset gen_sigmoid_truss(long p, std::uint64_t seed);

/// p-1 noiseless linear points plus one caller-specified outlier appended.
MaterialDataset gen_outlier_truss(long p, double modulus, double eps_max,
                                  const LocalState& outlier,
                                  std::uint64_t seed);

/// Tensor-product strain grid (p_axis per axis, p = p_axis^3) over
/// [lo, hi]^3; stresses from the plane-stress elasticity matrix. With
/// NoiseRule::scaled each component j gets Gaussian noise with std
/// (0.4 / p_axis) * l_j where l_j is the max |noiseless value| of the
/// component.
MaterialDataset gen_plane_stress(int p_axis, double youngs, double poisson,
                                 double strain_lo, double strain_hi,
                                 NoiseRule rule, std::uint64_t seed);

/// CSV with "# key=value" meta comments, header eps_1,..,sig_q, 17
/// significant digits (lossless double round trip).
void write_csv(const MaterialDataset& data, const std::string& path);
MaterialDataset read_csv(const std::string& path);

}  // namespace lcdd

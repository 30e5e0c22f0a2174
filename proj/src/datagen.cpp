#include "lcdd/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "lcdd/rng.hpp"

namespace lcdd {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

MaterialDataset::MaterialDataset(Mat states,
                                 std::map<std::string, std::string> meta)
    : states_(std::move(states)), meta_(std::move(meta)) {
  require(states_.rows() >= 1, "MaterialDataset: empty dataset");
  require(states_.cols() >= 2 && states_.cols() % 2 == 0,
          "MaterialDataset: row length must be 2q");
  require(states_.allFinite(), "MaterialDataset: entries must be finite");
}

LocalState MaterialDataset::state(long i) const {
  require(i >= 0 && i < size(), "MaterialDataset: index out of range");
  int qd = q();
  return LocalState(states_.row(i).head(qd), states_.row(i).tail(qd));
}

MaterialDataset gen_linear_truss(long p, double modulus, double eps_max,
                                 const NoiseSpec& noise) {
  require(p >= 1, "gen_linear_truss: empty dataset requested");
  require(modulus > 0 && eps_max > 0,
          "gen_linear_truss: modulus and eps_max must be positive");
  require(noise.chi >= 0, "gen_linear_truss: chi must be >= 0");

  Rng rng(noise.seed);
  Mat states(p, 2);
  for (long i = 0; i < p; ++i) {
    double eps = rng.uniform(-eps_max, eps_max);
    double sig = modulus * eps;
    if (noise.chi > 0) {
      eps += rng.normal(noise.chi * eps_max);
      sig += rng.normal(noise.chi * modulus * eps_max);
    }
    states(i, 0) = eps;
    states(i, 1) = sig;
  }
  return MaterialDataset(std::move(states),
                         {{"generator", "linear-truss"},
                          {"seed", std::to_string(noise.seed)},
                          {"chi", fmt17(noise.chi)},
                          {"modulus", fmt17(modulus)},
                          {"eps_max", fmt17(eps_max)}});
}

MaterialDataset gen_sigmoid_truss(long p, std::uint64_t seed) {
  require(p >= 1, "gen_sigmoid_truss: empty dataset requested");
  const double plateau = 0.51e6;   // Pa
  const double slope = 100e6;      // Pa
  const double eps_max = 0.03;

  Rng rng(seed);
  Mat states(p, 2);
  for (long i = 0; i < p; ++i) {
    double eps = rng.uniform(-eps_max, eps_max);
    states(i, 0) = eps;
    states(i, 1) = plateau * std::tanh(slope * eps / plateau);
  }
  return MaterialDataset(std::move(states),
                         {{"generator", "sigmoid-truss"},
                          {"seed", std::to_string(seed)},
                          {"chi", "0"}});
}

MaterialDataset gen_outlier_truss(long p, double modulus, double eps_max,
                                  const LocalState& outlier,
                                  std::uint64_t seed) {
  require(p >= 2, "gen_outlier_truss: need p >= 2");
  require(outlier.q() == 1, "gen_outlier_truss: outlier must be uniaxial");
  Rng rng(seed);
  Mat states(p, 2);
  for (long i = 0; i < p - 1; ++i) {
    double eps = rng.uniform(-eps_max, eps_max);
    states(i, 0) = eps;
    states(i, 1) = modulus * eps;
  }
  states(p - 1, 0) = outlier.strain(0);
  states(p - 1, 1) = outlier.stress(0);
  return MaterialDataset(std::move(states),
                         {{"generator", "outlier-truss"},
                          {"seed", std::to_string(seed)},
                          {"chi", "0"},
                          {"modulus", fmt17(modulus)}});
}

MaterialDataset gen_plane_stress(int p_axis, double youngs, double poisson,
                                 double strain_lo, double strain_hi,
                                 NoiseRule rule, std::uint64_t seed) {
  require(p_axis >= 2, "gen_plane_stress: p_axis must be >= 2");
  require(strain_hi > strain_lo, "gen_plane_stress: empty strain range");
  Metric metric = plane_stress_metric(youngs, poisson);

  long p = static_cast<long>(p_axis) * p_axis * p_axis;
  Mat states(p, 6);
  double h = (strain_hi - strain_lo) / (p_axis - 1);
  long row = 0;
  for (int i = 0; i < p_axis; ++i) {
    for (int j = 0; j < p_axis; ++j) {
      for (int k = 0; k < p_axis; ++k, ++row) {
        Eigen::Vector3d eps(strain_lo + i * h, strain_lo + j * h,
                            strain_lo + k * h);
        states.row(row).head(3) = eps;
        states.row(row).tail(3) = metric.m_eps() * eps;
      }
    }
  }

  double chi = 0.0;
  if (rule == NoiseRule::scaled) {
    chi = 0.4 / p_axis;  // 0.4 / cbrt(p)
    Vec scale = states.cwiseAbs().colwise().maxCoeff();
    Rng rng(seed);
    for (long r = 0; r < p; ++r)
      for (int c = 0; c < 6; ++c)
        states(r, c) += rng.normal(chi * scale(c));
  }

  return MaterialDataset(std::move(states),
                         {{"generator", "plane-stress"},
                          {"seed", std::to_string(seed)},
                          {"chi", fmt17(chi)},
                          {"youngs", fmt17(youngs)},
                          {"poisson", fmt17(poisson)}});
}

void write_csv(const MaterialDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (const auto& [key, value] : data.meta())
    out << "# " << key << "=" << value << "\n";
  int q = data.q();
  for (int j = 0; j < q; ++j) out << "eps_" << (j + 1) << ",";
  for (int j = 0; j < q; ++j)
    out << "sig_" << (j + 1) << (j + 1 < q ? "," : "\n");
  const Mat& s = data.states();
  for (long i = 0; i < data.size(); ++i) {
    for (int c = 0; c < 2 * q; ++c)
      out << fmt17(s(i, c)) << (c + 1 < 2 * q ? "," : "\n");
  }
  if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

[[noreturn]] void parse_fail(const std::string& path, long line,
                             const std::string& what) {
  throw std::runtime_error("read_csv: " + path + ":" + std::to_string(line) +
                           ": " + what);
}

}  // namespace

MaterialDataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);

  std::map<std::string, std::string> meta;
  std::string line;
  long lineno = 0;
  int q = -1;

  // comments, then header
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      size_t start = body.find_first_not_of(' ');
      size_t eq = body.find('=');
      if (start != std::string::npos && eq != std::string::npos && eq > start)
        meta[body.substr(start, eq - start)] = body.substr(eq + 1);
      continue;
    }
    auto cells = split_csv(line);
    if (cells.size() < 2 || cells.size() % 2 != 0)
      parse_fail(path, lineno, "header must list eps_1..eps_q,sig_1..sig_q");
    q = static_cast<int>(cells.size() / 2);
    for (int j = 0; j < q; ++j) {
      if (cells[j] != "eps_" + std::to_string(j + 1) ||
          cells[q + j] != "sig_" + std::to_string(j + 1))
        parse_fail(path, lineno, "malformed header cell '" + cells[j] + "'");
    }
    break;
  }
  if (q < 0) parse_fail(path, lineno, "missing header");

  std::vector<double> values;
  long rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv(line);
    if (static_cast<int>(cells.size()) != 2 * q)
      parse_fail(path, lineno,
                 "expected " + std::to_string(2 * q) + " cells, got " +
                     std::to_string(cells.size()));
    for (const auto& cell : cells) {
      size_t pos = 0;
      double v;
      try {
        v = std::stod(cell, &pos);
      } catch (const std::exception&) {
        parse_fail(path, lineno, "non-numeric cell '" + cell + "'");
      }
      if (pos != cell.size())
        parse_fail(path, lineno, "non-numeric cell '" + cell + "'");
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) parse_fail(path, lineno, "no data rows");

  Mat states(rows, 2 * q);
  for (long i = 0; i < rows; ++i)
    for (int c = 0; c < 2 * q; ++c) states(i, c) = values[i * 2 * q + c];
  return MaterialDataset(std::move(states), std::move(meta));
}

}  // namespace lcdd

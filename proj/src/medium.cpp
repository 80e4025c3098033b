#include "rte/medium.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace rte {

GriddedField::GriddedField(int n, std::vector<double> values)
    : n_(n), h_(1.0 / n), values_(std::move(values)) {
  if (n < 1) throw InputError("GriddedField: n must be >= 1");
  if (values_.size() != static_cast<size_t>(n) * n) {
    throw InputError("GriddedField: expected " + std::to_string(n * n) +
                     " values, got " + std::to_string(values_.size()));
  }
}

GriddedField GriddedField::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("GriddedField: cannot open " + path);
  std::vector<double> vals;
  std::string line;
  int rows = 0, cols = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    int c = 0;
    while (std::getline(ss, tok, ',')) {
      vals.push_back(std::stod(tok));
      ++c;
    }
    if (cols < 0) cols = c;
    if (c != cols) throw InputError("GriddedField: ragged CSV " + path);
    ++rows;
  }
  if (rows != cols) {
    throw InputError("GriddedField: CSV must be square, got " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
  return GriddedField(rows, std::move(vals));
}

GriddedField GriddedField::from_binary(const std::string& path, int n) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("GriddedField: cannot open " + path);
  std::vector<double> vals(static_cast<size_t>(n) * n);
  in.read(reinterpret_cast<char*>(vals.data()),
          static_cast<std::streamsize>(vals.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(vals.size() * sizeof(double))) {
    throw InputError("GriddedField: " + path + " shorter than n*n doubles");
  }
  return GriddedField(n, std::move(vals));
}

double GriddedField::operator()(const Vec2& p) const {
  // Bilinear on the center lattice; outside the outermost centers the value
  // is clamped (constant extension).
  auto locate = [this](double c, int& i0, double& t) {
    double s = c / h_ - 0.5;
    double fl = std::floor(s);
    i0 = static_cast<int>(fl);
    t = s - fl;
    if (i0 < 0) { i0 = 0; t = 0.0; }
    if (i0 >= n_ - 1) { i0 = std::max(0, n_ - 2); t = n_ > 1 ? 1.0 : 0.0; }
  };
  int i0, j0;
  double tx, ty;
  locate(p.x, i0, tx);
  locate(p.y, j0, ty);
  int i1 = std::min(i0 + 1, n_ - 1), j1 = std::min(j0 + 1, n_ - 1);
  auto at = [this](int i, int j) {
    return values_[static_cast<size_t>(i) + static_cast<size_t>(n_) * j];
  };
  return (1 - tx) * (1 - ty) * at(i0, j0) + tx * (1 - ty) * at(i1, j0) +
         (1 - tx) * ty * at(i0, j1) + tx * ty * at(i1, j1);
}

Medium Medium::homogeneous(double mu_s, double mu_t) {
  Medium m;
  m.mu_s_ = [mu_s](const Vec2&) { return mu_s; };
  m.mu_t_ = [mu_t](const Vec2&) { return mu_t; };
  m.homogeneous_ = true;
  m.const_mu_s_ = mu_s;
  m.const_mu_t_ = mu_t;
  m.sup_mu_s_ = mu_s;
  m.check_samples();
  return m;
}

Medium Medium::from_fields(ScalarField mu_s, ScalarField mu_t,
                           std::optional<double> sup_mu_s) {
  Medium m;
  m.mu_s_ = std::move(mu_s);
  m.mu_t_ = std::move(mu_t);
  m.sup_mu_s_ = sup_mu_s;
  m.check_samples();
  return m;
}

Medium Medium::gaussian_bump(double rho, double mu_a) {
  if (rho < 0.0 || mu_a < 0.0) {
    throw InputError("gaussian_bump: rho and mu_a must be nonnegative");
  }
  const Vec2 c{0.5, 0.5};
  auto mu_s = [rho, c](const Vec2& p) {
    return 1.0 + rho * std::exp(-(p - c).squared_norm() / 4.0);
  };
  auto mu_t = [mu_s, mu_a](const Vec2& p) { return mu_s(p) + mu_a; };
  // sup attained at c.
  return from_fields(mu_s, mu_t, 1.0 + rho);
}

Medium Medium::from_gridded(GriddedField mu_s, GriddedField mu_t) {
  auto fs = [f = std::move(mu_s)](const Vec2& p) { return f(p); };
  auto ft = [f = std::move(mu_t)](const Vec2& p) { return f(p); };
  return from_fields(std::move(fs), std::move(ft));
}

void Medium::check_samples() const {
  Grid probe(17);
  validate(probe);
}

void Medium::validate(const Grid& g) const {
  for (const Vec2& p : g.centers()) {
    const double s = mu_s_(p), t = mu_t_(p);
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw InputError("Medium: mu_s < 0 or non-finite at (" +
                       std::to_string(p.x) + ", " + std::to_string(p.y) + ")");
    }
    if (!(t >= s) || !std::isfinite(t)) {
      throw InputError("Medium: mu_t < mu_s or non-finite at (" +
                       std::to_string(p.x) + ", " + std::to_string(p.y) + ")");
    }
  }
}

double Medium::sup_mu_s() const {
  if (!sup_mu_s_) {
    double m = 0.0;
    const int q = 257;
    for (int j = 0; j < q; ++j) {
      for (int i = 0; i < q; ++i) {
        m = std::max(m, mu_s_(Vec2(i / (q - 1.0), j / (q - 1.0))));
      }
    }
    sup_mu_s_ = m;
  }
  return *sup_mu_s_;
}

double optical_factor(const Medium& m, const QuadratureRule& line_rule,
                      const Vec2& x, const Vec2& y) {
  const Vec2 d = x - y;
  const double len = d.norm();
  if (len == 0.0) return 1.0;
  if (m.is_homogeneous()) return std::exp(-m.const_mu_t() * len);
  double acc = 0.0;
  for (size_t i = 0; i < line_rule.nodes.size(); ++i) {
    acc += line_rule.weights[i] * m.mu_t(x - line_rule.nodes[i] * d);
  }
  return std::exp(-len * acc);
}

}  // namespace rte

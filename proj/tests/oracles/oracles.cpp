#include "oracles.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace oracle {

double factorial_ratio(unsigned a, unsigned b, unsigned c) {
  return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(c + 1.0);
}

OracleResult brute_shapley(const GameEval& v, unsigned n) {
  if (n < 1 || n > kMaxBruteForcePlayers) throw std::length_error("brute_shapley: n out of range");
  OracleResult r{std::vector<double>(n, 0.0), "brute-force marginal sum", 0};
  for (unsigned i = 0; i < n; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    long double acc = 0.0L;
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s) {
      if (s & bit) continue;
      const unsigned size = std::popcount(s);
      const double w = factorial_ratio(size, n - size - 1, n);
      acc += static_cast<long double>(w) * (v(s | bit) - v(s));
      r.cost += 2;
    }
    r.values[i] = static_cast<double>(acc);
  }
  return r;
}

OracleResult brute_siv(const GameEval& v, unsigned n, unsigned i, unsigned j) {
  if (n < 2 || n > kMaxBruteForcePlayers) throw std::length_error("brute_siv: n out of range");
  if (i == j || i >= n || j >= n) throw std::domain_error("brute_siv: bad pair");
  const std::uint64_t bi = std::uint64_t{1} << i;
  const std::uint64_t bj = std::uint64_t{1} << j;
  OracleResult r{{0.0}, "brute-force second differences", 0};
  long double acc = 0.0L;
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s) {
    if (s & (bi | bj)) continue;
    const unsigned size = std::popcount(s);
    const double w = factorial_ratio(size, n - size - 2, n - 1);
    acc += static_cast<long double>(w) * (v(s | bi | bj) - v(s | bi) - v(s | bj) + v(s));
    r.cost += 4;
  }
  r.values[0] = static_cast<double>(acc);
  return r;
}

OracleResult high_precision_integral(const std::function<double(double)>& g) {
  constexpr int kMaxLevels = 22;
  OracleResult r{{0.0}, "romberg", 0};
  std::vector<double> prev{0.5 * (g(0.0) + g(1.0))};
  r.cost = 2;
  for (int level = 1; level <= kMaxLevels; ++level) {
    const std::uint64_t new_points = std::uint64_t{1} << (level - 1);
    const double h = 1.0 / static_cast<double>(new_points * 2);
    long double mid = 0.0L;
    for (std::uint64_t p = 0; p < new_points; ++p) mid += g((2 * p + 1) * h);
    r.cost += new_points;
    std::vector<double> row(level + 1);
    row[0] = 0.5 * prev[0] + h * static_cast<double>(mid);
    double factor = 1.0;
    for (int c = 1; c <= level; ++c) {
      factor *= 4.0;
      row[c] = row[c - 1] + (row[c - 1] - prev[c - 1]) / (factor - 1.0);
    }
    if (level >= 3 && std::abs(row[level] - prev[level - 1]) < 1e-12) {
      r.values[0] = row[level];
      return r;
    }
    prev = std::move(row);
  }
  throw std::runtime_error("high_precision_integral: no convergence");
}

double telescoping_oracle(const gralis::Model& m, const gralis::EvalPoint& ep,
                          std::span<const unsigned> perm, bool simultaneous) {
  const std::size_t n = ep.dim();
  if (perm.size() != n) throw std::invalid_argument("telescoping_oracle: bad ordering");
  std::vector<bool> before(n, false);
  long double total = 0.0L;
  std::vector<double> point(n);
  for (unsigned i : perm) {
    const double gap = ep.x[i] - ep.baseline[i];
    const auto integrand = [&](double alpha) {
      for (std::size_t j = 0; j < n; ++j) {
        const double moved = ep.baseline[j] + alpha * (ep.x[j] - ep.baseline[j]);
        if (j == i) {
          point[j] = moved;
        } else if (before[j]) {
          point[j] = simultaneous ? moved : ep.x[j];
        } else {
          point[j] = ep.baseline[j];
        }
      }
      return m.partial(point, i);
    };
    if (gap != 0.0) total += gap * high_precision_integral(integrand).values[0];
    before[i] = true;
  }
  const double gain = m.eval(ep.x) - m.eval(ep.baseline);
  return std::abs(static_cast<double>(total) - gain);
}

SimplexMin simplex_grid_min(std::span<const double> variances, unsigned resolution) {
  if (variances.size() != 3) throw std::invalid_argument("simplex_grid_min: needs L = 3");
  SimplexMin best{INFINITY, {}, 0};
  const double step = 1.0 / resolution;
  for (unsigned a = 0; a <= resolution; ++a) {
    for (unsigned b = 0; a + b <= resolution; ++b) {
      const double l1 = a * step;
      const double l2 = b * step;
      const double l3 = (resolution - a - b) * step;
      const double v = l1 * l1 * variances[0] + l2 * l2 * variances[1] + l3 * l3 * variances[2];
      ++best.points;
      if (v < best.value) best = {v, {l1, l2, l3}, best.points};
    }
  }
  return best;
}

std::vector<double> normal_equation_solve(const std::vector<std::vector<double>>& x,
                                          std::span<const double> w, std::span<const double> y) {
  const std::size_t rows = x.size();
  const std::size_t p = x.front().size();
  std::vector<std::vector<long double>> a(p, std::vector<long double>(p + 1, 0.0L));
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = 0; c < p; ++c)
      for (std::size_t t = 0; t < rows; ++t) a[r][c] += static_cast<long double>(x[t][r]) * w[t] * x[t][c];
    for (std::size_t t = 0; t < rows; ++t) a[r][p] += static_cast<long double>(x[t][r]) * w[t] * y[t];
  }
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < p; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    if (a[col][col] == 0.0L) throw std::domain_error("normal_equation_solve: singular");
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const long double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= p; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> beta(p);
  for (std::size_t r = 0; r < p; ++r) beta[r] = static_cast<double>(a[r][p] / a[r][r]);
  return beta;
}

}  // namespace oracle

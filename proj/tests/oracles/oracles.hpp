#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gralis/model.hpp"

namespace oracle {

// Direct-definition reference implementations for tests. Nothing here calls
// the library's game, path or attribution code.

struct OracleResult {
  std::vector<double> values;
  std::string method;
  std::uint64_t cost = 0;  // set-function or integrand evaluations
};

using GameEval = std::function<double(std::uint64_t)>;

inline constexpr unsigned kMaxBruteForcePlayers = 12;

OracleResult brute_shapley(const GameEval& v, unsigned n);
OracleResult brute_siv(const GameEval& v, unsigned n, unsigned i, unsigned j);

// Romberg extrapolation refined until successive estimates differ by < 1e-12.
OracleResult high_precision_integral(const std::function<double(double)>& g);

// |sum of per-feature path integrals along the ordering - (f(x) - f(x'))|.
// sequential: predecessors sit at x while feature i moves.
// simultaneous: predecessors and i move together from the baseline.
double telescoping_oracle(const gralis::Model& m, const gralis::EvalPoint& ep,
                          std::span<const unsigned> perm, bool simultaneous = false);

// Minimum of sum lambda^2 sigma^2 over the grid {a/N, b/N, 1 - (a+b)/N}.
struct SimplexMin {
  double value = 0.0;
  std::vector<double> lambda;
  std::uint64_t points = 0;
};
SimplexMin simplex_grid_min(std::span<const double> variances, unsigned resolution);

// Weighted least squares by Gaussian elimination on the normal equations.
std::vector<double> normal_equation_solve(const std::vector<std::vector<double>>& x,
                                          std::span<const double> w, std::span<const double> y);

// Exact factorial ratio a! b! / c! from tgamma.
double factorial_ratio(unsigned a, unsigned b, unsigned c);

}  // namespace oracle

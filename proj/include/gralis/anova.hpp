#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gralis/model.hpp"
#include "gralis/path.hpp"

namespace gralis {

inline constexpr std::size_t kMaxGridPoints = 1'000'000;
inline constexpr unsigned kMaxAnovaDims = 6;

struct Marginal {
  std::vector<double> points;
  std::vector<double> probs;
};

// Finite product measure mu = mu_1 x ... x mu_n on a tensor grid.
class ProductMeasure {
 public:
  explicit ProductMeasure(std::vector<Marginal> marginals);

  // "p1,p2,...[:w1,w2,...];..." -- one group per dimension, weights default
  // to uniform and are normalized when given.
  static ProductMeasure parse(std::string_view spec);

  unsigned dims() const noexcept { return static_cast<unsigned>(marginals_.size()); }
  const Marginal& marginal(unsigned i) const { return marginals_[i]; }
  std::size_t grid_size() const noexcept;
  double mean(unsigned i) const;

 private:
  std::vector<Marginal> marginals_;
};

// Hoeffding terms f_T, each tabulated on the sub-grid of the coordinates in T
// (row-major, lowest feature index varying slowest).
class AnovaDecomposition {
 public:
  unsigned dims() const noexcept { return n_; }
  double mean() const noexcept { return terms_[0][0]; }
  double total_variance() const noexcept { return total_variance_; }
  double max_abs_value() const noexcept { return max_abs_; }

  std::span<const double> term(std::uint64_t t) const { return terms_[t]; }
  double term_variance(std::uint64_t t) const { return variances_[t]; }
  // f_T at the full-grid multi-index `index`.
  double term_at(std::uint64_t t, std::span<const std::size_t> index) const;

 private:
  friend AnovaDecomposition hoeffding_decompose(const Model&, const ProductMeasure&);

  unsigned n_ = 0;
  std::vector<std::size_t> sizes_;
  std::vector<std::vector<double>> terms_;
  std::vector<double> variances_;
  double total_variance_ = 0.0;
  double max_abs_ = 0.0;
};

AnovaDecomposition hoeffding_decompose(const Model& m, const ProductMeasure& mu);

// max |E[f_T f_T']| over T != T'.
double orthogonality_check(const AnovaDecomposition& d, const ProductMeasure& mu);
// max over T, i in T and the other coordinates of |sum_{x_i} mu_i(x_i) f_T|.
double zero_mean_residual(const AnovaDecomposition& d, const ProductMeasure& mu);
// max over the grid of |sum_T f_T - F|.
double reconstruction_residual(const AnovaDecomposition& d, const Model& m,
                               const ProductMeasure& mu);

struct SobolIndices {
  std::vector<double> first;  // S_T, bitmask-indexed; entry 0 unused (0)
  std::vector<double> total;  // sum over nonempty L subset T of S_L
  double variance = 0.0;
};

SobolIndices sobol_indices(const AnovaDecomposition& d);

struct BridgeFeature {
  double gralis_index = 0.0;  // Var_mu[phi_i(x)] / Var[F]
  double sobol_index = 0.0;   // S_i from the decomposition
  double abs_diff = 0.0;
};

struct BridgeReport {
  std::vector<double> baseline;  // marginal means
  std::vector<BridgeFeature> features;
  // max over grid and i of |phi_i(x) - f_i(x_i)|
  double max_pointwise_deviation = 0.0;
  double variance = 0.0;
};

// First-order attributions (uniform kernel) at every grid point against the
// marginal-mean baseline, compared with the first-order Sobol indices.
BridgeReport gralis_sobol_bridge(const Model& m, const ProductMeasure& mu,
                                 const QuadratureRule& quad, PathMode path);

}  // namespace gralis

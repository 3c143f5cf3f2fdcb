#pragma once

#include <optional>
#include <span>
#include <vector>

namespace gralis {

// Variances below this are treated as exact layers.
inline constexpr double kZeroVariance = 1e-12;

struct LayerAttributions {
  std::vector<std::vector<double>> phi;
  std::vector<double> variance;

  unsigned layers() const noexcept { return static_cast<unsigned>(phi.size()); }
  void validate() const;
};

// Inverse-variance weights. Layers with variance below kZeroVariance share all
// of the weight when any are present.
std::vector<double> optimal_weights(std::span<const double> variances);

std::vector<double> ms_aggregate(const LayerAttributions& layers,
                                 std::span<const double> lambdas);

// sum lambda^2 sigma^2, plus the covariance cross terms when `cov` (row-major,
// L x L) is given.
double aggregate_variance(std::span<const double> variances, std::span<const double> lambdas,
                          std::optional<std::span<const double>> cov = std::nullopt);

// 1 / sum sigma^-2
double minimum_variance(std::span<const double> variances);

}  // namespace gralis

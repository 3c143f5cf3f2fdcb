#include "gralis/multiscale.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "gralis/error.hpp"
#include "gralis/summation.hpp"

namespace gralis {

namespace {

void check_variances(std::span<const double> variances) {
  require(!variances.empty(), ErrorKind::domain, "need at least one layer");
  for (std::size_t l = 0; l < variances.size(); ++l) {
    require(std::isfinite(variances[l]) && variances[l] > 0.0, ErrorKind::domain,
            "layer " + std::to_string(l) + " has nonpositive variance");
  }
}

void check_lambdas(std::span<const double> lambdas, std::size_t layers) {
  require(lambdas.size() == layers, ErrorKind::domain, "one weight per layer is required");
  for (double w : lambdas) {
    require(std::isfinite(w) && w >= 0.0, ErrorKind::domain, "weights must be nonnegative");
  }
  require(std::abs(compensated_sum(lambdas) - 1.0) <= 1e-12, ErrorKind::domain,
          "weights must sum to 1");
}

}  // namespace

void LayerAttributions::validate() const {
  require(!phi.empty(), ErrorKind::config, "need at least one layer");
  require(variance.empty() || variance.size() == phi.size(), ErrorKind::config,
          "one variance per layer is required");
  for (const auto& layer : phi) {
    require(layer.size() == phi.front().size(), ErrorKind::config,
            "layers must attribute the same number of features");
    for (double v : layer) require(std::isfinite(v), ErrorKind::config, "non-finite attribution");
  }
}

std::vector<double> optimal_weights(std::span<const double> variances) {
  check_variances(variances);
  const std::size_t layers = variances.size();
  std::vector<double> lambda(layers, 0.0);
  std::size_t exact = 0;
  for (double v : variances) exact += v < kZeroVariance;
  if (exact > 0) {
    for (std::size_t l = 0; l < layers; ++l)
      if (variances[l] < kZeroVariance) lambda[l] = 1.0 / exact;
    return lambda;
  }
  CompensatedSum total;
  for (double v : variances) total.add(1.0 / v);
  for (std::size_t l = 0; l < layers; ++l) lambda[l] = (1.0 / variances[l]) / total.value();
  return lambda;
}

std::vector<double> ms_aggregate(const LayerAttributions& layers,
                                 std::span<const double> lambdas) {
  layers.validate();
  check_lambdas(lambdas, layers.layers());
  const std::size_t n = layers.phi.front().size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    CompensatedSum acc;
    for (std::size_t l = 0; l < layers.phi.size(); ++l) acc.add(lambdas[l] * layers.phi[l][i]);
    out[i] = acc.value();
  }
  return out;
}

double aggregate_variance(std::span<const double> variances, std::span<const double> lambdas,
                          std::optional<std::span<const double>> cov) {
  require(!variances.empty(), ErrorKind::domain, "need at least one layer");
  for (double v : variances)
    require(std::isfinite(v) && v >= 0.0, ErrorKind::domain, "variances must be nonnegative");
  check_lambdas(lambdas, variances.size());
  const std::size_t layers = variances.size();
  CompensatedSum acc;
  for (std::size_t l = 0; l < layers; ++l) acc.add(lambdas[l] * lambdas[l] * variances[l]);
  if (!cov) return acc.value();

  require(cov->size() == layers * layers, ErrorKind::domain, "covariance must be L x L");
  Eigen::MatrixXd c(layers, layers);
  double scale = 0.0;
  for (std::size_t a = 0; a < layers; ++a) {
    for (std::size_t b = 0; b < layers; ++b) {
      c(a, b) = (*cov)[a * layers + b];
      require(std::isfinite(c(a, b)), ErrorKind::domain, "non-finite covariance entry");
      scale = std::max(scale, std::abs(c(a, b)));
    }
  }
  const double tol = 1e-12 * std::max(scale, 1.0);
  for (std::size_t a = 0; a < layers; ++a) {
    require(std::abs(c(a, a) - variances[a]) <= tol, ErrorKind::domain,
            "covariance diagonal does not match the layer variances");
    for (std::size_t b = a + 1; b < layers; ++b)
      require(std::abs(c(a, b) - c(b, a)) <= tol, ErrorKind::domain,
              "covariance matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c, Eigen::EigenvaluesOnly);
  require(eig.eigenvalues().minCoeff() >= -1e-10 * std::max(scale, 1.0), ErrorKind::domain,
          "covariance matrix is not positive semidefinite");
  for (std::size_t a = 0; a < layers; ++a)
    for (std::size_t b = a + 1; b < layers; ++b) acc.add(2.0 * lambdas[a] * lambdas[b] * c(a, b));
  return acc.value();
}

double minimum_variance(std::span<const double> variances) {
  check_variances(variances);
  CompensatedSum total;
  for (double v : variances) total.add(1.0 / v);
  return 1.0 / total.value();
}

}  // namespace gralis

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gralis/coalition.hpp"
#include "gralis/model.hpp"
#include "gralis/path.hpp"

namespace gralis {

// per_feature divides each phi_i by its own kernel mass; global_z divides the
// whole vector by one scalar accumulated over all features and draws.
enum class Normalization { per_feature, global_z };

Normalization parse_normalization(std::string_view s);
std::string to_string(Normalization n);

enum class EngineMode { exact, mc };

struct McConfig {
  // Permutations evaluated. With antithetic sampling this counts both members
  // of every pair, so it must be even.
  std::uint64_t m = 1000;
  bool antithetic = false;
  Normalization normalization = Normalization::per_feature;
  std::uint64_t seed = 0;
  QuadratureRule quad = QuadratureRule::midpoint(10);
  PathMode path = PathMode::simultaneous;
  Kernel kernel = Kernel::uniform();
  unsigned workers = 1;

  void validate() const;
};

struct AttributionResult {
  std::vector<double> phi;
  double completeness_residual = 0.0;
  // One entry per feature (per_feature / exact), or a single global Z.
  std::vector<double> z_norm;
  EngineMode mode = EngineMode::exact;
  std::uint64_t m_used = 0;
  unsigned k_used = 0;
  std::uint64_t seed = 0;
  // Largest |kernel * conditioned IG| seen; an empirical stand-in for B.
  double b_estimate = 0.0;
};

AttributionResult gralis_exact(const Model& m, const EvalPoint& ep, const Kernel& kernel,
                               const QuadratureRule& quad, PathMode path);

// Dispatches to the antithetic estimator when cfg.antithetic is set.
AttributionResult gralis_mc(const Model& m, const EvalPoint& ep, const McConfig& cfg);

AttributionResult gralis_mc_antithetic(const Model& m, const EvalPoint& ep,
                                       const McConfig& cfg);

// B / sqrt(m delta) + |x_i - x'_i| ||x - x'||_1 ||Hess F||_inf / (2k)
double mc_error_bound(double b, std::uint64_t m, double delta, double x_i_gap,
                      double l1_gap, double hess_sup, unsigned k);

double completeness_residual(const AttributionResult& res, const Model& m,
                             const EvalPoint& ep);

}  // namespace gralis

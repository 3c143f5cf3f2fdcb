#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gralis/attribution.hpp"
#include "gralis/model.hpp"

namespace gralis {

struct DropCurve {
  std::vector<double> k;
  std::vector<double> drop;

  void validate() const;
};

// Trapezoid integral of the drop curve divided by K_max.
double deletion_auc(const DropCurve& curve);

// Least-squares slope of log(y) against log(x). Pairs with y <= 0 are skipped;
// NaN when fewer than two remain.
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

struct SweepConfig {
  std::vector<std::uint64_t> m_grid = {100, 1000, 10000};
  unsigned replicates = 50;
  std::vector<unsigned> k_grid = {4, 8, 16, 32, 64};
  McConfig mc;  // engine settings for the m-sweep; mc.seed is the first seed
};

struct SweepRow {
  std::string sweep;  // "m" or "k"
  std::string rule;
  std::uint64_t m = 0;
  unsigned k = 0;
  double error = 0.0;  // RMSE for the m-sweep, full-coalition residual for the k-sweep
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double m_slope = 0.0;
  double k_slope_right = 0.0;
  double k_slope_mid = 0.0;
};

// m-sweep: RMSE of GRALIS-MC against the exact engine over seeded replicates.
// k-sweep: full-coalition residual on the full coalition for right and midpoint rules.
SweepResult run_convergence_sweep(const Model& m, const EvalPoint& ep, const SweepConfig& cfg);

struct AuditConfig {
  double threshold = 1e-10;
  double sigma = 0.75;
  unsigned k = 16;  // Gauss-Legendre nodes
};

struct AuditRow {
  std::string axiom;
  double value = 0.0;
  std::string status;  // "pass", "approximate" or "fail"
  std::string note;
};

std::vector<AuditRow> axiomatic_audit(const AuditConfig& cfg);

}  // namespace gralis

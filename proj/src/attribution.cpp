#include "gralis/attribution.hpp"

#include <algorithm>
#include <cmath>

#include "gralis/error.hpp"
#include "gralis/parallel.hpp"
#include "gralis/summation.hpp"

namespace gralis {

namespace {

// Draws per reduction block. Blocks are reduced in index order, so the block
// size (not the worker count) fixes the floating-point summation order.
constexpr std::uint64_t kDrawsPerBlock = 64;

struct Accumulator {
  std::vector<CompensatedSum> num;
  std::vector<CompensatedSum> den;
  CompensatedSum z;
  double b_max = 0.0;

  explicit Accumulator(std::size_t n) : num(n), den(n) {}

  void merge(const Accumulator& other) {
    for (std::size_t i = 0; i < num.size(); ++i) {
      num[i].merge(other.num[i]);
      den[i].merge(other.den[i]);
    }
    z.merge(other.z);
    b_max = std::max(b_max, other.b_max);
  }
};

double model_gain(const Model& m, const EvalPoint& ep) {
  return m.eval(ep.x) - m.eval(ep.baseline);
}

double residual_of(std::span<const double> phi, double gain) {
  return std::abs(compensated_sum(phi) - gain);
}

// Walks one ordering, conditioning each feature on its predecessors.
void walk_permutation(std::span<const unsigned> order, detail::PathIntegrator& integrate,
                      const EvalPoint& ep, const Kernel& kernel, Accumulator& acc) {
  std::uint64_t s_bits = 0;
  for (unsigned i : order) {
    const double pi_w = kernel_weight_bits(kernel, ep, s_bits);
    const double contribution = pi_w * integrate(s_bits, i);
    acc.num[i].add(contribution);
    acc.den[i].add(pi_w);
    acc.z.add(pi_w);
    acc.b_max = std::max(acc.b_max, std::abs(contribution));
    s_bits |= std::uint64_t{1} << i;
  }
}

AttributionResult run_mc(const Model& m, const EvalPoint& ep, const McConfig& cfg,
                         bool antithetic) {
  cfg.validate();
  const std::size_t n = m.dim();
  ep.validate(n);

  AttributionResult res;
  res.mode = EngineMode::mc;
  res.m_used = cfg.m;
  res.k_used = cfg.quad.k();
  res.seed = cfg.seed;
  res.phi.assign(n, 0.0);

  if (ep.degenerate()) {
    res.z_norm.assign(cfg.normalization == Normalization::per_feature ? n : 1, 0.0);
    return res;
  }

  const std::uint64_t draws = antithetic ? cfg.m / 2 : cfg.m;
  const std::uint64_t blocks = (draws + kDrawsPerBlock - 1) / kDrawsPerBlock;
  std::vector<Accumulator> partial(blocks, Accumulator(n));

  parallel_for(blocks, cfg.workers, [&](std::size_t b) {
    detail::PathIntegrator integrate(m, ep, cfg.quad, cfg.path);
    Accumulator& acc = partial[b];
    const std::uint64_t first = b * kDrawsPerBlock;
    const std::uint64_t last = std::min(draws, first + kDrawsPerBlock);
    for (std::uint64_t t = first; t < last; ++t) {
      auto order = sample_permutation(cfg.seed, t, static_cast<unsigned>(n));
      walk_permutation(order, integrate, ep, cfg.kernel, acc);
      if (antithetic) {
        std::reverse(order.begin(), order.end());
        walk_permutation(order, integrate, ep, cfg.kernel, acc);
      }
    }
  });

  Accumulator total(n);
  for (const auto& acc : partial) total.merge(acc);

  res.b_estimate = total.b_max;
  if (cfg.normalization == Normalization::per_feature) {
    res.z_norm.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = total.den[i].value();
      const double num = total.num[i].value();
      res.z_norm[i] = z;
      res.phi[i] = z > 0.0 ? num / z : num;
    }
  } else {
    const double z = total.z.value();
    res.z_norm = {z};
    for (std::size_t i = 0; i < n; ++i) {
      const double num = total.num[i].value();
      res.phi[i] = z > 0.0 ? num / z : num;
    }
  }
  for (double v : res.phi) {
    if (!std::isfinite(v)) fail(ErrorKind::numerical, "non-finite attribution");
  }
  res.completeness_residual = residual_of(res.phi, model_gain(m, ep));
  return res;
}

}  // namespace

Normalization parse_normalization(std::string_view s) {
  if (s == "feature" || s == "per-feature") return Normalization::per_feature;
  if (s == "global" || s == "global-z") return Normalization::global_z;
  fail(ErrorKind::config, "unknown normalization '" + std::string(s) + "'");
}

std::string to_string(Normalization n) {
  return n == Normalization::per_feature ? "feature" : "global";
}

void McConfig::validate() const {
  require(m >= 1, ErrorKind::config, "m must be at least 1");
  require(!antithetic || m % 2 == 0, ErrorKind::config,
          "antithetic sampling needs an even permutation count m");
  require(workers >= 1, ErrorKind::config, "workers must be at least 1");
}

AttributionResult gralis_exact(const Model& m, const EvalPoint& ep, const Kernel& kernel,
                               const QuadratureRule& quad, PathMode path) {
  const std::size_t n = m.dim();
  require(n <= kMaxExactFeatures, ErrorKind::capacity,
          "exact enumeration is limited to 20 features");
  ep.validate(n);

  AttributionResult res;
  res.mode = EngineMode::exact;
  res.k_used = quad.k();
  res.m_used = std::uint64_t{1} << (n - 1);
  res.phi.assign(n, 0.0);
  res.z_norm.assign(n, 1.0);
  if (ep.degenerate()) return res;

  const auto nf = static_cast<unsigned>(n);
  std::vector<double> weight_by_size(n);
  for (unsigned s = 0; s < nf; ++s) weight_by_size[s] = shapley_weight(s, nf);

  detail::PathIntegrator integrate(m, ep, quad, path);
  const std::uint64_t full = Coalition::full(nf).bits();
  for (unsigned i = 0; i < nf; ++i) {
    const std::uint64_t rest = full & ~(std::uint64_t{1} << i);
    CompensatedSum num;
    CompensatedSum den;
    std::uint64_t s = rest;
    while (true) {
      const double w = weight_by_size[std::popcount(s)];
      const double pi_w = kernel_weight_bits(kernel, ep, s);
      const double contribution = pi_w * integrate(s, i);
      num.add(w * contribution);
      den.add(w * pi_w);
      res.b_estimate = std::max(res.b_estimate, std::abs(contribution));
      if (s == 0) break;
      s = (s - 1) & rest;
    }
    // The Shapley weights over subsets of F\{i} sum to one, so the uniform
    // kernel needs no normalization.
    const double z = kernel.is_uniform() ? 1.0 : den.value();
    res.z_norm[i] = z;
    res.phi[i] = z > 0.0 ? num.value() / z : num.value();
  }
  for (double v : res.phi) {
    if (!std::isfinite(v)) fail(ErrorKind::numerical, "non-finite attribution");
  }
  res.completeness_residual = residual_of(res.phi, model_gain(m, ep));
  return res;
}

AttributionResult gralis_mc(const Model& m, const EvalPoint& ep, const McConfig& cfg) {
  return run_mc(m, ep, cfg, cfg.antithetic);
}

AttributionResult gralis_mc_antithetic(const Model& m, const EvalPoint& ep,
                                       const McConfig& cfg) {
  require(cfg.antithetic, ErrorKind::config,
          "gralis_mc_antithetic requires antithetic sampling to be enabled");
  return run_mc(m, ep, cfg, true);
}

double mc_error_bound(double b, std::uint64_t m, double delta, double x_i_gap,
                      double l1_gap, double hess_sup, unsigned k) {
  require(delta > 0.0 && delta < 1.0, ErrorKind::domain, "delta must lie in (0,1)");
  require(b >= 0.0 && hess_sup >= 0.0, ErrorKind::domain,
          "B and the Hessian bound must be nonnegative");
  require(m >= 1 && k >= 1, ErrorKind::domain, "m and k must be at least 1");
  const double mc = b / std::sqrt(static_cast<double>(m) * delta);
  const double riemann = std::abs(x_i_gap) * std::abs(l1_gap) * hess_sup / (2.0 * k);
  return mc + riemann;
}

double completeness_residual(const AttributionResult& res, const Model& m,
                             const EvalPoint& ep) {
  ep.validate(m.dim());
  require(res.phi.size() == m.dim(), ErrorKind::config,
          "attribution length does not match the model");
  return residual_of(res.phi, model_gain(m, ep));
}

}  // namespace gralis

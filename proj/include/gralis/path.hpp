#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gralis/coalition.hpp"
#include "gralis/model.hpp"

namespace gralis {

inline constexpr unsigned kMaxGaussNodes = 16;

enum class QuadKind { right_riemann, midpoint, gauss_legendre };

// Rule for integrals over [0,1]; nodes lie in [0,1] and weights sum to one.
class QuadratureRule {
 public:
  QuadratureRule(QuadKind kind, unsigned k);

  static QuadratureRule right(unsigned k) { return {QuadKind::right_riemann, k}; }
  static QuadratureRule midpoint(unsigned k) { return {QuadKind::midpoint, k}; }
  static QuadratureRule gauss(unsigned p) { return {QuadKind::gauss_legendre, p}; }

  QuadKind kind() const noexcept { return kind_; }
  unsigned k() const noexcept { return k_; }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }

  template <class F>
  double integrate(F&& g) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) acc += weights_[j] * g(nodes_[j]);
    return acc;
  }

 private:
  QuadKind kind_;
  unsigned k_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

QuadKind parse_quad_kind(std::string_view s);
std::string to_string(QuadKind kind);

// simultaneous: S and i move from the baseline together.
// sequential:   S sits at x, only i moves.
enum class PathMode { simultaneous, sequential };

PathMode parse_path_mode(std::string_view s);
std::string to_string(PathMode mode);

std::vector<double> path_point(const EvalPoint& ep, const Coalition& s, unsigned i,
                               double alpha, PathMode mode);

// (x_i - x'_i) * int_0^1 d_i F(path(alpha)) d alpha, with the integral
// replaced by `q`.
double conditioned_ig(const Model& m, const EvalPoint& ep, const Coalition& s,
                      unsigned i, const QuadratureRule& q, PathMode mode);

// |sum_{j in S} IG^{S\{j}}_j - (F(x_S) - F(x'))| for the simultaneous path.
double coalition_residual(const Model& m, const EvalPoint& ep, const Coalition& s,
                     const QuadratureRule& q);

// Plain integrated gradients along the straight line x' -> x.
double integrated_gradients(const Model& m, const EvalPoint& ep, unsigned i,
                            const QuadratureRule& q);

namespace detail {

// Reusable evaluator for conditioned IG; owns a scratch buffer so the
// sampling loops do not allocate per call. Not thread-safe: one per worker.
class PathIntegrator {
 public:
  PathIntegrator(const Model& m, const EvalPoint& ep, const QuadratureRule& q,
                 PathMode mode);
  double operator()(std::uint64_t s_bits, unsigned i);

 private:
  const Model& model_;
  const EvalPoint& ep_;
  const QuadratureRule& rule_;
  PathMode mode_;
  std::vector<double> point_;
};

}  // namespace detail

}  // namespace gralis

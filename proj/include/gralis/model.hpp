#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gralis {

inline constexpr double kDefaultFdStep = 1e-5;

// Input x together with the reference input x' the attribution is measured
// against.
struct EvalPoint {
  std::vector<double> x;
  std::vector<double> baseline;

  std::size_t dim() const noexcept { return x.size(); }
  // Throws a config error unless both vectors have length `n` and are finite.
  void validate(std::size_t n) const;
  bool degenerate() const noexcept { return x == baseline; }
};

using ScalarFn = std::function<double(std::span<const double>)>;
using PartialFn = std::function<double(std::span<const double>, std::size_t)>;
using ReferenceFn = std::function<std::vector<double>(const EvalPoint&)>;

// Black-box scalar model on R^n. Immutable after construction, so a Model may
// be evaluated from any number of threads at once.
class Model {
 public:
  Model(std::size_t dim, ScalarFn eval, PartialFn partial, std::string label,
        ReferenceFn shapley_reference = {}, double fd_step = kDefaultFdStep);

  std::size_t dim() const noexcept { return impl_->dim; }
  const std::string& label() const noexcept { return impl_->label; }
  double fd_step() const noexcept { return impl_->fd_step; }

  double eval(std::span<const double> x) const;

  bool has_gradient() const noexcept { return static_cast<bool>(impl_->partial); }
  // d f / d x_i: analytic when available, central differences otherwise.
  double partial(std::span<const double> x, std::size_t i) const;
  std::vector<double> gradient(std::span<const double> x) const;

  // Exact Shapley values of the game S -> f(x_S), where a symbolic form is
  // known (linear and multilinear models).
  std::optional<std::vector<double>> shapley_reference(const EvalPoint& ep) const;

  // Same function with the analytic gradient dropped.
  Model without_gradient() const;

  // a*f + b*g, with gradient and reference combined linearly where both exist.
  static Model linear_combination(double a, const Model& f, double b,
                                  const Model& g);

 private:
  struct Impl {
    std::size_t dim;
    ScalarFn eval;
    PartialFn partial;
    std::string label;
    ReferenceFn reference;
    double fd_step;
  };
  std::shared_ptr<const Impl> impl_;
};

std::vector<std::string> zoo_names();

// Builds one of the analytic test functions by name:
//   linear               params = [] or [a, b_1..b_n]    f = a + sum b_i x_i  (1, (2, 3))
//   product              params = [] or [n]              f = prod x_i (n = 2)
//   multilinear          params = [] or [n, c_0..c_{2^n-1}]
//                        f = sum_T c_T prod_{j in T} x_j, T indexed by bitmask
//   quadratic            params = [] or [a_1..a_n]       f = sum a_i x_i^2  (a = [1])
//   additive-interaction params = [] or [a, b, c]        f = a x1 + b x2 + c x1 x2
//   ishigami-like        params = [] or [a, b]
//                        f = sin x1 + a sin^2 x2 + b x3^4 sin x1  (a=7, b=0.1)
Model zoo_model(std::string_view name, std::span<const double> params = {});

double finite_diff_partial(const Model& m, std::span<const double> x,
                           std::size_t i, double h = kDefaultFdStep);
std::vector<double> finite_diff_grad(const Model& m, std::span<const double> x,
                                     double h = kDefaultFdStep);

}  // namespace gralis

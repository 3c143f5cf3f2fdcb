#include "gralis/model.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <utility>

#include "gralis/error.hpp"

namespace gralis {

namespace {

constexpr unsigned kMaxMultilinearDim = 12;

std::string index_message(const char* what, std::size_t i) {
  std::ostringstream os;
  os << what << " at feature index " << i;
  return os.str();
}

// Multilinear polynomial sum_T c_T prod_{j in T} x_j. Also backs the product
// and additive-interaction models.
struct Multilinear {
  unsigned n;
  std::vector<double> coeffs;  // 2^n entries, bitmask-indexed

  double eval(std::span<const double> x) const {
    double acc = 0.0;
    for (std::uint64_t t = 0; t < coeffs.size(); ++t) {
      if (coeffs[t] == 0.0) continue;
      double term = coeffs[t];
      for (unsigned j = 0; j < n; ++j)
        if ((t >> j) & 1u) term *= x[j];
      acc += term;
    }
    return acc;
  }

  double partial(std::span<const double> x, std::size_t i) const {
    double acc = 0.0;
    for (std::uint64_t t = 0; t < coeffs.size(); ++t) {
      if (coeffs[t] == 0.0 || !((t >> i) & 1u)) continue;
      double term = coeffs[t];
      for (unsigned j = 0; j < n; ++j)
        if (j != i && ((t >> j) & 1u)) term *= x[j];
      acc += term;
    }
    return acc;
  }

  // Shapley values of S -> f(x_S). Expanding f(x' + 1_S * d) gives the Moebius
  // coefficient of U as sum_{T >= U} c_T prod_{U} d_j prod_{T\U} x'_j, and
  // phi_i = sum_{U containing i} m(U) / |U|.
  std::vector<double> shapley(const EvalPoint& ep) const {
    std::vector<double> phi(n, 0.0);
    const std::uint64_t full = coeffs.size() - 1;
    for (std::uint64_t t = 1; t <= full; ++t) {
      if (coeffs[t] == 0.0) continue;
      // Enumerate nonempty U subset of T.
      for (std::uint64_t u = t; u != 0; u = (u - 1) & t) {
        double m = coeffs[t];
        for (unsigned j = 0; j < n; ++j) {
          if ((u >> j) & 1u) {
            m *= ep.x[j] - ep.baseline[j];
          } else if ((t >> j) & 1u) {
            m *= ep.baseline[j];
          }
        }
        const double share = m / std::popcount(u);
        for (unsigned j = 0; j < n; ++j)
          if ((u >> j) & 1u) phi[j] += share;
      }
    }
    return phi;
  }
};

Model make_multilinear(std::string label, Multilinear poly) {
  const unsigned n = poly.n;
  auto shared = std::make_shared<const Multilinear>(std::move(poly));
  return Model(
      n, [shared](std::span<const double> x) { return shared->eval(x); },
      [shared](std::span<const double> x, std::size_t i) {
        return shared->partial(x, i);
      },
      std::move(label),
      [shared](const EvalPoint& ep) { return shared->shapley(ep); });
}

Model make_linear(std::span<const double> params) {
  static constexpr double kDefault[] = {1.0, 2.0, 3.0};
  if (params.empty()) params = kDefault;
  require(params.size() >= 2, ErrorKind::config,
          "linear model needs params [a, b_1..b_n]");
  const double a = params[0];
  std::vector<double> b(params.begin() + 1, params.end());
  const std::size_t n = b.size();
  return Model(
      n,
      [a, b](std::span<const double> x) {
        double acc = a;
        for (std::size_t i = 0; i < b.size(); ++i) acc += b[i] * x[i];
        return acc;
      },
      [b](std::span<const double>, std::size_t i) { return b[i]; }, "linear",
      [b](const EvalPoint& ep) {
        std::vector<double> phi(b.size());
        for (std::size_t i = 0; i < b.size(); ++i)
          phi[i] = b[i] * (ep.x[i] - ep.baseline[i]);
        return phi;
      });
}

unsigned dim_param(double v, const char* model) {
  require(v >= 1 && v <= kMaxMultilinearDim && v == std::floor(v),
          ErrorKind::config,
          std::string(model) + " dimension must be an integer in [1, 12]");
  return static_cast<unsigned>(v);
}

Model make_product(std::span<const double> params) {
  require(params.size() <= 1, ErrorKind::config,
          "product model takes params [] or [n]");
  const unsigned n = params.empty() ? 2 : dim_param(params[0], "product");
  Multilinear poly{n, std::vector<double>(std::size_t{1} << n, 0.0)};
  poly.coeffs.back() = 1.0;
  return make_multilinear("product", std::move(poly));
}

Model make_multilinear_zoo(std::span<const double> params) {
  if (params.empty()) {
    // 0.5 + x1 - x2 + 2 x1 x2 + 1.5 x2 x3 + x1 x2 x3
    return make_multilinear(
        "multilinear", {3, {0.5, 1.0, -1.0, 2.0, 0.0, 0.0, 1.5, 1.0}});
  }
  const unsigned n = dim_param(params[0], "multilinear");
  require(params.size() == 1 + (std::size_t{1} << n), ErrorKind::config,
          "multilinear model needs params [n, c_0..c_{2^n-1}]");
  return make_multilinear(
      "multilinear", {n, std::vector<double>(params.begin() + 1, params.end())});
}

Model make_quadratic(std::span<const double> params) {
  std::vector<double> a(params.begin(), params.end());
  if (a.empty()) a = {1.0};
  return Model(
      a.size(),
      [a](std::span<const double> x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * x[i] * x[i];
        return acc;
      },
      [a](std::span<const double> x, std::size_t i) { return 2.0 * a[i] * x[i]; },
      "quadratic");
}

Model make_additive_interaction(std::span<const double> params) {
  require(params.empty() || params.size() == 3, ErrorKind::config,
          "additive-interaction model takes params [] or [a, b, c]");
  const double a = params.empty() ? 1.0 : params[0];
  const double b = params.empty() ? 1.0 : params[1];
  const double c = params.empty() ? 1.0 : params[2];
  return make_multilinear("additive-interaction", {2, {0.0, a, b, c}});
}

Model make_ishigami(std::span<const double> params) {
  require(params.empty() || params.size() == 2, ErrorKind::config,
          "ishigami-like model takes params [] or [a, b]");
  const double a = params.empty() ? 7.0 : params[0];
  const double b = params.empty() ? 0.1 : params[1];
  return Model(
      3,
      [a, b](std::span<const double> x) {
        const double s2 = std::sin(x[1]);
        const double x3sq = x[2] * x[2];
        return std::sin(x[0]) + a * s2 * s2 + b * x3sq * x3sq * std::sin(x[0]);
      },
      [a, b](std::span<const double> x, std::size_t i) {
        const double x3sq = x[2] * x[2];
        switch (i) {
          case 0: return std::cos(x[0]) * (1.0 + b * x3sq * x3sq);
          case 1: return 2.0 * a * std::sin(x[1]) * std::cos(x[1]);
          default: return 4.0 * b * x3sq * x[2] * std::sin(x[0]);
        }
      },
      "ishigami-like");
}

}  // namespace

void EvalPoint::validate(std::size_t n) const {
  require(x.size() == n && baseline.size() == n, ErrorKind::config,
          "evaluation point and baseline must both have length " +
              std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    require(std::isfinite(x[i]) && std::isfinite(baseline[i]),
            ErrorKind::config, index_message("non-finite input", i));
  }
}

Model::Model(std::size_t dim, ScalarFn eval, PartialFn partial, std::string label,
             ReferenceFn shapley_reference, double fd_step) {
  require(dim >= 1 && dim <= 64, ErrorKind::config,
          "model dimension must be in [1, 64]");
  require(static_cast<bool>(eval), ErrorKind::config, "model needs an eval function");
  require(fd_step > 0.0, ErrorKind::config, "finite-difference step must be > 0");
  impl_ = std::make_shared<const Impl>(Impl{dim, std::move(eval), std::move(partial),
                                            std::move(label),
                                            std::move(shapley_reference), fd_step});
}

double Model::eval(std::span<const double> x) const {
  require(x.size() == dim(), ErrorKind::config, "input length does not match model");
  const double y = impl_->eval(x);
  if (!std::isfinite(y)) fail(ErrorKind::numerical, "model returned a non-finite value");
  return y;
}

double Model::partial(std::span<const double> x, std::size_t i) const {
  require(i < dim(), ErrorKind::domain, index_message("feature out of range", i));
  if (impl_->partial) return impl_->partial(x, i);
  return finite_diff_partial(*this, x, i, impl_->fd_step);
}

std::vector<double> Model::gradient(std::span<const double> x) const {
  std::vector<double> g(dim());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = partial(x, i);
  return g;
}

std::optional<std::vector<double>> Model::shapley_reference(const EvalPoint& ep) const {
  if (!impl_->reference) return std::nullopt;
  ep.validate(dim());
  return impl_->reference(ep);
}

Model Model::without_gradient() const {
  return Model(impl_->dim, impl_->eval, {}, impl_->label + "/fd", impl_->reference,
               impl_->fd_step);
}

Model Model::linear_combination(double a, const Model& f, double b, const Model& g) {
  require(f.dim() == g.dim(), ErrorKind::config,
          "cannot combine models of different dimension");
  ScalarFn eval = [a, b, f, g](std::span<const double> x) {
    return a * f.eval(x) + b * g.eval(x);
  };
  PartialFn partial;
  if (f.has_gradient() && g.has_gradient()) {
    partial = [a, b, f, g](std::span<const double> x, std::size_t i) {
      return a * f.partial(x, i) + b * g.partial(x, i);
    };
  }
  ReferenceFn reference;
  if (f.impl_->reference && g.impl_->reference) {
    reference = [a, b, f, g](const EvalPoint& ep) {
      auto pf = *f.shapley_reference(ep);
      const auto pg = *g.shapley_reference(ep);
      for (std::size_t i = 0; i < pf.size(); ++i) pf[i] = a * pf[i] + b * pg[i];
      return pf;
    };
  }
  std::ostringstream label;
  label << a << "*" << f.label() << "+" << b << "*" << g.label();
  return Model(f.dim(), std::move(eval), std::move(partial), label.str(),
               std::move(reference), f.fd_step());
}

std::vector<std::string> zoo_names() {
  return {"linear", "product", "multilinear", "quadratic", "additive-interaction",
          "ishigami-like"};
}

Model zoo_model(std::string_view name, std::span<const double> params) {
  if (name == "linear") return make_linear(params);
  if (name == "product") return make_product(params);
  if (name == "multilinear") return make_multilinear_zoo(params);
  if (name == "quadratic") return make_quadratic(params);
  if (name == "additive-interaction") return make_additive_interaction(params);
  if (name == "ishigami-like") return make_ishigami(params);
  fail(ErrorKind::config, "unknown zoo model '" + std::string(name) + "'");
}

double finite_diff_partial(const Model& m, std::span<const double> x, std::size_t i,
                           double h) {
  require(h > 0.0, ErrorKind::domain, "finite-difference step must be > 0");
  require(i < m.dim(), ErrorKind::domain, index_message("feature out of range", i));
  std::vector<double> probe(x.begin(), x.end());
  const auto at = [&](double v) {
    probe[i] = v;
    try {
      return m.eval(probe);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::numerical) throw;
      fail(ErrorKind::numerical, index_message("non-finite model value", i));
    }
  };
  const double up = at(x[i] + h);
  const double down = at(x[i] - h);
  return (up - down) / (2.0 * h);
}

std::vector<double> finite_diff_grad(const Model& m, std::span<const double> x,
                                     double h) {
  require(x.size() == m.dim(), ErrorKind::config, "input length does not match model");
  std::vector<double> g(m.dim());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = finite_diff_partial(m, x, i, h);
  return g;
}

}  // namespace gralis

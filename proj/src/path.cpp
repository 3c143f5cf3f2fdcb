#include "gralis/path.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "gralis/error.hpp"

namespace gralis {

namespace {

struct GaussTable {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Nodes and weights of the p-point Gauss-Legendre rule mapped to [0,1].
GaussTable compute_gauss(unsigned p) {
  GaussTable table{std::vector<double>(p), std::vector<double>(p)};
  for (unsigned r = 0; r < p; ++r) {
    // Chebyshev-like initial guess for the r-th root, then Newton on P_p.
    double t = std::cos(std::numbers::pi * (r + 0.75) / (p + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = t;
      for (unsigned k = 2; k <= p; ++k) {
        const double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = p * (t * p1 - p0) / (t * t - 1.0);
      const double step = p1 / dp;
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    // Recompute derivative at the converged root for the weight.
    double p0 = 1.0;
    double p1 = t;
    for (unsigned k = 2; k <= p; ++k) {
      const double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = p * (t * p1 - p0) / (t * t - 1.0);
    const double w = 2.0 / ((1.0 - t * t) * dp * dp);
    // Roots come out in decreasing t; store ascending alpha.
    table.nodes[p - 1 - r] = 0.5 * (1.0 - t);
    table.weights[p - 1 - r] = 0.5 * w;
  }
  return table;
}

const GaussTable& gauss_table(unsigned p) {
  static std::array<GaussTable, kMaxGaussNodes + 1> tables;
  static std::once_flag once;
  std::call_once(once, [] {
    for (unsigned q = 1; q <= kMaxGaussNodes; ++q) tables[q] = compute_gauss(q);
  });
  return tables[p];
}

std::string coalition_string(std::uint64_t bits, std::size_t n) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (std::size_t j = 0; j < n; ++j) {
    if ((bits >> j) & 1u) {
      if (!first) os << ',';
      os << j;
      first = false;
    }
  }
  os << '}';
  return os.str();
}

void fill_path_point(const EvalPoint& ep, std::uint64_t s_bits, unsigned i, double alpha,
                     PathMode mode, std::span<double> out) {
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double lo = ep.baseline[j];
    const double hi = ep.x[j];
    const bool in_s = (s_bits >> j) & 1u;
    if (j == i) {
      out[j] = lo + alpha * (hi - lo);
    } else if (in_s) {
      out[j] = mode == PathMode::simultaneous ? lo + alpha * (hi - lo) : hi;
    } else {
      out[j] = lo;
    }
  }
}

void check_target(const EvalPoint& ep, const Coalition& s, unsigned i) {
  require(s.universe() == ep.dim(), ErrorKind::config,
          "coalition universe does not match the input dimension");
  require(i < ep.dim(), ErrorKind::domain, "feature " + std::to_string(i) + " out of range");
  require(!s.contains(i), ErrorKind::domain,
          "target feature " + std::to_string(i) + " belongs to the conditioning coalition");
}

}  // namespace

QuadratureRule::QuadratureRule(QuadKind kind, unsigned k) : kind_(kind), k_(k) {
  require(k >= 1, ErrorKind::config, "quadrature needs at least one node");
  switch (kind) {
    case QuadKind::right_riemann:
    case QuadKind::midpoint: {
      const double offset = kind == QuadKind::midpoint ? 0.5 : 0.0;
      nodes_.resize(k);
      weights_.assign(k, 1.0 / k);
      for (unsigned j = 0; j < k; ++j) nodes_[j] = (j + 1 - offset) / k;
      break;
    }
    case QuadKind::gauss_legendre: {
      require(k <= kMaxGaussNodes, ErrorKind::config,
              "Gauss-Legendre rules are available up to 16 nodes");
      const auto& table = gauss_table(k);
      nodes_ = table.nodes;
      weights_ = table.weights;
      break;
    }
  }
}

QuadKind parse_quad_kind(std::string_view s) {
  if (s == "right" || s == "right-riemann") return QuadKind::right_riemann;
  if (s == "mid" || s == "midpoint") return QuadKind::midpoint;
  if (s == "gauss" || s == "gauss-legendre") return QuadKind::gauss_legendre;
  fail(ErrorKind::config, "unknown quadrature rule '" + std::string(s) + "'");
}

std::string to_string(QuadKind kind) {
  switch (kind) {
    case QuadKind::right_riemann: return "right";
    case QuadKind::midpoint: return "mid";
    case QuadKind::gauss_legendre: return "gauss";
  }
  return "?";
}

PathMode parse_path_mode(std::string_view s) {
  if (s == "simultaneous") return PathMode::simultaneous;
  if (s == "sequential") return PathMode::sequential;
  fail(ErrorKind::config, "unknown path mode '" + std::string(s) + "'");
}

std::string to_string(PathMode mode) {
  return mode == PathMode::simultaneous ? "simultaneous" : "sequential";
}

std::vector<double> path_point(const EvalPoint& ep, const Coalition& s, unsigned i,
                               double alpha, PathMode mode) {
  check_target(ep, s, i);
  require(alpha >= 0.0 && alpha <= 1.0, ErrorKind::domain, "alpha must lie in [0,1]");
  std::vector<double> out(ep.dim());
  fill_path_point(ep, s.bits(), i, alpha, mode, out);
  return out;
}

namespace detail {

PathIntegrator::PathIntegrator(const Model& m, const EvalPoint& ep,
                               const QuadratureRule& q, PathMode mode)
    : model_(m), ep_(ep), rule_(q), mode_(mode), point_(ep.dim()) {}

double PathIntegrator::operator()(std::uint64_t s_bits, unsigned i) {
  const double gap = ep_.x[i] - ep_.baseline[i];
  if (gap == 0.0) return 0.0;
  const auto nodes = rule_.nodes();
  const auto weights = rule_.weights();
  double acc = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    fill_path_point(ep_, s_bits, i, nodes[j], mode_, point_);
    const double g = model_.partial(point_, i);
    if (!std::isfinite(g)) {
      std::ostringstream os;
      os << "non-finite gradient for S=" << coalition_string(s_bits, ep_.dim())
         << ", i=" << i << ", alpha=" << nodes[j];
      fail(ErrorKind::numerical, os.str());
    }
    acc += weights[j] * g;
  }
  return gap * acc;
}

}  // namespace detail

double conditioned_ig(const Model& m, const EvalPoint& ep, const Coalition& s, unsigned i,
                      const QuadratureRule& q, PathMode mode) {
  ep.validate(m.dim());
  check_target(ep, s, i);
  detail::PathIntegrator integrate(m, ep, q, mode);
  return integrate(s.bits(), i);
}

double coalition_residual(const Model& m, const EvalPoint& ep, const Coalition& s,
                     const QuadratureRule& q) {
  ep.validate(m.dim());
  require(s.universe() == ep.dim(), ErrorKind::config,
          "coalition universe does not match the input dimension");
  require(s.size() > 0, ErrorKind::domain, "coalition_residual needs a nonempty coalition");
  detail::PathIntegrator integrate(m, ep, q, PathMode::simultaneous);
  double total = 0.0;
  for (unsigned j = 0; j < ep.dim(); ++j) {
    if (s.contains(j)) total += integrate(s.without(j).bits(), j);
  }
  const double gain = m.eval(mask_point(ep, s)) - m.eval(ep.baseline);
  return std::abs(total - gain);
}

double integrated_gradients(const Model& m, const EvalPoint& ep, unsigned i,
                            const QuadratureRule& q) {
  ep.validate(m.dim());
  require(i < ep.dim(), ErrorKind::domain, "feature " + std::to_string(i) + " out of range");
  const double gap = ep.x[i] - ep.baseline[i];
  std::vector<double> point(ep.dim());
  const double integral = q.integrate([&](double alpha) {
    for (std::size_t j = 0; j < point.size(); ++j)
      point[j] = ep.baseline[j] + alpha * (ep.x[j] - ep.baseline[j]);
    return m.partial(point, i);
  });
  return gap * integral;
}

}  // namespace gralis

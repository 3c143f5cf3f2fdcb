#include "gralis/reductions.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "gralis/attribution.hpp"
#include "gralis/error.hpp"
#include "gralis/summation.hpp"

namespace gralis {

void CanonicalTriple::validate() const {
  require(cols >= 1, ErrorKind::config, "triple needs at least one column");
  require(delta.size() == w.size() * cols, ErrorKind::config,
          "triple weight and delta sizes do not match");
}

std::vector<double> triple_eval(const CanonicalTriple& t) {
  t.validate();
  std::vector<double> out(t.cols);
  for (unsigned c = 0; c < t.cols; ++c) {
    CompensatedSum acc;
    for (std::size_t q = 0; q < t.q_size(); ++q) acc.add(t.w[q] * t.delta_at(q, c));
    out[c] = acc.value();
    if (!std::isfinite(out[c])) fail(ErrorKind::numerical, "triple evaluation is not finite");
  }
  return out;
}

double constitutive_residual(const CanonicalTriple& t, double gain) {
  t.validate();
  double worst = 0.0;
  for (std::size_t q = 0; q < t.q_size(); ++q) {
    CompensatedSum acc;
    for (unsigned c = 0; c < t.cols; ++c) acc.add(t.delta_at(q, c));
    worst = std::max(worst, std::abs(acc.value() - gain));
  }
  return worst;
}

void FeatureMapStack::validate() const {
  require(k >= 1 && h >= 1 && w >= 1, ErrorKind::config, "feature maps need K, H, W >= 1");
  require(a.size() == k * h * w && g.size() == a.size(), ErrorKind::config,
          "activations and gradients must both have K*H*W entries");
}

namespace {

std::vector<double> channel_weights(const FeatureMapStack& fm) {
  const double z = static_cast<double>(fm.h * fm.w);
  std::vector<double> alpha(fm.k);
  for (std::size_t ch = 0; ch < fm.k; ++ch) {
    CompensatedSum acc;
    for (std::size_t r = 0; r < fm.h; ++r)
      for (std::size_t c = 0; c < fm.w; ++c) acc.add(fm.g[fm.index(ch, r, c)]);
    alpha[ch] = acc.value() / z;
  }
  return alpha;
}

void check_position(const FeatureMapStack& fm, std::size_t p, std::size_t q) {
  require(p < fm.h && q < fm.w, ErrorKind::domain, "map position out of range");
}

}  // namespace

double gradcam_lin(const FeatureMapStack& fm, std::size_t p, std::size_t q) {
  fm.validate();
  check_position(fm, p, q);
  const auto alpha = channel_weights(fm);
  CompensatedSum acc;
  for (std::size_t ch = 0; ch < fm.k; ++ch) acc.add(alpha[ch] * fm.a[fm.index(ch, p, q)]);
  return acc.value();
}

std::vector<double> gradcam_lin_map(const FeatureMapStack& fm) {
  fm.validate();
  const auto alpha = channel_weights(fm);
  std::vector<double> map(fm.h * fm.w);
  for (std::size_t p = 0; p < fm.h; ++p) {
    for (std::size_t q = 0; q < fm.w; ++q) {
      CompensatedSum acc;
      for (std::size_t ch = 0; ch < fm.k; ++ch) acc.add(alpha[ch] * fm.a[fm.index(ch, p, q)]);
      map[p * fm.w + q] = acc.value();
    }
  }
  return map;
}

CanonicalTriple gradcam_triple(const FeatureMapStack& fm, std::size_t p, std::size_t q) {
  fm.validate();
  check_position(fm, p, q);
  const double z = static_cast<double>(fm.h * fm.w);
  CanonicalTriple t;
  t.w.assign(fm.a.size(), 1.0 / z);
  t.delta.resize(fm.a.size());
  for (std::size_t ch = 0; ch < fm.k; ++ch)
    for (std::size_t r = 0; r < fm.h; ++r)
      for (std::size_t c = 0; c < fm.w; ++c)
        t.delta[fm.index(ch, r, c)] = fm.g[fm.index(ch, r, c)] * fm.a[fm.index(ch, p, q)];
  return t;
}

bool relu_nonlinearity_witness(const FeatureMapStack& fm, double lambda) {
  require(lambda < 0.0, ErrorKind::domain, "the witness needs a negative scale");
  const auto map = gradcam_lin_map(fm);
  const auto relu = [](double v) { return v > 0.0 ? v : 0.0; };
  bool positive = false;
  double gap = 0.0;
  for (double l : map) {
    positive = positive || l > 0.0;
    gap = std::max(gap, std::abs(relu(lambda * l) - lambda * relu(l)));
  }
  if (!positive) fail(ErrorKind::witness_unavailable, "map has no positive position");
  return gap > 0.0;
}

void BinaryDesign::validate() const {
  require(rows >= 1 && cols >= 1, ErrorKind::config, "design needs rows and columns");
  require(z.size() == rows * cols, ErrorKind::config, "design size does not match T x n");
}

LimeFit lime_triple(const BinaryDesign& design, std::span<const double> weights,
                    std::span<const double> fvals, unsigned i) {
  design.validate();
  const std::size_t rows = design.rows;
  const std::size_t p = design.cols + 1;
  require(weights.size() == rows && fvals.size() == rows, ErrorKind::config,
          "one weight and one response per design row");
  require(i < design.cols, ErrorKind::domain, "target feature out of range");
  for (std::size_t t = 0; t < rows; ++t) {
    require(std::isfinite(weights[t]) && weights[t] >= 0.0, ErrorKind::config,
            "sample weights must be finite and nonnegative");
    require(std::isfinite(fvals[t]), ErrorKind::config, "responses must be finite");
  }
  if (rows < p) fail(ErrorKind::rank_deficient, "fewer samples than regression columns");

  Eigen::VectorXd root(rows);
  Eigen::MatrixXd a(rows, p);
  Eigen::VectorXd b(rows);
  for (std::size_t t = 0; t < rows; ++t) {
    root(t) = std::sqrt(weights[t]);
    a(t, 0) = root(t);
    for (std::size_t j = 0; j < design.cols; ++j) a(t, j + 1) = design.at(t, j) ? root(t) : 0.0;
    b(t) = root(t) * fvals[t];
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double smax = s.maxCoeff();
  const double smin = s.minCoeff();
  if (!(smin > 0.0) || (smax / smin) * (smax / smin) >= kLimeConditionLimit) {
    fail(ErrorKind::rank_deficient, "normal equations are singular or ill-conditioned");
  }

  LimeFit fit;
  fit.condition = (smax / smin) * (smax / smin);
  const Eigen::VectorXd beta = a.colPivHouseholderQr().solve(b);
  fit.coefficients.assign(beta.data(), beta.data() + beta.size());
  fit.coefficient = beta(i + 1);

  // Row i+1 of (X^T W X)^{-1} X^T W = V S^{-1} U^T sqrt(W).
  const Eigen::RowVectorXd v_row = svd.matrixV().row(i + 1);
  const Eigen::RowVectorXd scaled = v_row.cwiseQuotient(s.transpose());
  const Eigen::RowVectorXd hat = (scaled * svd.matrixU().transpose()).cwiseProduct(root.transpose());
  fit.triple.w.assign(hat.data(), hat.data() + hat.size());
  fit.triple.delta.assign(fvals.begin(), fvals.end());
  return fit;
}

std::vector<double> lime_responses(const Model& m, const EvalPoint& ep,
                                   const BinaryDesign& design) {
  design.validate();
  ep.validate(m.dim());
  require(design.cols == m.dim(), ErrorKind::config, "design width does not match the model");
  std::vector<double> out(design.rows);
  std::vector<double> point(design.cols);
  for (std::size_t t = 0; t < design.rows; ++t) {
    for (std::size_t j = 0; j < design.cols; ++j)
      point[j] = design.at(t, j) ? ep.x[j] : ep.baseline[j];
    out[t] = m.eval(point);
  }
  return out;
}

std::vector<double> lime_proximity(const Kernel& k, const EvalPoint& ep,
                                   const BinaryDesign& design) {
  design.validate();
  require(design.cols == ep.dim() && design.cols <= kMaxFeatures, ErrorKind::config,
          "design width does not match the input");
  std::vector<double> out(design.rows);
  for (std::size_t t = 0; t < design.rows; ++t) {
    std::uint64_t bits = 0;
    for (std::size_t j = 0; j < design.cols; ++j)
      if (design.at(t, j)) bits |= std::uint64_t{1} << j;
    out[t] = kernel_weight_bits(k, ep, bits);
  }
  return out;
}

TripleValue ig_triple(const Model& m, const EvalPoint& ep, unsigned i, unsigned k) {
  require(k >= 1, ErrorKind::config, "IG needs at least one step");
  ep.validate(m.dim());
  require(i < m.dim(), ErrorKind::domain, "feature out of range");
  const std::size_t n = m.dim();
  const double gap = ep.x[i] - ep.baseline[i];
  TripleValue out;
  out.triple.w.assign(k, gap / k);
  out.triple.delta.resize(k);
  std::vector<double> point(n);
  for (unsigned j = 1; j <= k; ++j) {
    const double alpha = static_cast<double>(j) / k;
    for (std::size_t d = 0; d < n; ++d)
      point[d] = ep.baseline[d] + alpha * (ep.x[d] - ep.baseline[d]);
    const double g = m.partial(point, i);
    if (!std::isfinite(g)) fail(ErrorKind::numerical, "non-finite gradient on the IG path");
    out.triple.delta[j - 1] = g;
  }
  const auto rest = Coalition::full(static_cast<unsigned>(n)).without(i);
  out.value = conditioned_ig(m, ep, rest, i, QuadratureRule::right(k), PathMode::simultaneous);
  return out;
}

TripleValue shap_triple(const CooperativeGame& g, unsigned i) {
  const unsigned n = g.players();
  require(i < n, ErrorKind::domain, "player out of range");
  const std::uint64_t bit = std::uint64_t{1} << i;
  TripleValue out;
  for (std::uint64_t s = 0; s < g.values().size(); ++s) {
    if (s & bit) continue;
    out.triple.w.push_back(shapley_weight(std::popcount(s), n));
    out.triple.delta.push_back(g[s | bit] - g[s]);
  }
  out.value = shapley_values(g)[i];
  return out;
}

CanonicalTriple shap_permutation_triple(const CooperativeGame& g) {
  const unsigned n = g.players();
  require(n >= 1 && n <= kMaxPermutationPlayers, ErrorKind::capacity,
          "permutation triples are limited to 8 players");
  std::vector<unsigned> order(n);
  std::iota(order.begin(), order.end(), 0u);
  CanonicalTriple t;
  t.cols = n;
  do {
    std::uint64_t s = 0;
    const std::size_t row = t.delta.size();
    t.delta.resize(row + n);
    for (unsigned i : order) {
      t.delta[row + i] = g[s | (std::uint64_t{1} << i)] - g[s];
      s |= std::uint64_t{1} << i;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  const std::size_t count = t.delta.size() / n;
  t.w.assign(count, 1.0 / static_cast<double>(count));
  return t;
}

TripleValue gralis_triple(const Model& m, const EvalPoint& ep, unsigned i,
                          const Kernel& kernel, const QuadratureRule& quad, PathMode path) {
  const auto n = static_cast<unsigned>(m.dim());
  require(n <= kMaxExactFeatures, ErrorKind::capacity, "exact triples are limited to 20 features");
  ep.validate(n);
  require(i < n, ErrorKind::domain, "feature out of range");
  const std::uint64_t rest = Coalition::full(n).without(i).bits();
  TripleValue out;
  CompensatedSum z;
  std::uint64_t s = rest;
  while (true) {
    const double w = shapley_weight(std::popcount(s), n) * kernel_weight_bits(kernel, ep, s);
    out.triple.w.push_back(w);
    out.triple.delta.push_back(conditioned_ig(m, ep, Coalition(s, n), i, quad, path));
    z.add(w);
    if (s == 0) break;
    s = (s - 1) & rest;
  }
  const double norm = kernel.is_uniform() ? 1.0 : z.value();
  if (norm > 0.0)
    for (double& w : out.triple.w) w /= norm;
  out.value = gralis_exact(m, ep, kernel, quad, path).phi[i];
  return out;
}

std::vector<ReducibilityCheck> reducibility_suite(const Model& m, const EvalPoint& ep,
                                                  const QuadratureRule& quad) {
  const auto n = static_cast<unsigned>(m.dim());
  require(n <= 10, ErrorKind::capacity, "the reducibility suite is limited to 10 features");
  ep.validate(n);
  std::vector<ReducibilityCheck> checks;

  {
    ReducibilityCheck c{"uniform-sequential-vs-shapley", true, 0.0,
                        "uniform kernel, sequential path, against Shapley of the induced game"};
    const auto phi = gralis_exact(m, ep, Kernel::uniform(), quad, PathMode::sequential).phi;
    const auto sh = shapley_values(CooperativeGame::from_model(m, ep));
    for (unsigned i = 0; i < n; ++i) c.deviation = std::max(c.deviation, std::abs(phi[i] - sh[i]));
    checks.push_back(c);
  }
  {
    ReducibilityCheck c{"full-coalition-vs-ig", true, 0.0,
                        "S = F\\{i} on the simultaneous path against straight-line IG"};
    for (unsigned i = 0; i < n; ++i) {
      const double cig = conditioned_ig(m, ep, Coalition::full(n).without(i), i, quad,
                                        PathMode::simultaneous);
      c.deviation = std::max(c.deviation, std::abs(cig - integrated_gradients(m, ep, i, quad)));
    }
    checks.push_back(c);
  }
  {
    ReducibilityCheck c{"constant-gradient-vs-weighted-difference", false, 0.0,
                        "run only on exactly linear models"};
    const std::string& label = m.label();
    if (label == "linear" || label.rfind("linear/", 0) == 0) {
      c.applicable = true;
      c.note = "gaussian kernel sigma=1 against the kernel-weighted marginal difference";
      const Kernel kernel = Kernel::gaussian(1.0);
      const auto phi = gralis_exact(m, ep, kernel, quad, PathMode::simultaneous).phi;
      const auto game = CooperativeGame::from_model(m, ep);
      const auto pi = kernel_table(kernel, ep);
      const auto raw = kernel_weighted_shapley(game, pi);
      for (unsigned i = 0; i < n; ++i) {
        const std::uint64_t rest = Coalition::full(n).without(i).bits();
        CompensatedSum z;
        for (std::uint64_t s = rest;; s = (s - 1) & rest) {
          z.add(shapley_weight(std::popcount(s), n) * pi[s]);
          if (s == 0) break;
        }
        c.deviation = std::max(c.deviation, std::abs(phi[i] - raw[i] / z.value()));
      }
    }
    checks.push_back(c);
  }
  {
    ReducibilityCheck c{"small-sigma-concentration", true, 0.0,
                        "1 - kernel mass on the coalitions with the smallest |x_S - x'_S|"};
    double min_gap = 0.0;
    for (unsigned j = 0; j < n; ++j) {
      const double g = std::abs(ep.x[j] - ep.baseline[j]);
      if (g > 0.0 && (min_gap == 0.0 || g < min_gap)) min_gap = g;
    }
    if (min_gap > 0.0) {
      const Kernel kernel = Kernel::gaussian(1e-3 * min_gap);
      const auto pi = kernel_table(kernel, ep);
      const auto dist2 = [&](std::uint64_t s) {
        double d = 0.0;
        for (unsigned j = 0; j < n; ++j)
          if ((s >> j) & 1u) d += (ep.x[j] - ep.baseline[j]) * (ep.x[j] - ep.baseline[j]);
        return d;
      };
      for (unsigned i = 0; i < n; ++i) {
        const std::uint64_t rest = Coalition::full(n).without(i).bits();
        double nearest = INFINITY;
        for (std::uint64_t s = rest;; s = (s - 1) & rest) {
          nearest = std::min(nearest, dist2(s));
          if (s == 0) break;
        }
        CompensatedSum total;
        CompensatedSum near;
        for (std::uint64_t s = rest;; s = (s - 1) & rest) {
          const double w = shapley_weight(std::popcount(s), n) * pi[s];
          total.add(w);
          if (dist2(s) == nearest) near.add(w);
          if (s == 0) break;
        }
        c.deviation = std::max(c.deviation, 1.0 - near.value() / total.value());
      }
    }
    checks.push_back(c);
  }
  return checks;
}

}  // namespace gralis

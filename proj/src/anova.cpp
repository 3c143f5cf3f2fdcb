#include "gralis/anova.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <string>

#include "gralis/attribution.hpp"
#include "gralis/error.hpp"
#include "gralis/summation.hpp"

namespace gralis {

namespace {

std::vector<double> parse_numbers(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::string item(text.substr(pos, comma - pos));
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    require(first != std::string::npos, ErrorKind::config,
            "empty entry in grid spec '" + std::string(text) + "'");
    item = item.substr(first, last - first + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    require(ec == std::errc() && ptr == item.data() + item.size(), ErrorKind::config,
            "cannot parse number '" + item + "' in grid spec");
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

// Mixed-radix helpers over the coordinates listed in a bitmask.
struct SubGrid {
  std::vector<unsigned> coords;
  std::vector<std::size_t> sizes;
  std::size_t count = 1;

  SubGrid(std::uint64_t t, std::span<const std::size_t> dim_sizes) {
    for (unsigned j = 0; j < dim_sizes.size(); ++j) {
      if ((t >> j) & 1u) {
        coords.push_back(j);
        sizes.push_back(dim_sizes[j]);
        count *= dim_sizes[j];
      }
    }
  }

  // Linear index of the projection of a full multi-index.
  std::size_t project(std::span<const std::size_t> full) const {
    std::size_t lin = 0;
    for (std::size_t c = 0; c < coords.size(); ++c) lin = lin * sizes[c] + full[coords[c]];
    return lin;
  }

  // Writes the coordinates of sub-grid entry `lin` into `full`.
  void decode(std::size_t lin, std::span<std::size_t> full) const {
    for (std::size_t c = coords.size(); c-- > 0;) {
      full[coords[c]] = lin % sizes[c];
      lin /= sizes[c];
    }
  }

  double prob(const ProductMeasure& mu, std::span<const std::size_t> full) const {
    double p = 1.0;
    for (unsigned j : coords) p *= mu.marginal(j).probs[full[j]];
    return p;
  }
};

std::vector<std::size_t> dim_sizes(const ProductMeasure& mu) {
  std::vector<std::size_t> sizes(mu.dims());
  for (unsigned j = 0; j < mu.dims(); ++j) sizes[j] = mu.marginal(j).points.size();
  return sizes;
}

std::vector<double> grid_point(const ProductMeasure& mu, std::span<const std::size_t> idx) {
  std::vector<double> x(mu.dims());
  for (unsigned j = 0; j < mu.dims(); ++j) x[j] = mu.marginal(j).points[idx[j]];
  return x;
}

void check_degenerate(const AnovaDecomposition& d) {
  const double floor = 1e-14 * d.max_abs_value();
  if (!(d.total_variance() > floor * floor)) {
    fail(ErrorKind::degenerate_model, "model variance is zero on the grid");
  }
}

}  // namespace

ProductMeasure::ProductMeasure(std::vector<Marginal> marginals)
    : marginals_(std::move(marginals)) {
  require(!marginals_.empty(), ErrorKind::config, "product measure needs a dimension");
  require(marginals_.size() <= 64, ErrorKind::capacity, "at most 64 dimensions");
  for (std::size_t j = 0; j < marginals_.size(); ++j) {
    const auto& m = marginals_[j];
    const std::string where = " (dimension " + std::to_string(j) + ")";
    require(!m.points.empty() && m.points.size() == m.probs.size(), ErrorKind::config,
            "marginal needs matching, nonempty points and probabilities" + where);
    double total = 0.0;
    for (std::size_t k = 0; k < m.points.size(); ++k) {
      require(std::isfinite(m.points[k]), ErrorKind::config, "non-finite support point" + where);
      require(m.probs[k] >= 0.0, ErrorKind::config, "negative probability" + where);
      total += m.probs[k];
    }
    require(std::abs(total - 1.0) <= 1e-12, ErrorKind::config,
            "marginal probabilities must sum to 1" + where);
  }
}

ProductMeasure ProductMeasure::parse(std::string_view spec) {
  std::vector<Marginal> marginals;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t semi = std::min(spec.find(';', pos), spec.size());
    const std::string_view group = spec.substr(pos, semi - pos);
    const std::size_t colon = group.find(':');
    Marginal m;
    m.points = parse_numbers(group.substr(0, colon));
    if (colon == std::string_view::npos) {
      m.probs.assign(m.points.size(), 1.0 / m.points.size());
    } else {
      m.probs = parse_numbers(group.substr(colon + 1));
      double total = 0.0;
      for (double w : m.probs) total += w;
      require(total > 0.0, ErrorKind::config, "grid weights must have positive sum");
      for (double& w : m.probs) w /= total;
    }
    marginals.push_back(std::move(m));
    pos = semi + 1;
  }
  return ProductMeasure(std::move(marginals));
}

std::size_t ProductMeasure::grid_size() const noexcept {
  std::size_t total = 1;
  for (const auto& m : marginals_) {
    if (total > kMaxGridPoints) return total;
    total *= m.points.size();
  }
  return total;
}

double ProductMeasure::mean(unsigned i) const {
  const auto& m = marginals_.at(i);
  CompensatedSum acc;
  for (std::size_t k = 0; k < m.points.size(); ++k) acc.add(m.points[k] * m.probs[k]);
  return acc.value();
}

double AnovaDecomposition::term_at(std::uint64_t t, std::span<const std::size_t> index) const {
  const SubGrid sub(t, sizes_);
  return terms_[t][sub.project(index)];
}

AnovaDecomposition hoeffding_decompose(const Model& m, const ProductMeasure& mu) {
  const unsigned n = mu.dims();
  require(n == m.dim(), ErrorKind::config, "grid dimension does not match the model");
  require(n <= kMaxAnovaDims, ErrorKind::capacity,
          "Hoeffding decomposition is limited to 6 dimensions");
  require(mu.grid_size() <= kMaxGridPoints, ErrorKind::capacity,
          "product grid exceeds 10^6 points");

  AnovaDecomposition d;
  d.n_ = n;
  d.sizes_ = dim_sizes(mu);
  const std::size_t lattice = std::size_t{1} << n;
  const SubGrid everything(lattice - 1, d.sizes_);
  const std::size_t points = everything.count;

  // F and the full probability on the grid.
  std::vector<double> values(points);
  std::vector<double> probs(points);
  std::vector<std::size_t> idx(n);
  for (std::size_t lin = 0; lin < points; ++lin) {
    everything.decode(lin, idx);
    values[lin] = m.eval(grid_point(mu, idx));
    if (!std::isfinite(values[lin])) fail(ErrorKind::numerical, "non-finite model value on grid");
    probs[lin] = everything.prob(mu, idx);
    d.max_abs_ = std::max(d.max_abs_, std::abs(values[lin]));
  }

  CompensatedSum mean_acc;
  for (std::size_t lin = 0; lin < points; ++lin) mean_acc.add(probs[lin] * values[lin]);
  const double mean = mean_acc.value();
  CompensatedSum var_acc;
  for (std::size_t lin = 0; lin < points; ++lin) {
    const double c = values[lin] - mean;
    var_acc.add(probs[lin] * c * c);
  }
  d.total_variance_ = var_acc.value();

  // Conditional expectations E[F | x_U] on the sub-grid of U.
  std::vector<std::vector<double>> cond(lattice);
  for (std::uint64_t u = 0; u < lattice; ++u) {
    const SubGrid sub_u(u, d.sizes_);
    const SubGrid rest(~u & (lattice - 1), d.sizes_);
    std::vector<CompensatedSum> acc(sub_u.count);
    for (std::size_t lin = 0; lin < points; ++lin) {
      everything.decode(lin, idx);
      acc[sub_u.project(idx)].add(rest.prob(mu, idx) * values[lin]);
    }
    cond[u].resize(sub_u.count);
    for (std::size_t k = 0; k < sub_u.count; ++k) cond[u][k] = acc[k].value();
  }
  cond[0][0] = mean;

  // f_T = sum_{U subset T} (-1)^{|T \ U|} E[F | x_U].
  d.terms_.resize(lattice);
  d.variances_.assign(lattice, 0.0);
  for (std::uint64_t t = 0; t < lattice; ++t) {
    const SubGrid sub_t(t, d.sizes_);
    std::vector<double>& term = d.terms_[t];
    term.assign(sub_t.count, 0.0);
    CompensatedSum variance;
    for (std::size_t k = 0; k < sub_t.count; ++k) {
      sub_t.decode(k, idx);
      CompensatedSum acc;
      std::uint64_t u = t;
      while (true) {
        const SubGrid sub_u(u, d.sizes_);
        const double sign = (std::popcount(t ^ u) % 2 == 0) ? 1.0 : -1.0;
        acc.add(sign * cond[u][sub_u.project(idx)]);
        if (u == 0) break;
        u = (u - 1) & t;
      }
      term[k] = acc.value();
      if (t != 0) variance.add(sub_t.prob(mu, idx) * term[k] * term[k]);
    }
    d.variances_[t] = variance.value();
  }
  return d;
}

double orthogonality_check(const AnovaDecomposition& d, const ProductMeasure& mu) {
  const unsigned n = d.dims();
  const auto sizes = dim_sizes(mu);
  const std::uint64_t lattice = std::uint64_t{1} << n;
  std::vector<std::size_t> idx(n, 0);
  double worst = 0.0;
  for (std::uint64_t a = 0; a < lattice; ++a) {
    const SubGrid ga(a, sizes);
    for (std::uint64_t b = a + 1; b < lattice; ++b) {
      const SubGrid gb(b, sizes);
      const SubGrid joint(a | b, sizes);
      CompensatedSum acc;
      for (std::size_t k = 0; k < joint.count; ++k) {
        joint.decode(k, idx);
        acc.add(joint.prob(mu, idx) * d.term(a)[ga.project(idx)] *
                d.term(b)[gb.project(idx)]);
      }
      worst = std::max(worst, std::abs(acc.value()));
    }
  }
  return worst;
}

double zero_mean_residual(const AnovaDecomposition& d, const ProductMeasure& mu) {
  const unsigned n = d.dims();
  const auto sizes = dim_sizes(mu);
  const std::uint64_t lattice = std::uint64_t{1} << n;
  std::vector<std::size_t> idx(n, 0);
  double worst = 0.0;
  for (std::uint64_t t = 1; t < lattice; ++t) {
    const SubGrid sub_t(t, sizes);
    for (unsigned i = 0; i < n; ++i) {
      if (!((t >> i) & 1u)) continue;
      const SubGrid others(t & ~(std::uint64_t{1} << i), sizes);
      const auto& marginal = mu.marginal(i);
      for (std::size_t k = 0; k < others.count; ++k) {
        others.decode(k, idx);
        CompensatedSum acc;
        for (std::size_t v = 0; v < sizes[i]; ++v) {
          idx[i] = v;
          acc.add(marginal.probs[v] * d.term(t)[sub_t.project(idx)]);
        }
        worst = std::max(worst, std::abs(acc.value()));
      }
    }
  }
  return worst;
}

double reconstruction_residual(const AnovaDecomposition& d, const Model& m,
                               const ProductMeasure& mu) {
  const unsigned n = d.dims();
  const auto sizes = dim_sizes(mu);
  const std::uint64_t lattice = std::uint64_t{1} << n;
  const SubGrid everything(lattice - 1, sizes);
  std::vector<SubGrid> subs;
  for (std::uint64_t t = 0; t < lattice; ++t) subs.emplace_back(t, sizes);
  std::vector<std::size_t> idx(n);
  double worst = 0.0;
  for (std::size_t lin = 0; lin < everything.count; ++lin) {
    everything.decode(lin, idx);
    CompensatedSum acc;
    for (std::uint64_t t = 0; t < lattice; ++t) acc.add(d.term(t)[subs[t].project(idx)]);
    worst = std::max(worst, std::abs(acc.value() - m.eval(grid_point(mu, idx))));
  }
  return worst;
}

SobolIndices sobol_indices(const AnovaDecomposition& d) {
  check_degenerate(d);
  const std::uint64_t lattice = std::uint64_t{1} << d.dims();
  SobolIndices s;
  s.variance = d.total_variance();
  s.first.assign(lattice, 0.0);
  s.total.assign(lattice, 0.0);
  for (std::uint64_t t = 1; t < lattice; ++t) s.first[t] = d.term_variance(t) / s.variance;
  for (std::uint64_t t = 1; t < lattice; ++t) {
    CompensatedSum acc;
    for (std::uint64_t l = t; l != 0; l = (l - 1) & t) acc.add(s.first[l]);
    s.total[t] = acc.value();
  }
  return s;
}

BridgeReport gralis_sobol_bridge(const Model& m, const ProductMeasure& mu,
                                 const QuadratureRule& quad, PathMode path) {
  const AnovaDecomposition d = hoeffding_decompose(m, mu);
  const SobolIndices oracle = sobol_indices(d);

  const unsigned n = d.dims();
  const auto sizes = dim_sizes(mu);
  const SubGrid everything((std::uint64_t{1} << n) - 1, sizes);

  BridgeReport report;
  report.variance = d.total_variance();
  report.baseline.resize(n);
  for (unsigned j = 0; j < n; ++j) report.baseline[j] = mu.mean(j);

  // phi_i(x) over the grid, with its probability.
  std::vector<std::vector<double>> phi(n, std::vector<double>(everything.count));
  std::vector<double> probs(everything.count);
  std::vector<std::size_t> idx(n);
  for (std::size_t lin = 0; lin < everything.count; ++lin) {
    everything.decode(lin, idx);
    probs[lin] = everything.prob(mu, idx);
    const EvalPoint ep{grid_point(mu, idx), report.baseline};
    const auto res = gralis_exact(m, ep, Kernel::uniform(), quad, path);
    for (unsigned i = 0; i < n; ++i) {
      phi[i][lin] = res.phi[i];
      const double fi = d.term_at(std::uint64_t{1} << i, idx);
      report.max_pointwise_deviation =
          std::max(report.max_pointwise_deviation, std::abs(res.phi[i] - fi));
    }
  }

  report.features.resize(n);
  for (unsigned i = 0; i < n; ++i) {
    CompensatedSum mean;
    for (std::size_t lin = 0; lin < probs.size(); ++lin) mean.add(probs[lin] * phi[i][lin]);
    CompensatedSum var;
    for (std::size_t lin = 0; lin < probs.size(); ++lin) {
      const double c = phi[i][lin] - mean.value();
      var.add(probs[lin] * c * c);
    }
    auto& f = report.features[i];
    f.gralis_index = var.value() / report.variance;
    f.sobol_index = oracle.first[std::uint64_t{1} << i];
    f.abs_diff = std::abs(f.gralis_index - f.sobol_index);
  }
  return report;
}

}  // namespace gralis

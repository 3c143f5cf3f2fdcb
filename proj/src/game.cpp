#include "gralis/game.hpp"

#include <cmath>
#include <string>

#include "gralis/error.hpp"
#include "gralis/summation.hpp"

namespace gralis {

namespace {

std::size_t lattice_size(unsigned n) { return std::size_t{1} << n; }

void check_players(unsigned n) {
  require(n <= kMaxExactFeatures, ErrorKind::capacity,
          "dense games are limited to 20 players");
}

void check_pair(const CooperativeGame& g, unsigned i, unsigned j) {
  require(g.players() >= 2, ErrorKind::domain, "interaction index needs n >= 2");
  require(i < g.players() && j < g.players(), ErrorKind::domain,
          "player index out of range");
  require(i != j, ErrorKind::domain, "interaction index needs two distinct players");
}

void check_lattice(std::span<const double> values, unsigned n) {
  check_players(n);
  require(values.size() == lattice_size(n), ErrorKind::config,
          "expected 2^n = " + std::to_string(lattice_size(n)) + " values");
}

}  // namespace

CooperativeGame::CooperativeGame(unsigned n, std::vector<double> values)
    : n_(n), values_(std::move(values)) {
  check_lattice(values_, n_);
}

CooperativeGame CooperativeGame::from_model(const Model& m, const EvalPoint& ep) {
  const auto n = static_cast<unsigned>(m.dim());
  check_players(n);
  ep.validate(n);
  std::vector<double> values(lattice_size(n));
  std::vector<double> point(n);
  const double base = m.eval(ep.baseline);
  for (std::uint64_t s = 0; s < values.size(); ++s) {
    mask_point_into(ep, s, point);
    values[s] = s == 0 ? 0.0 : m.eval(point) - base;
  }
  return CooperativeGame(n, std::move(values));
}

void Projection::validate() const {
  require(n >= 1 && n <= kMaxExactFeatures, ErrorKind::config,
          "projection target must have between 1 and 20 players");
  const std::uint64_t limit = std::uint64_t{1} << n;
  for (std::size_t q = 0; q < assign.size(); ++q) {
    require(assign[q] < limit, ErrorKind::config,
            "projection maps q=" + std::to_string(q) + " outside 2^N");
  }
}

void WeightedSignal::validate() const {
  require(wdelta.size() == mu.size(), ErrorKind::config,
          "signal and measure sizes differ");
  for (std::size_t q = 0; q < mu.size(); ++q) {
    require(std::isfinite(wdelta[q]) && std::isfinite(mu[q]) && mu[q] >= 0.0,
            ErrorKind::config,
            "signal entries must be finite with nonnegative mass (q=" +
                std::to_string(q) + ")");
  }
}

std::vector<double> p_rho_apply(std::span<const double> f, std::span<const double> mu,
                                const Projection& rho) {
  rho.validate();
  require(f.size() == rho.q_size() && mu.size() == rho.q_size(), ErrorKind::config,
          "signal, measure and projection sizes must match");
  std::vector<CompensatedSum> acc(lattice_size(rho.n));
  for (std::size_t q = 0; q < f.size(); ++q) acc[rho.assign[q]].add(f[q] * mu[q]);
  std::vector<double> out(acc.size());
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = acc[s].value();
  return out;
}

CooperativeGame induce_game(const WeightedSignal& sig, const Projection& rho) {
  sig.validate();
  return CooperativeGame(rho.n, p_rho_apply(sig.wdelta, sig.mu, rho));
}

std::vector<double> pushforward(std::span<const double> mu, const Projection& rho) {
  const std::vector<double> ones(mu.size(), 1.0);
  return p_rho_apply(ones, mu, rho);
}

std::vector<double> mobius_transform(const CooperativeGame& g) {
  std::vector<double> m(g.values().begin(), g.values().end());
  const std::size_t size = m.size();
  for (unsigned j = 0; j < g.players(); ++j) {
    const std::size_t bit = std::size_t{1} << j;
    for (std::size_t s = 0; s < size; ++s)
      if (s & bit) m[s] -= m[s ^ bit];
  }
  return m;
}

CooperativeGame inverse_mobius(unsigned n, std::vector<double> coefficients) {
  check_lattice(coefficients, n);
  const std::size_t size = coefficients.size();
  for (unsigned j = 0; j < n; ++j) {
    const std::size_t bit = std::size_t{1} << j;
    for (std::size_t s = 0; s < size; ++s)
      if (s & bit) coefficients[s] += coefficients[s ^ bit];
  }
  return CooperativeGame(n, std::move(coefficients));
}

std::vector<double> shapley_values(const CooperativeGame& g) {
  const unsigned n = g.players();
  std::vector<double> weight(n);
  for (unsigned s = 0; s < n; ++s) weight[s] = shapley_weight(s, n);
  std::vector<double> phi(n);
  const std::size_t size = g.values().size();
  for (unsigned i = 0; i < n; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    CompensatedSum acc;
    for (std::size_t s = 0; s < size; ++s) {
      if (s & bit) continue;
      acc.add(weight[std::popcount(s)] * (g[s | bit] - g[s]));
    }
    phi[i] = acc.value();
  }
  return phi;
}

std::vector<double> shapley_from_mobius(std::span<const double> coefficients, unsigned n) {
  check_lattice(coefficients, n);
  std::vector<CompensatedSum> acc(n);
  for (std::size_t t = 1; t < coefficients.size(); ++t) {
    const double share = coefficients[t] / std::popcount(t);
    for (unsigned i = 0; i < n; ++i)
      if ((t >> i) & 1u) acc[i].add(share);
  }
  std::vector<double> phi(n);
  for (unsigned i = 0; i < n; ++i) phi[i] = acc[i].value();
  return phi;
}

double siv_grabisch(const CooperativeGame& g, unsigned i, unsigned j) {
  check_pair(g, i, j);
  const unsigned n = g.players();
  std::vector<double> weight(n - 1);
  for (unsigned s = 0; s + 2 <= n; ++s) weight[s] = interaction_weight(s, n);
  const std::size_t bi = std::size_t{1} << i;
  const std::size_t bj = std::size_t{1} << j;
  CompensatedSum acc;
  for (std::size_t s = 0; s < g.values().size(); ++s) {
    if (s & (bi | bj)) continue;
    const double second = g[s | bi | bj] - g[s | bi] - g[s | bj] + g[s];
    acc.add(weight[std::popcount(s)] * second);
  }
  return acc.value();
}

double siv_from_mobius(std::span<const double> coefficients, unsigned n, unsigned i,
                       unsigned j) {
  check_lattice(coefficients, n);
  require(i < n && j < n && i != j, ErrorKind::domain,
          "interaction index needs two distinct players in range");
  const std::size_t pair = (std::size_t{1} << i) | (std::size_t{1} << j);
  CompensatedSum acc;
  for (std::size_t t = 0; t < coefficients.size(); ++t) {
    if ((t & pair) != pair) continue;
    acc.add(coefficients[t] / (std::popcount(t) - 1));
  }
  return acc.value();
}

double siv_mobius(const CooperativeGame& g, unsigned i, unsigned j) {
  check_pair(g, i, j);
  return siv_from_mobius(mobius_transform(g), g.players(), i, j);
}

CooperativeGame relabel_game(const CooperativeGame& g, std::span<const unsigned> sigma) {
  const unsigned n = g.players();
  require(sigma.size() == n, ErrorKind::domain, "relabeling must cover every player");
  std::vector<bool> seen(n, false);
  for (unsigned v : sigma) {
    require(v < n && !seen[v], ErrorKind::domain, "relabeling is not a permutation");
    seen[v] = true;
  }
  std::vector<double> values(g.values().size());
  for (std::size_t t = 0; t < values.size(); ++t) {
    std::size_t image = 0;
    for (unsigned i = 0; i < n; ++i)
      if ((t >> i) & 1u) image |= std::size_t{1} << sigma[i];
    values[image] = g[t];
  }
  return CooperativeGame(n, std::move(values));
}

std::vector<double> kernel_table(const Kernel& k, const EvalPoint& ep) {
  const auto n = static_cast<unsigned>(ep.dim());
  check_players(n);
  std::vector<double> pi(lattice_size(n));
  for (std::uint64_t s = 0; s < pi.size(); ++s) pi[s] = kernel_weight_bits(k, ep, s);
  return pi;
}

std::vector<double> kernel_weighted_shapley(const CooperativeGame& g,
                                            std::span<const double> pi) {
  const unsigned n = g.players();
  check_lattice(pi, n);
  std::vector<double> phi(n);
  for (unsigned i = 0; i < n; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    CompensatedSum acc;
    for (std::size_t s = 0; s < pi.size(); ++s) {
      if (s & bit) continue;
      acc.add(shapley_weight(std::popcount(s), n) * pi[s] * (g[s | bit] - g[s]));
    }
    phi[i] = acc.value();
  }
  return phi;
}

double incompatibility_coefficient(std::span<const double> pi, const Coalition& t) {
  const unsigned n = t.universe();
  check_lattice(pi, n);
  const unsigned size = t.size();
  require(size > 0 && size < n, ErrorKind::domain,
          "incompatibility coefficient needs an intermediate coalition");
  double inflow = 0.0;
  for (unsigned i = 0; i < n; ++i)
    if (t.contains(i)) inflow += pi[t.without(i).bits()];
  return shapley_weight(size - 1, n) * inflow -
         (n - size) * shapley_weight(size, n) * pi[t.bits()];
}

}  // namespace gralis

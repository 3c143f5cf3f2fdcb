#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gralis/coalition.hpp"
#include "gralis/model.hpp"

namespace gralis {

// Real-valued set function on 2^N, stored densely and indexed by bitmask.
class CooperativeGame {
 public:
  CooperativeGame(unsigned n, std::vector<double> values);

  // v(S) = f(x_S) - f(x').
  static CooperativeGame from_model(const Model& m, const EvalPoint& ep);

  unsigned players() const noexcept { return n_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::uint64_t s) const { return values_[s]; }

  // Games induced from a weighted signal have v(empty) = 0; anything else is
  // accepted but flagged here.
  bool empty_value_nonzero() const noexcept { return values_[0] != 0.0; }

  friend bool operator==(const CooperativeGame&, const CooperativeGame&) = default;

 private:
  unsigned n_;
  std::vector<double> values_;
};

// Maps each index q of a finite set Q to a coalition.
struct Projection {
  unsigned n = 0;
  std::vector<std::uint64_t> assign;

  std::size_t q_size() const noexcept { return assign.size(); }
  void validate() const;
};

// The product w(q) * Delta(q) over Q together with the base masses mu(q).
struct WeightedSignal {
  std::vector<double> wdelta;
  std::vector<double> mu;

  std::size_t q_size() const noexcept { return wdelta.size(); }
  void validate() const;
};

// (P_rho f)(S) = sum over q with rho(q) = S of f(q) mu(q).
std::vector<double> p_rho_apply(std::span<const double> f, std::span<const double> mu,
                                const Projection& rho);

CooperativeGame induce_game(const WeightedSignal& sig, const Projection& rho);

// Pushforward masses nu(S) = mu(rho^{-1}(S)).
std::vector<double> pushforward(std::span<const double> mu, const Projection& rho);

// Moebius coefficients m(T) = sum_{A subset T} (-1)^{|T|-|A|} v(A), by an
// in-place subset-sum sweep in O(n 2^n).
std::vector<double> mobius_transform(const CooperativeGame& g);
// v(S) = sum_{T subset S} m(T).
CooperativeGame inverse_mobius(unsigned n, std::vector<double> coefficients);

std::vector<double> shapley_values(const CooperativeGame& g);
// phi_i = sum_{T containing i} m(T) / |T|.
std::vector<double> shapley_from_mobius(std::span<const double> coefficients, unsigned n);

// Grabisch-Roubens pairwise interaction index by second differences.
double siv_grabisch(const CooperativeGame& g, unsigned i, unsigned j);
// Same index as sum_{T >= {i,j}} m(T) / (|T| - 1).
double siv_mobius(const CooperativeGame& g, unsigned i, unsigned j);
double siv_from_mobius(std::span<const double> coefficients, unsigned n, unsigned i,
                       unsigned j);

// v'(S) = v(sigma^{-1}(S)); player i of g becomes player sigma[i].
CooperativeGame relabel_game(const CooperativeGame& g, std::span<const unsigned> sigma);

// Kernel values pi(S) for every coalition, bitmask-indexed.
std::vector<double> kernel_table(const Kernel& k, const EvalPoint& ep);

// phi_i = sum_{S subset N\{i}} w(|S|) pi(S) [v(S u i) - v(S)], without any
// normalization.
std::vector<double> kernel_weighted_shapley(const CooperativeGame& g,
                                            std::span<const double> pi);

// Coefficient of v(T) in sum_i phi_i under kernel_weighted_shapley.
double incompatibility_coefficient(std::span<const double> pi, const Coalition& t);

}  // namespace gralis

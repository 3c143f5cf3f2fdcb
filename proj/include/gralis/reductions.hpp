#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gralis/coalition.hpp"
#include "gralis/game.hpp"
#include "gralis/model.hpp"
#include "gralis/path.hpp"

namespace gralis {

inline constexpr double kLimeConditionLimit = 1e12;
inline constexpr unsigned kMaxPermutationPlayers = 8;

// Finite index set Q with weights w(q) and a delta matrix of |Q| rows and
// `cols` columns (one column per feature, or a single target feature).
struct CanonicalTriple {
  std::vector<double> w;
  std::vector<double> delta;
  unsigned cols = 1;

  std::size_t q_size() const noexcept { return w.size(); }
  double delta_at(std::size_t q, unsigned c) const { return delta[q * cols + c]; }
  void validate() const;
};

// sum_q w[q] delta[q][c] for every column c.
std::vector<double> triple_eval(const CanonicalTriple& t);
// max_q |sum_c delta[q][c] - gain|
double constitutive_residual(const CanonicalTriple& t, double gain);

struct FeatureMapStack {
  std::size_t k = 0;
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<double> a;  // k-major, then row, then column
  std::vector<double> g;

  std::size_t index(std::size_t ch, std::size_t row, std::size_t col) const noexcept {
    return (ch * h + row) * w + col;
  }
  void validate() const;
};

double gradcam_lin(const FeatureMapStack& fm, std::size_t p, std::size_t q);
// Full H x W map, row-major.
std::vector<double> gradcam_lin_map(const FeatureMapStack& fm);
// Q = (k, i, j), w = 1/(H W), delta = G^k_ij A^k_pq.
CanonicalTriple gradcam_triple(const FeatureMapStack& fm, std::size_t p, std::size_t q);
// True when ReLU(lambda L) differs from lambda ReLU(L) somewhere on the map.
bool relu_nonlinearity_witness(const FeatureMapStack& fm, double lambda);

// T x n row-major 0/1 matrix.
struct BinaryDesign {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<unsigned char> z;

  bool at(std::size_t t, std::size_t j) const noexcept { return z[t * cols + j] != 0; }
  void validate() const;
};

struct LimeFit {
  CanonicalTriple triple;          // hat-matrix row of the target feature
  double coefficient = 0.0;        // target slope from the least-squares solve
  std::vector<double> coefficients;  // intercept first, then one per feature
  double condition = 0.0;          // condition number of X^T W X
};

// Weighted least squares with an intercept column.
LimeFit lime_triple(const BinaryDesign& design, std::span<const double> weights,
                    std::span<const double> fvals, unsigned i);
// f at the masked inputs of each design row.
std::vector<double> lime_responses(const Model& m, const EvalPoint& ep,
                                   const BinaryDesign& design);
std::vector<double> lime_proximity(const Kernel& k, const EvalPoint& ep,
                                   const BinaryDesign& design);

struct TripleValue {
  CanonicalTriple triple;
  double value = 0.0;
};

// Right-rule IG: w_j = (x_i - x'_i)/k, delta_j = d_i F(x' + (j/k)(x - x')).
TripleValue ig_triple(const Model& m, const EvalPoint& ep, unsigned i, unsigned k);
// Q = subsets of N\{i}, w = Shapley weight, delta = marginal contribution.
TripleValue shap_triple(const CooperativeGame& g, unsigned i);
// Q = all orderings, w = 1/n!, delta[q][i] = marginal contribution of i.
CanonicalTriple shap_permutation_triple(const CooperativeGame& g);
// Q = subsets of F\{i}, w = Shapley weight * pi(S) / Z, delta = conditioned IG.
TripleValue gralis_triple(const Model& m, const EvalPoint& ep, unsigned i,
                          const Kernel& kernel, const QuadratureRule& quad, PathMode path);

struct ReducibilityCheck {
  std::string name;
  bool applicable = true;
  double deviation = 0.0;
  std::string note;
};

std::vector<ReducibilityCheck> reducibility_suite(const Model& m, const EvalPoint& ep,
                                                  const QuadratureRule& quad);

}  // namespace gralis

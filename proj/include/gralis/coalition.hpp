#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gralis/model.hpp"

namespace gralis {

inline constexpr unsigned kMaxFeatures = 64;
inline constexpr unsigned kMaxExactFeatures = 20;

// Subset of the features {0..n-1}, stored as a bitmask.
class Coalition {
 public:
  Coalition(std::uint64_t bits, unsigned n);

  static Coalition empty(unsigned n) { return Coalition(0, n); }
  static Coalition full(unsigned n);

  std::uint64_t bits() const noexcept { return bits_; }
  unsigned universe() const noexcept { return n_; }
  unsigned size() const noexcept { return static_cast<unsigned>(std::popcount(bits_)); }
  bool contains(unsigned i) const noexcept { return i < 64 && ((bits_ >> i) & 1u); }

  Coalition with(unsigned i) const;
  Coalition without(unsigned i) const;
  Coalition complement() const;

  friend bool operator==(const Coalition&, const Coalition&) = default;

 private:
  std::uint64_t bits_;
  unsigned n_;
};

// LIME proximity kernel; an empty sigma means the uniform kernel.
struct Kernel {
  std::optional<double> sigma;

  static Kernel uniform() { return {}; }
  static Kernel gaussian(double sigma);
  bool is_uniform() const noexcept { return !sigma.has_value(); }
};

// |S|! (n-|S|-1)! / n!
double shapley_weight(unsigned s_size, unsigned n);
// |S|! (n-|S|-2)! / (n-1)!
double interaction_weight(unsigned s_size, unsigned n);

// x_j for j in S, x'_j otherwise.
std::vector<double> mask_point(const EvalPoint& ep, const Coalition& s);
void mask_point_into(const EvalPoint& ep, std::uint64_t bits, std::span<double> out);

double kernel_weight(const Kernel& k, const EvalPoint& ep, const Coalition& s);
double kernel_weight_bits(const Kernel& k, const EvalPoint& ep, std::uint64_t bits);

// Uniform permutation of 0..n-1, a pure function of (seed, t).
std::vector<unsigned> sample_permutation(std::uint64_t seed, std::uint64_t t, unsigned n);
std::vector<unsigned> reverse_permutation(std::span<const unsigned> p);

// Counter-based generator: the stream for key (seed, t) never depends on how
// many other streams were consumed before it.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t t);
  std::uint64_t next() noexcept;
  // Unbiased draw from [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept;
  // Uniform double in [0, 1).
  double uniform() noexcept;

 private:
  std::uint64_t state_;
};

}  // namespace gralis

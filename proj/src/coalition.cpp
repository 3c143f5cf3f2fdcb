#include "gralis/coalition.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "gralis/error.hpp"

namespace gralis {

namespace {

constexpr unsigned kExactFactorialLimit = 18;

constexpr std::array<std::uint64_t, 21> make_factorials() {
  std::array<std::uint64_t, 21> f{};
  f[0] = 1;
  for (std::size_t i = 1; i < f.size(); ++i) f[i] = f[i - 1] * i;
  return f;
}

constexpr auto kFactorials = make_factorials();

// a! b! / c!, exact integers while c <= 18, log-space beyond.
double factorial_ratio(unsigned a, unsigned b, unsigned c) {
  if (c <= kExactFactorialLimit) {
    return static_cast<double>(kFactorials[a] * kFactorials[b]) /
           static_cast<double>(kFactorials[c]);
  }
  return std::exp(std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(c + 1.0));
}

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

}  // namespace

Coalition::Coalition(std::uint64_t bits, unsigned n) : bits_(bits), n_(n) {
  require(n <= kMaxFeatures, ErrorKind::capacity,
          "coalitions support at most 64 features");
  require(n == 64 || (bits >> n) == 0, ErrorKind::domain,
          "coalition has members outside the feature universe");
}

Coalition Coalition::full(unsigned n) {
  return Coalition(n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1, n);
}

Coalition Coalition::with(unsigned i) const {
  require(i < n_, ErrorKind::domain, "feature " + std::to_string(i) + " out of range");
  return Coalition(bits_ | (std::uint64_t{1} << i), n_);
}

Coalition Coalition::without(unsigned i) const {
  require(i < n_, ErrorKind::domain, "feature " + std::to_string(i) + " out of range");
  return Coalition(bits_ & ~(std::uint64_t{1} << i), n_);
}

Coalition Coalition::complement() const { return Coalition(~bits_ & full(n_).bits(), n_); }

Kernel Kernel::gaussian(double sigma) {
  require(sigma > 0.0 && !std::isnan(sigma), ErrorKind::config,
          "kernel bandwidth must be > 0");
  if (std::isinf(sigma)) return uniform();
  return Kernel{sigma};
}

double shapley_weight(unsigned s_size, unsigned n) {
  require(n >= 1 && n <= kMaxFeatures, ErrorKind::domain,
          "shapley_weight: n must be in [1, 64]");
  require(s_size < n, ErrorKind::domain,
          "shapley_weight: coalition size must be at most n-1");
  return factorial_ratio(s_size, n - s_size - 1, n);
}

double interaction_weight(unsigned s_size, unsigned n) {
  require(n >= 2 && n <= kMaxFeatures, ErrorKind::domain,
          "interaction_weight: n must be in [2, 64]");
  require(s_size + 2 <= n, ErrorKind::domain,
          "interaction_weight: coalition size must be at most n-2");
  return factorial_ratio(s_size, n - s_size - 2, n - 1);
}

void mask_point_into(const EvalPoint& ep, std::uint64_t bits, std::span<double> out) {
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = ((bits >> j) & 1u) ? ep.x[j] : ep.baseline[j];
}

std::vector<double> mask_point(const EvalPoint& ep, const Coalition& s) {
  require(s.universe() == ep.dim(), ErrorKind::config,
          "coalition universe does not match the input dimension");
  std::vector<double> out(ep.dim());
  mask_point_into(ep, s.bits(), out);
  return out;
}

double kernel_weight_bits(const Kernel& k, const EvalPoint& ep, std::uint64_t bits) {
  if (k.is_uniform()) return 1.0;
  double dist2 = 0.0;
  for (std::size_t j = 0; j < ep.dim(); ++j) {
    if ((bits >> j) & 1u) {
      const double d = ep.x[j] - ep.baseline[j];
      dist2 += d * d;
    }
  }
  const double sigma = *k.sigma;
  return std::exp(-dist2 / (2.0 * sigma * sigma));
}

double kernel_weight(const Kernel& k, const EvalPoint& ep, const Coalition& s) {
  require(s.universe() == ep.dim(), ErrorKind::config,
          "coalition universe does not match the input dimension");
  return kernel_weight_bits(k, ep, s.bits());
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t t)
    : state_(mix64(seed + kGolden) ^ mix64((t + 1) * kGolden)) {}

std::uint64_t CounterRng::next() noexcept {
  state_ += kGolden;
  return mix64(state_);
}

std::uint64_t CounterRng::below(std::uint64_t bound) noexcept {
  // Lemire's multiply-and-reject.
  __uint128_t prod = static_cast<__uint128_t>(next()) * bound;
  auto low = static_cast<std::uint64_t>(prod);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      prod = static_cast<__uint128_t>(next()) * bound;
      low = static_cast<std::uint64_t>(prod);
    }
  }
  return static_cast<std::uint64_t>(prod >> 64);
}

double CounterRng::uniform() noexcept {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::vector<unsigned> sample_permutation(std::uint64_t seed, std::uint64_t t, unsigned n) {
  require(n >= 1 && n <= kMaxFeatures, ErrorKind::domain,
          "sample_permutation: n must be in [1, 64]");
  std::vector<unsigned> p(n);
  for (unsigned i = 0; i < n; ++i) p[i] = i;
  CounterRng rng(seed, t);
  for (unsigned i = n - 1; i > 0; --i) {
    const auto j = static_cast<unsigned>(rng.below(i + 1));
    std::swap(p[i], p[j]);
  }
  return p;
}

std::vector<unsigned> reverse_permutation(std::span<const unsigned> p) {
  std::vector<bool> seen(p.size(), false);
  for (unsigned v : p) {
    require(v < p.size() && !seen[v], ErrorKind::domain,
            "reverse_permutation: input is not a permutation");
    seen[v] = true;
  }
  return {p.rbegin(), p.rend()};
}

}  // namespace gralis

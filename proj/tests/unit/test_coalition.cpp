#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "gralis/coalition.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace gralis;

TEST_CASE("Shapley weights sum to one over coalition sizes") {
  for (unsigned n = 1; n <= 30; ++n) {
    long double total = 0.0L;
    for (unsigned s = 0; s < n; ++s) {
      // binom(n-1, s) coalitions of size s
      const long double count = std::tgamma(n * 1.0L) / (std::tgamma(s + 1.0L) * std::tgamma(n - s * 1.0L));
      total += count * shapley_weight(s, n);
    }
    INFO("n = " << n);
    CHECK(std::abs(static_cast<double>(total) - 1.0) < (n <= 12 ? 1e-12 : 1e-9));
  }
}

TEST_CASE("weights match the factorial definitions") {
  CHECK(shapley_weight(0, 1) == 1.0);
  CHECK(shapley_weight(0, 2) == 0.5);
  CHECK(shapley_weight(1, 3) == doctest::Approx(1.0 / 6.0));
  CHECK(interaction_weight(0, 2) == 1.0);
  for (unsigned n = 2; n <= 22; ++n) {
    for (unsigned s = 0; s + 2 <= n; ++s) {
      const double rel = std::abs(interaction_weight(s, n) / oracle::factorial_ratio(s, n - s - 2, n - 1) - 1.0);
      CHECK(rel < 1e-12);
    }
    for (unsigned s = 0; s < n; ++s) {
      const double rel = std::abs(shapley_weight(s, n) / oracle::factorial_ratio(s, n - s - 1, n) - 1.0);
      CHECK(rel < 1e-12);
    }
  }
  CHECK_ERROR_KIND(shapley_weight(3, 3), ErrorKind::domain);
  CHECK_ERROR_KIND(shapley_weight(0, 0), ErrorKind::domain);
  CHECK_ERROR_KIND(interaction_weight(0, 1), ErrorKind::domain);
}

TEST_CASE("coalition set operations") {
  const Coalition s(0b0101, 4);
  CHECK(s.size() == 2);
  CHECK(s.contains(0));
  CHECK_FALSE(s.contains(1));
  CHECK(s.with(1).bits() == 0b0111);
  CHECK(s.without(0).bits() == 0b0100);
  CHECK(s.complement().bits() == 0b1010);
  CHECK(Coalition::empty(4).size() == 0);
  CHECK(Coalition::full(4).bits() == 0b1111);
  CHECK(Coalition::full(64).size() == 64);
  CHECK_ERROR_KIND(Coalition(0b10000, 4), ErrorKind::domain);
  CHECK_ERROR_KIND(Coalition(0, 65), ErrorKind::capacity);
  CHECK_ERROR_KIND(s.with(7), ErrorKind::domain);
}

TEST_CASE("masking and kernel weights") {
  const EvalPoint ep{{1.0, 2.0, 3.0}, {0.0, -1.0, 0.5}};
  const auto p = mask_point(ep, Coalition(0b010, 3));
  CHECK(p == std::vector<double>{0.0, 2.0, 0.5});
  CHECK(kernel_weight(Kernel::uniform(), ep, Coalition(0b111, 3)) == 1.0);
  const Kernel k = Kernel::gaussian(2.0);
  const double d2 = 1.0 + 9.0;
  CHECK(kernel_weight(k, ep, Coalition(0b011, 3)) == doctest::Approx(std::exp(-d2 / 8.0)));
  CHECK(kernel_weight(k, ep, Coalition::empty(3)) == 1.0);
  CHECK(Kernel::gaussian(INFINITY).is_uniform());
  CHECK_ERROR_KIND(Kernel::gaussian(0.0), ErrorKind::config);
  CHECK_ERROR_KIND(Kernel::gaussian(-1.0), ErrorKind::config);
  CHECK_ERROR_KIND(Kernel::gaussian(NAN), ErrorKind::config);
}

TEST_CASE("counter RNG is deterministic and keyed by (seed, t)") {
  CounterRng a(5, 9), b(5, 9), c(5, 10), d(6, 9);
  const auto va = a.next();
  CHECK(va == b.next());
  CHECK(va != c.next());
  CHECK(va != d.next());
  CounterRng u(1, 1);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("bounded draws are unbiased") {
  CounterRng rng(3, 0);
  std::vector<int> counts(7, 0);
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) counts[rng.below(7)]++;
  for (int c : counts) CHECK(std::abs(c - draws / 7) < 400);  // ~4.3 sd
}

TEST_CASE("sampled permutations are valid and uniform") {
  std::map<std::vector<unsigned>, int> freq;
  const int draws = 60000;
  for (int t = 0; t < draws; ++t) {
    auto p = sample_permutation(42, t, 3);
    auto sorted = p;
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(sorted == std::vector<unsigned>{0, 1, 2});
    freq[p]++;
  }
  CHECK(freq.size() == 6);
  for (const auto& [perm, count] : freq) CHECK(std::abs(count - draws / 6) < 450);  // ~5 sd
  CHECK(sample_permutation(1, 2, 10) == sample_permutation(1, 2, 10));
  CHECK_ERROR_KIND(sample_permutation(1, 2, 0), ErrorKind::domain);
}

TEST_CASE("reverse permutation") {
  const std::vector<unsigned> p{2, 0, 3, 1};
  CHECK(reverse_permutation(p) == std::vector<unsigned>{1, 3, 0, 2});
  const std::vector<unsigned> bad{0, 0, 1};
  CHECK_ERROR_KIND(reverse_permutation(bad), ErrorKind::domain);
}

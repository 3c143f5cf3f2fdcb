#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "gralis/error.hpp"
#include "gralis/game.hpp"

#define CHECK_ERROR_KIND(expr, expected_kind)                       \
  do {                                                              \
    bool thrown_ = false;                                           \
    try {                                                           \
      (void)(expr);                                                 \
    } catch (const gralis::Error& e_) {                             \
      thrown_ = true;                                               \
      CHECK_MESSAGE(e_.kind() == (expected_kind), e_.what());       \
    }                                                               \
    CHECK_MESSAGE(thrown_, "expected a gralis::Error from " #expr); \
  } while (0)

namespace testing {

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& e : v) e = d(rng);
  return v;
}

inline gralis::CooperativeGame random_game(std::mt19937_64& rng, unsigned n) {
  auto values = random_vector(rng, std::size_t{1} << n);
  values[0] = 0.0;
  return gralis::CooperativeGame(n, std::move(values));
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace testing

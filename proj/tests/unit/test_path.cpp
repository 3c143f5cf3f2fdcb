#include <cmath>
#include <limits>

#include "doctest.h"
#include "gralis/path.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace gralis;

TEST_CASE("quadrature weights sum to one and nodes lie in [0,1]") {
  for (QuadKind kind : {QuadKind::right_riemann, QuadKind::midpoint, QuadKind::gauss_legendre}) {
    for (unsigned k = 1; k <= kMaxGaussNodes; ++k) {
      const QuadratureRule q(kind, k);
      double total = 0.0;
      for (double w : q.weights()) total += w;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
      for (double a : q.nodes()) {
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
      }
    }
  }
  CHECK(QuadratureRule::right(4).nodes().back() == 1.0);
  CHECK(QuadratureRule::midpoint(2).nodes()[0] == 0.25);
}

TEST_CASE("quadrature error orders") {
  const auto sq = [](double a) { return a * a; };
  for (unsigned k : {2u, 8u, 32u}) {
    CHECK(QuadratureRule::midpoint(k).integrate(sq) == doctest::Approx(1.0 / 3.0 - 1.0 / (12.0 * k * k)).epsilon(1e-12));
    // right rule on alpha: 1/2 + 1/(2k)
    CHECK(QuadratureRule::right(k).integrate([](double a) { return a; }) ==
          doctest::Approx(0.5 + 0.5 / k).epsilon(1e-12));
  }
  for (unsigned p = 1; p <= kMaxGaussNodes; ++p) {
    const unsigned deg = 2 * p - 1;
    const double got = QuadratureRule::gauss(p).integrate([&](double a) { return std::pow(a, deg); });
    CHECK(std::abs(got - 1.0 / (deg + 1)) < 1e-13);
  }
  CHECK_ERROR_KIND(QuadratureRule::gauss(17), ErrorKind::config);
  CHECK_ERROR_KIND(QuadratureRule::midpoint(0), ErrorKind::config);
  CHECK_ERROR_KIND(parse_quad_kind("simpson"), ErrorKind::config);
  CHECK(parse_quad_kind("mid") == QuadKind::midpoint);
  CHECK(parse_path_mode("sequential") == PathMode::sequential);
  CHECK_ERROR_KIND(parse_path_mode("diagonal"), ErrorKind::config);
}

TEST_CASE("path points") {
  const EvalPoint ep{{1.0, 2.0, 3.0}, {0.0, 0.0, 0.0}};
  const Coalition s(0b001, 3);
  CHECK(path_point(ep, s, 1, 0.5, PathMode::simultaneous) == std::vector<double>{0.5, 1.0, 0.0});
  CHECK(path_point(ep, s, 1, 0.5, PathMode::sequential) == std::vector<double>{1.0, 1.0, 0.0});
  CHECK_ERROR_KIND(path_point(ep, s, 0, 0.5, PathMode::simultaneous), ErrorKind::domain);
  CHECK_ERROR_KIND(path_point(ep, s, 1, 1.5, PathMode::simultaneous), ErrorKind::domain);
}

TEST_CASE("conditioned IG on the product model") {
  const Model m = zoo_model("product");
  const EvalPoint ep{{1.0, 1.0}, {0.0, 0.0}};
  const auto q = QuadratureRule::gauss(4);
  CHECK(conditioned_ig(m, ep, Coalition::empty(2), 0, q, PathMode::simultaneous) == 0.0);
  CHECK(conditioned_ig(m, ep, Coalition(0b10, 2), 0, q, PathMode::simultaneous) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(conditioned_ig(m, ep, Coalition(0b10, 2), 0, q, PathMode::sequential) ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("conditioned IG matches a high-precision integral") {
  const Model m = zoo_model("ishigami-like");
  const EvalPoint ep{{1.2, -0.7, 0.9}, {0.1, 0.3, -0.4}};
  const auto q = QuadratureRule::gauss(16);
  for (PathMode mode : {PathMode::simultaneous, PathMode::sequential}) {
    for (std::uint64_t bits = 0; bits < 8; ++bits) {
      for (unsigned i = 0; i < 3; ++i) {
        if ((bits >> i) & 1u) continue;
        std::vector<double> point(3);
        const auto g = [&](double a) {
          for (unsigned j = 0; j < 3; ++j) {
            const double moved = ep.baseline[j] + a * (ep.x[j] - ep.baseline[j]);
            if (j == i) point[j] = moved;
            else if ((bits >> j) & 1u) point[j] = mode == PathMode::simultaneous ? moved : ep.x[j];
            else point[j] = ep.baseline[j];
          }
          return m.partial(point, i);
        };
        const double expected = (ep.x[i] - ep.baseline[i]) * oracle::high_precision_integral(g).values[0];
        CHECK(std::abs(conditioned_ig(m, ep, Coalition(bits, 3), i, q, mode) - expected) < 1e-10);
      }
    }
  }
}

TEST_CASE("linear model integrates exactly under any rule") {
  const std::vector<double> params{1.0, 2.0, -3.0, 0.5};
  const Model m = zoo_model("linear", params);
  const EvalPoint ep{{1.0, 2.0, -1.0}, {0.5, 0.0, 1.0}};
  for (QuadKind kind : {QuadKind::right_riemann, QuadKind::midpoint, QuadKind::gauss_legendre}) {
    const QuadratureRule q(kind, 3);
    for (unsigned i = 0; i < 3; ++i) {
      const double expected = params[i + 1] * (ep.x[i] - ep.baseline[i]);
      CHECK(std::abs(conditioned_ig(m, ep, Coalition::empty(3), i, q, PathMode::sequential) - expected) < 1e-12);
      CHECK(std::abs(integrated_gradients(m, ep, i, q) - expected) < 1e-12);
    }
  }
}

TEST_CASE("full-coalition residual shrinks with exact quadrature") {
  const std::vector<double> three{3};
  const Model m = zoo_model("product", three);
  const EvalPoint ep{{1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}};
  CHECK(coalition_residual(m, ep, Coalition::full(3), QuadratureRule::gauss(4)) < 1e-14);
  CHECK(coalition_residual(m, ep, Coalition::full(3), QuadratureRule::midpoint(10)) ==
        doctest::Approx(1.0 / 400.0).epsilon(1e-10));
  CHECK_ERROR_KIND(coalition_residual(m, ep, Coalition::empty(3), QuadratureRule::gauss(4)),
                   ErrorKind::domain);
}

TEST_CASE("non-finite gradients are reported with their location") {
  const Model m(
      2, [](std::span<const double> x) { return x[0] + x[1]; },
      [](std::span<const double>, std::size_t) { return std::numeric_limits<double>::infinity(); },
      "bad");
  const EvalPoint ep{{1.0, 1.0}, {0.0, 0.0}};
  try {
    conditioned_ig(m, ep, Coalition(0b10, 2), 0, QuadratureRule::midpoint(2), PathMode::simultaneous);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numerical);
    CHECK(std::string(e.what()).find("S={1}") != std::string::npos);
    CHECK(std::string(e.what()).find("alpha=") != std::string::npos);
  }
}

TEST_CASE("IG is zero when the feature does not move") {
  const Model m = zoo_model("product");
  const EvalPoint ep{{0.0, 1.0}, {0.0, 0.0}};
  CHECK(integrated_gradients(m, ep, 0, QuadratureRule::midpoint(4)) == 0.0);
}

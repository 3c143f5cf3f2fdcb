#include <atomic>
#include <cmath>

#include "doctest.h"
#include "gralis/attribution.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace gralis;

namespace {

const std::vector<double> kLinear{1.0, 2.0, 3.0};
const EvalPoint kOnes{{1.0, 1.0}, {0.0, 0.0}};

std::vector<Kernel> kernels() { return {Kernel::uniform(), Kernel::gaussian(0.75), Kernel::gaussian(3.0)}; }
std::vector<QuadratureRule> rules() {
  return {QuadratureRule::right(3), QuadratureRule::midpoint(5), QuadratureRule::gauss(2)};
}

}  // namespace

TEST_CASE("linear model is reproduced exactly by every engine setting") {
  const Model m = zoo_model("linear", kLinear);
  for (const auto& k : kernels())
    for (const auto& q : rules())
      for (PathMode path : {PathMode::simultaneous, PathMode::sequential}) {
        const auto r = gralis_exact(m, kOnes, k, q, path);
        CHECK(std::abs(r.phi[0] - 2.0) < 1e-12);
        CHECK(std::abs(r.phi[1] - 3.0) < 1e-12);
        CHECK(r.completeness_residual < 1e-12);
        McConfig cfg;
        cfg.m = 37;
        cfg.kernel = k;
        cfg.quad = q;
        cfg.path = path;
        cfg.seed = 9;
        const auto mc = gralis_mc(m, kOnes, cfg);
        CHECK(std::abs(mc.phi[0] - 2.0) < 1e-10);
        CHECK(std::abs(mc.phi[1] - 3.0) < 1e-10);
        cfg.antithetic = true;
        cfg.m = 38;
        const auto anti = gralis_mc_antithetic(m, kOnes, cfg);
        CHECK(std::abs(anti.phi[0] - 2.0) < 1e-10);
        CHECK(std::abs(anti.phi[1] - 3.0) < 1e-10);
      }
}

TEST_CASE("product model hand values") {
  const Model m = zoo_model("product");
  const auto q = QuadratureRule::gauss(4);
  const auto sim = gralis_exact(m, kOnes, Kernel::uniform(), q, PathMode::simultaneous);
  CHECK(sim.phi[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(sim.phi[1] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(sim.completeness_residual == doctest::Approx(0.5).epsilon(1e-14));
  const auto seq = gralis_exact(m, kOnes, Kernel::uniform(), q, PathMode::sequential);
  CHECK(std::abs(seq.phi[0] - 0.5) < 1e-12);
  CHECK(std::abs(seq.phi[1] - 0.5) < 1e-12);
  CHECK(seq.completeness_residual < 1e-12);
  CHECK(gralis_exact(m, kOnes, Kernel::gaussian(0.75), q, PathMode::simultaneous)
            .completeness_residual > 1e-3);
}

TEST_CASE("exact engine equals a direct weighted enumeration") {
  std::mt19937_64 rng(5);
  const Model m = zoo_model("ishigami-like");
  const EvalPoint ep{testing::random_vector(rng, 3), testing::random_vector(rng, 3)};
  const double sigma = 0.9;
  const auto q = QuadratureRule::gauss(16);
  const auto r = gralis_exact(m, ep, Kernel::gaussian(sigma), q, PathMode::simultaneous);
  for (unsigned i = 0; i < 3; ++i) {
    long double num = 0.0L, den = 0.0L;
    for (std::uint64_t s = 0; s < 8; ++s) {
      if ((s >> i) & 1u) continue;
      double d2 = 0.0;
      for (unsigned j = 0; j < 3; ++j)
        if ((s >> j) & 1u) d2 += std::pow(ep.x[j] - ep.baseline[j], 2);
      const unsigned size = std::popcount(s);
      const double w = oracle::factorial_ratio(size, 2 - size, 3) * std::exp(-d2 / (2 * sigma * sigma));
      std::vector<double> point(3);
      const auto g = [&](double a) {
        for (unsigned j = 0; j < 3; ++j)
          point[j] = (j == i || ((s >> j) & 1u)) ? ep.baseline[j] + a * (ep.x[j] - ep.baseline[j])
                                                 : ep.baseline[j];
        return m.partial(point, i);
      };
      num += w * (ep.x[i] - ep.baseline[i]) * oracle::high_precision_integral(g).values[0];
      den += w;
    }
    CHECK(std::abs(r.phi[i] - static_cast<double>(num / den)) < 1e-10);
  }
}

TEST_CASE("uniform kernel with the sequential path gives Shapley values") {
  std::mt19937_64 rng(13);
  for (const auto& name : zoo_names()) {
    const Model m = zoo_model(name);
    const auto n = static_cast<unsigned>(m.dim());
    const EvalPoint ep{testing::random_vector(rng, n), testing::random_vector(rng, n)};
    const auto r = gralis_exact(m, ep, Kernel::uniform(), QuadratureRule::gauss(16), PathMode::sequential);
    std::vector<double> point(n);
    const auto game = [&](std::uint64_t s) {
      for (unsigned j = 0; j < n; ++j) point[j] = (s >> j) & 1u ? ep.x[j] : ep.baseline[j];
      return m.eval(point);
    };
    INFO(name);
    CHECK(testing::max_abs_diff(r.phi, oracle::brute_shapley(game, n).values) < 1e-10);
    CHECK(r.completeness_residual < 1e-10);
  }
}

TEST_CASE("axiom properties of the exact engine") {
  const auto q = QuadratureRule::midpoint(7);
  const Kernel k = Kernel::gaussian(0.8);
  SUBCASE("linearity") {
    const std::vector<double> three{3};
    const Model f = zoo_model("product", three);
    const Model g = zoo_model("ishigami-like");
    const Model h = Model::linear_combination(-1.5, f, 0.25, g);
    const EvalPoint ep{{0.3, 1.1, -0.6}, {0.0, 0.2, 0.1}};
    const auto pf = gralis_exact(f, ep, k, q, PathMode::simultaneous).phi;
    const auto pg = gralis_exact(g, ep, k, q, PathMode::simultaneous).phi;
    const auto ph = gralis_exact(h, ep, k, q, PathMode::simultaneous).phi;
    for (int i = 0; i < 3; ++i) CHECK(std::abs(ph[i] - (-1.5 * pf[i] + 0.25 * pg[i])) < 1e-10);
  }
  SUBCASE("dummy") {
    const std::vector<double> params{3, 0, 1, 2, 1, 0, 0, 0, 0};
    const Model m = zoo_model("multilinear", params);
    const EvalPoint ep{{1.0, -2.0, 5.0}, {0.0, 0.0, 0.0}};
    CHECK(std::abs(gralis_exact(m, ep, k, q, PathMode::simultaneous).phi[2]) < 1e-12);
  }
  SUBCASE("symmetry") {
    const std::vector<double> a{2.0, 2.0, 1.0};
    const Model m = zoo_model("quadratic", a);
    const EvalPoint ep{{0.7, 0.7, 1.0}, {0.1, 0.1, 0.0}};
    const auto phi = gralis_exact(m, ep, k, q, PathMode::simultaneous).phi;
    CHECK(std::abs(phi[0] - phi[1]) < 1e-12);
  }
}

TEST_CASE("Monte-Carlo converges to the exact value") {
  const Model m = zoo_model("product");
  McConfig cfg;
  cfg.m = 200000;
  cfg.seed = 1;
  const auto r = gralis_mc(m, kOnes, cfg);
  CHECK(std::abs(r.phi[0] - 0.25) < 0.005);
  CHECK(std::abs(r.phi[1] - 0.25) < 0.005);
  CHECK(r.m_used == 200000);
  CHECK(r.mode == EngineMode::mc);
}

TEST_CASE("Monte-Carlo is deterministic across runs and worker counts") {
  const Model m = zoo_model("ishigami-like");
  const EvalPoint ep{{1.0, 0.5, -0.3}, {0.0, 0.0, 0.0}};
  McConfig cfg;
  cfg.m = 700;
  cfg.seed = 77;
  cfg.kernel = Kernel::gaussian(1.1);
  const auto a = gralis_mc(m, ep, cfg);
  cfg.workers = 3;
  const auto b = gralis_mc(m, ep, cfg);
  cfg.workers = 8;
  const auto c = gralis_mc(m, ep, cfg);
  CHECK(a.phi == b.phi);
  CHECK(a.phi == c.phi);
  CHECK(a.z_norm == c.z_norm);
  cfg.seed = 78;
  CHECK(gralis_mc(m, ep, cfg).phi != a.phi);
}

TEST_CASE("antithetic estimator is unbiased and not noisier than plain sampling") {
  const std::vector<double> three{3};
  const Model m = zoo_model("product", three);
  const EvalPoint ep{{1.0, 2.0, -1.5}, {0.0, 0.0, 0.0}};
  const auto q = QuadratureRule::gauss(4);
  const auto exact = gralis_exact(m, ep, Kernel::uniform(), q, PathMode::simultaneous).phi;
  const int reps = 200;
  double mean_anti = 0.0, var_anti = 0.0, var_plain = 0.0;
  std::vector<double> anti(reps), plain(reps);
  for (int r = 0; r < reps; ++r) {
    McConfig cfg;
    cfg.quad = q;
    cfg.m = 20;
    cfg.seed = 1000 + r;
    plain[r] = gralis_mc(m, ep, cfg).phi[0];
    cfg.antithetic = true;
    anti[r] = gralis_mc(m, ep, cfg).phi[0];
    mean_anti += anti[r] / reps;
  }
  double mean_plain = 0.0;
  for (double v : plain) mean_plain += v / reps;
  for (int r = 0; r < reps; ++r) {
    var_anti += std::pow(anti[r] - mean_anti, 2) / (reps - 1);
    var_plain += std::pow(plain[r] - mean_plain, 2) / (reps - 1);
  }
  CHECK(var_anti <= var_plain);
  CHECK(std::abs(mean_anti - exact[0]) <= 3.0 * std::sqrt(var_anti / reps) + 1e-12);
}

TEST_CASE("global normalization follows the single-Z convention") {
  const Model m = zoo_model("linear", kLinear);
  McConfig cfg;
  cfg.m = 10;
  cfg.normalization = Normalization::global_z;
  const auto r = gralis_mc(m, kOnes, cfg);
  REQUIRE(r.z_norm.size() == 1);
  CHECK(r.z_norm[0] == 20.0);  // one unit of kernel mass per feature per draw
  CHECK(r.phi[0] == doctest::Approx(1.0));
  CHECK(r.phi[1] == doctest::Approx(1.5));
}

TEST_CASE("degenerate point short-circuits without model calls") {
  auto calls = std::make_shared<std::atomic<int>>(0);
  const Model m(
      2, [calls](std::span<const double> x) { ++*calls; return x[0] * x[1]; },
      [calls](std::span<const double> x, std::size_t i) { ++*calls; return x[1 - i]; }, "counted");
  const EvalPoint ep{{0.5, 0.5}, {0.5, 0.5}};
  const auto r = gralis_exact(m, ep, Kernel::uniform(), QuadratureRule::midpoint(4), PathMode::simultaneous);
  CHECK(r.phi == std::vector<double>{0.0, 0.0});
  McConfig cfg;
  const auto mc = gralis_mc(m, ep, cfg);
  CHECK(mc.phi == std::vector<double>{0.0, 0.0});
  CHECK(calls->load() == 0);
}

TEST_CASE("engine errors") {
  const std::vector<double> lin(22, 1.0);
  const Model big = zoo_model("linear", lin);
  const EvalPoint ep{std::vector<double>(21, 1.0), std::vector<double>(21, 0.0)};
  CHECK_ERROR_KIND(gralis_exact(big, ep, Kernel::uniform(), QuadratureRule::midpoint(2), PathMode::simultaneous),
                   ErrorKind::capacity);
  McConfig cfg;
  cfg.antithetic = true;
  cfg.m = 11;
  CHECK_ERROR_KIND(gralis_mc(zoo_model("product"), kOnes, cfg), ErrorKind::config);
  cfg.antithetic = false;
  cfg.m = 10;
  CHECK_ERROR_KIND(gralis_mc_antithetic(zoo_model("product"), kOnes, cfg), ErrorKind::config);
  cfg.m = 0;
  CHECK_ERROR_KIND(gralis_mc(zoo_model("product"), kOnes, cfg), ErrorKind::config);
  CHECK_ERROR_KIND(parse_normalization("both"), ErrorKind::config);
}

TEST_CASE("error bound") {
  CHECK(mc_error_bound(1.0, 100, 0.04, 1.0, 1.0, 0.0, 10) == doctest::Approx(0.5));
  CHECK(mc_error_bound(2.0, 100, 0.04, 1.0, 2.0, 1.0, 4) == doctest::Approx(1.0 + 0.25));
  CHECK_ERROR_KIND(mc_error_bound(1.0, 100, 0.0, 1, 1, 0, 1), ErrorKind::domain);
  CHECK_ERROR_KIND(mc_error_bound(1.0, 100, 1.0, 1, 1, 0, 1), ErrorKind::domain);
}

TEST_CASE("error bound coverage on the product model") {
  const Model m = zoo_model("product");
  const double delta = 0.05;
  const unsigned k = 10;
  const std::uint64_t draws = 100;
  const double exact = 0.25;
  int covered = 0;
  const int runs = 1000;
  for (int r = 0; r < runs; ++r) {
    McConfig cfg;
    cfg.m = draws;
    cfg.seed = 5000 + r;
    cfg.quad = QuadratureRule::right(k);
    const auto res = gralis_mc(m, kOnes, cfg);
    // Hessian sup of x1 x2 is 1; |x_i - x'_i| = 1; ||x - x'||_1 = 2.
    const double bound = mc_error_bound(res.b_estimate, draws, delta, 1.0, 2.0, 1.0, k);
    // right rule shifts the target by the Riemann bias, which the bound covers
    if (std::abs(res.phi[0] - exact) <= bound) ++covered;
  }
  CHECK(covered >= 960);
}

TEST_CASE("completeness residual helper") {
  const Model m = zoo_model("product");
  AttributionResult r;
  r.phi = {0.25, 0.25};
  CHECK(completeness_residual(r, m, kOnes) == doctest::Approx(0.5));
  r.phi = {0.25};
  CHECK_ERROR_KIND(completeness_residual(r, m, kOnes), ErrorKind::config);
}

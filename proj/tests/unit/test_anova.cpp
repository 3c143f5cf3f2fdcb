#include <cmath>

#include "doctest.h"
#include "gralis/anova.hpp"
#include "helpers.hpp"

using namespace gralis;

TEST_CASE("grid specs parse into product measures") {
  const auto mu = ProductMeasure::parse("-1,1;0,1,2:1,2,1");
  CHECK(mu.dims() == 2);
  CHECK(mu.grid_size() == 6);
  CHECK(mu.marginal(1).probs[1] == doctest::Approx(0.5));
  CHECK(mu.mean(1) == doctest::Approx(1.0));
  CHECK_ERROR_KIND(ProductMeasure::parse("1,x"), ErrorKind::config);
  CHECK_ERROR_KIND(ProductMeasure::parse("1,2:0,0"), ErrorKind::config);
  CHECK_ERROR_KIND(ProductMeasure::parse("1,2:1"), ErrorKind::config);
  CHECK_ERROR_KIND(ProductMeasure({Marginal{{1.0, 2.0}, {0.5, 0.6}}}), ErrorKind::config);
  CHECK_ERROR_KIND(ProductMeasure({Marginal{{1.0}, {-1.0}}}), ErrorKind::config);
}

TEST_CASE("additive-interaction model on the symmetric binary grid") {
  const Model m = zoo_model("additive-interaction");
  const auto mu = ProductMeasure::parse("-1,1;-1,1");
  const auto d = hoeffding_decompose(m, mu);
  CHECK(d.mean() == doctest::Approx(0.0));
  CHECK(d.total_variance() == doctest::Approx(3.0));
  const auto s = sobol_indices(d);
  CHECK(std::abs(s.first[1] - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(s.first[2] - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(s.first[3] - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(s.total[3] - 1.0) < 1e-12);
  CHECK(zero_mean_residual(d, mu) < 1e-12);
  CHECK(orthogonality_check(d, mu) < 1e-12);
  CHECK(reconstruction_residual(d, m, mu) < 1e-12);
  // f_1(x1) = x1 on this grid
  const std::vector<std::size_t> idx{1, 0};
  CHECK(d.term_at(1, idx) == doctest::Approx(1.0));
  CHECK(d.term_at(3, idx) == doctest::Approx(-1.0));
}

TEST_CASE("decomposition properties on uneven grids") {
  const auto mu = ProductMeasure::parse("-1,0.5,2:0.2,0.5,0.3;0,1:3,1;-2,-1,1,3");
  for (const char* name : {"multilinear", "ishigami-like"}) {
    const Model m = zoo_model(name);
    const auto d = hoeffding_decompose(m, mu);
    INFO(name);
    CHECK(zero_mean_residual(d, mu) < 1e-10);
    CHECK(orthogonality_check(d, mu) < 1e-8);
    CHECK(reconstruction_residual(d, m, mu) < 1e-10);
    const auto s = sobol_indices(d);
    double sum = 0.0;
    for (std::size_t t = 1; t < s.first.size(); ++t) {
      CHECK(s.first[t] >= 0.0);
      sum += s.first[t];
    }
    CHECK(std::abs(sum - 1.0) < 1e-10);
    CHECK(std::abs(s.total[7] - 1.0) < 1e-10);
  }
}

TEST_CASE("additive models have only main effects") {
  const std::vector<double> a{1.0, -2.0, 0.5};
  const Model m = zoo_model("quadratic", a);
  const auto mu = ProductMeasure::parse("0,1,2;-1,1;0,3");
  const auto d = hoeffding_decompose(m, mu);
  for (std::uint64_t t : {3u, 5u, 6u, 7u}) CHECK(d.term_variance(t) < 1e-20);
}

TEST_CASE("degenerate and oversized inputs") {
  const std::vector<double> constant{4.0, 0.0, 0.0};
  const Model flat = zoo_model("linear", constant);
  const auto mu = ProductMeasure::parse("-1,1;-1,1");
  const auto d = hoeffding_decompose(flat, mu);
  CHECK_ERROR_KIND(sobol_indices(d), ErrorKind::degenerate_model);
  CHECK_ERROR_KIND(gralis_sobol_bridge(flat, mu, QuadratureRule::gauss(4), PathMode::simultaneous),
                   ErrorKind::degenerate_model);
  CHECK_ERROR_KIND(hoeffding_decompose(zoo_model("product"), ProductMeasure::parse("1,2")),
                   ErrorKind::config);
  const std::vector<double> seven(8, 1.0);
  const Model wide = zoo_model("linear", seven);
  CHECK_ERROR_KIND(hoeffding_decompose(wide, ProductMeasure::parse("0,1;0,1;0,1;0,1;0,1;0,1;0,1")),
                   ErrorKind::capacity);
  const std::vector<double> two{2};
  std::string big;
  for (int i = 0; i < 1001; ++i) big += (i ? "," : "") + std::to_string(i);
  CHECK_ERROR_KIND(hoeffding_decompose(zoo_model("product", two), ProductMeasure::parse(big + ";" + big)),
                   ErrorKind::capacity);
}

TEST_CASE("attribution variance matches first-order indices for additive models") {
  const std::vector<double> params{0.5, 2.0, -1.0};
  const Model m = zoo_model("linear", params);
  const auto mu = ProductMeasure::parse("-1,0,1;0,2:1,3");
  const auto b = gralis_sobol_bridge(m, mu, QuadratureRule::gauss(2), PathMode::simultaneous);
  for (const auto& f : b.features) CHECK(f.abs_diff < 1e-12);
  CHECK(b.max_pointwise_deviation < 1e-12);
}

#include "gralis/report.hpp"

#include <cmath>
#include <limits>

#include "gralis/error.hpp"
#include "gralis/game.hpp"
#include "gralis/multiscale.hpp"
#include "gralis/parallel.hpp"
#include "gralis/summation.hpp"

namespace gralis {

void DropCurve::validate() const {
  require(k.size() == drop.size(), ErrorKind::domain, "k and drop lengths differ");
  require(k.size() >= 2, ErrorKind::domain, "deletion AUC needs at least two points");
  require(k.front() == 0.0, ErrorKind::domain, "drop curve must start at k = 0");
  for (std::size_t j = 0; j < k.size(); ++j) {
    require(std::isfinite(k[j]) && std::isfinite(drop[j]), ErrorKind::domain,
            "drop curve entries must be finite");
    if (j > 0) require(k[j] > k[j - 1], ErrorKind::domain, "k must be strictly increasing");
  }
}

double deletion_auc(const DropCurve& curve) {
  curve.validate();
  CompensatedSum area;
  for (std::size_t j = 1; j < curve.k.size(); ++j)
    area.add(0.5 * (curve.drop[j] + curve.drop[j - 1]) * (curve.k[j] - curve.k[j - 1]));
  return area.value() / curve.k.back();
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorKind::domain, "slope fit needs paired samples");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] > 0.0 && y[j] > 0.0) {
      lx.push_back(std::log(x[j]));
      ly.push_back(std::log(y[j]));
    }
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double count = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t j = 0; j < lx.size(); ++j) {
    mx += lx[j];
    my += ly[j];
  }
  mx /= count;
  my /= count;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t j = 0; j < lx.size(); ++j) {
    sxy += (lx[j] - mx) * (ly[j] - my);
    sxx += (lx[j] - mx) * (lx[j] - mx);
  }
  if (sxx == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

SweepResult run_convergence_sweep(const Model& m, const EvalPoint& ep, const SweepConfig& cfg) {
  require(!cfg.m_grid.empty() && !cfg.k_grid.empty(), ErrorKind::config,
          "sweep grids must be nonempty");
  require(cfg.replicates >= 1, ErrorKind::config, "need at least one replicate");
  cfg.mc.validate();
  for (auto v : cfg.m_grid) require(v >= 1, ErrorKind::config, "m grid entries must be >= 1");
  for (auto v : cfg.k_grid) require(v >= 1, ErrorKind::config, "k grid entries must be >= 1");

  const std::size_t n = m.dim();
  const auto exact = gralis_exact(m, ep, cfg.mc.kernel, cfg.mc.quad, cfg.mc.path).phi;

  SweepResult out;
  const std::size_t items = cfg.m_grid.size() * cfg.replicates;
  std::vector<double> sq_error(items);
  parallel_for(items, cfg.mc.workers, [&](std::size_t item) {
    McConfig run = cfg.mc;
    run.m = cfg.m_grid[item / cfg.replicates];
    run.seed = cfg.mc.seed + item % cfg.replicates;
    run.workers = 1;
    const auto phi = gralis_mc(m, ep, run).phi;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += (phi[i] - exact[i]) * (phi[i] - exact[i]);
    sq_error[item] = acc / static_cast<double>(n);
  });

  std::vector<double> mx;
  std::vector<double> my;
  for (std::size_t g = 0; g < cfg.m_grid.size(); ++g) {
    CompensatedSum acc;
    for (unsigned r = 0; r < cfg.replicates; ++r) acc.add(sq_error[g * cfg.replicates + r]);
    const double rmse = std::sqrt(acc.value() / cfg.replicates);
    out.rows.push_back({"m", to_string(cfg.mc.quad.kind()), cfg.m_grid[g], cfg.mc.quad.k(), rmse});
    mx.push_back(static_cast<double>(cfg.m_grid[g]));
    my.push_back(rmse);
  }
  out.m_slope = fit_loglog_slope(mx, my);

  const auto full = Coalition::full(static_cast<unsigned>(n));
  for (QuadKind kind : {QuadKind::right_riemann, QuadKind::midpoint}) {
    std::vector<double> kx;
    std::vector<double> ky;
    for (unsigned k : cfg.k_grid) {
      const double residual = coalition_residual(m, ep, full, QuadratureRule(kind, k));
      out.rows.push_back({"k", to_string(kind), 0, k, residual});
      kx.push_back(k);
      ky.push_back(residual);
    }
    (kind == QuadKind::right_riemann ? out.k_slope_right : out.k_slope_mid) =
        fit_loglog_slope(kx, ky);
  }
  return out;
}

namespace {

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

std::string at_most(double value, double threshold) {
  return value <= threshold ? "pass" : "fail";
}

std::string above(double value, double threshold) {
  return value > threshold ? "pass" : "fail";
}

}  // namespace

std::vector<AuditRow> axiomatic_audit(const AuditConfig& cfg) {
  require(cfg.threshold > 0.0, ErrorKind::config, "audit threshold must be positive");
  const Kernel kernel = Kernel::gaussian(cfg.sigma);
  const QuadratureRule quad = QuadratureRule::gauss(cfg.k);
  const auto exact = [&](const Model& m, const EvalPoint& ep, const Kernel& k, PathMode path) {
    return gralis_exact(m, ep, k, quad, path);
  };
  std::vector<AuditRow> rows;

  {
    const Model prod = zoo_model("product");
    const EvalPoint ep{{1.0, 1.0}, {0.0, 0.0}};
    const double kernel_res = exact(prod, ep, kernel, PathMode::simultaneous).completeness_residual;
    rows.push_back({"efficiency", kernel_res,
                    kernel_res <= cfg.threshold ? "pass" : "approximate",
                    "product model, gaussian kernel, simultaneous path"});
    const double seq_res =
        exact(prod, ep, Kernel::uniform(), PathMode::sequential).completeness_residual;
    rows.push_back({"efficiency-uniform-sequential", seq_res, at_most(seq_res, cfg.threshold),
                    "product model, uniform kernel, sequential path"});
  }
  {
    const std::vector<double> params{3, 0, 0, 0, 1, 1, 0, 0, 0};
    const Model m = zoo_model("multilinear", params);  // x1 x2 + x3
    const EvalPoint ep{{1.0, 1.0, 2.0}, {0.0, 0.0, 0.0}};
    const auto phi = exact(m, ep, kernel, PathMode::simultaneous).phi;
    const double gap = std::abs(phi[0] - phi[1]);
    rows.push_back({"symmetry", gap, at_most(gap, cfg.threshold),
                    "|phi_1 - phi_2| for f = x1 x2 + x3"});
  }
  {
    const std::vector<double> params{3, 0, 1, 2, 1, 0, 0, 0, 0};
    const Model m = zoo_model("multilinear", params);  // x1 + 2 x2 + x1 x2
    const EvalPoint ep{{1.5, -0.5, 2.0}, {0.0, 0.0, 0.0}};
    const double dummy = std::abs(exact(m, ep, kernel, PathMode::simultaneous).phi[2]);
    rows.push_back({"dummy", dummy, at_most(dummy, cfg.threshold),
                    "|phi_3| for a model that ignores x3"});
  }
  {
    const std::vector<double> three{3};
    const std::vector<double> quad_params{1.0, 2.0, 3.0};
    const Model f = zoo_model("product", three);
    const Model g = zoo_model("quadratic", quad_params);
    const Model combo = Model::linear_combination(2.0, f, 3.0, g);
    const EvalPoint ep{{0.7, -1.2, 1.5}, {0.1, 0.2, -0.3}};
    const auto pf = exact(f, ep, kernel, PathMode::simultaneous).phi;
    const auto pg = exact(g, ep, kernel, PathMode::simultaneous).phi;
    const auto pc = exact(combo, ep, kernel, PathMode::simultaneous).phi;
    std::vector<double> mix(pf.size());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.0 * pf[i] + 3.0 * pg[i];
    const double dev = max_abs_diff(pc, mix);
    rows.push_back({"linearity", dev, at_most(dev, cfg.threshold),
                    "phi(2F + 3G) against 2 phi(F) + 3 phi(G)"});
  }
  {
    const std::vector<double> params{1.0, 1.0};
    const Model m = zoo_model("quadratic", params);
    const EvalPoint ep{{1.0, 0.0}, {0.0, 0.0}};
    const double phi0 = std::abs(exact(m, ep, kernel, PathMode::simultaneous).phi[0]);
    rows.push_back({"sensitivity", phi0, above(phi0, cfg.threshold),
                    "|phi_1| when only x1 differs and f changes"});
  }
  {
    const Model m = zoo_model("ishigami-like");
    const EvalPoint ep{{1.0, 0.5, -0.8}, {0.0, 0.0, 0.0}};
    const auto local = exact(m, ep, kernel, PathMode::simultaneous).phi;
    const auto flat = exact(m, ep, Kernel::uniform(), PathMode::simultaneous).phi;
    const double shift = max_abs_diff(local, flat);
    rows.push_back({"locality", shift, above(shift, cfg.threshold),
                    "change in phi between the gaussian and uniform kernels"});
  }
  {
    const std::vector<double> three{3};
    const Model m = zoo_model("product", three);
    const EvalPoint ep{{1.0, 2.0, -1.0}, {0.0, 0.0, 0.0}};
    const auto game = CooperativeGame::from_model(m, ep);
    double dev = 0.0;
    for (unsigned i = 0; i < 3; ++i)
      for (unsigned j = i + 1; j < 3; ++j)
        dev = std::max(dev, std::abs(siv_grabisch(game, i, j) - siv_mobius(game, i, j)));
    rows.push_back({"interactions", dev, at_most(dev, cfg.threshold),
                    "pairwise interaction index, second differences against Moebius"});
  }
  {
    const std::vector<double> sigma2{1.0, 2.0, 5.0};
    const auto lambda = optimal_weights(sigma2);
    const double value = aggregate_variance(sigma2, lambda);
    const double dev = std::abs(value - minimum_variance(sigma2));
    rows.push_back({"multiscale", dev, at_most(dev, cfg.threshold),
                    "aggregate variance at the optimal weights against 1 / sum sigma^-2"});
  }
  return rows;
}

}  // namespace gralis

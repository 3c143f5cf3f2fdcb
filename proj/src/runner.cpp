#include "runner.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "gralis/anova.hpp"
#include "gralis/attribution.hpp"
#include "gralis/error.hpp"
#include "gralis/game.hpp"
#include "gralis/multiscale.hpp"
#include "gralis/reductions.hpp"
#include "gralis/report.hpp"

namespace gralis {

namespace {

using json = nlohmann::json;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Typed access to the input config. Every key read is copied, with its
// default filled in, into `merged` in access order.
class Config {
 public:
  explicit Config(const json& in) : in_(in) {
    require(in_.is_object(), ErrorKind::config, "config must be a JSON object");
  }

  bool has(const std::string& key) const { return in_.contains(key) && !in_[key].is_null(); }

  std::string str(const std::string& key, const std::string& def) {
    const std::string v = has(key) ? as<std::string>(key) : def;
    merged_[key] = v;
    return v;
  }

  std::string required_str(const std::string& key) {
    require(has(key), ErrorKind::config, "missing required setting '" + key + "'");
    return str(key, "");
  }

  double num(const std::string& key, double def) {
    const double v = has(key) ? as<double>(key) : def;
    require(std::isfinite(v), ErrorKind::config, "setting '" + key + "' must be finite");
    merged_[key] = v;
    return v;
  }

  std::uint64_t count(const std::string& key, std::uint64_t def) {
    std::uint64_t v = def;
    if (has(key)) {
      require(in_[key].is_number_integer() && in_[key].get<std::int64_t>() >= 0,
              ErrorKind::config, "setting '" + key + "' must be a nonnegative integer");
      v = in_[key].get<std::uint64_t>();
    }
    merged_[key] = v;
    return v;
  }

  bool flag(const std::string& key, bool def) {
    const bool v = has(key) ? as<bool>(key) : def;
    merged_[key] = v;
    return v;
  }

  std::vector<double> vec(const std::string& key, std::vector<double> def) {
    std::vector<double> v = has(key) ? as<std::vector<double>>(key) : std::move(def);
    for (double e : v) require(std::isfinite(e), ErrorKind::config, "'" + key + "' must be finite");
    merged_[key] = v;
    return v;
  }

  template <class T>
  std::vector<T> list(const std::string& key, std::vector<T> def) {
    std::vector<T> v = has(key) ? as<std::vector<T>>(key) : std::move(def);
    merged_[key] = v;
    return v;
  }

  json raw(const std::string& key) {
    const json v = has(key) ? in_[key] : json(nullptr);
    merged_[key] = v;
    return v;
  }

  void finish() const {
    for (const auto& item : in_.items()) {
      require(merged_.contains(item.key()) || item.key() == "workers", ErrorKind::config,
              "unknown setting '" + item.key() + "'");
    }
  }

  const ordered_json& merged() const { return merged_; }

 private:
  template <class T>
  T as(const std::string& key) const {
    try {
      return in_[key].get<T>();
    } catch (const json::exception&) {
      fail(ErrorKind::config, "setting '" + key + "' has the wrong type");
    }
  }

  const json& in_;
  ordered_json merged_ = ordered_json::object();
};

unsigned workers_of(const json& in) {
  if (!in.contains("workers")) return 1;
  require(in["workers"].is_number_integer() && in["workers"].get<std::int64_t>() >= 1,
          ErrorKind::config, "workers must be a positive integer");
  return in["workers"].get<unsigned>();
}

struct ModelPoint {
  Model model;
  EvalPoint ep;
};

ModelPoint read_model_point(Config& c, const std::string& default_model = "",
                            bool default_ones = false, std::vector<double> default_params = {}) {
  const bool defaulted = !default_model.empty() && !c.has("model");
  const std::string name =
      default_model.empty() ? c.required_str("model") : c.str("model", default_model);
  const auto params = c.vec("params", defaulted ? std::move(default_params) : std::vector<double>{});
  Model m = zoo_model(name, params);
  const std::size_t n = m.dim();
  std::vector<double> x;
  if (default_ones) {
    x = c.vec("x", std::vector<double>(n, 1.0));
  } else {
    require(c.has("x"), ErrorKind::config, "missing required setting 'x'");
    x = c.vec("x", {});
  }
  auto baseline = c.vec("baseline", std::vector<double>(n, 0.0));
  EvalPoint ep{std::move(x), std::move(baseline)};
  ep.validate(n);
  return {std::move(m), std::move(ep)};
}

Kernel read_kernel(Config& c, const std::string& key = "sigma") {
  if (!c.has(key)) {
    c.str(key, "uniform");
    return Kernel::uniform();
  }
  const json v = c.raw(key);
  if (v.is_string()) {
    require(v.get<std::string>() == "uniform", ErrorKind::config,
            "sigma must be a positive number or \"uniform\"");
    return Kernel::uniform();
  }
  require(v.is_number(), ErrorKind::config, "sigma must be a positive number or \"uniform\"");
  return Kernel::gaussian(v.get<double>());
}

QuadratureRule read_quad(Config& c, const std::string& def_kind, unsigned def_k) {
  const QuadKind kind = parse_quad_kind(c.str("quad", def_kind));
  const auto k = c.count("k", def_k);
  require(k >= 1 && k <= 1'000'000, ErrorKind::config, "k must lie in [1, 10^6]");
  return QuadratureRule(kind, static_cast<unsigned>(k));
}

McConfig read_mc(Config& c, unsigned workers, const std::string& def_quad, unsigned def_k) {
  McConfig mc;
  mc.m = c.count("m", 1000);
  mc.quad = read_quad(c, def_quad, def_k);
  mc.path = parse_path_mode(c.str("path", "simultaneous"));
  mc.kernel = read_kernel(c);
  mc.normalization = parse_normalization(c.str("norm", "feature"));
  mc.seed = c.count("seed", 0);
  mc.antithetic = c.flag("antithetic", false);
  mc.workers = workers;
  mc.validate();
  return mc;
}

std::vector<unsigned> members(std::uint64_t t, unsigned n) {
  std::vector<unsigned> out;
  for (unsigned j = 0; j < n; ++j)
    if ((t >> j) & 1u) out.push_back(j);
  return out;
}

ordered_json start_report(std::string_view name) {
  ordered_json r = ordered_json::object();
  r["subcommand"] = std::string(name);
  return r;
}

void finish_report(RunOutput& out, const Config& c, unsigned workers) {
  c.finish();
  ordered_json report = ordered_json::object();
  report["subcommand"] = out.report["subcommand"];
  report["config"] = c.merged();
  for (const auto& item : out.report.items())
    if (item.key() != "subcommand") report[item.key()] = item.value();
  report["runtime"] = {{"workers", workers}};
  out.report = std::move(report);
}

RunOutput run_attribute(const json& in) {
  Config c(in);
  const unsigned workers = workers_of(in);
  RunOutput out{start_report("attribute"), {}};
  auto [m, ep] = read_model_point(c);
  const std::string mode = c.str("mode", "exact");
  const McConfig mc = read_mc(c, workers, "mid", 10);
  AttributionResult res;
  if (mode == "exact") {
    res = gralis_exact(m, ep, mc.kernel, mc.quad, mc.path);
  } else if (mode == "mc") {
    res = gralis_mc(m, ep, mc);
  } else {
    fail(ErrorKind::config, "mode must be 'exact' or 'mc'");
  }
  auto& r = out.report;
  r["phi"] = res.phi;
  r["residual"] = res.completeness_residual;
  r["diagnostics"] = {{"z", res.z_norm},
                      {"m", res.m_used},
                      {"k", res.k_used},
                      {"seed", res.seed},
                      {"b_estimate", res.b_estimate}};
  if (auto ref = m.shapley_reference(ep)) r["shapley_reference"] = *ref;
  finish_report(out, c, workers);
  return out;
}

RunOutput run_converge(const json& in) {
  Config c(in);
  const unsigned workers = workers_of(in);
  RunOutput out{start_report("converge"), {}};
  auto [m, ep] = read_model_point(c, "product", true, {3.0});
  SweepConfig sweep;
  sweep.mc = read_mc(c, workers, "gauss", 4);
  sweep.m_grid = c.list<std::uint64_t>("m_grid", sweep.m_grid);
  sweep.k_grid = c.list<unsigned>("k_grid", sweep.k_grid);
  sweep.replicates = static_cast<unsigned>(c.count("replicates", sweep.replicates));
  const auto result = run_convergence_sweep(m, ep, sweep);

  ordered_json rows = ordered_json::array();
  std::ostringstream csv;
  csv << "sweep,rule,m,k,error\n";
  for (const auto& row : result.rows) {
    rows.push_back({{"sweep", row.sweep},
                    {"rule", row.rule},
                    {"m", row.m},
                    {"k", row.k},
                    {"error", row.error}});
    csv << row.sweep << ',' << row.rule << ',' << row.m << ',' << row.k << ',' << fmt(row.error)
        << '\n';
  }
  auto& r = out.report;
  r["rows"] = rows;
  r["slopes"] = {{"m", number_or_null(result.m_slope)},
                 {"k_right", number_or_null(result.k_slope_right)},
                 {"k_mid", number_or_null(result.k_slope_mid)}};
  out.csv.emplace_back("convergence", csv.str());
  finish_report(out, c, workers);
  return out;
}

RunOutput run_interactions(const json& in) {
  Config c(in);
  const unsigned workers = workers_of(in);
  RunOutput out{start_report("interactions"), {}};
  const bool from_attribution = c.flag("from_attribution", false);
  std::optional<CooperativeGame> game;
  if (from_attribution) {
    auto [m, ep] = read_model_point(c);
    game = CooperativeGame::from_model(m, ep);
  } else {
    const json g = c.raw("game");
    require(g.is_object() && g.contains("n") && g.contains("values"), ErrorKind::config,
            "interactions needs a game {\"n\", \"values\"} or from_attribution");
    try {
      game = CooperativeGame(g["n"].get<unsigned>(), g["values"].get<std::vector<double>>());
    } catch (const json::exception&) {
      fail(ErrorKind::config, "game file has the wrong shape");
    }
  }
  const unsigned n = game->players();
  std::vector<std::pair<unsigned, unsigned>> pairs;
  const json p = c.raw("pairs");
  if (p.is_null() || (p.is_string() && p.get<std::string>() == "all")) {
    for (unsigned i = 0; i < n; ++i)
      for (unsigned j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  } else {
    require(p.is_array() && p.size() == 2 && p[0].is_number_unsigned() &&
                p[1].is_number_unsigned(),
            ErrorKind::config, "pairs must be \"all\" or [i, j]");
    pairs.emplace_back(p[0].get<unsigned>(), p[1].get<unsigned>());
  }

  const auto mob = mobius_transform(*game);
  auto& r = out.report;
  r["n"] = n;
  r["empty_value_nonzero"] = game->empty_value_nonzero();
  r["shapley"] = shapley_values(*game);
  r["shapley_mobius"] = shapley_from_mobius(mob, n);
  ordered_json siv = ordered_json::array();
  for (auto [i, j] : pairs) {
    const double a = siv_grabisch(*game, i, j);
    const double b = siv_from_mobius(mob, n, i, j);
    siv.push_back({{"i", i}, {"j", j}, {"grabisch", a}, {"mobius", b}, {"abs_diff", std::abs(a - b)}});
  }
  r["siv"] = siv;
  finish_report(out, c, workers);
  return out;
}

RunOutput run_anova(const json& in) {
  Config c(in);
  const unsigned workers = workers_of(in);
  RunOutput out{start_report("anova"), {}};
  const Model m = zoo_model(c.required_str("model"), c.vec("params", {}));
  const ProductMeasure mu = ProductMeasure::parse(c.required_str("grid"));
  const bool bridge = c.flag("bridge", true);
  const QuadratureRule quad = read_quad(c, "gauss", 16);
  const PathMode path = parse_path_mode(c.str("path", "simultaneous"));

  const auto d = hoeffding_decompose(m, mu);
  const auto s = sobol_indices(d);
  auto& r = out.report;
  r["mean"] = d.mean();
  r["variance"] = d.total_variance();
  ordered_json terms = ordered_json::array();
  double sum = 0.0;
  const std::uint64_t lattice = std::uint64_t{1} << d.dims();
  for (std::uint64_t t = 1; t < lattice; ++t) {
    sum += s.first[t];
    terms.push_back({{"set", members(t, d.dims())},
                     {"variance", d.term_variance(t)},
                     {"sobol", s.first[t]},
                     {"total", s.total[t]}});
  }
  r["terms"] = terms;
  r["sobol_sum"] = sum;
  r["checks"] = {{"zero_mean", zero_mean_residual(d, mu)},
                 {"orthogonality", orthogonality_check(d, mu)},
                 {"reconstruction", reconstruction_residual(d, m, mu)}};
  if (bridge) {
    const auto b = gralis_sobol_bridge(m, mu, quad, path);
    ordered_json features = ordered_json::array();
    for (const auto& f : b.features)
      features.push_back(
          {{"gralis", f.gralis_index}, {"sobol", f.sobol_index}, {"abs_diff", f.abs_diff}});
    r["bridge"] = {{"baseline", b.baseline},
                   {"features", features},
                   {"max_pointwise_deviation", b.max_pointwise_deviation}};
  }
  finish_report(out, c, workers);
  return out;
}

RunOutput run_multiscale(const json& in) {
  Config c(in);
  const unsigned workers = workers_of(in);
  RunOutput out{start_report("multiscale"), {}};
  LayerAttributions layers;
  const json raw = c.raw("layers");
  require(raw.is_array() && !raw.empty(), ErrorKind::config,
          "multiscale needs a nonempty 'layers' array");
  try {
    for (const auto& layer : raw) {
      layers.phi.push_back(layer.at("phi").get<std::vector<double>>());
      layers.variance.push_back(layer.at("var").get<double>());
    }
  } catch (const json::exception&) {
    fail(ErrorKind::config, "each layer needs 'phi' and 'var'");
  }
  layers.validate();
  std::vector<double> lambda;
  const json given = c.raw("lambdas");
  if (given.is_null()) {
    lambda = optimal_weights(layers.variance);
  } else {
    require(given.is_array(), ErrorKind::config, "lambdas must be an array");
    lambda = given.get<std::vector<double>>();
  }
  auto& r = out.report;
  r["variance_source"] = "supplied";
  r["weights"] = lambda;
  r["aggregate"] = ms_aggregate(layers, lambda);
  r["variance_independent"] = aggregate_variance(layers.variance, lambda);
  const json cov = c.raw("cov");
  if (!cov.is_null()) {
    std::vector<double> flat;
    try {
      for (const auto& row : cov) {
        const auto v = row.get<std::vector<double>>();
        flat.insert(flat.end(), v.begin(), v.end());
      }
    } catch (const json::exception&) {
      fail(ErrorKind::config, "cov must be an L x L array");
    }
    r["variance_with_cov"] = aggregate_variance(layers.variance, lambda, std::span(flat));
  }
  r["minimum_variance"] = minimum_variance(layers.variance);
  finish_report(out, c, workers);
  return out;
}

ordered_json compare(double direct, double triple) {
  return {{"direct", direct}, {"triple", triple}, {"abs_diff", std::abs(direct - triple)}};
}

RunOutput run_reduce(const json& in) {
  Config c(in);
  const unsigned workers = workers_of(in);
  RunOutput out{start_report("reduce"), {}};
  auto [m, ep] = read_model_point(c);
  const QuadratureRule quad = read_quad(c, "gauss", 16);
  const Kernel kernel = read_kernel(c);
  const auto n = static_cast<unsigned>(m.dim());
  require(n <= 10, ErrorKind::capacity, "reduce is limited to 10 features");

  auto& r = out.report;
  ordered_json checks = ordered_json::array();
  for (const auto& chk : reducibility_suite(m, ep, quad)) {
    checks.push_back({{"name", chk.name},
                      {"applicable", chk.applicable},
                      {"deviation", chk.deviation},
                      {"note", chk.note}});
  }
  r["checks"] = checks;

  const auto game = CooperativeGame::from_model(m, ep);
  BinaryDesign design{std::size_t{1} << n, n, {}};
  for (std::uint64_t s = 0; s < design.rows; ++s)
    for (unsigned j = 0; j < n; ++j) design.z.push_back((s >> j) & 1u);
  const auto weights = lime_proximity(kernel, ep, design);
  const auto responses = lime_responses(m, ep, design);

  ordered_json triples = ordered_json::array();
  for (unsigned i = 0; i < n; ++i) {
    const auto ig = ig_triple(m, ep, i, quad.k());
    const double ig_direct = integrated_gradients(m, ep, i, QuadratureRule::right(quad.k()));
    const auto shap = shap_triple(game, i);
    const auto gr = gralis_triple(m, ep, i, kernel, quad, PathMode::simultaneous);
    const auto lime = lime_triple(design, weights, responses, i);
    triples.push_back({{"feature", i},
                       {"ig", compare(ig_direct, triple_eval(ig.triple)[0])},
                       {"shap", compare(shap.value, triple_eval(shap.triple)[0])},
                       {"gralis", compare(gr.value, triple_eval(gr.triple)[0])},
                       {"lime", compare(lime.coefficient, triple_eval(lime.triple)[0])}});
  }
  r["triples"] = triples;

  const json fm_json = c.raw("feature_maps");
  if (!fm_json.is_null()) {
    FeatureMapStack fm;
    try {
      fm.k = fm_json.at("K").get<std::size_t>();
      fm.h = fm_json.at("H").get<std::size_t>();
      fm.w = fm_json.at("W").get<std::size_t>();
      fm.a = fm_json.at("A").get<std::vector<double>>();
      fm.g = fm_json.at("G").get<std::vector<double>>();
    } catch (const json::exception&) {
      fail(ErrorKind::config, "feature maps need K, H, W, A and G");
    }
    fm.validate();
    const double lambda = c.num("relu_lambda", -1.0);
    const auto map = gradcam_lin_map(fm);
    double triple_dev = 0.0;
    for (std::size_t p = 0; p < fm.h; ++p)
      for (std::size_t q = 0; q < fm.w; ++q)
        triple_dev = std::max(
            triple_dev, std::abs(triple_eval(gradcam_triple(fm, p, q))[0] - map[p * fm.w + q]));
    ordered_json gc = {{"map", map}, {"triple_max_abs_diff", triple_dev}};
    try {
      gc["relu_witness"] = relu_nonlinearity_witness(fm, lambda);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::witness_unavailable) throw;
      gc["relu_witness"] = nullptr;
      gc["relu_witness_note"] = e.what();
    }
    r["gradcam"] = gc;
  }
  finish_report(out, c, workers);
  return out;
}

RunOutput run_audit(const json& in) {
  Config c(in);
  const unsigned workers = workers_of(in);
  RunOutput out{start_report("audit"), {}};
  AuditConfig cfg;
  cfg.threshold = c.num("threshold", cfg.threshold);
  cfg.sigma = c.num("sigma", cfg.sigma);
  cfg.k = static_cast<unsigned>(c.count("k", cfg.k));
  ordered_json rows = ordered_json::array();
  for (const auto& row : axiomatic_audit(cfg)) {
    rows.push_back(
        {{"axiom", row.axiom}, {"value", row.value}, {"status", row.status}, {"note", row.note}});
  }
  out.report["rows"] = rows;
  finish_report(out, c, workers);
  return out;
}

RunOutput run_delauc(const json& in) {
  Config c(in);
  const unsigned workers = workers_of(in);
  RunOutput out{start_report("delauc"), {}};
  DropCurve curve{c.vec("k", {}), c.vec("drop", {})};
  const double auc = deletion_auc(curve);
  std::ostringstream csv;
  csv << "k,drop\n";
  for (std::size_t j = 0; j < curve.k.size(); ++j)
    csv << fmt(curve.k[j]) << ',' << fmt(curve.drop[j]) << '\n';
  out.report["k_max"] = curve.k.back();
  out.report["auc"] = auc;
  out.csv.emplace_back("curve", csv.str());
  finish_report(out, c, workers);
  return out;
}

}  // namespace

std::vector<std::string> subcommand_names() {
  return {"attribute", "converge", "interactions", "anova",
          "multiscale", "reduce", "audit", "delauc"};
}

RunOutput run_subcommand(std::string_view name, const json& config) {
  if (name == "attribute") return run_attribute(config);
  if (name == "converge") return run_converge(config);
  if (name == "interactions") return run_interactions(config);
  if (name == "anova") return run_anova(config);
  if (name == "multiscale") return run_multiscale(config);
  if (name == "reduce") return run_reduce(config);
  if (name == "audit") return run_audit(config);
  if (name == "delauc") return run_delauc(config);
  fail(ErrorKind::config, "unknown subcommand '" + std::string(name) + "'");
}

}  // namespace gralis

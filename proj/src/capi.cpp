#include "gralis/gralis.h"

#include <cmath>
#include <cstring>
#include <new>
#include <string>

#include "gralis/attribution.hpp"
#include "gralis/error.hpp"
#include "gralis/game.hpp"
#include "runner.hpp"

struct gralis_model {
  gralis::Model model;
};

struct gralis_attribution {
  gralis::AttributionResult result;
};

struct gralis_game {
  gralis::CooperativeGame game;
};

namespace {

thread_local std::string g_last_error;

gralis_status status_of(gralis::ErrorKind kind) {
  using gralis::ErrorKind;
  switch (kind) {
    case ErrorKind::config: return GRALIS_ERR_CONFIG;
    case ErrorKind::domain: return GRALIS_ERR_DOMAIN;
    case ErrorKind::numerical: return GRALIS_ERR_NUMERICAL;
    case ErrorKind::capacity: return GRALIS_ERR_CAPACITY;
    case ErrorKind::io: return GRALIS_ERR_IO;
    case ErrorKind::rank_deficient: return GRALIS_ERR_RANK_DEFICIENT;
    case ErrorKind::witness_unavailable: return GRALIS_ERR_WITNESS_UNAVAILABLE;
    case ErrorKind::degenerate_model: return GRALIS_ERR_DEGENERATE_MODEL;
  }
  return GRALIS_ERR_INTERNAL;
}

template <class F>
gralis_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return GRALIS_OK;
  } catch (const gralis::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("invalid JSON: ") + e.what();
    return GRALIS_ERR_CONFIG;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return GRALIS_ERR_CAPACITY;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GRALIS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return GRALIS_ERR_INTERNAL;
  }
}

void need(bool cond, const char* what) {
  gralis::require(cond, gralis::ErrorKind::config, what);
}

gralis::EvalPoint make_point(const double* x, const double* baseline, size_t n) {
  need(x != nullptr && baseline != nullptr, "x and baseline must not be null");
  return {std::vector<double>(x, x + n), std::vector<double>(baseline, baseline + n)};
}

gralis::McConfig make_config(const gralis_engine_options* o) {
  const gralis_engine_options opts = o ? *o : gralis_engine_defaults();
  gralis::McConfig cfg;
  cfg.kernel = (opts.sigma <= 0.0 || std::isinf(opts.sigma)) ? gralis::Kernel::uniform()
                                                             : gralis::Kernel::gaussian(opts.sigma);
  gralis::QuadKind kind = gralis::QuadKind::midpoint;
  switch (opts.quad) {
    case GRALIS_QUAD_RIGHT: kind = gralis::QuadKind::right_riemann; break;
    case GRALIS_QUAD_MID: kind = gralis::QuadKind::midpoint; break;
    case GRALIS_QUAD_GAUSS: kind = gralis::QuadKind::gauss_legendre; break;
    default: gralis::fail(gralis::ErrorKind::config, "unknown quadrature rule");
  }
  cfg.quad = gralis::QuadratureRule(kind, opts.k);
  need(opts.path == GRALIS_PATH_SIMULTANEOUS || opts.path == GRALIS_PATH_SEQUENTIAL,
       "unknown path mode");
  cfg.path = opts.path == GRALIS_PATH_SEQUENTIAL ? gralis::PathMode::sequential
                                                 : gralis::PathMode::simultaneous;
  need(opts.norm == GRALIS_NORM_FEATURE || opts.norm == GRALIS_NORM_GLOBAL,
       "unknown normalization");
  cfg.normalization = opts.norm == GRALIS_NORM_GLOBAL ? gralis::Normalization::global_z
                                                      : gralis::Normalization::per_feature;
  cfg.m = opts.m;
  cfg.antithetic = opts.antithetic != 0;
  cfg.seed = opts.seed;
  cfg.workers = opts.workers;
  cfg.validate();
  return cfg;
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* gralis_last_error(void) { return g_last_error.c_str(); }

const char* gralis_status_name(gralis_status status) {
  switch (status) {
    case GRALIS_OK: return "ok";
    case GRALIS_ERR_CONFIG: return "config";
    case GRALIS_ERR_DOMAIN: return "domain";
    case GRALIS_ERR_NUMERICAL: return "numerical";
    case GRALIS_ERR_CAPACITY: return "capacity";
    case GRALIS_ERR_IO: return "io";
    case GRALIS_ERR_RANK_DEFICIENT: return "rank-deficient";
    case GRALIS_ERR_WITNESS_UNAVAILABLE: return "witness-unavailable";
    case GRALIS_ERR_DEGENERATE_MODEL: return "degenerate-model";
    case GRALIS_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* gralis_version(void) { return "0.1.0"; }

gralis_status gralis_model_create(const char* name, const double* params, size_t n_params,
                                  gralis_model** out) {
  return guarded([&] {
    need(name != nullptr && out != nullptr, "name and out must not be null");
    need(params != nullptr || n_params == 0, "params must not be null");
    std::span<const double> p(params, n_params);
    *out = new gralis_model{gralis::zoo_model(name, p)};
  });
}

void gralis_model_free(gralis_model* model) { delete model; }

size_t gralis_model_dim(const gralis_model* model) { return model ? model->model.dim() : 0; }

gralis_status gralis_model_eval(const gralis_model* model, const double* x, size_t n,
                                double* out) {
  return guarded([&] {
    need(model != nullptr && x != nullptr && out != nullptr, "null argument");
    need(n == model->model.dim(), "input length does not match the model");
    *out = model->model.eval(std::span<const double>(x, n));
  });
}

gralis_engine_options gralis_engine_defaults(void) {
  gralis_engine_options o;
  o.sigma = 0.0;
  o.quad = GRALIS_QUAD_MID;
  o.k = 10;
  o.path = GRALIS_PATH_SIMULTANEOUS;
  o.m = 1000;
  o.antithetic = 0;
  o.norm = GRALIS_NORM_FEATURE;
  o.seed = 0;
  o.workers = 1;
  return o;
}

gralis_status gralis_attribute_exact(const gralis_model* model, const double* x,
                                     const double* baseline, size_t n,
                                     const gralis_engine_options* options,
                                     gralis_attribution** out) {
  return guarded([&] {
    need(model != nullptr && out != nullptr, "null argument");
    const auto cfg = make_config(options);
    const auto ep = make_point(x, baseline, n);
    *out = new gralis_attribution{
        gralis::gralis_exact(model->model, ep, cfg.kernel, cfg.quad, cfg.path)};
  });
}

gralis_status gralis_attribute_mc(const gralis_model* model, const double* x,
                                  const double* baseline, size_t n,
                                  const gralis_engine_options* options,
                                  gralis_attribution** out) {
  return guarded([&] {
    need(model != nullptr && out != nullptr, "null argument");
    const auto cfg = make_config(options);
    const auto ep = make_point(x, baseline, n);
    *out = new gralis_attribution{gralis::gralis_mc(model->model, ep, cfg)};
  });
}

void gralis_attribution_free(gralis_attribution* result) { delete result; }

size_t gralis_attribution_size(const gralis_attribution* result) {
  return result ? result->result.phi.size() : 0;
}

gralis_status gralis_attribution_phi(const gralis_attribution* result, double* phi, size_t n) {
  return guarded([&] {
    need(result != nullptr && phi != nullptr, "null argument");
    need(n >= result->result.phi.size(), "output buffer is too small");
    std::copy(result->result.phi.begin(), result->result.phi.end(), phi);
  });
}

double gralis_attribution_residual(const gralis_attribution* result) {
  return result ? result->result.completeness_residual : NAN;
}

gralis_status gralis_game_create(unsigned n, const double* values, size_t count,
                                 gralis_game** out) {
  return guarded([&] {
    need(values != nullptr && out != nullptr, "null argument");
    *out = new gralis_game{gralis::CooperativeGame(n, std::vector<double>(values, values + count))};
  });
}

void gralis_game_free(gralis_game* game) { delete game; }

gralis_status gralis_game_shapley(const gralis_game* game, double* phi, size_t n) {
  return guarded([&] {
    need(game != nullptr && phi != nullptr, "null argument");
    need(n >= game->game.players(), "output buffer is too small");
    const auto v = gralis::shapley_values(game->game);
    std::copy(v.begin(), v.end(), phi);
  });
}

gralis_status gralis_game_siv(const gralis_game* game, unsigned i, unsigned j, double* grabisch,
                              double* mobius) {
  return guarded([&] {
    need(game != nullptr, "null argument");
    if (grabisch) *grabisch = gralis::siv_grabisch(game->game, i, j);
    if (mobius) *mobius = gralis::siv_mobius(game->game, i, j);
  });
}

gralis_status gralis_game_mobius(const gralis_game* game, double* out, size_t count) {
  return guarded([&] {
    need(game != nullptr && out != nullptr, "null argument");
    need(count >= game->game.values().size(), "output buffer is too small");
    const auto m = gralis::mobius_transform(game->game);
    std::copy(m.begin(), m.end(), out);
  });
}

gralis_status gralis_run_json(const char* subcommand, const char* config_json, char** result) {
  return guarded([&] {
    need(subcommand != nullptr && config_json != nullptr && result != nullptr, "null argument");
    const auto config = nlohmann::json::parse(config_json);
    auto run = gralis::run_subcommand(subcommand, config);
    gralis::ordered_json wrapped = gralis::ordered_json::object();
    wrapped["report"] = std::move(run.report);
    wrapped["csv"] = gralis::ordered_json::object();
    for (auto& [name, text] : run.csv) wrapped["csv"][name] = text;
    *result = copy_string(wrapped.dump());
  });
}

void gralis_string_free(char* s) { delete[] s; }

}  // extern "C"

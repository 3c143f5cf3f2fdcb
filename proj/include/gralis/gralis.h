#ifndef GRALIS_GRALIS_H
#define GRALIS_GRALIS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GRALIS_API __declspec(dllexport)
#else
#define GRALIS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gralis_status {
  GRALIS_OK = 0,
  GRALIS_ERR_CONFIG = 1,
  GRALIS_ERR_DOMAIN = 2,
  GRALIS_ERR_NUMERICAL = 3,
  GRALIS_ERR_CAPACITY = 4,
  GRALIS_ERR_IO = 5,
  GRALIS_ERR_RANK_DEFICIENT = 6,
  GRALIS_ERR_WITNESS_UNAVAILABLE = 7,
  GRALIS_ERR_DEGENERATE_MODEL = 8,
  GRALIS_ERR_INTERNAL = 9
} gralis_status;

typedef enum gralis_quad { GRALIS_QUAD_RIGHT = 0, GRALIS_QUAD_MID = 1, GRALIS_QUAD_GAUSS = 2 } gralis_quad;
typedef enum gralis_path { GRALIS_PATH_SIMULTANEOUS = 0, GRALIS_PATH_SEQUENTIAL = 1 } gralis_path;
typedef enum gralis_norm { GRALIS_NORM_FEATURE = 0, GRALIS_NORM_GLOBAL = 1 } gralis_norm;

/* Message for the last failed call on this thread; empty after a success. */
GRALIS_API const char* gralis_last_error(void);
GRALIS_API const char* gralis_status_name(gralis_status status);
GRALIS_API const char* gralis_version(void);

typedef struct gralis_model gralis_model;

GRALIS_API gralis_status gralis_model_create(const char* name, const double* params,
                                             size_t n_params, gralis_model** out);
GRALIS_API void gralis_model_free(gralis_model* model);
GRALIS_API size_t gralis_model_dim(const gralis_model* model);
GRALIS_API gralis_status gralis_model_eval(const gralis_model* model, const double* x,
                                           size_t n, double* out);

/* Engine settings shared by the exact and Monte-Carlo entry points.
   sigma <= 0 or infinite selects the uniform kernel. */
typedef struct gralis_engine_options {
  double sigma;
  gralis_quad quad;
  unsigned k;
  gralis_path path;
  uint64_t m;
  int antithetic;
  gralis_norm norm;
  uint64_t seed;
  unsigned workers;
} gralis_engine_options;

GRALIS_API gralis_engine_options gralis_engine_defaults(void);

typedef struct gralis_attribution gralis_attribution;

GRALIS_API gralis_status gralis_attribute_exact(const gralis_model* model, const double* x,
                                                const double* baseline, size_t n,
                                                const gralis_engine_options* options,
                                                gralis_attribution** out);
GRALIS_API gralis_status gralis_attribute_mc(const gralis_model* model, const double* x,
                                             const double* baseline, size_t n,
                                             const gralis_engine_options* options,
                                             gralis_attribution** out);
GRALIS_API void gralis_attribution_free(gralis_attribution* result);
GRALIS_API size_t gralis_attribution_size(const gralis_attribution* result);
/* Copies phi into `phi` (capacity n); fails when n is too small. */
GRALIS_API gralis_status gralis_attribution_phi(const gralis_attribution* result, double* phi,
                                                size_t n);
GRALIS_API double gralis_attribution_residual(const gralis_attribution* result);

typedef struct gralis_game gralis_game;

/* `values` holds 2^n entries indexed by coalition bitmask. */
GRALIS_API gralis_status gralis_game_create(unsigned n, const double* values, size_t count,
                                            gralis_game** out);
GRALIS_API void gralis_game_free(gralis_game* game);
GRALIS_API gralis_status gralis_game_shapley(const gralis_game* game, double* phi, size_t n);
GRALIS_API gralis_status gralis_game_siv(const gralis_game* game, unsigned i, unsigned j,
                                         double* grabisch, double* mobius);
GRALIS_API gralis_status gralis_game_mobius(const gralis_game* game, double* out, size_t count);

/* Runs a subcommand on a JSON config. On success *result receives
   {"report": {...}, "csv": {"name": "text", ...}}; release it with
   gralis_string_free. */
GRALIS_API gralis_status gralis_run_json(const char* subcommand, const char* config_json,
                                         char** result);
GRALIS_API void gralis_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif

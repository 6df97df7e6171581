/* C interface of the gasolve library.
 *
 * Every call returns a gas_status; on failure a message describing the
 * problem is available from gas_last_error() on the same thread until the
 * next failing call. Handles are opaque and owned by the caller, who
 * releases them with the matching *_free function.
 */
#ifndef GASOLVE_GASOLVE_H
#define GASOLVE_GASOLVE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(GASOLVE_BUILDING_LIBRARY)
#    define GASOLVE_API __declspec(dllexport)
#  else
#    define GASOLVE_API __declspec(dllimport)
#  endif
#else
#  define GASOLVE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gas_status {
  GAS_OK = 0,
  GAS_ERR_ARGUMENT = 1,
  GAS_ERR_RANGE = 2,
  GAS_ERR_STATE = 3,
  GAS_ERR_UNSUPPORTED = 4,
  GAS_ERR_INFEASIBLE = 5,
  GAS_ERR_DEGENERATE = 6,
  GAS_ERR_CONFIG = 7,
  GAS_ERR_IO = 8,
  GAS_ERR_VERSION = 9,
  GAS_ERR_LENGTH = 10,
  GAS_ERR_UNKNOWN_ARRAY = 11,
  GAS_ERR_PARSE = 12,
  GAS_ERR_NOT_FINITE = 13,
  GAS_ERR_INTERNAL = 99
} gas_status;

typedef struct gas_config gas_config;
typedef struct gas_checkpoint gas_checkpoint;

typedef struct gas_eval_result {
  uint64_t iteration;
  size_t steps;
  double endpoint_error;
  double energy_distance;
  double w2_gaussian; /* NaN unless the data is a single Gaussian */
  double base_endpoint_error;
} gas_eval_result;

GASOLVE_API const char* gas_version(void);
GASOLVE_API const char* gas_last_error(void);
GASOLVE_API const char* gas_status_name(gas_status status);

/* Number of trainable solver scalars for an N-step student. */
GASOLVE_API size_t gas_param_count(size_t steps);

/* Configuration ---------------------------------------------------------- */
GASOLVE_API gas_status gas_config_new(gas_config** out);
GASOLVE_API gas_status gas_config_parse(const char* text, gas_config** out);
GASOLVE_API gas_status gas_config_load(const char* path, gas_config** out);
GASOLVE_API gas_status gas_config_set(gas_config* cfg, const char* key, const char* value);
/* Copies the value (explicit or default) into buf. *needed receives the
 * length including the terminator; a too-small buffer yields
 * GAS_ERR_LENGTH with *needed filled in. */
GASOLVE_API gas_status gas_config_get(const gas_config* cfg, const char* key, char* buf,
                                      size_t cap, size_t* needed);
GASOLVE_API void gas_config_free(gas_config* cfg);

/* Commands --------------------------------------------------------------- */
/* Writes <out_dir>/train.csv and <out_dir>/val.csv. */
GASOLVE_API gas_status gas_cmd_teacher(const gas_config* cfg, const char* out_dir);
/* Writes <out_dir>/checkpoint.txt and <out_dir>/metrics.csv. *aborted is set
 * to 1 when training stopped on a non-finite loss (status is still GAS_OK
 * because both files were written). */
GASOLVE_API gas_status gas_cmd_train(const gas_config* cfg, const char* dataset,
                                     const char* out_dir, int* aborted);
/* Writes <out_dir>/eval.csv. */
GASOLVE_API gas_status gas_cmd_eval(const gas_config* cfg, const char* checkpoint,
                                    const char* val, const char* out_dir,
                                    gas_eval_result* result);
/* Writes <out_dir>/order.csv; orders[0..2] = Euler, DPM-Solver++(3M), RK4. */
GASOLVE_API gas_status gas_cmd_order_check(const gas_config* cfg, const char* out_dir,
                                           double orders[3]);
/* Writes <out_dir>/sweep.csv. */
GASOLVE_API gas_status gas_cmd_sweep(const gas_config* cfg, const char* dataset,
                                     const char* val, const char* out_dir);

/* Checkpoints ------------------------------------------------------------ */
GASOLVE_API gas_status gas_checkpoint_load(const char* path, gas_checkpoint** out);
GASOLVE_API gas_status gas_checkpoint_save(const gas_checkpoint* ckpt, const char* path);
GASOLVE_API uint64_t gas_checkpoint_iteration(const gas_checkpoint* ckpt);
GASOLVE_API size_t gas_checkpoint_steps(const gas_checkpoint* ckpt);
/* Copies the flat solver parameters (ema != 0: their EMA) into out, which
 * must hold gas_param_count(steps) values. */
GASOLVE_API gas_status gas_checkpoint_params(const gas_checkpoint* ckpt, int ema, double* out,
                                             size_t cap);
GASOLVE_API void gas_checkpoint_free(gas_checkpoint* ckpt);

#ifdef __cplusplus
}
#endif

#endif /* GASOLVE_GASOLVE_H */

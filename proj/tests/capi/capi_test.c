/* Exercises the C interface from plain C: status codes, error messages,
 * config access and a small teacher -> train -> eval round trip. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <sys/stat.h>

#include "gasolve/gasolve.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expectation failed: %s (last error: %s)\n", \
              __FILE__, __LINE__, #cond, gas_last_error());            \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static void join(char* out, size_t cap, const char* dir, const char* name) {
  snprintf(out, cap, "%s/%s", dir, name);
}

int main(int argc, char** argv) {
  const char* work = argc > 1 ? argv[1] : "capi_work";
  char path[4096], path2[4096];
  char buf[64];
  size_t needed = 0;
  gas_config* cfg = NULL;
  gas_checkpoint* ckpt = NULL;
  gas_eval_result eval;
  int aborted = -1;
  double params[64];
  double orders[3];

  mkdir(work, 0755);

  EXPECT(strcmp(gas_version(), "1.0.0") == 0);
  EXPECT(strcmp(gas_status_name(GAS_ERR_VERSION), "version") == 0);
  EXPECT(gas_param_count(4) > 0);

  /* Errors are reported by code with a readable message. */
  EXPECT(gas_config_parse("bogus.key = 1\n", &cfg) == GAS_ERR_CONFIG);
  EXPECT(strstr(gas_last_error(), "bogus.key") != NULL);
  EXPECT(cfg == NULL);
  EXPECT(gas_config_new(NULL) == GAS_ERR_ARGUMENT);
  EXPECT(gas_config_load("/nonexistent/gasolve.cfg", &cfg) == GAS_ERR_IO);
  EXPECT(gas_checkpoint_load("/nonexistent/checkpoint.txt", &ckpt) == GAS_ERR_IO);

  EXPECT(gas_config_parse("mixture.0.weight = 1\n"
                          "mixture.0.mean = 0.5\n"
                          "mixture.0.var = 0.25\n"
                          "student.N = 3\n"
                          "data.train_size = 12\n"
                          "data.val_size = 6\n"
                          "train.iterations = 4\n"
                          "train.batch_size = 4\n",
                          &cfg) == GAS_OK);
  EXPECT(gas_config_set(cfg, "seed", "5") == GAS_OK);
  EXPECT(gas_config_set(cfg, "nope", "5") == GAS_ERR_CONFIG);
  EXPECT(gas_config_get(cfg, "seed", buf, sizeof buf, &needed) == GAS_OK);
  EXPECT(strcmp(buf, "5") == 0 && needed == 2);
  EXPECT(gas_config_get(cfg, "teacher.kind", buf, sizeof buf, &needed) == GAS_OK);
  EXPECT(strcmp(buf, "dpmpp3m") == 0);
  EXPECT(gas_config_get(cfg, "teacher.kind", buf, 3, &needed) == GAS_ERR_LENGTH);
  EXPECT(needed == 8);

  EXPECT(gas_cmd_teacher(cfg, work) == GAS_OK);
  join(path, sizeof path, work, "train.csv");
  EXPECT(gas_cmd_train(cfg, path, work, &aborted) == GAS_OK);
  EXPECT(aborted == 0);

  join(path, sizeof path, work, "checkpoint.txt");
  EXPECT(gas_checkpoint_load(path, &ckpt) == GAS_OK);
  EXPECT(gas_checkpoint_iteration(ckpt) == 4);
  EXPECT(gas_checkpoint_steps(ckpt) == 3);
  EXPECT(gas_checkpoint_params(ckpt, 0, params, 2) == GAS_ERR_LENGTH);
  EXPECT(gas_checkpoint_params(ckpt, 1, params, 64) == GAS_OK);
  EXPECT(isfinite(params[0]));
  join(path2, sizeof path2, work, "copy.txt");
  EXPECT(gas_checkpoint_save(ckpt, path2) == GAS_OK);
  gas_checkpoint_free(ckpt);

  join(path2, sizeof path2, work, "val.csv");
  EXPECT(gas_cmd_eval(cfg, path, path2, work, &eval) == GAS_OK);
  EXPECT(eval.steps == 3 && eval.iteration == 4);
  EXPECT(isfinite(eval.endpoint_error) && isfinite(eval.w2_gaussian));

  EXPECT(gas_config_set(cfg, "order.steps", "10,20,40") == GAS_OK);
  EXPECT(gas_cmd_order_check(cfg, work, orders) == GAS_OK);
  EXPECT(fabs(orders[0] - 1.0) < 0.3);

  /* A checkpoint for a different dimension is refused. */
  EXPECT(gas_config_set(cfg, "mixture.0.mean", "0,0") == GAS_OK);
  join(path, sizeof path, work, "train.csv");
  EXPECT(gas_cmd_train(cfg, path, work, &aborted) == GAS_ERR_CONFIG);

  gas_config_free(cfg);
  gas_config_free(NULL);
  gas_checkpoint_free(NULL);

  if (failures == 0) printf("capi: all checks passed\n");
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}

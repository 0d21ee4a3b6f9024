#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "clhoi/clhoi.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

#define EXPECT_OK(call)                                                              \
  do {                                                                               \
    clhoi_status s_ = (call);                                                        \
    if (s_ != CLHOI_OK) {                                                            \
      fprintf(stderr, "%s:%d: %s -> %s: %s\n", __FILE__, __LINE__, #call,            \
              clhoi_status_name(s_), clhoi_last_error());                            \
      ++failures;                                                                    \
    }                                                                                \
  } while (0)

static void on_step(const clhoi_train_step* step, void* user) {
  size_t* count = (size_t*)user;
  if (step->loss_total >= 0.0) ++*count;
}

static void set_tiny(clhoi_config* c) {
  const char* settings[][2] = {{"dim", "16"},         {"image_dim", "8"},   {"query_dim", "16"},
                               {"num_queries", "4"},  {"heads", "2"},       {"icn_heads", "2"},
                               {"former_layers", "1"}, {"train_scenes", "12"}, {"test_scenes", "6"},
                               {"epochs", "1"},       {"decay_after_epoch", "1"}, {"seed", "4"}};
  for (size_t i = 0; i < sizeof settings / sizeof settings[0]; ++i)
    EXPECT_OK(clhoi_config_set(c, settings[i][0], settings[i][1]));
}

int main(int argc, char** argv) {
  const char* dir = argc > 1 ? argv[1] : "capi_out";
  char path[1024], path2[1024];

  EXPECT(strlen(clhoi_version()) > 0);
  EXPECT(clhoi_status_is_io(CLHOI_ERROR_PARSE));
  EXPECT(clhoi_status_is_io(CLHOI_ERROR_LOAD));
  EXPECT(!clhoi_status_is_io(CLHOI_ERROR_CONFIG));
  EXPECT(clhoi_config_create(NULL) == CLHOI_ERROR_NULL_ARGUMENT);

  clhoi_config* config = NULL;
  EXPECT_OK(clhoi_config_create(&config));
  EXPECT(clhoi_config_set(config, "bogus", "1") == CLHOI_ERROR_CONFIG);
  EXPECT(strstr(clhoi_last_error(), "bogus") != NULL);
  EXPECT(clhoi_config_set(config, "dim", "abc") == CLHOI_ERROR_PARSE);
  EXPECT(clhoi_config_load_file(config, "/nonexistent/config.txt") == CLHOI_ERROR_IO);
  set_tiny(config);
  EXPECT_OK(clhoi_config_validate(config));
  char* json = NULL;
  EXPECT_OK(clhoi_config_to_json(config, &json));
  EXPECT(json != NULL && strstr(json, "\"dim\": 16") != NULL);
  clhoi_string_free(json);

  char* report = NULL;
  EXPECT_OK(clhoi_generate_corpus(config, dir, 2, &report));
  EXPECT(report != NULL && strncmp(report, "verb,clean,emitted", 18) == 0);
  clhoi_string_free(report);

  size_t steps = 0;
  char* summary = NULL;
  snprintf(path, sizeof path, "%s/run", dir);
  EXPECT_OK(clhoi_train(config, dir, path, on_step, &steps, &summary));
  EXPECT(steps >= 1);
  EXPECT(summary != NULL && strstr(summary, "retained_images") != NULL);
  clhoi_string_free(summary);

  clhoi_model* model = NULL;
  snprintf(path, sizeof path, "%s/run/missing.bin", dir);
  EXPECT(clhoi_model_load(path, &model) == CLHOI_ERROR_IO);
  snprintf(path, sizeof path, "%s/run/checkpoint.bin", dir);
  EXPECT_OK(clhoi_model_load(path, &model));
  EXPECT_OK(clhoi_model_check_config(model, config));

  clhoi_config* other = NULL;
  EXPECT_OK(clhoi_config_create(&other));
  EXPECT(clhoi_model_check_config(model, other) == CLHOI_ERROR_LOAD);
  clhoi_config_destroy(other);

  char* result = NULL;
  snprintf(path, sizeof path, "%s/test", dir);
  snprintf(path2, sizeof path2, "%s/eval.json", dir);
  EXPECT_OK(clhoi_evaluate(model, path, 0.5, 2, path2, NULL, &result));
  EXPECT(result != NULL && strstr(result, "\"mAP\"") != NULL);
  clhoi_string_free(result);
  EXPECT(clhoi_evaluate(model, path, 2.0, 1, NULL, NULL, NULL) == CLHOI_ERROR_CONFIG);

  EXPECT(clhoi_model_set_chain(model, "sideways") == CLHOI_ERROR_CONFIG);
  EXPECT_OK(clhoi_model_set_chain(model, "spatial"));

  size_t count = 0;
  snprintf(path, sizeof path, "%s/test/images.jsonl", dir);
  snprintf(path2, sizeof path2, "%s/predictions.jsonl", dir);
  char attention[1024];
  snprintf(attention, sizeof attention, "%s/attention.csv", dir);
  EXPECT_OK(clhoi_infer(model, path, 0.5, 1, path2, attention, &count));
  EXPECT(count > 0);
  FILE* f = fopen(attention, "r");
  EXPECT(f != NULL);
  if (f) {
    char line[128] = {0};
    EXPECT(fgets(line, sizeof line, f) != NULL);
    EXPECT(strcmp(line, "image_id,stage,query_index,key_index,weight\n") == 0);
    fclose(f);
  }
  clhoi_model_destroy(model);

  int passed = 0;
  char* text = NULL;
  EXPECT_OK(clhoi_run_suite("similarity", 10, 0, 0, 1, &passed, &text, NULL));
  EXPECT(passed == 1);
  clhoi_string_free(text);
  EXPECT_OK(clhoi_run_suite("inject", 10, 0, 1, 1, &passed, NULL, NULL));
  EXPECT(passed == 0);
  EXPECT(clhoi_run_suite("no-such-property", 10, 0, 0, 1, &passed, NULL, NULL) == CLHOI_ERROR_USAGE);
  EXPECT_OK(clhoi_gradcheck(0, 1, &passed, NULL, NULL));
  EXPECT(passed == 1);

  clhoi_config_destroy(config);
  if (failures) fprintf(stderr, "%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}

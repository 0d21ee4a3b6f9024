#include "clhoi/clhoi.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "core/error.hpp"
#include "pipeline/checkpoint.hpp"
#include "pipeline/corpus.hpp"
#include "pipeline/evaluate.hpp"
#include "pipeline/gradcheck.hpp"
#include "pipeline/trainer.hpp"
#include "suite/suite.hpp"

struct clhoi_config {
  clhoi::Config value;
};

struct clhoi_model {
  clhoi::Checkpoint checkpoint;
  clhoi::ModelWeights weights;
};

namespace {

thread_local std::string last_error;

clhoi_status status_of(clhoi::ErrorKind kind) {
  using clhoi::ErrorKind;
  switch (kind) {
    case ErrorKind::kDimension: return CLHOI_ERROR_DIMENSION;
    case ErrorKind::kDomain: return CLHOI_ERROR_DOMAIN;
    case ErrorKind::kUsage: return CLHOI_ERROR_USAGE;
    case ErrorKind::kNumeric: return CLHOI_ERROR_NUMERIC;
    case ErrorKind::kDeterminism: return CLHOI_ERROR_DETERMINISM;
    case ErrorKind::kConfig: return CLHOI_ERROR_CONFIG;
    case ErrorKind::kState: return CLHOI_ERROR_STATE;
    case ErrorKind::kSampling: return CLHOI_ERROR_SAMPLING;
    case ErrorKind::kGeneration: return CLHOI_ERROR_GENERATION;
    case ErrorKind::kGeometry: return CLHOI_ERROR_GEOMETRY;
    case ErrorKind::kRange: return CLHOI_ERROR_RANGE;
    case ErrorKind::kIo: return CLHOI_ERROR_IO;
    case ErrorKind::kParse: return CLHOI_ERROR_PARSE;
    case ErrorKind::kLoad: return CLHOI_ERROR_LOAD;
    case ErrorKind::kData: return CLHOI_ERROR_DATA;
  }
  return CLHOI_ERROR_INTERNAL;
}

template <typename Fn>
clhoi_status guard(Fn&& fn) {
  last_error.clear();
  try {
    fn();
    return CLHOI_OK;
  } catch (const clhoi::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return CLHOI_ERROR_IO;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CLHOI_ERROR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CLHOI_ERROR_INTERNAL;
  } catch (...) {
    last_error = "unknown exception";
    return CLHOI_ERROR_INTERNAL;
  }
}

void emit(char** out, const std::string& s) {
  if (out == nullptr) return;
  char* copy = new char[s.size() + 1];
  std::memcpy(copy, s.c_str(), s.size() + 1);
  *out = copy;
}

void write_file(const char* path, const std::string& text) {
  if (path != nullptr) clhoi::write_text(path, text);
}

}  // namespace

extern "C" {

const char* clhoi_version(void) { return "1.0.0"; }

const char* clhoi_status_name(clhoi_status status) {
  switch (status) {
    case CLHOI_OK: return "ok";
    case CLHOI_ERROR_DIMENSION: return "dimension error";
    case CLHOI_ERROR_DOMAIN: return "domain error";
    case CLHOI_ERROR_USAGE: return "usage error";
    case CLHOI_ERROR_NUMERIC: return "numeric error";
    case CLHOI_ERROR_DETERMINISM: return "determinism error";
    case CLHOI_ERROR_CONFIG: return "config error";
    case CLHOI_ERROR_STATE: return "state error";
    case CLHOI_ERROR_SAMPLING: return "sampling error";
    case CLHOI_ERROR_GENERATION: return "generation error";
    case CLHOI_ERROR_GEOMETRY: return "geometry error";
    case CLHOI_ERROR_RANGE: return "range error";
    case CLHOI_ERROR_IO: return "io error";
    case CLHOI_ERROR_PARSE: return "parse error";
    case CLHOI_ERROR_LOAD: return "load error";
    case CLHOI_ERROR_DATA: return "data error";
    case CLHOI_ERROR_NULL_ARGUMENT: return "null argument";
    case CLHOI_ERROR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

int clhoi_status_is_io(clhoi_status status) {
  return status == CLHOI_ERROR_IO || status == CLHOI_ERROR_PARSE || status == CLHOI_ERROR_LOAD;
}

const char* clhoi_last_error(void) { return last_error.c_str(); }

void clhoi_string_free(char* str) { delete[] str; }

clhoi_status clhoi_config_create(clhoi_config** out) {
  if (out == nullptr) return CLHOI_ERROR_NULL_ARGUMENT;
  return guard([&] { *out = new clhoi_config(); });
}

void clhoi_config_destroy(clhoi_config* config) { delete config; }

clhoi_status clhoi_config_load_file(clhoi_config* config, const char* path) {
  if (config == nullptr || path == nullptr) return CLHOI_ERROR_NULL_ARGUMENT;
  return guard([&] { config->value = clhoi::load_config(path, config->value); });
}

clhoi_status clhoi_config_parse(clhoi_config* config, const char* text) {
  if (config == nullptr || text == nullptr) return CLHOI_ERROR_NULL_ARGUMENT;
  return guard([&] { config->value = clhoi::parse_config(text, config->value); });
}

clhoi_status clhoi_config_set(clhoi_config* config, const char* key, const char* value) {
  if (config == nullptr || key == nullptr || value == nullptr) return CLHOI_ERROR_NULL_ARGUMENT;
  return guard([&] { clhoi::apply_setting(config->value, key, value); });
}

clhoi_status clhoi_config_validate(const clhoi_config* config) {
  if (config == nullptr) return CLHOI_ERROR_NULL_ARGUMENT;
  return guard([&] { config->value.validate(); });
}

clhoi_status clhoi_config_to_json(const clhoi_config* config, char** out_json) {
  if (config == nullptr || out_json == nullptr) return CLHOI_ERROR_NULL_ARGUMENT;
  return guard([&] { emit(out_json, clhoi::config_to_json(config->value).dump(2)); });
}

clhoi_status clhoi_generate_corpus(const clhoi_config* config, const char* out_dir, size_t threads,
                                   char** out_report) {
  if (config == nullptr || out_dir == nullptr) return CLHOI_ERROR_NULL_ARGUMENT;
  return guard([&] {
    const clhoi::CorpusData corpus = clhoi::generate_corpus(config->value, config->value.seed, threads);
    clhoi::write_corpus(corpus, out_dir);
    emit(out_report, clhoi::label_count_report(corpus.train_counts));
  });
}

clhoi_status clhoi_train(const clhoi_config* config, const char* corpus_dir, const char* out_dir,
                         clhoi_train_callback callback, void* user_data, char** out_summary_json) {
  if (config == nullptr || corpus_dir == nullptr || out_dir == nullptr) return CLHOI_ERROR_NULL_ARGUMENT;
  return guard([&] {
    const clhoi::Config& c = config->value;
    c.validate();
    const clhoi::SplitData split = clhoi::read_split(std::filesystem::path(corpus_dir) / "train");
    const auto items = clhoi::build_training_set(split, clhoi::text::TextEncoder(c.model.dim));
    clhoi::TrainOptions options;
    options.out_dir = out_dir;
    if (callback != nullptr) {
      options.on_step = [&](const clhoi::TrainLogRow& row) {
        const clhoi_train_step step{row.step,          row.epoch,      row.lr,
                                    row.loss.context,  row.loss.i2t,   row.loss.t2i,
                                    row.loss.soft_relation, row.loss.total};
        callback(&step, user_data);
      };
    }
    const clhoi::TrainResult result = clhoi::train_model(c, items, options);
    emit(out_summary_json, clhoi::Json{{"retained_images", items.size()},
                                       {"steps", result.final.step},
                                       {"epochs", c.train.epochs},
                                       {"epoch_mean_total", result.epoch_mean_total},
                                       {"checkpoint", (std::filesystem::path(out_dir) / "checkpoint.bin").string()}}
                               .dump(2));
  });
}

clhoi_status clhoi_model_load(const char* checkpoint_path, clhoi_model** out) {
  if (checkpoint_path == nullptr || out == nullptr) return CLHOI_ERROR_NULL_ARGUMENT;
  return guard([&] {
    auto model = std::make_unique<clhoi_model>();
    model->checkpoint = clhoi::load_checkpoint(checkpoint_path);
    model->weights = clhoi::weights_of(model->checkpoint);
    *out = model.release();
  });
}

void clhoi_model_destroy(clhoi_model* model) { delete model; }

clhoi_status clhoi_model_check_config(const clhoi_model* model, const clhoi_config* config) {
  if (model == nullptr || config == nullptr) return CLHOI_ERROR_NULL_ARGUMENT;
  return guard([&] {
    clhoi::ModelConfig expected = config->value.model;
    expected.chain = model->weights.config.chain;
    clhoi::check_parameters(model->weights.params, expected);
    if (!(expected == model->weights.config))
      throw clhoi::Error(clhoi::ErrorKind::kLoad, "checkpoint model config differs from the requested config");
  });
}

clhoi_status clhoi_model_set_chain(clhoi_model* model, const char* chain) {
  if (model == nullptr || chain == nullptr) return CLHOI_ERROR_NULL_ARGUMENT;
  return guard([&] {
    clhoi::Config c = model->checkpoint.config;
    clhoi::apply_setting(c, "chain", chain);
    model->weights.config.chain = c.model.chain;
    model->checkpoint.config.model.chain = c.model.chain;
  });
}

clhoi_status clhoi_model_config_json(const clhoi_model* model, char** out_json) {
  if (model == nullptr || out_json == nullptr) return CLHOI_ERROR_NULL_ARGUMENT;
  return guard([&] { emit(out_json, clhoi::config_to_json(model->checkpoint.config).dump(2)); });
}

clhoi_status clhoi_evaluate(const clhoi_model* model, const char* split_dir, double lambda, size_t threads,
                            const char* out_json_path, const char* out_pr_csv_path, char** out_result_json) {
  if (model == nullptr || split_dir == nullptr) return CLHOI_ERROR_NULL_ARGUMENT;
  return guard([&] {
    const clhoi::SplitData split = clhoi::read_split(split_dir);
    const clhoi::Evaluation e = clhoi::evaluate_model(model->weights, model->checkpoint.config, split, lambda, threads);
    const std::string json = clhoi::evaluation_to_json(e).dump(2) + "\n";
    write_file(out_json_path, json);
    write_file(out_pr_csv_path, clhoi::evaluation_pr_csv(e));
    emit(out_result_json, json);
  });
}

clhoi_status clhoi_infer(const clhoi_model* model, const char* images_path, double lambda, size_t threads,
                         const char* out_predictions_path, const char* out_attention_path, size_t* out_count) {
  if (model == nullptr || images_path == nullptr || out_predictions_path == nullptr) return CLHOI_ERROR_NULL_ARGUMENT;
  return guard([&] {
    const auto records = clhoi::read_images_jsonl(images_path);
    const clhoi::text::TextEncoder encoder(model->weights.config.dim);
    const clhoi::Tensor bank = clhoi::verb_label_bank(model->checkpoint.config, encoder);
    clhoi::eval::ScoringOptions options;
    options.lambda = lambda;
    const auto outputs = clhoi::run_inference(records, model->weights, bank, options, threads);
    const auto predictions = clhoi::flatten_predictions(outputs);
    clhoi::eval::write_predictions_jsonl(out_predictions_path, predictions);
    if (out_attention_path != nullptr) {
      std::string csv = clhoi::eval::attention_csv_header();
      for (std::size_t i = 0; i < records.size(); ++i)
        csv += clhoi::eval::attention_csv_rows(records[i].image_id, outputs[i].attention);
      clhoi::write_text(out_attention_path, csv);
    }
    if (out_count != nullptr) *out_count = predictions.size();
  });
}

clhoi_status clhoi_gradcheck(uint64_t seed, size_t coords_per_param, int* out_passed, char** out_text,
                             char** out_json) {
  if (out_passed == nullptr) return CLHOI_ERROR_NULL_ARGUMENT;
  return guard([&] {
    clhoi::GradcheckSettings settings;
    settings.coords_per_param = coords_per_param;
    const clhoi::GradcheckReport report = clhoi::run_gradcheck(settings, seed);
    *out_passed = report.passed() ? 1 : 0;
    emit(out_text, clhoi::gradcheck_text(report));
    emit(out_json, clhoi::gradcheck_json(report).dump(2));
  });
}

clhoi_status clhoi_run_suite(const char* filter, size_t seed_count, uint64_t base_seed, int inject_failure,
                             size_t threads, int* out_passed, char** out_text, char** out_json) {
  if (out_passed == nullptr) return CLHOI_ERROR_NULL_ARGUMENT;
  return guard([&] {
    clhoi::suite::SuiteOptions options;
    options.filter = filter == nullptr ? "" : filter;
    options.seed_count = seed_count;
    options.base_seed = base_seed;
    options.inject_failure = inject_failure != 0;
    options.threads = threads;
    const clhoi::suite::SuiteReport report = clhoi::suite::run_suite(options);
    *out_passed = report.passed() ? 1 : 0;
    emit(out_text, clhoi::suite::suite_text(report));
    emit(out_json, clhoi::suite::suite_json(report).dump(2));
  });
}

}  // extern "C"

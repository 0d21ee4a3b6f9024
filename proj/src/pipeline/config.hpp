#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "data/jsonl.hpp"
#include "nn/model_config.hpp"
#include "teacher/teacher.hpp"

namespace clhoi {

struct TrainConfig {
  std::size_t epochs = 5;
  std::size_t batch_size = 16;
  double lr = 1e-4;
  double lr_decayed = 1e-5;
  std::size_t decay_after_epoch = 3;  // lr_decayed from the following epoch on
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip = 1.0;
  bool operator==(const TrainConfig&) const = default;
};

struct Config {
  ModelConfig model;
  teacher::CorpusConfig corpus;
  TrainConfig train;
  double lambda = 0.5;
  std::uint64_t seed = 0;

  // Throws a config error on non-positive dims, inconsistent widths or an
  // lr schedule that ends after training does.
  void validate() const;
  double lr_for_epoch(std::size_t epoch) const;  // epoch is 1-based
  bool operator==(const Config&) const = default;
};

// Flat keys: dim, image_dim, query_dim, num_queries, heads, former_layers,
// icn_heads, ffn_mult, chain, num_verbs, num_classes, train_scenes,
// test_scenes, persons_min, persons_max, objects_min, objects_max,
// p_interact, width, height, grid, embed_noise, verb_signal, image_noise,
// union_noise, jitter, p_drop, p_swap, num_negatives, epochs, batch_size, lr,
// lr_decayed, decay_after_epoch, beta1, beta2, adam_eps, grad_clip, lambda,
// seed.
void apply_setting(Config& config, const std::string& key, const std::string& value);

// JSON object (flat, or with nested objects whose members are flat keys) or
// key=value lines with '#' comments.
Config parse_config(const std::string& text, Config base = {});
Config load_config(const std::filesystem::path& path, Config base = {});

Json config_to_json(const Config& config);
Config config_from_json(const Json& j);

}  // namespace clhoi

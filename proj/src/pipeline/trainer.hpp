#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "losses/losses.hpp"
#include "pipeline/checkpoint.hpp"
#include "pipeline/corpus.hpp"

namespace clhoi {

struct TrainLogRow {
  std::size_t step = 0;  // 1-based optimizer step
  std::size_t epoch = 0;
  double lr = 0;
  losses::LossReport loss;
};

struct TrainOptions {
  // When set, writes checkpoint_init.bin, checkpoint_epoch<N>.bin,
  // checkpoint.bin and train_log.csv here.
  std::filesystem::path out_dir;
  std::function<void(const TrainLogRow&)> on_step;
};

struct TrainResult {
  Checkpoint initial;
  Checkpoint final;
  std::vector<TrainLogRow> log;
  std::vector<double> epoch_mean_total;
};

// Adam with global-norm gradient clipping over shuffled mini-batches; the
// last partial batch is kept. Deterministic given config.seed.
TrainResult train_model(const Config& config, const std::vector<TrainItem>& items, const TrainOptions& options = {});

std::string train_log_header();
std::string train_log_line(const TrainLogRow& row);

class AdamOptimizer {
 public:
  explicit AdamOptimizer(const TrainConfig& config) : config_(config) {}

  // Clips `grads` to the configured global norm, then updates `params` in
  // place. Returns the pre-clip global norm.
  double step(ParameterMap& params, const Gradients& grads, double lr);
  std::size_t steps() const { return t_; }

 private:
  TrainConfig config_;
  std::size_t t_ = 0;
  std::map<std::string, std::vector<double>> m_, v_;
};

double global_norm(const Gradients& grads);

}  // namespace clhoi

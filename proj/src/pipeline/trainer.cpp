#include "pipeline/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "core/error.hpp"

namespace clhoi {

double global_norm(const Gradients& grads) {
  double sq = 0;
  for (const auto& [name, g] : grads)
    for (double x : g.data()) sq += x * x;
  return std::sqrt(sq);
}

double AdamOptimizer::step(ParameterMap& params, const Gradients& grads, double lr) {
  const double norm = global_norm(grads);
  require(std::isfinite(norm), ErrorKind::kNumeric, "non-finite gradient norm");
  const double scale = config_.grad_clip > 0 && norm > config_.grad_clip ? config_.grad_clip / norm : 1.0;
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (const auto& [name, g] : grads) {
    auto it = params.find(name);
    require(it != params.end(), ErrorKind::kState, "gradient for unknown parameter " + name);
    const Tensor& p = it->second;
    require(p.shape() == g.shape(), ErrorKind::kDimension, "gradient shape mismatch for " + name);
    auto& m = m_[name];
    auto& v = v_[name];
    m.resize(p.size(), 0.0);
    v.resize(p.size(), 0.0);
    std::vector<double> values = p.values();
    const auto gd = g.data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double gi = gd[i] * scale;
      m[i] = config_.beta1 * m[i] + (1 - config_.beta1) * gi;
      v[i] = config_.beta2 * v[i] + (1 - config_.beta2) * gi * gi;
      values[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.adam_eps);
    }
    it->second = Tensor(p.shape(), std::move(values));
  }
  return norm;
}

std::string train_log_header() { return "step,epoch,lr,L_c,L_I2T,L_T2I,L_SR,L_total\n"; }

std::string train_log_line(const TrainLogRow& row) {
  std::ostringstream os;
  os.precision(17);
  os << row.step << ',' << row.epoch << ',' << row.lr << ',' << row.loss.context << ',' << row.loss.i2t << ','
     << row.loss.t2i << ',' << row.loss.soft_relation << ',' << row.loss.total << '\n';
  return os.str();
}

namespace {

std::string rng_state(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

losses::TotalLoss batch_step(const ModelConfig& model, const ParameterMap& params,
                             const std::vector<const TrainItem*>& batch, Gradients& grads) {
  Tape tape;
  nn::Binder binder(tape, params, true);
  std::vector<losses::BatchItem> items;
  items.reserve(batch.size());
  for (const TrainItem* item : batch) {
    ForwardResult fwd = forward(binder, model, item->record);
    losses::BatchItem b;
    if (!fwd.interactions.empty()) b.interactions = fwd.interactions.features;
    b.context = fwd.translated.context;
    b.caption = tape.constant(item->caption);
    b.positives = tape.constant(item->positives);
    b.negatives = tape.constant(item->negatives);
    b.pseudo_labels = item->pseudo_labels;
    items.push_back(std::move(b));
  }
  losses::BatchLoss loss = losses::batch_loss(items);
  grads = tape.backward(loss.loss.total);
  return loss.loss;
}

}  // namespace

TrainResult train_model(const Config& config, const std::vector<TrainItem>& items, const TrainOptions& options) {
  config.validate();
  require(!items.empty(), ErrorKind::kData, "training set is empty");
  const TrainConfig& tc = config.train;

  TrainResult result;
  ModelWeights weights = init_model(config.model, config.seed);
  std::mt19937_64 shuffle_rng(config.seed ^ 0x5851f42d4c957f2dULL);
  result.initial = {config, weights.params, 0, rng_state(shuffle_rng)};

  const bool write = !options.out_dir.empty();
  std::ofstream log;
  if (write) {
    std::filesystem::create_directories(options.out_dir);
    save_checkpoint(options.out_dir / "checkpoint_init.bin", result.initial);
    log.open(options.out_dir / "train_log.csv", std::ios::binary);
    require(static_cast<bool>(log), ErrorKind::kIo, "cannot write " + (options.out_dir / "train_log.csv").string());
    log << train_log_header();
  }

  AdamOptimizer adam(tc);
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
    const double lr = config.lr_for_epoch(epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_total = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
      std::vector<const TrainItem*> batch;
      for (std::size_t i = start; i < std::min(order.size(), start + tc.batch_size); ++i)
        batch.push_back(&items[order[i]]);
      Gradients grads;
      const losses::TotalLoss loss = batch_step(config.model, weights.params, batch, grads);
      require(std::isfinite(loss.report.total), ErrorKind::kNumeric, "non-finite training loss");
      adam.step(weights.params, grads, lr);
      TrainLogRow row{adam.steps(), epoch, lr, loss.report};
      if (write) log << train_log_line(row);
      if (options.on_step) options.on_step(row);
      result.log.push_back(row);
      epoch_total += loss.report.total;
      ++batches;
    }
    result.epoch_mean_total.push_back(epoch_total / static_cast<double>(batches));
    if (write) {
      log.flush();
      save_checkpoint(options.out_dir / ("checkpoint_epoch" + std::to_string(epoch) + ".bin"),
                      {config, weights.params, adam.steps(), rng_state(shuffle_rng)});
    }
  }
  result.final = {config, std::move(weights.params), adam.steps(), rng_state(shuffle_rng)};
  if (write) save_checkpoint(options.out_dir / "checkpoint.bin", result.final);
  return result;
}

}  // namespace clhoi

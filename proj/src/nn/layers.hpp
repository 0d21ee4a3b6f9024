#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>

#include "core/ops.hpp"
#include "core/tensor.hpp"

namespace clhoi::nn {

// Binds named parameters onto a tape, once per name. Trainable binding makes
// them gradient leaves; otherwise they are recorded as constants.
class Binder {
 public:
  Binder(Tape& tape, const ParameterMap& params, bool trainable);

  Var operator()(const std::string& name);
  Tape& tape() { return tape_; }
  Var constant(Tensor t) { return tape_.constant(std::move(t)); }

 private:
  Tape& tape_;
  const ParameterMap& params_;
  bool trainable_;
  std::unordered_map<std::string, Var> bound_;
};

// Head-averaged attention weights, queries x keys.
struct AttentionCapture {
  Tensor weights;
};

using Rng = std::mt19937_64;

Tensor uniform_fan_in(Rng& rng, std::size_t in, std::size_t out);
Tensor normal(Rng& rng, std::size_t rows, std::size_t cols, double stddev);

void init_linear(ParameterMap& params, const std::string& name, std::size_t in, std::size_t out, Rng& rng);
void init_layer_norm(ParameterMap& params, const std::string& name, std::size_t width);
void init_attention(ParameterMap& params, const std::string& name, std::size_t query_in, std::size_t key_in,
                    std::size_t value_in, std::size_t width, Rng& rng);
void init_ffn(ParameterMap& params, const std::string& name, std::size_t width, std::size_t hidden, Rng& rng);

Var linear(Binder& b, const std::string& name, Var x);
Var layer_norm(Binder& b, const std::string& name, Var x);
// Bias-free multi-head scaled dot-product attention with an output projection.
Var attention(Binder& b, const std::string& name, Var queries, Var keys, Var values, std::size_t heads,
              AttentionCapture* capture = nullptr);
Var ffn(Binder& b, const std::string& name, Var x);

}  // namespace clhoi::nn

#pragma once

#include <cstdint>

#include "core/tensor.hpp"
#include "nn/layers.hpp"
#include "nn/model_config.hpp"

namespace clhoi::vlt {

// Adapter -> joint self-attention query-former over [context queries ; image
// tokens] -> output projections. Parameter names are prefixed "vlt.".
struct TranslatorWeights {
  ModelConfig config;
  ParameterMap params;
};

struct TranslatorOutput {
  Var context;         // f_c: N_q x D
  Var visual;          // f_v: L x D
  Var updated_tokens;  // f'_img: L x D_q
};

TranslatorWeights init_translator(const ModelConfig& config, std::uint64_t seed);
void init_translator_params(const ModelConfig& config, std::uint64_t seed, ParameterMap& params);

TranslatorOutput translate(nn::Binder& binder, const ModelConfig& config, Var image_tokens);

struct TranslatedTensors {
  Tensor context;
  Tensor visual;
  Tensor updated_tokens;
};

// Forward-only convenience over plain tensors.
TranslatedTensors translate(const Tensor& image_tokens, const TranslatorWeights& weights);

}  // namespace clhoi::vlt

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "data/geometry.hpp"
#include "nn/layers.hpp"
#include "nn/model_config.hpp"

namespace clhoi::icn {

enum class Stage { kSpatial, kVisual, kContext };

// Width per coordinate of the token-position encoding appended to visual keys.
inline constexpr std::size_t kTokenPositionDims = 4;

const char* to_string(Stage stage);

// K x D interaction features tagged with the last cognition stage applied.
// K == 0 is represented by an unbound Var.
struct InteractionFeatures {
  Var features;
  Stage stage = Stage::kSpatial;
  std::size_t count = 0;

  bool empty() const { return count == 0; }
};

// Geometry for the K pairs of one image.
struct PairInputs {
  std::vector<PersonObjectPair> pairs;
  std::vector<SpatialPrior> priors;
  std::vector<std::array<double, 2>> union_centers;  // normalized to [0,1]
  double width = 0;
  double height = 0;
};

PairInputs prepare_pairs(std::span<const Detection> detections, double width, double height);

struct StageAttention {
  nn::AttentionCapture spatial;
  nn::AttentionCapture visual;
  nn::AttentionCapture context;
};

// Parameter names are prefixed "icn.".
void init_icn_params(const ModelConfig& config, std::uint64_t seed, ParameterMap& params);

InteractionFeatures spatial_cognition(nn::Binder& b, const ModelConfig& c, const PairInputs& in,
                                      StageAttention* attn = nullptr);
InteractionFeatures visual_cognition(nn::Binder& b, const ModelConfig& c, const InteractionFeatures& spatial,
                                     Var visual_tokens, std::span<const std::array<double, 2>> union_centers,
                                     StageAttention* attn = nullptr);
// Same, with explicit normalized positions for the visual tokens instead of the square grid.
InteractionFeatures visual_cognition(nn::Binder& b, const ModelConfig& c, const InteractionFeatures& spatial,
                                     Var visual_tokens, std::span<const std::array<double, 2>> union_centers,
                                     std::span<const std::array<double, 2>> token_centers,
                                     StageAttention* attn = nullptr);
InteractionFeatures context_cognition(nn::Binder& b, const ModelConfig& c, const InteractionFeatures& visual,
                                      Var context, StageAttention* attn = nullptr);

// Runs the chain up to c.chain.
InteractionFeatures icn_forward(nn::Binder& b, const ModelConfig& c, const PairInputs& in, Var visual_tokens,
                                Var context, StageAttention* attn = nullptr);

}  // namespace clhoi::icn

#pragma once

#include <cstdint>

#include "data/records.hpp"
#include "icn/icn.hpp"
#include "vlt/translator.hpp"

namespace clhoi {

// Full student: translator followed by the interaction cognition network.
struct ModelWeights {
  ModelConfig config;
  ParameterMap params;
};

ModelWeights init_model(const ModelConfig& config, std::uint64_t seed);

struct ForwardResult {
  icn::PairInputs pairs;
  vlt::TranslatorOutput translated;
  icn::InteractionFeatures interactions;
};

ForwardResult forward(nn::Binder& binder, const ModelConfig& config, const ImageRecord& record,
                      icn::StageAttention* attention = nullptr);

}  // namespace clhoi

#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "data/records.hpp"
#include "nn/model_config.hpp"

namespace clhoi::suite {

Tensor random_tensor(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo = -1.0, double hi = 1.0);
Tensor random_unit_rows(std::mt19937_64& rng, std::size_t rows, std::size_t cols);
Box random_box(std::mt19937_64& rng, double width, double height);

// dim 16, one translator block, two heads everywhere.
ModelConfig small_model();

// `persons` people followed by `objects` objects, random embeddings, a 4-token
// image grid and one union embedding per enumerated pair.
ImageRecord random_record(std::mt19937_64& rng, const ModelConfig& config, std::size_t persons, std::size_t objects,
                          const std::string& id = "img");

}  // namespace clhoi::suite

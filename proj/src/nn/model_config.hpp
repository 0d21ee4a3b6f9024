#pragma once

#include <cstddef>
#include <string>

namespace clhoi {

// How far the cognition chain runs; shorter chains are ablations.
enum class Chain { kSpatial, kVisual, kContext };

const char* to_string(Chain chain);
Chain chain_from_string(const std::string& s);

struct ModelConfig {
  std::size_t dim = 64;         // D: interaction, text and detection-embedding width
  std::size_t image_dim = 32;   // D_img: backbone token width
  std::size_t query_dim = 64;   // D_q: query-former width
  std::size_t num_queries = 8;  // N_q context queries
  std::size_t heads = 4;        // query-former heads
  std::size_t former_layers = 2;
  std::size_t icn_heads = 4;
  std::size_t ffn_mult = 2;
  Chain chain = Chain::kContext;

  // Throws a config error for non-positive dims or heads not dividing widths.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

}  // namespace clhoi

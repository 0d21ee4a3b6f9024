#include "nn/model_config.hpp"

#include "core/error.hpp"

namespace clhoi {

const char* to_string(Chain chain) {
  switch (chain) {
    case Chain::kSpatial: return "spatial";
    case Chain::kVisual: return "visual";
    case Chain::kContext: return "context";
  }
  return "context";
}

Chain chain_from_string(const std::string& s) {
  if (s == "spatial") return Chain::kSpatial;
  if (s == "visual") return Chain::kVisual;
  if (s == "context") return Chain::kContext;
  fail(ErrorKind::kConfig, "unknown chain '" + s + "' (expected spatial, visual or context)");
}

void ModelConfig::validate() const {
  const auto positive = [](std::size_t v, const char* name) {
    require(v > 0, ErrorKind::kConfig, std::string(name) + " must be positive");
  };
  positive(dim, "dim");
  positive(image_dim, "image_dim");
  positive(query_dim, "query_dim");
  positive(num_queries, "num_queries");
  positive(heads, "heads");
  positive(former_layers, "former_layers");
  positive(icn_heads, "icn_heads");
  positive(ffn_mult, "ffn_mult");
  require(query_dim % heads == 0, ErrorKind::kConfig,
          "heads (" + std::to_string(heads) + ") must divide query_dim (" + std::to_string(query_dim) + ")");
  require(dim % icn_heads == 0, ErrorKind::kConfig,
          "icn_heads (" + std::to_string(icn_heads) + ") must divide dim (" + std::to_string(dim) + ")");
  // Box encodings spread 4 coordinates over dim with even bands per coordinate.
  require(dim % 8 == 0, ErrorKind::kConfig, "dim must be a multiple of 8, got " + std::to_string(dim));
}

}  // namespace clhoi

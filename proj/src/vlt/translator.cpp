#include "vlt/translator.hpp"

#include "core/error.hpp"

namespace clhoi::vlt {

namespace {

std::string block(std::size_t i) { return "vlt.block" + std::to_string(i); }

}  // namespace

void init_translator_params(const ModelConfig& c, std::uint64_t seed, ParameterMap& params) {
  c.validate();
  nn::Rng rng(seed);
  nn::init_linear(params, "vlt.adapter_in", c.image_dim, c.query_dim, rng);
  params["vlt.context_queries"] = nn::normal(rng, c.num_queries, c.query_dim, 0.02);
  for (std::size_t i = 0; i < c.former_layers; ++i) {
    nn::init_layer_norm(params, block(i) + ".norm1", c.query_dim);
    nn::init_attention(params, block(i) + ".attn", c.query_dim, c.query_dim, c.query_dim, c.query_dim, rng);
    nn::init_layer_norm(params, block(i) + ".norm2", c.query_dim);
    nn::init_ffn(params, block(i) + ".ffn", c.query_dim, c.query_dim * c.ffn_mult, rng);
  }
  nn::init_layer_norm(params, "vlt.final_norm", c.query_dim);
  nn::init_linear(params, "vlt.context_proj", c.query_dim, c.dim, rng);
  nn::init_linear(params, "vlt.adapter_out", c.query_dim, c.dim, rng);
}

TranslatorWeights init_translator(const ModelConfig& config, std::uint64_t seed) {
  TranslatorWeights w{config, {}};
  init_translator_params(config, seed, w.params);
  return w;
}

TranslatorOutput translate(nn::Binder& b, const ModelConfig& c, Var image_tokens) {
  require(image_tokens.cols() == c.image_dim, ErrorKind::kDimension,
          "translate: image tokens have " + std::to_string(image_tokens.cols()) + " columns, expected " +
              std::to_string(c.image_dim));
  const std::size_t num_tokens = image_tokens.rows();

  Var tokens = ops::gelu(nn::linear(b, "vlt.adapter_in", image_tokens));
  Var seq = ops::concat_rows({b("vlt.context_queries"), tokens});
  for (std::size_t i = 0; i < c.former_layers; ++i) {
    Var n = nn::layer_norm(b, block(i) + ".norm1", seq);
    seq = ops::add(seq, nn::attention(b, block(i) + ".attn", n, n, n, c.heads));
    seq = ops::add(seq, nn::ffn(b, block(i) + ".ffn", nn::layer_norm(b, block(i) + ".norm2", seq)));
  }
  Var out = nn::layer_norm(b, "vlt.final_norm", seq);
  Var queries = ops::slice_rows(out, 0, c.num_queries);
  Var updated = ops::slice_rows(out, c.num_queries, num_tokens);
  return {nn::linear(b, "vlt.context_proj", queries), nn::linear(b, "vlt.adapter_out", updated), updated};
}

TranslatedTensors translate(const Tensor& image_tokens, const TranslatorWeights& weights) {
  Tape tape;
  nn::Binder binder(tape, weights.params, false);
  const TranslatorOutput out = translate(binder, weights.config, tape.constant(image_tokens));
  return {out.context.value(), out.visual.value(), out.updated_tokens.value()};
}

}  // namespace clhoi::vlt

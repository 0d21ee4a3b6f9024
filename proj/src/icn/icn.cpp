#include "icn/icn.hpp"

#include "core/error.hpp"

namespace clhoi::icn {

const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::kSpatial: return "spatial";
    case Stage::kVisual: return "visual";
    case Stage::kContext: return "context";
  }
  return "spatial";
}

PairInputs prepare_pairs(std::span<const Detection> detections, double width, double height) {
  PairInputs in;
  in.width = width;
  in.height = height;
  in.pairs = enumerate_pairs(detections);
  for (const PersonObjectPair& p : in.pairs) {
    in.priors.push_back(spatial_prior(p, width, height));
    const UnionBox u = union_box(p.human.box, p.object.box);
    in.union_centers.push_back({u.center_x / width, u.center_y / height});
  }
  return in;
}

void init_icn_params(const ModelConfig& c, std::uint64_t seed, ParameterMap& params) {
  c.validate();
  nn::Rng rng(seed);
  const std::size_t d = c.dim;
  const std::size_t hidden = d * c.ffn_mult;
  // Spatial cognition: content self-attention over detection tokens, prior
  // projection, and fusion of (E_h, E_o, S).
  nn::init_layer_norm(params, "icn.spatial.norm1", d);
  nn::init_attention(params, "icn.spatial.attn", d, d, d, d, rng);
  nn::init_layer_norm(params, "icn.spatial.norm2", d);
  nn::init_ffn(params, "icn.spatial.ffn", d, hidden, rng);
  nn::init_linear(params, "icn.spatial.prior", prior::kLength, d, rng);
  nn::init_linear(params, "icn.spatial.fuse", 3 * d, d, rng);
  // Visual cognition.
  nn::init_linear(params, "icn.visual.mlp1", 2 * d, d, rng);
  nn::init_linear(params, "icn.visual.mlp2", d, d, rng);
  nn::init_layer_norm(params, "icn.visual.norm1", d);
  nn::init_attention(params, "icn.visual.attn", d, d + 2 * kTokenPositionDims, d, d, rng);
  nn::init_layer_norm(params, "icn.visual.norm2", d);
  nn::init_ffn(params, "icn.visual.ffn", d, hidden, rng);
  // Context cognition.
  nn::init_layer_norm(params, "icn.context.norm1", d);
  nn::init_attention(params, "icn.context.attn", d, d, d, d, rng);
  nn::init_layer_norm(params, "icn.context.norm2", d);
  nn::init_ffn(params, "icn.context.ffn", d, hidden, rng);
}

namespace {

Var encode_rows(Tape& tape, const std::vector<std::vector<double>>& rows) {
  return tape.constant(Tensor::from_rows(rows));
}

// x + Attn(LN(x) [+ pe], keys, values), then x + FFN(LN(x)).
Var cross_block(nn::Binder& b, const std::string& name, Var x, Var keys, Var values, std::size_t heads,
                nn::AttentionCapture* capture) {
  Var q = nn::layer_norm(b, name + ".norm1", x);
  x = ops::add(x, nn::attention(b, name + ".attn", q, keys, values, heads, capture));
  return ops::add(x, nn::ffn(b, name + ".ffn", nn::layer_norm(b, name + ".norm2", x)));
}

}  // namespace

InteractionFeatures spatial_cognition(nn::Binder& b, const ModelConfig& c, const PairInputs& in,
                                      StageAttention* attn) {
  const std::size_t k = in.pairs.size();
  require(in.priors.size() == k, ErrorKind::kDimension, "spatial_cognition: pairs and priors differ in length");
  if (k == 0) return {Var(), Stage::kSpatial, 0};

  std::vector<std::vector<double>> embeddings;
  std::vector<std::vector<double>> box_pe;
  embeddings.reserve(2 * k);
  const auto add_token = [&](const Detection& det) {
    require(det.embedding.size() == c.dim, ErrorKind::kDimension,
            "detection embedding length " + std::to_string(det.embedding.size()) + " != dim " + std::to_string(c.dim));
    embeddings.push_back(det.embedding);
    const std::array<double, 4> coords{det.box.x1 / in.width, det.box.y1 / in.height, det.box.x2 / in.width,
                                       det.box.y2 / in.height};
    box_pe.push_back(positional_encoding(coords, c.dim / 4));
  };
  // Token layout: humans of pairs 0..K-1, then objects of pairs 0..K-1.
  for (const PersonObjectPair& p : in.pairs) add_token(p.human);
  for (const PersonObjectPair& p : in.pairs) add_token(p.object);

  Tape& tape = b.tape();
  Var e = encode_rows(tape, embeddings);
  Var pe = encode_rows(tape, box_pe);
  Var n = nn::layer_norm(b, "icn.spatial.norm1", e);
  Var qk = ops::add(n, pe);
  Var content = ops::add(e, nn::attention(b, "icn.spatial.attn", qk, qk, n, c.icn_heads, attn ? &attn->spatial : nullptr));
  content = ops::add(content, nn::ffn(b, "icn.spatial.ffn", nn::layer_norm(b, "icn.spatial.norm2", content)));

  std::vector<std::vector<double>> prior_rows;
  for (const SpatialPrior& p : in.priors) prior_rows.emplace_back(p.begin(), p.end());
  Var s = nn::linear(b, "icn.spatial.prior", encode_rows(tape, prior_rows));

  Var fused = ops::concat_cols({ops::slice_rows(content, 0, k), ops::slice_rows(content, k, k), s});
  return {nn::linear(b, "icn.spatial.fuse", fused), Stage::kSpatial, k};
}

InteractionFeatures visual_cognition(nn::Binder& b, const ModelConfig& c, const InteractionFeatures& spatial,
                                     Var visual_tokens, std::span<const std::array<double, 2>> union_centers,
                                     StageAttention* attn) {
  std::vector<std::array<double, 2>> grid;
  if (!spatial.empty() && visual_tokens.valid()) grid = token_grid_centers(visual_tokens.rows());
  return visual_cognition(b, c, spatial, visual_tokens, union_centers, grid, attn);
}

InteractionFeatures visual_cognition(nn::Binder& b, const ModelConfig& c, const InteractionFeatures& spatial,
                                     Var visual_tokens, std::span<const std::array<double, 2>> union_centers,
                                     std::span<const std::array<double, 2>> token_centers, StageAttention* attn) {
  require(spatial.stage == Stage::kSpatial, ErrorKind::kState,
          std::string("visual_cognition expects spatial-stage features, got ") + to_string(spatial.stage));
  require(union_centers.size() == spatial.count, ErrorKind::kDimension,
          "visual_cognition: " + std::to_string(union_centers.size()) + " union centers for " +
              std::to_string(spatial.count) + " pairs");
  if (spatial.empty()) return {Var(), Stage::kVisual, 0};
  require(visual_tokens.cols() == c.dim, ErrorKind::kDimension, "visual_cognition: f_v width != dim");

  Tape& tape = b.tape();
  std::vector<std::vector<double>> union_pe;
  for (const auto& uc : union_centers) union_pe.push_back(positional_encoding(uc, c.dim / 2));
  std::vector<std::vector<double>> token_pe;
  require(token_centers.size() == visual_tokens.rows(), ErrorKind::kDimension,
          "visual_cognition: token positions do not match visual tokens");
  for (const auto& tc : token_centers) token_pe.push_back(positional_encoding(tc, kTokenPositionDims));

  Var query_in = ops::concat_cols({spatial.features, encode_rows(tape, union_pe)});
  Var iv0 = nn::linear(b, "icn.visual.mlp2", ops::gelu(nn::linear(b, "icn.visual.mlp1", query_in)));
  Var keys = ops::concat_cols({visual_tokens, encode_rows(tape, token_pe)});
  Var iv = cross_block(b, "icn.visual", iv0, keys, visual_tokens, c.icn_heads, attn ? &attn->visual : nullptr);
  return {iv, Stage::kVisual, spatial.count};
}

InteractionFeatures context_cognition(nn::Binder& b, const ModelConfig& c, const InteractionFeatures& visual,
                                      Var context, StageAttention* attn) {
  require(visual.stage == Stage::kVisual, ErrorKind::kState,
          std::string("context_cognition expects visual-stage features, got ") + to_string(visual.stage));
  if (visual.empty()) return {Var(), Stage::kContext, 0};
  require(context.cols() == c.dim, ErrorKind::kDimension, "context_cognition: f_c width != dim");
  Var ic = cross_block(b, "icn.context", visual.features, context, context, c.icn_heads,
                       attn ? &attn->context : nullptr);
  return {ic, Stage::kContext, visual.count};
}

InteractionFeatures icn_forward(nn::Binder& b, const ModelConfig& c, const PairInputs& in, Var visual_tokens,
                                Var context, StageAttention* attn) {
  InteractionFeatures f = spatial_cognition(b, c, in, attn);
  if (c.chain == Chain::kSpatial) return f;
  f = visual_cognition(b, c, f, visual_tokens, in.union_centers, attn);
  if (c.chain == Chain::kVisual) return f;
  return context_cognition(b, c, f, context, attn);
}

}  // namespace clhoi::icn

#include "nn/model.hpp"

#include "core/error.hpp"

namespace clhoi {

ModelWeights init_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ModelWeights w{config, {}};
  vlt::init_translator_params(config, seed, w.params);
  icn::init_icn_params(config, seed ^ 0x9e3779b97f4a7c15ull, w.params);
  return w;
}

ForwardResult forward(nn::Binder& binder, const ModelConfig& config, const ImageRecord& record,
                      icn::StageAttention* attention) {
  require(record.f_img.rank() == 2 && record.f_img.cols() == config.image_dim, ErrorKind::kDimension,
          "image tokens " + shape_str(record.f_img.shape()) + " do not match image_dim " +
              std::to_string(config.image_dim));
  ForwardResult out;
  out.pairs = icn::prepare_pairs(record.detections, record.width, record.height);
  out.translated = vlt::translate(binder, config, binder.constant(record.f_img));
  out.interactions = icn::icn_forward(binder, config, out.pairs, out.translated.visual, out.translated.context,
                                      attention);
  return out;
}

}  // namespace clhoi

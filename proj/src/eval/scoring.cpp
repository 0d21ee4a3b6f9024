#include "eval/scoring.hpp"

#include <cmath>
#include <sstream>

#include "core/error.hpp"
#include "losses/losses.hpp"

namespace clhoi::eval {

void validate_lambda(double lambda) {
  require(std::isfinite(lambda) && lambda >= 0.0 && lambda <= 1.0, ErrorKind::kConfig,
          "lambda must lie in [0, 1], got " + std::to_string(lambda));
}

Tensor score_matrix(const Tensor& interactions, const Tensor& label_bank, const std::vector<PairScore>& pair_scores,
                    double lambda) {
  validate_lambda(lambda);
  const Tensor cos = losses::cosine_matrix(interactions, label_bank);
  require(pair_scores.size() == cos.rows(), ErrorKind::kDimension,
          "score_matrix: " + std::to_string(pair_scores.size()) + " pair scores for " + std::to_string(cos.rows()) +
              " interaction rows");
  std::vector<double> out(cos.size());
  for (std::size_t k = 0; k < cos.rows(); ++k) {
    const double detection = pair_scores[k].human * pair_scores[k].object;
    require(detection >= 0.0 && detection <= 1.0, ErrorKind::kRange, "detection scores must lie in [0, 1]");
    for (std::size_t v = 0; v < cos.cols(); ++v) {
      const double verb = 1.0 / (1.0 + std::exp(-cos(k, v)));
      out[k * cos.cols() + v] = std::pow(verb, 1.0 - lambda) * std::pow(detection, lambda);
    }
  }
  return Tensor(cos.shape(), std::move(out));
}

std::vector<ScoredTriplet> score_pairs(const Tensor& interactions, const Tensor& label_bank,
                                       const std::vector<PersonObjectPair>& pairs, const std::string& image_id,
                                       const ScoringOptions& options) {
  validate_lambda(options.lambda);
  if (pairs.empty()) return {};
  std::vector<PairScore> ps;
  ps.reserve(pairs.size());
  for (const PersonObjectPair& p : pairs) ps.push_back({p.human.score, p.object.score});
  const Tensor s = score_matrix(interactions, label_bank, ps, options.lambda);
  std::vector<ScoredTriplet> out;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    for (std::size_t v = 0; v < s.cols(); ++v) {
      if (s(k, v) < options.emission_floor) continue;
      out.push_back({image_id, pairs[k].human.box, pairs[k].object.box, static_cast<int>(v),
                     pairs[k].object.class_id, s(k, v)});
    }
  }
  return out;
}

InferenceOutput infer_image(const ImageRecord& record, const ModelWeights& weights, const Tensor& label_bank,
                            const ScoringOptions& options) {
  validate_lambda(options.lambda);
  InferenceOutput out;
  Tape tape;
  nn::Binder binder(tape, weights.params, false);
  const ForwardResult f = forward(binder, weights.config, record, &out.attention);
  if (f.interactions.empty()) return out;
  out.triplets = score_pairs(f.interactions.features.value(), label_bank, f.pairs.pairs, record.image_id, options);
  return out;
}

Json triplet_to_json(const ScoredTriplet& t) {
  return Json{{"image_id", t.image_id},  {"human_box", box_to_json(t.human_box)},
              {"object_box", box_to_json(t.object_box)}, {"verb", t.verb},
              {"object_class", t.object_class}, {"score", t.score}};
}

ScoredTriplet triplet_from_json(const Json& j) {
  ScoredTriplet t;
  t.image_id = j.at("image_id").get<std::string>();
  t.human_box = box_from_json(j.at("human_box"));
  t.object_box = box_from_json(j.at("object_box"));
  t.verb = j.at("verb").get<int>();
  t.object_class = j.at("object_class").get<int>();
  t.score = j.at("score").get<double>();
  require(t.score >= 0.0 && t.score <= 1.0, ErrorKind::kParse, "prediction score outside [0, 1]");
  return t;
}

void write_predictions_jsonl(const std::filesystem::path& path, const std::vector<ScoredTriplet>& predictions) {
  std::vector<Json> rows;
  rows.reserve(predictions.size());
  for (const ScoredTriplet& t : predictions) rows.push_back(triplet_to_json(t));
  write_jsonl(path, rows);
}

std::vector<ScoredTriplet> read_predictions_jsonl(const std::filesystem::path& path) {
  std::vector<ScoredTriplet> out;
  for_each_jsonl(path, [&](const Json& j, std::size_t) { out.push_back(triplet_from_json(j)); });
  return out;
}

std::string attention_csv_header() { return "image_id,stage,query_index,key_index,weight\n"; }

std::string attention_csv_rows(const std::string& image_id, const icn::StageAttention& attention) {
  std::ostringstream os;
  os.precision(17);
  const auto emit = [&](const char* stage, const Tensor& w) {
    if (w.rank() != 2) return;
    for (std::size_t q = 0; q < w.rows(); ++q)
      for (std::size_t k = 0; k < w.cols(); ++k) os << image_id << ',' << stage << ',' << q << ',' << k << ',' << w(q, k) << '\n';
  };
  emit("spatial", attention.spatial.weights);
  emit("visual", attention.visual.weights);
  emit("context", attention.context.weights);
  return os.str();
}

}  // namespace clhoi::eval

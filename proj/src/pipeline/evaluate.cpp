#include "pipeline/evaluate.hpp"

#include "pipeline/parallel.hpp"

namespace clhoi {

using namespace eval;


std::vector<InferenceOutput> run_inference(const std::vector<ImageRecord>& records, const ModelWeights& weights,
                                           const Tensor& label_bank, const ScoringOptions& options,
                                           std::size_t threads) {
  validate_lambda(options.lambda);
  std::vector<InferenceOutput> outputs(records.size());
  parallel_for(records.size(), threads,
               [&](std::size_t i) { outputs[i] = infer_image(records[i], weights, label_bank, options); });
  return outputs;
}

std::vector<ScoredTriplet> flatten_predictions(const std::vector<InferenceOutput>& outputs) {
  std::vector<ScoredTriplet> all;
  for (const InferenceOutput& o : outputs) all.insert(all.end(), o.triplets.begin(), o.triplets.end());
  return all;
}

Evaluation evaluate_model(const ModelWeights& weights, const Config& config, const SplitData& split, double lambda,
                          std::size_t threads) {
  const text::TextEncoder encoder(config.model.dim);
  const Tensor bank = verb_label_bank(config, encoder);
  ScoringOptions options;
  options.lambda = lambda;
  const auto predictions = flatten_predictions(run_inference(split.images, weights, bank, options, threads));
  Evaluation e;
  e.lambda = lambda;
  e.full = evaluate_ap(predictions, split.gt, ApMode::kFull);
  e.role = evaluate_ap(predictions, split.gt, ApMode::kRole);
  return e;
}

Json evaluation_to_json(const Evaluation& evaluation) {
  return Json{{"lambda", evaluation.lambda},
              {"full", eval_to_json(evaluation.full)},
              {"role", eval_to_json(evaluation.role)}};
}

std::string evaluation_pr_csv(const Evaluation& evaluation) {
  const std::string role = pr_curve_csv(evaluation.role);
  return pr_curve_csv(evaluation.full) + role.substr(role.find('\n') + 1);
}

}  // namespace clhoi

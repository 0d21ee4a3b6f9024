#pragma once

#include <vector>

#include "eval/ap.hpp"
#include "eval/scoring.hpp"
#include "pipeline/corpus.hpp"

namespace clhoi {

using eval::EvalResult;
using eval::InferenceOutput;
using eval::ScoredTriplet;
using eval::ScoringOptions;

// One output per input record, in input order, regardless of `threads`.
std::vector<InferenceOutput> run_inference(const std::vector<ImageRecord>& records, const ModelWeights& weights,
                                           const Tensor& label_bank, const ScoringOptions& options,
                                           std::size_t threads = 0);

std::vector<ScoredTriplet> flatten_predictions(const std::vector<InferenceOutput>& outputs);

struct Evaluation {
  double lambda = eval::kDefaultLambda;
  EvalResult full;
  EvalResult role;
};

Evaluation evaluate_model(const ModelWeights& weights, const Config& config, const SplitData& split, double lambda,
                          std::size_t threads = 0);

// {"lambda", "full": {...}, "role": {...}}
Json evaluation_to_json(const Evaluation& evaluation);
std::string evaluation_pr_csv(const Evaluation& evaluation);

}  // namespace clhoi

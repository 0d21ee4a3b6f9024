#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "data/records.hpp"
#include "icn/icn.hpp"
#include "nn/model.hpp"

namespace clhoi::eval {

inline constexpr double kDefaultLambda = 0.5;

struct ScoredTriplet {
  std::string image_id;
  Box human_box;
  Box object_box;
  int verb = 0;
  int object_class = 0;
  double score = 0;
  bool operator==(const ScoredTriplet&) const = default;
};

struct PairScore {
  double human = 1.0;
  double object = 1.0;
};

struct ScoringOptions {
  double lambda = kDefaultLambda;
  double emission_floor = 0.0;  // triplets scoring below this are not emitted
};

// Per (pair, verb): sigmoid(cos(I_k, Y_v))^(1 - lambda) * (s_h * s_o)^lambda.
// Returns a K x V score matrix.
Tensor score_matrix(const Tensor& interactions, const Tensor& label_bank, const std::vector<PairScore>& pair_scores,
                    double lambda);

// Pair-major, verb-minor triplets over the pairs of one image.
std::vector<ScoredTriplet> score_pairs(const Tensor& interactions, const Tensor& label_bank,
                                       const std::vector<PersonObjectPair>& pairs, const std::string& image_id,
                                       const ScoringOptions& options = {});

void validate_lambda(double lambda);

struct InferenceOutput {
  std::vector<ScoredTriplet> triplets;
  icn::StageAttention attention;
};

InferenceOutput infer_image(const ImageRecord& record, const ModelWeights& weights, const Tensor& label_bank,
                            const ScoringOptions& options = {});

Json triplet_to_json(const ScoredTriplet& t);
ScoredTriplet triplet_from_json(const Json& j);
void write_predictions_jsonl(const std::filesystem::path& path, const std::vector<ScoredTriplet>& predictions);
std::vector<ScoredTriplet> read_predictions_jsonl(const std::filesystem::path& path);

// image_id,stage,query_index,key_index,weight rows for every captured attention map.
std::string attention_csv_header();
std::string attention_csv_rows(const std::string& image_id, const icn::StageAttention& attention);

}  // namespace clhoi::eval

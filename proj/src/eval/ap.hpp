#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "data/records.hpp"
#include "eval/scoring.hpp"

namespace clhoi::eval {

// Full keys classes by (verb, object class); Role keys them by verb alone.
enum class ApMode { kFull, kRole };

const char* to_string(ApMode mode);

struct ClassKey {
  int verb = 0;
  int object_class = -1;  // -1 in Role mode
  auto operator<=>(const ClassKey&) const = default;
  std::string label() const;
};

struct PrPoint {
  double recall = 0;
  double precision = 0;
  double score = 0;
};

struct ClassAp {
  double ap = 0;
  std::size_t num_gt = 0;
  std::size_t num_predictions = 0;
  std::size_t true_positives = 0;
  std::vector<PrPoint> curve;
};

struct EvalResult {
  ApMode mode = ApMode::kFull;
  std::map<ClassKey, ClassAp> per_class;
  double mean_ap = 0;  // over classes with at least one ground-truth triplet
};

inline constexpr double kIouThreshold = 0.5;

EvalResult evaluate_ap(const std::vector<ScoredTriplet>& predictions, const std::vector<ImageGroundTruth>& gt,
                       ApMode mode, double iou_threshold = kIouThreshold);

// Area under the precision envelope of a ranked TP/FP list.
double all_point_ap(const std::vector<bool>& is_tp, std::size_t num_gt);

Json eval_to_json(const EvalResult& result);
std::string pr_curve_csv(const EvalResult& result);

}  // namespace clhoi::eval

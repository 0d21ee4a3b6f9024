#pragma once

#include <vector>

#include "eval/ap.hpp"

namespace clhoi::suite {

// Mean AP by enumerating every distinct score threshold: at each cut the
// retained predictions are re-matched from scratch, and AP is the area under
// the precision envelope over the resulting (recall, precision) points.
// Assumes distinct scores within a class.
double threshold_enumeration_map(const std::vector<eval::ScoredTriplet>& predictions,
                                 const std::vector<ImageGroundTruth>& gt, eval::ApMode mode,
                                 double iou_threshold = eval::kIouThreshold);

}  // namespace clhoi::suite

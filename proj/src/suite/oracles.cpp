#include "suite/oracles.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace clhoi::suite {

namespace {

double box_iou(const Box& a, const Box& b) {
  const double iw = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double ih = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = iw * ih;
  const double uni = (a.x2 - a.x1) * (a.y2 - a.y1) + (b.x2 - b.x1) * (b.y2 - b.y1) - inter;
  return uni > 0 ? inter / uni : 0.0;
}

using Key = std::pair<int, int>;

Key key_of(int verb, int object_class, eval::ApMode mode) {
  return {verb, mode == eval::ApMode::kFull ? object_class : -1};
}

struct GtEntry {
  std::string image_id;
  GtTriplet triplet;
};

std::size_t true_positives(std::vector<const eval::ScoredTriplet*> kept, const std::vector<GtEntry>& gts,
                           double thr) {
  std::sort(kept.begin(), kept.end(), [](const auto* a, const auto* b) { return a->score > b->score; });
  std::vector<bool> used(gts.size(), false);
  std::size_t tp = 0;
  for (const eval::ScoredTriplet* p : kept) {
    double best = -1;
    std::size_t best_index = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g] || gts[g].image_id != p->image_id) continue;
      const double h = box_iou(p->human_box, gts[g].triplet.human_box);
      const double o = box_iou(p->object_box, gts[g].triplet.object_box);
      if (h < thr || o < thr) continue;
      if (std::min(h, o) > best) {
        best = std::min(h, o);
        best_index = g;
      }
    }
    if (best_index < gts.size()) {
      used[best_index] = true;
      ++tp;
    }
  }
  return tp;
}

}  // namespace

double threshold_enumeration_map(const std::vector<eval::ScoredTriplet>& predictions,
                                 const std::vector<ImageGroundTruth>& gt, eval::ApMode mode, double iou_threshold) {
  std::map<Key, std::vector<GtEntry>> gt_by_class;
  for (const ImageGroundTruth& img : gt)
    for (const GtTriplet& t : img.gt) gt_by_class[key_of(t.verb, t.object_class, mode)].push_back({img.image_id, t});
  std::map<Key, std::vector<const eval::ScoredTriplet*>> preds_by_class;
  for (const eval::ScoredTriplet& p : predictions)
    preds_by_class[key_of(p.verb, p.object_class, mode)].push_back(&p);

  double total = 0;
  for (const auto& [key, gts] : gt_by_class) {
    const auto& preds = preds_by_class[key];
    std::set<double, std::greater<>> thresholds;
    for (const auto* p : preds) thresholds.insert(p->score);
    std::vector<std::pair<double, double>> points;  // recall, precision
    for (double t : thresholds) {
      std::vector<const eval::ScoredTriplet*> kept;
      for (const auto* p : preds)
        if (p->score >= t) kept.push_back(p);
      const double tp = static_cast<double>(true_positives(kept, gts, iou_threshold));
      points.push_back({tp / static_cast<double>(gts.size()), tp / static_cast<double>(kept.size())});
    }
    double ap = 0, previous_recall = 0;
    std::set<double> recalls;
    for (const auto& [r, p] : points) recalls.insert(r);
    for (double r : recalls) {
      if (r <= 0) continue;
      double envelope = 0;
      for (const auto& [r2, p2] : points)
        if (r2 >= r) envelope = std::max(envelope, p2);
      ap += (r - previous_recall) * envelope;
      previous_recall = r;
    }
    total += ap;
  }
  return gt_by_class.empty() ? 0.0 : total / static_cast<double>(gt_by_class.size());
}

}  // namespace clhoi::suite

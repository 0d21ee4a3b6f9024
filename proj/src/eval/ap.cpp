#include "eval/ap.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "core/error.hpp"

namespace clhoi::eval {

const char* to_string(ApMode mode) { return mode == ApMode::kFull ? "full" : "role"; }

std::string ClassKey::label() const {
  return object_class < 0 ? std::to_string(verb) : std::to_string(verb) + "_" + std::to_string(object_class);
}

namespace {

ClassKey key_of(int verb, int object_class, ApMode mode) {
  return mode == ApMode::kFull ? ClassKey{verb, object_class} : ClassKey{verb, -1};
}

// Ties on score are broken by content so the ranking ignores input order.
auto content_key(const ScoredTriplet& t) {
  return std::tie(t.image_id, t.human_box.x1, t.human_box.y1, t.human_box.x2, t.human_box.y2, t.object_box.x1,
                  t.object_box.y1, t.object_box.x2, t.object_box.y2, t.verb, t.object_class);
}

struct GtEntry {
  const GtTriplet* triplet;
  bool matched = false;
};

}  // namespace

double all_point_ap(const std::vector<bool>& is_tp, std::size_t num_gt) {
  require(num_gt > 0, ErrorKind::kData, "AP is undefined without ground truth");
  std::vector<double> recall, precision;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < is_tp.size(); ++i) {
    tp += is_tp[i] ? 1 : 0;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(num_gt));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
  }
  for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0, prev_recall = 0;
  for (std::size_t i = 0; i < recall.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

EvalResult evaluate_ap(const std::vector<ScoredTriplet>& predictions, const std::vector<ImageGroundTruth>& gt,
                       ApMode mode, double iou_threshold) {
  EvalResult result;
  result.mode = mode;

  // class -> image -> gt entries
  std::map<ClassKey, std::unordered_map<std::string, std::vector<GtEntry>>> pool;
  for (const ImageGroundTruth& img : gt)
    for (const GtTriplet& t : img.gt) {
      const ClassKey key = key_of(t.verb, t.object_class, mode);
      pool[key][img.image_id].push_back({&t});
      ++result.per_class[key].num_gt;
    }
  require(!pool.empty(), ErrorKind::kData, "evaluation needs at least one ground-truth triplet");

  std::map<ClassKey, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const ScoredTriplet& p = predictions[i];
    const ClassKey key = key_of(p.verb, p.object_class, mode);
    if (pool.count(key)) by_class[key].push_back(i);
  }

  for (auto& [key, cls] : result.per_class) {
    std::vector<std::size_t>& order = by_class[key];
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const ScoredTriplet& x = predictions[a];
      const ScoredTriplet& y = predictions[b];
      if (x.score != y.score) return x.score > y.score;
      return content_key(x) < content_key(y);
    });
    auto& images = pool[key];
    std::vector<bool> is_tp;
    is_tp.reserve(order.size());
    for (std::size_t idx : order) {
      const ScoredTriplet& p = predictions[idx];
      bool tp = false;
      auto it = images.find(p.image_id);
      if (it != images.end()) {
        GtEntry* best = nullptr;
        double best_overlap = -1;
        for (GtEntry& g : it->second) {
          if (g.matched) continue;
          const double ih = iou(p.human_box, g.triplet->human_box);
          const double io = iou(p.object_box, g.triplet->object_box);
          if (ih < iou_threshold || io < iou_threshold) continue;
          if (std::min(ih, io) > best_overlap) {
            best_overlap = std::min(ih, io);
            best = &g;
          }
        }
        if (best) {
          best->matched = true;
          tp = true;
        }
      }
      is_tp.push_back(tp);
    }
    cls.num_predictions = order.size();
    cls.ap = all_point_ap(is_tp, cls.num_gt);
    std::size_t tps = 0;
    for (std::size_t i = 0; i < is_tp.size(); ++i) {
      tps += is_tp[i] ? 1 : 0;
      cls.curve.push_back({static_cast<double>(tps) / static_cast<double>(cls.num_gt),
                           static_cast<double>(tps) / static_cast<double>(i + 1), predictions[order[i]].score});
    }
    cls.true_positives = tps;
  }

  double sum = 0;
  for (const auto& [key, cls] : result.per_class) sum += cls.ap;
  result.mean_ap = sum / static_cast<double>(result.per_class.size());
  return result;
}

Json eval_to_json(const EvalResult& result) {
  Json per_class = Json::object();
  for (const auto& [key, cls] : result.per_class) {
    Json entry{{"ap", cls.ap},
               {"num_gt", cls.num_gt},
               {"num_predictions", cls.num_predictions},
               {"true_positives", cls.true_positives},
               {"verb", key.verb}};
    if (key.object_class >= 0) entry["object_class"] = key.object_class;
    per_class[key.label()] = entry;
  }
  return Json{{"mode", to_string(result.mode)}, {"per_class", per_class}, {"mAP", result.mean_ap}};
}

std::string pr_curve_csv(const EvalResult& result) {
  std::ostringstream os;
  os.precision(17);
  os << "mode,class,rank,score,recall,precision\n";
  for (const auto& [key, cls] : result.per_class)
    for (std::size_t i = 0; i < cls.curve.size(); ++i)
      os << to_string(result.mode) << ',' << key.label() << ',' << i + 1 << ',' << cls.curve[i].score << ','
         << cls.curve[i].recall << ',' << cls.curve[i].precision << '\n';
  return os.str();
}

}  // namespace clhoi::eval

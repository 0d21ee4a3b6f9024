#include "data/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "core/error.hpp"

namespace clhoi {

namespace {

std::string box_str(const Box& b) {
  return "[" + std::to_string(b.x1) + "," + std::to_string(b.y1) + "," + std::to_string(b.x2) + "," +
         std::to_string(b.y2) + "]";
}

}  // namespace

void validate_box(const Box& b) {
  const bool finite = std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) && std::isfinite(b.y2);
  require(finite && b.x1 >= 0 && b.y1 >= 0, ErrorKind::kGeometry, "invalid box " + box_str(b));
  require(b.x1 < b.x2 && b.y1 < b.y2, ErrorKind::kGeometry, "zero-area box " + box_str(b));
}

void validate_box_in_image(const Box& b, double width, double height) {
  validate_box(b);
  require(b.x2 <= width && b.y2 <= height, ErrorKind::kGeometry,
          "box " + box_str(b) + " outside " + std::to_string(width) + "x" + std::to_string(height) + " image");
}

double iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

UnionBox union_box(const Box& human, const Box& object) {
  UnionBox u;
  u.box = {std::min(human.x1, object.x1), std::min(human.y1, object.y1), std::max(human.x2, object.x2),
           std::max(human.y2, object.y2)};
  u.center_x = u.box.center_x();
  u.center_y = u.box.center_y();
  return u;
}

std::vector<PersonObjectPair> enumerate_pairs(std::span<const Detection> detections) {
  std::vector<PersonObjectPair> pairs;
  for (std::size_t h = 0; h < detections.size(); ++h) {
    if (detections[h].class_id != kPersonClass) continue;
    for (std::size_t o = 0; o < detections.size(); ++o) {
      if (o == h) continue;
      pairs.push_back({h, o, detections[h], detections[o]});
    }
  }
  return pairs;
}

SpatialPrior spatial_prior(const PersonObjectPair& pair, double width, double height) {
  return spatial_prior(pair.human.box, pair.object.box, width, height);
}

SpatialPrior spatial_prior(const Box& h, const Box& o, double width, double height) {
  require(width > 0 && height > 0, ErrorKind::kGeometry, "image size must be positive");
  validate_box_in_image(h, width, height);
  validate_box_in_image(o, width, height);

  using namespace prior;
  SpatialPrior p{};
  p[kHumanCenterX] = h.center_x() / width;
  p[kHumanCenterY] = h.center_y() / height;
  p[kObjectCenterX] = o.center_x() / width;
  p[kObjectCenterY] = o.center_y() / height;
  p[kHumanWidth] = h.width() / width;
  p[kHumanHeight] = h.height() / height;
  p[kObjectWidth] = o.width() / width;
  p[kObjectHeight] = o.height() / height;
  p[kHumanArea] = h.area() / (width * height);
  p[kObjectArea] = o.area() / (width * height);
  p[kHumanAspect] = h.width() / h.height();
  p[kObjectAspect] = o.width() / o.height();
  p[kIou] = iou(h, o);

  const double dx = p[kObjectCenterX] - p[kHumanCenterX];
  const double dy = p[kObjectCenterY] - p[kHumanCenterY];
  const double dist = std::hypot(dx, dy);
  p[kDistance] = dist;
  if (dist > 0) {
    p[kDirectionSin] = dx / dist;
    p[kDirectionCos] = dy / dist;
  } else {
    p[kDirectionSin] = 0.0;
    p[kDirectionCos] = 1.0;
  }
  p[kLogWidthRatio] = std::log(h.width() / o.width());
  p[kLogHeightRatio] = std::log(h.height() / o.height());
  p[kLogAreaRatio] = std::log(h.area() / o.area());
  return p;
}

std::vector<double> positional_encoding(std::span<const double> coords, std::size_t dims_per_coord) {
  require(dims_per_coord > 0 && dims_per_coord % 2 == 0, ErrorKind::kUsage,
          "positional_encoding: dims_per_coord must be a positive even number, got " + std::to_string(dims_per_coord));
  std::vector<double> out;
  out.reserve(coords.size() * dims_per_coord);
  const double d = static_cast<double>(dims_per_coord);
  for (double c : coords) {
    require(std::isfinite(c) && c >= 0.0 && c <= 1.0, ErrorKind::kRange,
            "positional_encoding: coordinate " + std::to_string(c) + " outside [0,1]");
    const double phase = 2.0 * std::numbers::pi * c;
    for (std::size_t i = 0; i < dims_per_coord / 2; ++i) {
      const double arg = phase / std::pow(kPositionalTemperature, 2.0 * static_cast<double>(i) / d);
      out.push_back(std::sin(arg));
      out.push_back(std::cos(arg));
    }
  }
  return out;
}

std::vector<std::array<double, 2>> token_grid_centers(std::size_t tokens) {
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(tokens))));
  require(tokens > 0 && side * side == tokens, ErrorKind::kDimension,
          "image token count " + std::to_string(tokens) + " is not a square grid");
  std::vector<std::array<double, 2>> centers;
  centers.reserve(tokens);
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c)
      centers.push_back({(static_cast<double>(c) + 0.5) / static_cast<double>(side),
                         (static_cast<double>(r) + 0.5) / static_cast<double>(side)});
  return centers;
}

}  // namespace clhoi

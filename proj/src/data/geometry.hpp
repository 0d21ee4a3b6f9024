#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace clhoi {

struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }

  bool operator==(const Box&) const = default;
};

// Throws a geometry error unless x1 < x2, y1 < y2, coordinates finite and >= 0.
void validate_box(const Box& b);
// As validate_box, plus containment in [0,width]x[0,height].
void validate_box_in_image(const Box& b, double width, double height);

double iou(const Box& a, const Box& b);

struct UnionBox {
  Box box;
  double center_x = 0;
  double center_y = 0;
};

UnionBox union_box(const Box& human, const Box& object);

struct Detection {
  Box box;
  double score = 0;
  int class_id = 0;
  std::vector<double> embedding;
};

inline constexpr int kPersonClass = 0;

struct PersonObjectPair {
  std::size_t human_index = 0;
  std::size_t object_index = 0;
  Detection human;
  Detection object;
};

// Every person paired with every other detection, persons included; no
// self-pairs; human-major, object-minor order.
std::vector<PersonObjectPair> enumerate_pairs(std::span<const Detection> detections);

// Layout of the pairwise geometric feature vector.
namespace prior {
inline constexpr std::size_t kHumanCenterX = 0, kHumanCenterY = 1, kObjectCenterX = 2, kObjectCenterY = 3;
inline constexpr std::size_t kHumanWidth = 4, kHumanHeight = 5, kObjectWidth = 6, kObjectHeight = 7;
inline constexpr std::size_t kHumanArea = 8, kObjectArea = 9;
inline constexpr std::size_t kHumanAspect = 10, kObjectAspect = 11;
inline constexpr std::size_t kIou = 12;
inline constexpr std::size_t kDistance = 13;
inline constexpr std::size_t kDirectionSin = 14, kDirectionCos = 15;
inline constexpr std::size_t kLogWidthRatio = 16, kLogHeightRatio = 17, kLogAreaRatio = 18;
inline constexpr std::size_t kLength = 19;
}  // namespace prior

using SpatialPrior = std::array<double, prior::kLength>;

// Resolution-invariant geometry of a pair: normalized centers, sizes and areas,
// aspect ratios, IoU, center distance in normalized coordinates, direction of
// the object center seen from the human center as (sin, cos) with sin along x
// ((0, 1) when the centers coincide), and log size ratios.
SpatialPrior spatial_prior(const PersonObjectPair& pair, double width, double height);
SpatialPrior spatial_prior(const Box& human, const Box& object, double width, double height);

inline constexpr double kPositionalTemperature = 10000.0;

// Sinusoidal bands per coordinate, interleaved as sin, cos for band i with
// frequency 2*pi / T^(2i/d). Coordinates must lie in [0, 1].
std::vector<double> positional_encoding(std::span<const double> coords, std::size_t dims_per_coord);

// Normalized (x, y) centers of an L-token square grid in row-major order.
std::vector<std::array<double, 2>> token_grid_centers(std::size_t tokens);

}  // namespace clhoi

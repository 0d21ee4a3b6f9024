#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "core/tensor.hpp"
#include "data/geometry.hpp"
#include "data/jsonl.hpp"

namespace clhoi {

struct GtTriplet {
  Box human_box;
  Box object_box;
  int verb = 0;
  int object_class = 0;

  bool operator==(const GtTriplet&) const = default;
};

struct ImageRecord {
  std::string image_id;
  double width = 0;
  double height = 0;
  std::vector<Detection> detections;
  Tensor f_img;  // L x D_img backbone tokens, row-major square grid
  std::vector<GtTriplet> gt;
  // Union-region embeddings, one row per pair in enumerate_pairs order.
  std::optional<Tensor> union_embeddings;
};

// embedding_dim of 0 skips the embedding length check.
void validate_record(const ImageRecord& record, std::size_t embedding_dim = 0);

Json box_to_json(const Box& b);
Box box_from_json(const Json& j);

Json record_to_json(const ImageRecord& record);
ImageRecord record_from_json(const Json& j);

std::vector<ImageRecord> read_images_jsonl(const std::filesystem::path& path);
void write_images_jsonl(const std::filesystem::path& path, const std::vector<ImageRecord>& records);

// gt.jsonl: {image_id, gt:[...]} per image.
struct ImageGroundTruth {
  std::string image_id;
  std::vector<GtTriplet> gt;
};

std::vector<ImageGroundTruth> read_gt_jsonl(const std::filesystem::path& path);
void write_gt_jsonl(const std::filesystem::path& path, const std::vector<ImageGroundTruth>& gts);

Json tensor_to_json(const Tensor& t);
Tensor tensor_from_json(const Json& j);

}  // namespace clhoi

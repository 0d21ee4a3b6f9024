#include "data/records.hpp"

#include "core/error.hpp"

namespace clhoi {

void validate_record(const ImageRecord& r, std::size_t embedding_dim) {
  require(r.width > 0 && r.height > 0, ErrorKind::kData, "image " + r.image_id + ": non-positive size");
  for (const Detection& d : r.detections) {
    validate_box_in_image(d.box, r.width, r.height);
    require(d.score >= 0.0 && d.score <= 1.0, ErrorKind::kData,
            "image " + r.image_id + ": detection score " + std::to_string(d.score) + " outside [0,1]");
    require(d.class_id >= 0, ErrorKind::kData, "image " + r.image_id + ": negative class id");
    if (embedding_dim != 0) {
      require(d.embedding.size() == embedding_dim, ErrorKind::kData,
              "image " + r.image_id + ": embedding length " + std::to_string(d.embedding.size()) + " != " +
                  std::to_string(embedding_dim));
    }
  }
  require(!r.f_img.empty() && r.f_img.rank() == 2, ErrorKind::kData, "image " + r.image_id + ": missing f_img");
  for (const GtTriplet& g : r.gt) {
    validate_box_in_image(g.human_box, r.width, r.height);
    validate_box_in_image(g.object_box, r.width, r.height);
  }
}

Json box_to_json(const Box& b) { return Json::array({b.x1, b.y1, b.x2, b.y2}); }

Box box_from_json(const Json& j) {
  require(j.is_array() && j.size() == 4, ErrorKind::kParse, "box must be [x1,y1,x2,y2]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

Json tensor_to_json(const Tensor& t) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < t.rows(); ++i) rows.push_back(t.row_values(i));
  return rows;
}

Tensor tensor_from_json(const Json& j) {
  require(j.is_array() && !j.empty(), ErrorKind::kParse, "matrix must be a non-empty array of rows");
  std::vector<std::vector<double>> rows;
  for (const Json& r : j) rows.push_back(r.get<std::vector<double>>());
  return Tensor::from_rows(rows);
}

namespace {

Json gt_to_json(const GtTriplet& g) {
  return {{"human_box", box_to_json(g.human_box)},
          {"object_box", box_to_json(g.object_box)},
          {"verb", g.verb},
          {"object_class", g.object_class}};
}

GtTriplet gt_from_json(const Json& j) {
  return {box_from_json(j.at("human_box")), box_from_json(j.at("object_box")), j.at("verb").get<int>(),
          j.at("object_class").get<int>()};
}

}  // namespace

Json record_to_json(const ImageRecord& r) {
  Json dets = Json::array();
  for (const Detection& d : r.detections) {
    dets.push_back({{"box", box_to_json(d.box)}, {"score", d.score}, {"class_id", d.class_id}, {"embedding", d.embedding}});
  }
  Json j = {{"image_id", r.image_id},
            {"width", r.width},
            {"height", r.height},
            {"detections", dets},
            {"f_img", tensor_to_json(r.f_img)}};
  if (!r.gt.empty()) {
    Json gt = Json::array();
    for (const GtTriplet& g : r.gt) gt.push_back(gt_to_json(g));
    j["gt"] = gt;
  }
  if (r.union_embeddings) j["f_u"] = tensor_to_json(*r.union_embeddings);
  return j;
}

ImageRecord record_from_json(const Json& j) {
  ImageRecord r;
  r.image_id = j.at("image_id").is_string() ? j.at("image_id").get<std::string>() : j.at("image_id").dump();
  r.width = j.at("width").get<double>();
  r.height = j.at("height").get<double>();
  for (const Json& d : j.at("detections")) {
    Detection det;
    det.box = box_from_json(d.at("box"));
    det.score = d.at("score").get<double>();
    det.class_id = d.at("class_id").get<int>();
    det.embedding = d.at("embedding").get<std::vector<double>>();
    r.detections.push_back(std::move(det));
  }
  r.f_img = tensor_from_json(j.at("f_img"));
  if (j.contains("gt"))
    for (const Json& g : j.at("gt")) r.gt.push_back(gt_from_json(g));
  if (j.contains("f_u") && !j.at("f_u").empty()) r.union_embeddings = tensor_from_json(j.at("f_u"));
  validate_record(r);
  return r;
}

std::vector<ImageRecord> read_images_jsonl(const std::filesystem::path& path) {
  std::vector<ImageRecord> out;
  for_each_jsonl(path, [&](const Json& j, std::size_t) { out.push_back(record_from_json(j)); });
  return out;
}

void write_images_jsonl(const std::filesystem::path& path, const std::vector<ImageRecord>& records) {
  std::vector<Json> lines;
  lines.reserve(records.size());
  for (const ImageRecord& r : records) lines.push_back(record_to_json(r));
  write_jsonl(path, lines);
}

std::vector<ImageGroundTruth> read_gt_jsonl(const std::filesystem::path& path) {
  std::vector<ImageGroundTruth> out;
  for_each_jsonl(path, [&](const Json& j, std::size_t) {
    ImageGroundTruth g;
    g.image_id = j.at("image_id").get<std::string>();
    for (const Json& t : j.at("gt")) g.gt.push_back(gt_from_json(t));
    out.push_back(std::move(g));
  });
  return out;
}

void write_gt_jsonl(const std::filesystem::path& path, const std::vector<ImageGroundTruth>& gts) {
  std::vector<Json> lines;
  for (const ImageGroundTruth& g : gts) {
    Json arr = Json::array();
    for (const GtTriplet& t : g.gt) arr.push_back(gt_to_json(t));
    lines.push_back({{"image_id", g.image_id}, {"gt", arr}});
  }
  write_jsonl(path, lines);
}

}  // namespace clhoi

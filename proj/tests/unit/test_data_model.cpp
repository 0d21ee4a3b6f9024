#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "core/error.hpp"
#include "data/geometry.hpp"
#include "data/records.hpp"
#include "doctest.h"

using namespace clhoi;

namespace {

Detection det(Box b, int cls, double score = 0.9) { return {b, score, cls, {}}; }

Box random_box(std::mt19937_64& rng, double w, double h) {
  std::uniform_real_distribution<double> ux(0, w), uy(0, h);
  double a = ux(rng), b = ux(rng), c = uy(rng), d = uy(rng);
  if (std::abs(a - b) < 1e-3) b = a + 1.0;
  if (std::abs(c - d) < 1e-3) d = c + 1.0;
  return {std::min(a, b), std::min(c, d), std::max(a, b), std::max(c, d)};
}

}  // namespace

TEST_CASE("iou examples") {
  CHECK(iou({0, 0, 2, 2}, {0, 0, 2, 2}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(iou({0, 0, 1, 1}, {2, 2, 3, 3}) == 0.0);
  CHECK(iou({0, 0, 2, 2}, {1, 1, 3, 3}) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("iou is symmetric and bounded") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Box a = random_box(rng, 100, 80), b = random_box(rng, 100, 80);
    const double v = iou(a, b);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(v == iou(b, a));
    CHECK(iou(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("invalid boxes are rejected") {
  CHECK_THROWS_AS(validate_box({2, 0, 1, 1}), Error);
  CHECK_THROWS_AS(validate_box({0, 0, 0, 1}), Error);
  CHECK_THROWS_AS(validate_box({-1, 0, 1, 1}), Error);
  CHECK_THROWS_AS(validate_box_in_image({0, 0, 11, 5}, 10, 10), Error);
  try {
    validate_box({0, 0, 0, 1});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kGeometry);
  }
}

TEST_CASE("union box") {
  const UnionBox u = union_box({0, 0, 1, 1}, {2, 2, 3, 3});
  CHECK(u.box == Box{0, 0, 3, 3});
  CHECK(u.center_x == 1.5);
  CHECK(u.center_y == 1.5);
  CHECK(union_box({0, 0, 10, 10}, {2, 2, 3, 3}).box == Box{0, 0, 10, 10});
  CHECK(union_box({1, 2, 3, 4}, {1, 2, 3, 4}).box == Box{1, 2, 3, 4});
}

TEST_CASE("spatial prior of coincident boxes") {
  const SpatialPrior p = spatial_prior(Box{2, 2, 6, 8}, Box{2, 2, 6, 8}, 20, 10);
  CHECK(p[prior::kIou] == doctest::Approx(1.0));
  CHECK(p[prior::kDistance] == 0.0);
  CHECK(p[prior::kLogWidthRatio] == 0.0);
  CHECK(p[prior::kLogHeightRatio] == 0.0);
  CHECK(p[prior::kLogAreaRatio] == 0.0);
  CHECK(p[prior::kDirectionSin] == 0.0);
  CHECK(p[prior::kDirectionCos] == 1.0);
}

TEST_CASE("spatial prior of side-by-side boxes") {
  const SpatialPrior p = spatial_prior(Box{0, 0, 10, 10}, Box{10, 0, 20, 10}, 20, 10);
  CHECK(p[prior::kHumanCenterX] == doctest::Approx(0.25));
  CHECK(p[prior::kHumanCenterY] == doctest::Approx(0.5));
  CHECK(p[prior::kObjectCenterX] == doctest::Approx(0.75));
  CHECK(p[prior::kObjectCenterY] == doctest::Approx(0.5));
  CHECK(p[prior::kIou] == 0.0);
  CHECK(p[prior::kDistance] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p.size() == prior::kLength);
}

TEST_CASE("mirrored pair negates direction sine only") {
  const SpatialPrior a = spatial_prior(Box{0, 0, 10, 10}, Box{10, 2, 18, 9}, 20, 10);
  const SpatialPrior b = spatial_prior(Box{10, 0, 20, 10}, Box{2, 2, 10, 9}, 20, 10);
  CHECK(b[prior::kDirectionSin] == doctest::Approx(-a[prior::kDirectionSin]).epsilon(1e-12));
  CHECK(b[prior::kDirectionCos] == doctest::Approx(a[prior::kDirectionCos]).epsilon(1e-12));
  for (std::size_t i : {prior::kIou, prior::kDistance, prior::kLogWidthRatio, prior::kLogHeightRatio,
                        prior::kLogAreaRatio, prior::kHumanArea, prior::kObjectArea, prior::kHumanAspect,
                        prior::kObjectAspect, prior::kHumanWidth, prior::kObjectHeight})
    CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-12));
}

TEST_CASE("spatial prior properties on random pairs") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const Box h = random_box(rng, 64, 48), o = random_box(rng, 64, 48);
    const SpatialPrior p = spatial_prior(h, o, 64, 48);
    for (double v : p) CHECK(std::isfinite(v));
    CHECK(p[prior::kIou] >= 0.0);
    CHECK(p[prior::kIou] <= 1.0);
    const double s = p[prior::kDirectionSin], c = p[prior::kDirectionCos];
    CHECK(std::abs(s * s + c * c - 1.0) <= 1e-9);
    const double k = 3.7;
    const SpatialPrior q = spatial_prior(Box{h.x1 * k, h.y1 * k, h.x2 * k, h.y2 * k},
                                         Box{o.x1 * k, o.y1 * k, o.x2 * k, o.y2 * k}, 64 * k, 48 * k);
    for (std::size_t j = 0; j < p.size(); ++j) CHECK(std::abs(p[j] - q[j]) <= 1e-9);
  }
}

TEST_CASE("spatial prior rejects degenerate boxes") {
  CHECK_THROWS_AS(spatial_prior(Box{1, 1, 1, 4}, Box{0, 0, 2, 2}, 10, 10), Error);
}

TEST_CASE("positional encoding") {
  const std::vector<double> zero{0.0};
  const auto z = positional_encoding(zero, 8);
  REQUIRE(z.size() == 8);
  for (std::size_t i = 0; i < 8; i += 2) {
    CHECK(z[i] == 0.0);
    CHECK(z[i + 1] == 1.0);
  }
  const std::vector<double> a{0.25}, b{0.75};
  const auto pa = positional_encoding(a, 8), pb = positional_encoding(b, 8);
  CHECK(pa[0] - pb[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(positional_encoding(a, 8) == pa);
  const std::vector<double> two{0.1, 0.9};
  CHECK(positional_encoding(two, 6).size() == 12);
  CHECK_THROWS_AS(positional_encoding(std::vector<double>{1.5}, 8), Error);
  CHECK_THROWS_AS(positional_encoding(a, 7), Error);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> c{u(rng), u(rng)};
    for (double v : positional_encoding(c, 16)) CHECK(std::abs(v) <= 1.0);
  }
}

TEST_CASE("pair enumeration") {
  const std::vector<Detection> two_people_one_object{det({0, 0, 5, 5}, kPersonClass), det({5, 0, 9, 5}, kPersonClass),
                                                      det({1, 1, 3, 3}, 2)};
  const auto pairs = enumerate_pairs(two_people_one_object);
  REQUIRE(pairs.size() == 4);
  CHECK(pairs[0].human_index == 0);
  CHECK(pairs[0].object_index == 1);
  CHECK(pairs[1].object_index == 2);
  CHECK(pairs[2].human_index == 1);
  CHECK(pairs[2].object_index == 0);
  CHECK(pairs[3].object_index == 2);
  for (const auto& p : pairs) CHECK(p.human.class_id == kPersonClass);
  CHECK(enumerate_pairs(std::vector<Detection>{det({0, 0, 1, 1}, 3)}).empty());
  CHECK(enumerate_pairs(std::vector<Detection>{det({0, 0, 1, 1}, kPersonClass)}).empty());
  CHECK(enumerate_pairs(std::vector<Detection>{}).empty());
}

TEST_CASE("token grid centers") {
  const auto c = token_grid_centers(4);
  REQUIRE(c.size() == 4);
  CHECK(c[0][0] == 0.25);
  CHECK(c[0][1] == 0.25);
  CHECK(c[1][0] == 0.75);
  CHECK(c[1][1] == 0.25);
  CHECK(c[2][1] == 0.75);
  CHECK_THROWS_AS(token_grid_centers(5), Error);
}

TEST_CASE("image record round-trip through JSONL") {
  ImageRecord r;
  r.image_id = "img_0";
  r.width = 20;
  r.height = 10;
  r.detections = {det({0, 0, 10, 10}, kPersonClass, 0.8), det({10, 0, 20, 10}, 1, 0.7)};
  r.detections[0].embedding = {0.1, -0.2};
  r.detections[1].embedding = {0.3, 0.4};
  r.f_img = Tensor::matrix(4, 2, {1, 2, 3, 4, 5, 6, 7, 8.125});
  r.gt = {{{0, 0, 10, 10}, {10, 0, 20, 10}, 1, 1}};
  r.union_embeddings = Tensor::matrix(1, 2, {0.5, 0.25});
  validate_record(r, 2);

  const auto dir = std::filesystem::temp_directory_path() / "clhoi_test_records";
  const auto path = dir / "images.jsonl";
  write_images_jsonl(path, {r});
  const auto back = read_images_jsonl(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].image_id == r.image_id);
  CHECK(back[0].f_img == r.f_img);
  CHECK(back[0].gt == r.gt);
  CHECK(back[0].detections[1].embedding == r.detections[1].embedding);
  CHECK(*back[0].union_embeddings == *r.union_embeddings);

  write_gt_jsonl(dir / "gt.jsonl", {{r.image_id, r.gt}});
  CHECK(read_gt_jsonl(dir / "gt.jsonl")[0].gt == r.gt);
  std::filesystem::remove_all(dir);
}

TEST_CASE("record validation") {
  ImageRecord r;
  r.image_id = "x";
  r.width = 10;
  r.height = 10;
  r.f_img = Tensor::matrix(1, 1, {0});
  r.detections = {det({0, 0, 12, 5}, kPersonClass)};
  CHECK_THROWS_AS(validate_record(r), Error);
  r.detections = {det({0, 0, 5, 5}, kPersonClass, 1.5)};
  CHECK_THROWS_AS(validate_record(r), Error);
  r.detections = {det({0, 0, 5, 5}, kPersonClass, 0.5)};
  r.detections[0].embedding = {1, 2, 3};
  CHECK_THROWS_AS(validate_record(r, 2), Error);
  CHECK_NOTHROW(validate_record(r, 3));
}

TEST_CASE("malformed JSONL reports the line") {
  const auto path = std::filesystem::temp_directory_path() / "clhoi_bad.jsonl";
  write_text(path, "{\"image_id\": \"a\"}\n{not json\n");
  try {
    read_images_jsonl(path);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kParse);
    CHECK(std::string(e.what()).find(":1") != std::string::npos);
  }
  std::filesystem::remove(path);
}

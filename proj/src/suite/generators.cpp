#include "suite/generators.hpp"

#include <cmath>

namespace clhoi::suite {

Tensor random_tensor(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> d(rows * cols);
  for (double& x : d) x = u(rng);
  return Tensor::matrix(rows, cols, std::move(d));
}

Tensor random_unit_rows(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> d(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double sq = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      d[r * cols + c] = n(rng);
      sq += d[r * cols + c] * d[r * cols + c];
    }
    for (std::size_t c = 0; c < cols; ++c) d[r * cols + c] /= std::sqrt(sq);
  }
  return Tensor::matrix(rows, cols, std::move(d));
}

Box random_box(std::mt19937_64& rng, double width, double height) {
  std::uniform_real_distribution<double> ux(0, width * 0.6), uy(0, height * 0.6), us(0.15, 0.4);
  const double x = ux(rng), y = uy(rng);
  return {x, y, x + us(rng) * width, y + us(rng) * height};
}

ModelConfig small_model() {
  ModelConfig c;
  c.dim = 16;
  c.image_dim = 8;
  c.query_dim = 16;
  c.num_queries = 4;
  c.heads = 2;
  c.former_layers = 1;
  c.icn_heads = 2;
  return c;
}

ImageRecord random_record(std::mt19937_64& rng, const ModelConfig& config, std::size_t persons, std::size_t objects,
                          const std::string& id) {
  ImageRecord r;
  r.image_id = id;
  r.width = 64;
  r.height = 48;
  std::uniform_real_distribution<double> score(0.5, 1.0);
  for (std::size_t i = 0; i < persons + objects; ++i) {
    Detection d;
    d.box = random_box(rng, r.width, r.height);
    d.score = score(rng);
    d.class_id = i < persons ? kPersonClass : static_cast<int>(1 + i % 3);
    d.embedding = random_tensor(rng, 1, config.dim).values();
    r.detections.push_back(std::move(d));
  }
  r.f_img = random_tensor(rng, 4, config.image_dim);
  const std::size_t k = enumerate_pairs(r.detections).size();
  if (k > 0) r.union_embeddings = random_unit_rows(rng, k, config.dim);
  return r;
}

}  // namespace clhoi::suite

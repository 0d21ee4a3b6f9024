#pragma once

#include <random>

#include "core/tensor.hpp"
#include "data/geometry.hpp"
#include "data/records.hpp"
#include "nn/model_config.hpp"

namespace clhoi::testing {

inline Tensor random_tensor(std::mt19937_64& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> d(r * c);
  for (double& x : d) x = u(rng);
  return Tensor::matrix(r, c, std::move(d));
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  return random_tensor(rng, 1, n).values();
}

inline ModelConfig small_config() {
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

inline Box random_box(std::mt19937_64& rng, double w, double h) {
  std::uniform_real_distribution<double> ux(0, w * 0.6), uy(0, h * 0.6), us(0.15, 0.4);
  const double x = ux(rng), y = uy(rng);
  return {x, y, x + us(rng) * w, y + us(rng) * h};
}

// One image with `persons` people and `objects` objects, random embeddings and
// a 4-token image grid.
inline ImageRecord random_record(std::mt19937_64& rng, const ModelConfig& c, std::size_t persons,
                                 std::size_t objects, const std::string& id = "img") {
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
    d.embedding = random_vector(rng, c.dim);
    r.detections.push_back(std::move(d));
  }
  r.f_img = random_tensor(rng, 4, c.image_dim);
  return r;
}

}  // namespace clhoi::testing

#include "nn/layers.hpp"

#include <cmath>

#include "core/error.hpp"

namespace clhoi::nn {

Binder::Binder(Tape& tape, const ParameterMap& params, bool trainable)
    : tape_(tape), params_(params), trainable_(trainable) {}

Var Binder::operator()(const std::string& name) {
  if (auto it = bound_.find(name); it != bound_.end()) return it->second;
  const auto p = params_.find(name);
  require(p != params_.end(), ErrorKind::kLoad, "missing parameter " + name);
  Var v = trainable_ ? tape_.parameter(name, p->second) : tape_.constant(p->second);
  bound_.emplace(name, v);
  return v;
}

Tensor uniform_fan_in(Rng& rng, std::size_t in, std::size_t out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> data(in * out);
  for (double& x : data) x = dist(rng);
  return Tensor::matrix(in, out, std::move(data));
}

Tensor normal(Rng& rng, std::size_t rows, std::size_t cols, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> data(rows * cols);
  for (double& x : data) x = dist(rng);
  return Tensor::matrix(rows, cols, std::move(data));
}

void init_linear(ParameterMap& params, const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
  params[name + ".weight"] = uniform_fan_in(rng, in, out);
  params[name + ".bias"] = Tensor::zeros(1, out);
}

void init_layer_norm(ParameterMap& params, const std::string& name, std::size_t width) {
  params[name + ".gain"] = Tensor::filled(1, width, 1.0);
  params[name + ".bias"] = Tensor::zeros(1, width);
}

void init_attention(ParameterMap& params, const std::string& name, std::size_t query_in, std::size_t key_in,
                    std::size_t value_in, std::size_t width, Rng& rng) {
  params[name + ".wq"] = uniform_fan_in(rng, query_in, width);
  params[name + ".wk"] = uniform_fan_in(rng, key_in, width);
  params[name + ".wv"] = uniform_fan_in(rng, value_in, width);
  params[name + ".wo"] = uniform_fan_in(rng, width, width);
}

void init_ffn(ParameterMap& params, const std::string& name, std::size_t width, std::size_t hidden, Rng& rng) {
  init_linear(params, name + ".fc1", width, hidden, rng);
  init_linear(params, name + ".fc2", hidden, width, rng);
}

Var linear(Binder& b, const std::string& name, Var x) {
  return ops::add_row(ops::matmul(x, b(name + ".weight")), b(name + ".bias"));
}

Var layer_norm(Binder& b, const std::string& name, Var x) {
  return ops::add_row(ops::mul_row(ops::layer_norm_rows(x), b(name + ".gain")), b(name + ".bias"));
}

Var attention(Binder& b, const std::string& name, Var queries, Var keys, Var values, std::size_t heads,
              AttentionCapture* capture) {
  Var q = ops::matmul(queries, b(name + ".wq"));
  Var k = ops::matmul(keys, b(name + ".wk"));
  Var v = ops::matmul(values, b(name + ".wv"));
  const std::size_t width = q.cols();
  require(width % heads == 0, ErrorKind::kConfig, name + ": heads must divide width");
  require(k.rows() == v.rows(), ErrorKind::kDimension, name + ": keys and values need equal row counts");
  const std::size_t head_dim = width / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  std::vector<Var> outs;
  std::vector<double> avg;
  for (std::size_t h = 0; h < heads; ++h) {
    Var qh = ops::slice_cols(q, h * head_dim, head_dim);
    Var kh = ops::slice_cols(k, h * head_dim, head_dim);
    Var vh = ops::slice_cols(v, h * head_dim, head_dim);
    Var p = ops::softmax_rows(ops::scale(ops::matmul(qh, ops::transpose(kh)), scale));
    outs.push_back(ops::matmul(p, vh));
    if (capture) {
      const auto w = p.value().data();
      if (avg.empty()) avg.assign(w.size(), 0.0);
      for (std::size_t i = 0; i < w.size(); ++i) avg[i] += w[i] / static_cast<double>(heads);
    }
  }
  if (capture) capture->weights = Tensor::matrix(q.rows(), k.rows(), std::move(avg));
  Var merged = heads == 1 ? outs.front() : ops::concat_cols(outs);
  return ops::matmul(merged, b(name + ".wo"));
}

Var ffn(Binder& b, const std::string& name, Var x) {
  return linear(b, name + ".fc2", ops::gelu(linear(b, name + ".fc1", x)));
}

}  // namespace clhoi::nn

#include "core/tape.hpp"

#include <algorithm>

#include "core/error.hpp"

namespace clhoi {

namespace {

struct Corruption {
  std::string op;
  double factor = 1.0;
  bool active = false;
};

thread_local Corruption g_corruption;

}  // namespace

const Tensor& Var::value() const {
  require(tape_ != nullptr, ErrorKind::kUsage, "use of unbound Var");
  return tape_->value(id_);
}

bool Var::requires_grad() const { return tape_ != nullptr && tape_->requires_grad(id_); }

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  node.op = "constant";
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::parameter(const std::string& name, const Tensor& value) {
  if (auto it = parameters_.find(name); it != parameters_.end()) return Var(this, it->second);
  Node node;
  node.value = value;
  node.requires_grad = true;
  node.op = "parameter";
  node.name = name;
  nodes_.push_back(std::move(node));
  const auto id = static_cast<std::uint32_t>(nodes_.size() - 1);
  parameters_.emplace(name, id);
  return Var(this, id);
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn, const char* op) {
  return record(std::move(value), std::vector<Var>(inputs), std::move(fn), op);
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, BackwardFn fn, const char* op) {
  Node node;
  node.value = std::move(value);
  node.op = op;
  for (const Var& v : inputs) {
    require(&v.tape() == this, ErrorKind::kUsage, std::string(op) + ": input belongs to another tape");
    node.inputs.push_back(v.id());
    node.requires_grad = node.requires_grad || nodes_[v.id()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(fn);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

std::vector<std::string> Tape::parameter_names() const {
  std::vector<std::string> names;
  names.reserve(parameters_.size());
  for (const auto& [name, id] : parameters_) names.push_back(name);
  std::sort(names.begin(), names.end());
  return names;
}

Gradients Tape::backward(Var scalar_output) const {
  require(scalar_output.valid() && &scalar_output.tape() == this, ErrorKind::kUsage,
          "backward: output is not on this tape");
  const std::uint32_t root = scalar_output.id();
  require(nodes_[root].value.size() == 1, ErrorKind::kUsage,
          "backward needs a scalar output, got " + shape_str(nodes_[root].value.shape()));

  std::vector<std::vector<double>> grads(root + 1);
  if (nodes_[root].requires_grad) grads[root] = {1.0};

  std::vector<const Tensor*> inputs;
  std::vector<std::vector<double>*> grad_in;
  for (std::int64_t i = root; i >= 0; --i) {
    const Node& node = nodes_[static_cast<std::size_t>(i)];
    auto& g = grads[static_cast<std::size_t>(i)];
    if (g.empty() || !node.backward) continue;

    inputs.clear();
    grad_in.clear();
    for (std::uint32_t in : node.inputs) {
      inputs.push_back(&nodes_[in].value);
      if (nodes_[in].requires_grad) {
        if (grads[in].empty()) grads[in].assign(nodes_[in].value.size(), 0.0);
        grad_in.push_back(&grads[in]);
      } else {
        grad_in.push_back(nullptr);
      }
    }
    if (g_corruption.active && g_corruption.op == node.op) {
      for (double& x : g) x *= g_corruption.factor;
    }
    const Tensor grad_out(node.value.shape(), g);
    node.backward(grad_out, node.value, inputs, grad_in);
  }

  Gradients out;
  for (const auto& [name, id] : parameters_) {
    const Shape& shape = nodes_[id].value.shape();
    if (id <= root && !grads[id].empty()) {
      out.emplace(name, Tensor(shape, grads[id]));
    } else {
      out.emplace(name, Tensor(shape, std::vector<double>(nodes_[id].value.size(), 0.0)));
    }
  }
  return out;
}

Gradients backward(Var scalar_output) {
  require(scalar_output.valid(), ErrorKind::kUsage, "backward on unbound Var");
  return scalar_output.tape().backward(scalar_output);
}

namespace testing {

ScopedBackwardCorruption::ScopedBackwardCorruption(std::string op, double factor) {
  g_corruption = {std::move(op), factor, true};
}

ScopedBackwardCorruption::~ScopedBackwardCorruption() { g_corruption = {}; }

}  // namespace testing

}  // namespace clhoi

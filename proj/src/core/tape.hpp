#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/tensor.hpp"

namespace clhoi {

class Tape;

// Handle to a value recorded on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  Tape& tape() const { return *tape_; }
  std::uint32_t id() const noexcept { return id_; }
  bool requires_grad() const;
  bool valid() const noexcept { return tape_ != nullptr; }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

// Adds d(loss)/d(input) contributions into grad_in[i]; grad_in[i] is null for
// inputs that do not require a gradient.
using BackwardFn = std::function<void(const Tensor& grad_out, const Tensor& out,
                                      std::span<const Tensor* const> inputs,
                                      std::span<std::vector<double>* const> grad_in)>;

using Gradients = std::map<std::string, Tensor>;

// Record-on-execute computation tape. Nodes are appended in execution order,
// so the node list is a topological order of the graph.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Named leaf that requires grad; binding the same name twice returns the same node.
  Var parameter(const std::string& name, const Tensor& value);

  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn, const char* op);
  Var record(Tensor value, const std::vector<Var>& inputs, BackwardFn fn, const char* op);

  std::size_t size() const noexcept { return nodes_.size(); }
  const Tensor& value(std::uint32_t id) const { return nodes_.at(id).value; }
  bool requires_grad(std::uint32_t id) const { return nodes_.at(id).requires_grad; }
  const char* op_name(std::uint32_t id) const { return nodes_.at(id).op; }
  std::vector<std::string> parameter_names() const;

  // Reverse pass from a 1-element output. Every bound parameter gets an entry,
  // zero-filled when the output does not depend on it. Does not mutate the tape.
  Gradients backward(Var scalar_output) const;

 private:
  struct Node {
    Tensor value;
    std::vector<std::uint32_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    const char* op = "";
    std::string name;
  };

  std::deque<Node> nodes_;
  std::unordered_map<std::string, std::uint32_t> parameters_;
};

Gradients backward(Var scalar_output);

namespace testing {

// Scales the upstream gradient fed into every backward of the named op while
// alive. Negative-control fixture for gradient checks.
class ScopedBackwardCorruption {
 public:
  ScopedBackwardCorruption(std::string op, double factor);
  ~ScopedBackwardCorruption();
  ScopedBackwardCorruption(const ScopedBackwardCorruption&) = delete;
  ScopedBackwardCorruption& operator=(const ScopedBackwardCorruption&) = delete;
};

}  // namespace testing

}  // namespace clhoi

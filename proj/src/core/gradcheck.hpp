#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "core/tape.hpp"
#include "core/tensor.hpp"

namespace clhoi {

// Builds a scalar loss on the tape. Parameters must be bound through
// tape.parameter(name, params.at(name)) so they are perturbed by the checker.
using LossFn = std::function<Var(Tape&, const ParameterMap&)>;

struct GradCheckOptions {
  double eps = 1e-5;
  // 0 checks every coordinate; otherwise a seeded sample per tensor.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::map<std::string, double> per_parameter;
  std::size_t coordinates_checked = 0;
};

// Relative error with an absolute fallback when both magnitudes are below 1e-8.
double relative_error(double analytic, double numeric);

// Compares tape gradients to central differences. Zero parameters yields an
// empty result. Throws a determinism error if two identical evaluations differ.
GradCheckResult finite_difference_check(const LossFn& loss_fn, const ParameterMap& params,
                                        const GradCheckOptions& options = {});

}  // namespace clhoi

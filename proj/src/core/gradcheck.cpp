#include "core/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "core/error.hpp"

namespace clhoi {

double relative_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  const double diff = std::abs(analytic - numeric);
  return scale < 1e-8 ? diff : diff / scale;
}

namespace {

double evaluate(const LossFn& fn, const ParameterMap& params) {
  Tape tape;
  return fn(tape, params).value().item();
}

Tensor with_coordinate(const Tensor& t, std::size_t i, double value) {
  std::vector<double> data = t.values();
  data[i] = value;
  return Tensor(t.shape(), std::move(data));
}

}  // namespace

GradCheckResult finite_difference_check(const LossFn& loss_fn, const ParameterMap& params,
                                        const GradCheckOptions& options) {
  require(options.eps > 0.0, ErrorKind::kUsage, "finite_difference_check: eps must be positive");
  GradCheckResult result;
  if (params.empty()) return result;

  Gradients analytic;
  double base = 0.0;
  {
    Tape tape;
    Var loss = loss_fn(tape, params);
    base = loss.value().item();
    analytic = tape.backward(loss);
  }
  const double again = evaluate(loss_fn, params);
  if (again != base) {
    fail(ErrorKind::kDeterminism, "loss function returned " + std::to_string(base) + " then " +
                                      std::to_string(again) + " for identical inputs");
  }

  std::mt19937_64 rng(options.seed);
  ParameterMap probe = params;
  for (const auto& [name, value] : params) {
    const auto it = analytic.find(name);
    require(it != analytic.end(), ErrorKind::kUsage, "loss function did not bind parameter " + name);
    const Tensor& grad = it->second;

    std::vector<std::size_t> coords(value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords_per_param > 0 && coords.size() > options.max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_param);
      std::sort(coords.begin(), coords.end());
    }

    double worst = 0.0;
    for (std::size_t i : coords) {
      const double x = value.data()[i];
      probe[name] = with_coordinate(value, i, x + options.eps);
      const double up = evaluate(loss_fn, probe);
      probe[name] = with_coordinate(value, i, x - options.eps);
      const double down = evaluate(loss_fn, probe);
      const double numeric = (up - down) / (2.0 * options.eps);
      worst = std::max(worst, relative_error(grad.data()[i], numeric));
    }
    probe[name] = value;
    result.per_parameter[name] = worst;
    result.max_relative_error = std::max(result.max_relative_error, worst);
    result.coordinates_checked += coords.size();
  }
  return result;
}

}  // namespace clhoi

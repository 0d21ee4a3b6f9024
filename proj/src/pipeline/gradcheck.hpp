#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/gradcheck.hpp"
#include "data/jsonl.hpp"
#include "losses/losses.hpp"
#include "nn/model.hpp"

namespace clhoi {

inline constexpr double kGradcheckTolerance = 1e-4;
inline const std::vector<std::string> kGradcheckLosses = {"L_c", "L_I2T", "L_T2I", "L_SR", "L_total"};

struct GradcheckSettings {
  std::size_t images = 2;
  std::size_t objects_per_image = 3;  // one person, so K pairs = objects
  std::size_t dim = 16;
  std::size_t coords_per_param = 0;  // 0 checks every coordinate
  double eps = 1e-5;
  double tolerance = kGradcheckTolerance;
};

// A random batch with text targets, and the model it runs through.
struct GradcheckInstance {
  ModelWeights weights;
  std::vector<ImageRecord> records;
  std::vector<Tensor> captions, positives, negatives, pseudo_labels;
};

GradcheckInstance make_gradcheck_instance(const GradcheckSettings& settings, std::uint64_t seed);

// Builds the named loss ("L_c", "L_I2T", "L_T2I", "L_SR", "L_total") on `tape`
// with every model parameter bound.
Var gradcheck_loss(const std::string& loss, const GradcheckInstance& instance, Tape& tape,
                   const ParameterMap& params);

struct GradcheckGroup {
  std::string name;  // one parameter tensor
  std::map<std::string, double> per_loss;
  double max_error = 0;
};

struct GradcheckReport {
  std::vector<GradcheckGroup> groups;
  std::map<std::string, double> per_loss;
  double max_error = 0;
  double tolerance = kGradcheckTolerance;
  std::size_t coordinates_checked = 0;
  bool passed() const { return max_error <= tolerance; }
};

GradcheckReport run_gradcheck(const GradcheckSettings& settings, std::uint64_t seed);

std::string gradcheck_text(const GradcheckReport& report);
Json gradcheck_json(const GradcheckReport& report);

}  // namespace clhoi

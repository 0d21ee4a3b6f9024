#pragma once

#include <cstddef>
#include <vector>

#include "core/ops.hpp"

namespace clhoi::losses {

// Softmax-weighted set similarity between row sets f1 (M x D) and f2 (N x D):
// rows are l2-normalized, sim = f1 f2^T, and
//   s = (1/M) sum_m sum_n softmax_n(sim[m,:])[n] * sim[m,n].
Var set_similarity(Var f1, Var f2);
double set_similarity(const Tensor& f1, const Tensor& f2);

// L_c over B (context, caption) pairs aligned by index.
Var context_loss(const std::vector<Var>& context, const std::vector<Var>& captions);

struct I2TItem {
  Var interactions;  // K x D
  Var positives;     // P x D
  Var negatives;     // Q x D
};

// Image-level feature = row mean of interactions, re-normalized.
Var image_level(Var interactions);

Var i2t_loss(const std::vector<I2TItem>& items);

// L_T2I: positives of image i contrasted against interactions of every image.
Var t2i_loss(const std::vector<Var>& positives, const std::vector<Var>& interactions);

inline constexpr double kPseudoLabelThreshold = 0.5;
inline constexpr double kProbabilityClamp = 1e-6;

// Y_s[k,p] = [cos(f_u[k], f_pos[p]) >= 0.5] * [cos(f_u[k], f_obj[p]) >= 0.5].
Tensor pseudo_labels(const Tensor& union_features, const Tensor& positives, const Tensor& objects);
// Same rule on precomputed K x P similarity matrices.
Tensor pseudo_labels_from_similarity(const Tensor& verb_similarity, const Tensor& object_similarity);
Tensor threshold(const Tensor& similarity, double at = kPseudoLabelThreshold);
Tensor cosine_matrix(const Tensor& a, const Tensor& b);

// Mean binary cross-entropy over K x P between Y_s and p = clamp((cos(I, f_pos) + 1) / 2).
Var soft_relation_loss(Var interactions, Var positives, const Tensor& labels);

struct LossReport {
  double context = 0;
  double i2t = 0;
  double t2i = 0;
  double soft_relation = 0;
  double total = 0;
};

struct LossParts {
  Var context;
  Var i2t;
  Var t2i;
  Var soft_relation;
};

struct TotalLoss {
  Var total;
  LossReport report;
};

// Unweighted sum of the parts. Unbound parts count as zero.
TotalLoss total_loss(const LossParts& parts);
LossReport total_loss(double context, double i2t, double t2i, double soft_relation);

// One image of a training batch.
struct BatchItem {
  Var interactions;  // K x D; unbound when K == 0
  Var context;       // N_q x D
  Var caption;       // 1 x D
  Var positives;     // P x D
  Var negatives;     // Q x D
  Tensor pseudo_labels;  // K x P
};

struct BatchLoss {
  TotalLoss loss;
  std::size_t excluded = 0;  // images without pairs, left out of the interaction losses
};

BatchLoss batch_loss(const std::vector<BatchItem>& batch);

}  // namespace clhoi::losses

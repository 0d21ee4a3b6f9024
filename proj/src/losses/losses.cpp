#include "losses/losses.hpp"

#include <cmath>

#include "core/error.hpp"

namespace clhoi::losses {

namespace {

// -(1/B) sum_i log softmax(S[i,:])[i] for a B x B score matrix.
Var diagonal_contrastive(Var scores) {
  const std::size_t b = scores.rows();
  Var logp = ops::log(ops::softmax_rows(scores));
  Var diag = ops::sum(ops::mul(logp, scores.tape().constant(Tensor::identity(b))));
  return ops::scale(diag, -1.0 / static_cast<double>(b));
}

Var score_matrix(const std::vector<Var>& left, const std::vector<Var>& right) {
  std::vector<Var> rows;
  rows.reserve(left.size());
  for (const Var& l : left) {
    std::vector<Var> cells;
    cells.reserve(right.size());
    for (const Var& r : right) cells.push_back(set_similarity(l, r));
    rows.push_back(cells.size() == 1 ? cells.front() : ops::concat_cols(cells));
  }
  return rows.size() == 1 ? rows.front() : ops::concat_rows(rows);
}

}  // namespace

Var set_similarity(Var f1, Var f2) {
  require(f1.valid() && f2.valid() && f1.rows() >= 1 && f2.rows() >= 1, ErrorKind::kUsage,
          "set_similarity needs non-empty row sets");
  require(f1.cols() == f2.cols(), ErrorKind::kDimension,
          "set_similarity: " + shape_str(f1.value().shape()) + " vs " + shape_str(f2.value().shape()));
  Var sim = ops::cosine(f1, f2);
  Var weighted = ops::mul(ops::softmax_rows(sim), sim);
  return ops::scale(ops::sum(weighted), 1.0 / static_cast<double>(f1.rows()));
}

double set_similarity(const Tensor& f1, const Tensor& f2) {
  require(f1.rank() == 2 && f2.rank() == 2 && f1.rows() >= 1 && f2.rows() >= 1, ErrorKind::kUsage,
          "set_similarity needs non-empty row sets");
  Tape tape;
  return set_similarity(tape.constant(f1), tape.constant(f2)).value().item();
}

Var context_loss(const std::vector<Var>& context, const std::vector<Var>& captions) {
  require(!context.empty() && context.size() == captions.size(), ErrorKind::kUsage,
          "context_loss needs B >= 1 aligned context/caption pairs");
  return diagonal_contrastive(score_matrix(context, captions));
}

Var image_level(Var interactions) { return ops::l2_normalize_rows(ops::mean_rows(interactions)); }

Var i2t_loss(const std::vector<I2TItem>& items) {
  require(!items.empty(), ErrorKind::kUsage, "i2t_loss needs at least one item");
  std::vector<Var> per_item;
  for (const I2TItem& it : items) {
    Var img = image_level(it.interactions);
    Var pair = ops::concat_cols({set_similarity(img, it.positives), set_similarity(img, it.negatives)});
    per_item.push_back(ops::slice_cols(ops::log(ops::softmax_rows(pair)), 0, 1));
  }
  Var stacked = per_item.size() == 1 ? per_item.front() : ops::concat_rows(per_item);
  return ops::scale(ops::sum(stacked), -1.0 / static_cast<double>(items.size()));
}

Var t2i_loss(const std::vector<Var>& positives, const std::vector<Var>& interactions) {
  require(!positives.empty() && positives.size() == interactions.size(), ErrorKind::kUsage,
          "t2i_loss needs B >= 1 aligned positive/interaction sets");
  return diagonal_contrastive(score_matrix(positives, interactions));
}

Tensor cosine_matrix(const Tensor& a, const Tensor& b) {
  Tape tape;
  return ops::cosine(tape.constant(a), tape.constant(b)).value();
}

Tensor threshold(const Tensor& similarity, double at) {
  std::vector<double> out(similarity.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = similarity.data()[i] >= at ? 1.0 : 0.0;
  return Tensor(similarity.shape(), std::move(out));
}

Tensor pseudo_labels(const Tensor& union_features, const Tensor& positives, const Tensor& objects) {
  require(positives.shape() == objects.shape(), ErrorKind::kDimension,
          "pseudo_labels: positives " + shape_str(positives.shape()) + " vs objects " + shape_str(objects.shape()));
  return pseudo_labels_from_similarity(cosine_matrix(union_features, positives),
                                       cosine_matrix(union_features, objects));
}

Tensor pseudo_labels_from_similarity(const Tensor& verb_similarity, const Tensor& object_similarity) {
  require(verb_similarity.shape() == object_similarity.shape(), ErrorKind::kDimension,
          "pseudo_labels: verb similarity " + shape_str(verb_similarity.shape()) + " vs object similarity " +
              shape_str(object_similarity.shape()));
  const Tensor verb_hits = threshold(verb_similarity);
  const Tensor object_hits = threshold(object_similarity);
  std::vector<double> y(verb_hits.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = verb_hits.data()[i] * object_hits.data()[i];
  return Tensor(verb_hits.shape(), std::move(y));
}

Var soft_relation_loss(Var interactions, Var positives, const Tensor& labels) {
  Var yhat = ops::cosine(interactions, positives);
  require(labels.shape() == yhat.value().shape(), ErrorKind::kDimension,
          "soft_relation_loss: labels " + shape_str(labels.shape()) + " vs predictions " +
              shape_str(yhat.value().shape()));
  Tape& tape = interactions.tape();
  Var p = ops::clamp(ops::scale(ops::add_scalar(yhat, 1.0), 0.5), kProbabilityClamp, 1.0 - kProbabilityClamp);
  Var y = tape.constant(labels);
  std::vector<double> inv(labels.size());
  for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 - labels.data()[i];
  Var not_y = tape.constant(Tensor(labels.shape(), std::move(inv)));
  Var log_p = ops::log(p);
  Var log_q = ops::log(ops::add_scalar(ops::scale(p, -1.0), 1.0));
  Var ll = ops::add(ops::mul(y, log_p), ops::mul(not_y, log_q));
  return ops::scale(ops::sum(ll), -1.0 / static_cast<double>(labels.size()));
}

LossReport total_loss(double context, double i2t, double t2i, double soft_relation) {
  return {context, i2t, t2i, soft_relation, context + i2t + t2i + soft_relation};
}

TotalLoss total_loss(const LossParts& parts) {
  const auto value = [](const Var& v) { return v.valid() ? v.value().item() : 0.0; };
  TotalLoss out;
  out.report = total_loss(value(parts.context), value(parts.i2t), value(parts.t2i), value(parts.soft_relation));
  for (const Var& v : {parts.context, parts.i2t, parts.t2i, parts.soft_relation}) {
    if (!v.valid()) continue;
    out.total = out.total.valid() ? ops::add(out.total, v) : v;
  }
  return out;
}

BatchLoss batch_loss(const std::vector<BatchItem>& batch) {
  require(!batch.empty(), ErrorKind::kUsage, "batch_loss: empty batch");
  BatchLoss out;
  LossParts parts;

  std::vector<Var> contexts, captions;
  for (const BatchItem& it : batch) {
    contexts.push_back(it.context);
    captions.push_back(it.caption);
  }
  parts.context = context_loss(contexts, captions);

  std::vector<I2TItem> i2t;
  std::vector<Var> pos, inter;
  std::vector<Var> sr;
  for (const BatchItem& it : batch) {
    if (!it.interactions.valid()) {
      ++out.excluded;
      continue;
    }
    i2t.push_back({it.interactions, it.positives, it.negatives});
    pos.push_back(it.positives);
    inter.push_back(it.interactions);
    sr.push_back(soft_relation_loss(it.interactions, it.positives, it.pseudo_labels));
  }
  if (!i2t.empty()) {
    parts.i2t = i2t_loss(i2t);
    parts.t2i = t2i_loss(pos, inter);
    Var s = sr.size() == 1 ? sr.front() : ops::sum(ops::concat_rows(sr));
    parts.soft_relation = ops::scale(s, 1.0 / static_cast<double>(sr.size()));
  }
  out.loss = total_loss(parts);
  return out;
}

}  // namespace clhoi::losses

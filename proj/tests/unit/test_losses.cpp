#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "core/error.hpp"
#include "core/gradcheck.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "losses/losses.hpp"

using namespace clhoi;
using namespace clhoi::losses;
using clhoi::testing::random_tensor;

namespace {

double value(const Var& v) { return v.value().item(); }

Tensor unit(std::initializer_list<double> v) { return Tensor::row(std::vector<double>(v)); }

Tensor permute_rows(const Tensor& t, std::mt19937_64& rng) {
  std::vector<std::size_t> perm(t.rows());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<double>> rows;
  for (std::size_t i : perm) rows.push_back(t.row_values(i));
  return Tensor::from_rows(rows);
}

}  // namespace

TEST_CASE("set similarity closed forms") {
  CHECK(set_similarity(unit({1, 0}), unit({1, 0})) == doctest::Approx(1.0).epsilon(1e-15));
  const double s = set_similarity(unit({1, 0}), Tensor::matrix(2, 2, {1, 0, 0, 1}));
  CHECK(std::abs(s - std::numbers::e / (1 + std::numbers::e)) <= 1e-12);
  CHECK_THROWS_AS(set_similarity(Tensor::zeros(0, 2), unit({1, 0})), Error);
}

TEST_CASE("set similarity is bounded and permutation invariant") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const Tensor a = random_tensor(rng, 1 + trial % 4, 8), b = random_tensor(rng, 1 + trial % 5, 8);
    const double s = set_similarity(a, b);
    const Tensor sims = cosine_matrix(a, b);
    const auto [lo, hi] = std::minmax_element(sims.values().begin(), sims.values().end());
    CHECK(s >= *lo - 1e-12);
    CHECK(s <= *hi + 1e-12);
    CHECK(std::abs(set_similarity(permute_rows(a, rng), permute_rows(b, rng)) - s) <= 1e-12);
  }
}

TEST_CASE("context loss closed forms") {
  Tape tape;
  const Var e1 = tape.constant(unit({1, 0})), e2 = tape.constant(unit({0, 1}));
  CHECK(value(context_loss({e1}, {e2})) == 0.0);
  const double l = value(context_loss({e1, e2}, {e1, e2}));
  CHECK(std::abs(l - std::log(1 + std::exp(-1.0))) <= 1e-9);
}

TEST_CASE("i2t loss closed forms") {
  Tape tape;
  const Var i = tape.constant(unit({1, 0}));
  const Var same = tape.constant(unit({0, 1}));
  CHECK(std::abs(value(i2t_loss({{i, same, same}})) - std::log(2.0)) <= 1e-12);
  const Var far = tape.constant(unit({-1, 0}));
  CHECK(value(i2t_loss({{i, i, far}})) < std::log(2.0));
  const Var k1 = tape.constant(Tensor::matrix(1, 2, {3, 4}));
  const Tensor img = image_level(k1).value();
  CHECK(std::abs(img(0, 0) - 0.6) <= 1e-15);
  CHECK(std::abs(img(0, 1) - 0.8) <= 1e-15);
}

TEST_CASE("t2i loss closed forms and monotonicity") {
  Tape tape;
  const Var p = tape.constant(unit({1, 0}));
  CHECK(value(t2i_loss({p}, {p})) == 0.0);
  const Var a = tape.constant(unit({1, 1})), b = tape.constant(unit({1, -1}));
  const Var q = tape.constant(unit({0, 1}));
  // s(p, a) == s(p, b) so the first item contributes ln 2.
  const Var scores = ops::concat_cols({set_similarity(p, a), set_similarity(p, b)});
  CHECK(std::abs(scores.value()(0, 0) - scores.value()(0, 1)) <= 1e-15);
  const double item1 = -std::log(std::exp(scores.value()(0, 0)) / (std::exp(scores.value()(0, 0)) * 2));
  CHECK(std::abs(item1 - std::log(2.0)) <= 1e-12);
  double previous = 1e9;
  for (double angle = 1.5; angle >= 0.0; angle -= 0.1) {
    const Var own = tape.constant(unit({std::cos(angle), std::sin(angle)}));
    const double l = value(t2i_loss({p, q}, {own, tape.constant(unit({-1, 0.2}))}));
    CHECK(l < previous);
    previous = l;
  }
}

TEST_CASE("losses are non-negative on random batches") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    Tape tape;
    const std::size_t b = 1 + trial % 4;
    std::vector<Var> ctx, cap, pos, inter;
    std::vector<I2TItem> items;
    for (std::size_t i = 0; i < b; ++i) {
      ctx.push_back(tape.constant(random_tensor(rng, 4, 8)));
      cap.push_back(tape.constant(random_tensor(rng, 1, 8)));
      pos.push_back(tape.constant(random_tensor(rng, 2, 8)));
      inter.push_back(tape.constant(random_tensor(rng, 3, 8)));
      items.push_back({inter.back(), pos.back(), tape.constant(random_tensor(rng, 2, 8))});
    }
    CHECK(value(context_loss(ctx, cap)) >= 0.0);
    CHECK(value(i2t_loss(items)) >= 0.0);
    CHECK(value(t2i_loss(pos, inter)) >= 0.0);
    const Tensor y = threshold(random_tensor(rng, 3, 2, 0, 1));
    CHECK(value(soft_relation_loss(inter.front(), pos.front(), y)) >= 0.0);
    if (b == 1) {
      CHECK(value(context_loss(ctx, cap)) == 0.0);
      CHECK(value(t2i_loss(pos, inter)) == 0.0);
    }
  }
}

TEST_CASE("pseudo labels") {
  CHECK(threshold(Tensor::scalar(0.5)).item() == 1.0);
  CHECK(threshold(Tensor::scalar(0.4999999)).item() == 0.0);
  // cos = 0.6 against the verb, 0.4 against the object.
  const Tensor u = unit({1, 0});
  const Tensor v = unit({0.6, 0.8}), o = unit({0.4, std::sqrt(1 - 0.16)});
  CHECK(pseudo_labels(u, v, o).item() == 0.0);
  CHECK(pseudo_labels(u, v, v).item() == 1.0);
  CHECK(pseudo_labels(u, u, u).item() == 1.0);
  const Tensor half = unit({0.5, std::sqrt(0.75)});
  CHECK(cosine_matrix(u, half).item() == doctest::Approx(0.5));
  CHECK_THROWS_AS(pseudo_labels(Tensor::matrix(1, 2, {0, 0}), u, u), Error);
  CHECK_THROWS_AS(pseudo_labels(u, v, Tensor::matrix(2, 2, {1, 0, 0, 1})), Error);
  std::mt19937_64 rng(2);
  const Tensor y = pseudo_labels(random_tensor(rng, 5, 8), random_tensor(rng, 3, 8), random_tensor(rng, 3, 8));
  CHECK(y.shape() == Shape{5, 3});
  for (double x : y.values()) CHECK((x == 0.0 || x == 1.0));
}

TEST_CASE("soft relation loss closed forms") {
  Tape tape;
  const Var i = tape.constant(Tensor::matrix(2, 3, {1, 0, 0, 0, 1, 0}));
  const Var p = tape.constant(Tensor::matrix(2, 3, {0, 0, 1, 0, 0, -2}));
  for (const Tensor& y : {Tensor::zeros(2, 2), Tensor::filled(2, 2, 1.0), Tensor::matrix(2, 2, {1, 0, 0, 1})})
    CHECK(std::abs(value(soft_relation_loss(i, p, y)) - std::log(2.0)) <= 1e-12);
  const double aligned = value(soft_relation_loss(i, i, Tensor::identity(2)));
  CHECK(aligned == doctest::Approx(0.5 * (-std::log(1 - 1e-6) - std::log(0.5))).epsilon(1e-12));
  const Var same = tape.constant(Tensor::matrix(1, 2, {0.3, 0.4}));
  const double limit = value(soft_relation_loss(same, same, Tensor::filled(1, 1, 1.0)));
  CHECK(std::abs(limit + std::log(1 - 1e-6)) <= 1e-12);
  CHECK(aligned > limit);
  CHECK_THROWS_AS(soft_relation_loss(i, p, Tensor::zeros(3, 2)), Error);
  CHECK_THROWS_AS(soft_relation_loss(i, tape.constant(Tensor::zeros(1, 2)), Tensor::zeros(2, 1)), Error);
}

TEST_CASE("total loss") {
  const LossReport zero = total_loss(0, 0, 0, 0);
  CHECK(zero.total == 0.0);
  const LossReport r = total_loss(0.3, 0.7, 0.2, 0.5);
  CHECK(std::abs(r.total - 1.7) <= 1e-12);
  CHECK(std::abs(r.total - (r.context + r.i2t + r.t2i + r.soft_relation)) <= 1e-12);
}

TEST_CASE("batch loss excludes images without pairs") {
  std::mt19937_64 rng(6);
  Tape tape;
  const auto item = [&](bool with_pairs) {
    BatchItem it;
    if (with_pairs) it.interactions = tape.constant(random_tensor(rng, 3, 8));
    it.context = tape.constant(random_tensor(rng, 4, 8));
    it.caption = tape.constant(random_tensor(rng, 1, 8));
    it.positives = tape.constant(random_tensor(rng, 2, 8));
    it.negatives = tape.constant(random_tensor(rng, 2, 8));
    it.pseudo_labels = Tensor::matrix(3, 2, {1, 0, 0, 1, 0, 0});
    return it;
  };
  const BatchLoss mixed = batch_loss({item(true), item(false), item(true)});
  CHECK(mixed.excluded == 1);
  const LossReport& r = mixed.loss.report;
  CHECK(std::abs(r.total - (r.context + r.i2t + r.t2i + r.soft_relation)) <= 1e-12);
  CHECK(std::abs(mixed.loss.total.value().item() - r.total) <= 1e-12);
  const BatchLoss empty = batch_loss({item(false)});
  CHECK(empty.excluded == 1);
  CHECK(empty.loss.report.i2t == 0.0);
  CHECK(empty.loss.report.context == 0.0);
}

TEST_CASE("loss gradients match finite differences") {
  std::mt19937_64 rng(8);
  ParameterMap params{{"i1", random_tensor(rng, 3, 6)}, {"i2", random_tensor(rng, 2, 6)},
                      {"c1", random_tensor(rng, 4, 6)}, {"c2", random_tensor(rng, 4, 6)}};
  const Tensor cap1 = random_tensor(rng, 1, 6), cap2 = random_tensor(rng, 1, 6);
  const Tensor p1 = random_tensor(rng, 2, 6), p2 = random_tensor(rng, 1, 6);
  const Tensor n1 = random_tensor(rng, 2, 6), n2 = random_tensor(rng, 2, 6);
  const Tensor y1 = Tensor::matrix(3, 2, {1, 0, 0, 1, 1, 1}), y2 = Tensor::matrix(2, 1, {0, 1});
  const auto batch = [&](Tape& t, const ParameterMap& p) {
    return std::vector<BatchItem>{
        {t.parameter("i1", p.at("i1")), t.parameter("c1", p.at("c1")), t.constant(cap1), t.constant(p1),
         t.constant(n1), y1},
        {t.parameter("i2", p.at("i2")), t.parameter("c2", p.at("c2")), t.constant(cap2), t.constant(p2),
         t.constant(n2), y2}};
  };
  const auto check = [&](const LossFn& fn) {
    CHECK(finite_difference_check(fn, params).max_relative_error <= 1e-6);
  };
  check([&](Tape& t, const ParameterMap& p) { return batch_loss(batch(t, p)).loss.total; });
  check([&](Tape& t, const ParameterMap& p) {
    const auto b = batch(t, p);
    return context_loss({b[0].context, b[1].context}, {b[0].caption, b[1].caption});
  });
  check([&](Tape& t, const ParameterMap& p) {
    const auto b = batch(t, p);
    return t2i_loss({b[0].positives, b[1].positives}, {b[0].interactions, b[1].interactions});
  });
  check([&](Tape& t, const ParameterMap& p) {
    const auto b = batch(t, p);
    return i2t_loss({{b[0].interactions, b[0].positives, b[0].negatives}, {b[1].interactions, b[1].positives, b[1].negatives}});
  });
  check([&](Tape& t, const ParameterMap& p) {
    const auto b = batch(t, p);
    return soft_relation_loss(b[0].interactions, b[0].positives, y1);
  });
}

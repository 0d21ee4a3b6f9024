#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "core/gradcheck.hpp"
#include "eval/ap.hpp"
#include "eval/scoring.hpp"
#include "icn/icn.hpp"
#include "losses/losses.hpp"
#include "nn/model.hpp"
#include "pipeline/corpus.hpp"
#include "suite/generators.hpp"
#include "suite/oracles.hpp"
#include "suite/suite.hpp"
#include "teacher/vocabulary.hpp"

namespace clhoi::suite {

namespace {

using Rng = std::mt19937_64;

Outcome compare(double tested, double oracle, const std::string& what) {
  Outcome o;
  o.error = std::abs(tested - oracle);
  std::ostringstream os;
  os.precision(17);
  os << what << ": " << tested << " vs " << oracle;
  o.detail = os.str();
  return o;
}

Outcome fail_with(const std::string& detail) { return {false, 0.0, detail}; }

Var project(Var y, Rng& rng) {
  Var w = y.tape().constant(random_tensor(rng, y.rows(), y.cols()));
  return ops::sum(ops::mul(y, w));
}

struct Primitive {
  const char* name;
  std::size_t ar, ac, br, bc;  // br == 0 for unary ops
  double lo, hi;
  std::function<Var(Var, Var)> op;
};

const std::vector<Primitive>& primitives() {
  static const std::vector<Primitive> list = {
      {"matmul", 3, 4, 4, 2, -1, 1, [](Var a, Var b) { return ops::matmul(a, b); }},
      {"add", 3, 4, 3, 4, -1, 1, [](Var a, Var b) { return ops::add(a, b); }},
      {"sub", 3, 4, 3, 4, -1, 1, [](Var a, Var b) { return ops::sub(a, b); }},
      {"mul", 3, 4, 3, 4, -1, 1, [](Var a, Var b) { return ops::mul(a, b); }},
      {"add_row", 3, 4, 1, 4, -1, 1, [](Var a, Var b) { return ops::add_row(a, b); }},
      {"mul_row", 3, 4, 1, 4, -1, 1, [](Var a, Var b) { return ops::mul_row(a, b); }},
      {"concat_rows", 3, 4, 2, 4, -1, 1, [](Var a, Var b) { return ops::concat_rows({a, b}); }},
      {"concat_cols", 3, 4, 3, 2, -1, 1, [](Var a, Var b) { return ops::concat_cols({a, b}); }},
      {"cosine", 3, 4, 2, 4, -1, 1, [](Var a, Var b) { return ops::cosine(a, b); }},
      {"softmax_rows", 3, 4, 0, 0, -2, 2, [](Var a, Var) { return ops::softmax_rows(a); }},
      {"sigmoid", 3, 4, 0, 0, -3, 3, [](Var a, Var) { return ops::sigmoid(a); }},
      {"exp", 3, 4, 0, 0, -1, 1, [](Var a, Var) { return ops::exp(a); }},
      {"log", 3, 4, 0, 0, 0.5, 2, [](Var a, Var) { return ops::log(a); }},
      {"pow", 3, 4, 0, 0, 0.5, 2, [](Var a, Var) { return ops::pow(a, 1.7); }},
      {"gelu", 3, 4, 0, 0, -2, 2, [](Var a, Var) { return ops::gelu(a); }},
      {"l2_normalize_rows", 3, 4, 0, 0, 0.1, 1, [](Var a, Var) { return ops::l2_normalize_rows(a); }},
      {"layer_norm_rows", 3, 4, 0, 0, -2, 2, [](Var a, Var) { return ops::layer_norm_rows(a); }},
      {"clamp", 3, 4, 0, 0, -0.45, 0.45, [](Var a, Var) { return ops::clamp(a, -0.5, 0.5); }},
      {"transpose", 3, 4, 0, 0, -1, 1, [](Var a, Var) { return ops::transpose(a); }},
      {"mean_rows", 3, 4, 0, 0, -1, 1, [](Var a, Var) { return ops::mean_rows(a); }},
      {"gather_rows", 3, 4, 0, 0, -1, 1, [](Var a, Var) { return ops::gather_rows(a, {2, 0, 2}); }},
      {"mean", 3, 4, 0, 0, -1, 1, [](Var a, Var) { return ops::mean(a); }},
  };
  return list;
}

Outcome gradcheck_primitives(std::uint64_t seed) {
  Outcome worst;
  for (const Primitive& p : primitives()) {
    Rng rng(seed * 131 + std::hash<std::string>{}(p.name) % 1000);
    ParameterMap params{{"a", random_tensor(rng, p.ar, p.ac, p.lo, p.hi)}};
    if (p.br > 0) params["b"] = random_tensor(rng, p.br, p.bc);
    const std::uint64_t wseed = rng();
    const auto loss = [&](Tape& t, const ParameterMap& m) {
      Var a = t.parameter("a", m.at("a"));
      Var b = m.count("b") ? t.parameter("b", m.at("b")) : Var();
      Rng wr(wseed);
      return project(p.op(a, b), wr);
    };
    const double err = finite_difference_check(loss, params, {}).max_relative_error;
    if (err >= worst.error) worst = {true, err, p.name};
  }
  return worst;
}

// Raw features as parameters, straight into every loss.
Outcome gradcheck_losses(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t b = 2, k = 3, d = 6;
  ParameterMap params;
  std::vector<Tensor> labels;
  for (std::size_t i = 0; i < b; ++i) {
    const std::string s = std::to_string(i);
    params["I" + s] = random_tensor(rng, k, d);
    params["ctx" + s] = random_tensor(rng, 2, d);
    params["pos" + s] = random_tensor(rng, 2, d);
    params["neg" + s] = random_tensor(rng, 2, d);
    params["cap" + s] = random_tensor(rng, 1, d);
    std::vector<double> y(k * 2);
    for (double& v : y) v = static_cast<double>(rng() % 2);
    labels.push_back(Tensor::matrix(k, 2, std::move(y)));
  }
  const auto loss = [&](Tape& t, const ParameterMap& m) {
    std::vector<losses::BatchItem> items;
    for (std::size_t i = 0; i < b; ++i) {
      const std::string s = std::to_string(i);
      items.push_back({t.parameter("I" + s, m.at("I" + s)), t.parameter("ctx" + s, m.at("ctx" + s)),
                       t.parameter("cap" + s, m.at("cap" + s)), t.parameter("pos" + s, m.at("pos" + s)),
                       t.parameter("neg" + s, m.at("neg" + s)), labels[i]});
    }
    return losses::batch_loss(items).loss.total;
  };
  return {true, finite_difference_check(loss, params, {}).max_relative_error, "batch loss"};
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

Tensor permute_rows(const Tensor& t, const std::vector<std::size_t>& perm) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i : perm) rows.push_back(t.row_values(i));
  return Tensor::from_rows(rows);
}

Outcome similarity_permutation(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> n(1, 6), d(2, 8);
  const std::size_t m = n(rng), k = n(rng), dim = d(rng);
  const Tensor f1 = random_tensor(rng, m, dim), f2 = random_tensor(rng, k, dim);
  const double base = losses::set_similarity(f1, f2);
  const double moved =
      losses::set_similarity(permute_rows(f1, shuffled_indices(m, rng)), permute_rows(f2, shuffled_indices(k, rng)));
  return compare(moved, base, "permuted vs original");
}

Outcome similarity_bounds(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> n(1, 6), d(2, 8);
  const std::size_t dim = d(rng);
  const Tensor f1 = random_tensor(rng, n(rng), dim), f2 = random_tensor(rng, n(rng), dim);
  const double s = losses::set_similarity(f1, f2);
  if (s < -1.0 - 1e-12 || s > 1.0 + 1e-12) return fail_with("similarity " + std::to_string(s) + " outside [-1, 1]");
  const Tensor a = random_tensor(rng, 1, dim), b = random_tensor(rng, 1, dim);
  return compare(losses::set_similarity(a, b), losses::cosine_matrix(a, b)(0, 0), "single-row set vs cosine");
}

std::vector<losses::BatchItem> random_batch(Tape& tape, Rng& rng, std::size_t b) {
  std::vector<losses::BatchItem> items;
  std::uniform_int_distribution<std::size_t> n(1, 4);
  const std::size_t d = 5;
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t k = n(rng), p = n(rng);
    std::vector<double> y(k * p);
    for (double& v : y) v = static_cast<double>(rng() % 2);
    items.push_back({tape.constant(random_tensor(rng, k, d)), tape.constant(random_tensor(rng, n(rng), d)),
                     tape.constant(random_tensor(rng, 1, d)), tape.constant(random_tensor(rng, p, d)),
                     tape.constant(random_tensor(rng, n(rng), d)), Tensor::matrix(k, p, std::move(y))});
  }
  return items;
}

Outcome losses_nonnegative(std::uint64_t seed) {
  Rng rng(seed);
  Tape tape;
  const auto items = random_batch(tape, rng, 1 + seed % 4);
  const losses::LossReport r = losses::batch_loss(items).loss.report;
  const double lowest = std::min({r.context, r.i2t, r.t2i, r.soft_relation, r.total});
  return {lowest >= 0.0, std::max(0.0, -lowest), "lowest loss term " + std::to_string(lowest)};
}

Outcome losses_single_item(std::uint64_t seed) {
  Rng rng(seed);
  Tape tape;
  const auto items = random_batch(tape, rng, 1);
  const losses::LossReport r = losses::batch_loss(items).loss.report;
  return {true, std::max(std::abs(r.context), std::abs(r.t2i)),
          "L_c " + std::to_string(r.context) + ", L_T2I " + std::to_string(r.t2i)};
}

struct IcnInstance {
  ModelConfig config;
  ParameterMap params;
  icn::PairInputs pairs;
  Tensor visual, context;
};

IcnInstance icn_instance(std::uint64_t seed) {
  Rng rng(seed);
  IcnInstance in;
  in.config = small_model();
  icn::init_icn_params(in.config, seed, in.params);
  std::uniform_int_distribution<std::size_t> persons(1, 2), objects(1, 3);
  const ImageRecord r = random_record(rng, in.config, persons(rng), objects(rng));
  in.pairs = icn::prepare_pairs(r.detections, r.width, r.height);
  in.visual = random_tensor(rng, 4, in.config.dim);
  in.context = random_tensor(rng, in.config.num_queries, in.config.dim);
  return in;
}

Tensor run_icn(const IcnInstance& in, const icn::PairInputs& pairs, Chain chain) {
  Tape tape;
  nn::Binder b(tape, in.params, false);
  ModelConfig c = in.config;
  c.chain = chain;
  return icn::icn_forward(b, c, pairs, tape.constant(in.visual), tape.constant(in.context)).features.value();
}

Outcome icn_equivariance(std::uint64_t seed) {
  const IcnInstance in = icn_instance(seed);
  Rng rng(seed + 1);
  const auto perm = shuffled_indices(in.pairs.pairs.size(), rng);
  icn::PairInputs moved = in.pairs;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    moved.pairs[i] = in.pairs.pairs[perm[i]];
    moved.priors[i] = in.pairs.priors[perm[i]];
    moved.union_centers[i] = in.pairs.union_centers[perm[i]];
  }
  Outcome o{true, 0.0, ""};
  for (Chain chain : {Chain::kSpatial, Chain::kVisual, Chain::kContext}) {
    const Tensor expected = permute_rows(run_icn(in, in.pairs, chain), perm);
    const Tensor got = run_icn(in, moved, chain);
    for (std::size_t i = 0; i < got.size(); ++i) {
      const double e = std::abs(got.data()[i] - expected.data()[i]);
      if (e > o.error) o = {true, e, std::string("chain ") + to_string(chain)};
    }
  }
  return o;
}

Outcome icn_stage_order(std::uint64_t seed) {
  const IcnInstance in = icn_instance(seed);
  Tape tape;
  nn::Binder b(tape, in.params, false);
  const auto s = icn::spatial_cognition(b, in.config, in.pairs);
  const auto expect_state_error = [](const std::function<void()>& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind() == ErrorKind::kState;
    }
    return false;
  };
  if (!expect_state_error([&] { icn::context_cognition(b, in.config, s, tape.constant(in.context)); }))
    return fail_with("context stage accepted spatial features");
  const auto v = icn::visual_cognition(b, in.config, s, tape.constant(in.visual), in.pairs.union_centers);
  if (!expect_state_error(
          [&] { icn::visual_cognition(b, in.config, v, tape.constant(in.visual), in.pairs.union_centers); }))
    return fail_with("visual stage accepted visual features");
  const auto c = icn::context_cognition(b, in.config, v, tape.constant(in.context));
  if (!expect_state_error([&] { icn::context_cognition(b, in.config, c, tape.constant(in.context)); }))
    return fail_with("context stage accepted context features");
  return {};
}

Outcome pseudo_label_threshold(std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<double> grid{0.49, 0.5, 0.51};
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> sims;
  for (double a : grid)
    for (double b : grid) sims.insert(sims.end(), {a, b});
  for (int i = 0; i < 6; ++i) sims.push_back(u(rng));
  const Tensor sim = Tensor::matrix(sims.size() / 2, 2, sims);
  const Tensor y = losses::threshold(sim);
  for (std::size_t i = 0; i < sims.size(); ++i) {
    const double expected = sims[i] >= 0.5 ? 1.0 : 0.0;
    if (y.data()[i] != expected) return fail_with("threshold(" + std::to_string(sims[i]) + ") wrong");
  }
  const std::size_t k = 3, p = 2, d = 4;
  const Tensor fu = random_unit_rows(rng, k, d), fpos = random_unit_rows(rng, p, d), fobj = random_unit_rows(rng, p, d);
  const Tensor labels = losses::pseudo_labels(fu, fpos, fobj);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < p; ++b) {
      double cp = 0, co = 0;
      for (std::size_t c = 0; c < d; ++c) {
        cp += fu(a, c) * fpos(b, c);
        co += fu(a, c) * fobj(b, c);
      }
      const double expected = (cp >= 0.5 && co >= 0.5) ? 1.0 : 0.0;
      if (labels(a, b) != expected) return fail_with("pseudo label mismatch at " + std::to_string(a));
    }
  }
  return {};
}

Outcome ap_oracle(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<int> n_gt(1, 5), n_pred(0, 10), img(0, 2), verb(0, 1), cls(1, 2);
  std::uniform_real_distribution<double> score(0, 1), shift(-3, 3);
  const Box h{0, 0, 10, 10}, o{10, 0, 20, 10};
  std::vector<ImageGroundTruth> gt{{"i0", {}}, {"i1", {}}, {"i2", {}}};
  for (int g = n_gt(rng); g > 0; --g) gt[img(rng)].gt.push_back({h, o, verb(rng), cls(rng)});
  std::vector<eval::ScoredTriplet> preds;
  for (int p = n_pred(rng); p > 0; --p) {
    const double dx = shift(rng);
    preds.push_back({"i" + std::to_string(img(rng)), {h.x1 + dx, h.y1, h.x2 + dx, h.y2}, o, verb(rng), cls(rng),
                     score(rng)});
  }
  Outcome worst{true, 0.0, ""};
  for (eval::ApMode mode : {eval::ApMode::kFull, eval::ApMode::kRole}) {
    const double tested = eval::evaluate_ap(preds, gt, mode).mean_ap;
    const Outcome c = compare(tested, threshold_enumeration_map(preds, gt, mode), to_string(mode));
    if (c.error >= worst.error) worst = c;
    std::vector<eval::ScoredTriplet> shuffled = preds;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const Outcome s = compare(eval::evaluate_ap(shuffled, gt, mode).mean_ap, tested, "shuffled input");
    if (s.error > worst.error) worst = s;
  }
  return worst;
}

std::vector<std::size_t> ranking(const std::vector<double>& keys) {
  std::vector<std::size_t> idx(keys.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return keys[a] > keys[b]; });
  return idx;
}

Outcome lambda_one_ranking(std::uint64_t seed) {
  Rng rng(seed);
  const ModelWeights w = init_model(small_model(), seed);
  std::uniform_int_distribution<std::size_t> persons(1, 2), objects(1, 3);
  const ImageRecord r = random_record(rng, w.config, persons(rng), objects(rng));
  const Tensor bank = random_unit_rows(rng, 4, w.config.dim);
  eval::ScoringOptions opts;
  opts.lambda = 1.0;
  const auto triplets = eval::infer_image(r, w, bank, opts).triplets;
  const auto pairs = enumerate_pairs(r.detections);
  std::vector<double> scores, detection;
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const PersonObjectPair& p = pairs[i / bank.rows()];
    scores.push_back(triplets[i].score);
    detection.push_back(p.human.score * p.object.score);
  }
  if (triplets.size() != pairs.size() * bank.rows()) return fail_with("unexpected triplet count");
  const auto a = ranking(scores), b = ranking(detection);
  std::size_t moved = 0;
  for (std::size_t i = 0; i < a.size(); ++i) moved += a[i] != b[i] ? 1 : 0;
  return {moved == 0, static_cast<double>(moved), std::to_string(moved) + " rank positions differ"};
}

Outcome teacher_round_trip(std::uint64_t seed) {
  const teacher::CorpusConfig c;
  const teacher::World world = teacher::make_world(c, seed);
  const text::TextEncoder encoder(c.dim);
  Rng rng(seed);
  const teacher::SceneSpec s = teacher::generate_scene(c, world, encoder, rng, "img").spec;
  std::set<teacher::Triplet> truth;
  for (const teacher::Interaction& it : s.interactions)
    truth.insert({teacher::all_verbs()[static_cast<std::size_t>(it.verb)].name,
                  teacher::object_name(s.objects[it.object].second)});
  const auto parsed = teacher::parse_triplets(teacher::teacher_caption(s));
  if (std::set<teacher::Triplet>(parsed.begin(), parsed.end()) != truth)
    return fail_with("caption '" + teacher::teacher_caption(s) + "' does not parse back");
  return {};
}

Outcome determinism_corpus(std::uint64_t seed) {
  Config c;
  c.corpus.train_scenes = 6;
  c.corpus.test_scenes = 3;
  const CorpusData a = generate_corpus(c, seed, 1), b = generate_corpus(c, seed, 3);
  const auto dump = [](const SplitData& s) {
    std::string out;
    for (const ImageRecord& r : s.images) out += record_to_json(r).dump();
    for (const auto& sup : s.supervision) out += teacher::supervision_to_json(sup).dump();
    return out;
  };
  if (dump(a.train) != dump(b.train) || dump(a.test) != dump(b.test))
    return fail_with("corpus differs between 1 and 3 threads");
  return {};
}

Outcome determinism_forward(std::uint64_t seed) {
  Rng rng(seed);
  const ModelWeights w = init_model(small_model(), seed);
  const ImageRecord r = random_record(rng, w.config, 1, 2);
  const auto run = [&] {
    Tape tape;
    nn::Binder b(tape, w.params, true);
    const ForwardResult f = forward(b, w.config, r);
    Var loss = ops::add(ops::sum(f.interactions.features), ops::sum(f.translated.context));
    return std::make_pair(loss.value().item(), tape.backward(loss));
  };
  const auto a = run(), b = run();
  if (a.first != b.first || a.second != b.second) return fail_with("forward/backward replay differs");
  const text::TextEncoder e1(16), e2(16);
  if (e1.embed("ride horse") != e2.embed("ride horse")) return fail_with("text embedding differs");
  return {};
}

}  // namespace

const std::vector<Property>& registered_properties() {
  static const std::vector<Property> all = {
      {"gradcheck.primitives", 1e-4, gradcheck_primitives},
      {"gradcheck.losses", 1e-4, gradcheck_losses},
      {"similarity.permutation", 1e-12, similarity_permutation},
      {"similarity.bounds", 1e-12, similarity_bounds},
      {"losses.nonnegative", 0.0, losses_nonnegative},
      {"losses.single_item", 1e-12, losses_single_item},
      {"icn.equivariance", 1e-9, icn_equivariance},
      {"icn.stage_order", 0.0, icn_stage_order},
      {"pseudo_labels.threshold", 0.0, pseudo_label_threshold},
      {"ap.oracle", 1e-12, ap_oracle},
      {"scoring.lambda_one_ranking", 0.0, lambda_one_ranking},
      {"teacher.round_trip", 0.0, teacher_round_trip},
      {"determinism.corpus", 0.0, determinism_corpus},
      {"determinism.forward", 0.0, determinism_forward},
  };
  return all;
}

}  // namespace clhoi::suite

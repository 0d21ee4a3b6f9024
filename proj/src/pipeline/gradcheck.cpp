#include "pipeline/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "core/error.hpp"

namespace clhoi {

namespace {

Tensor unit_rows(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double sq = 0;
    for (std::size_t c = 0; c < cols; ++c) sq += (v[r * cols + c] = n(rng)) * v[r * cols + c];
    for (std::size_t c = 0; c < cols; ++c) v[r * cols + c] /= std::sqrt(sq);
  }
  return Tensor({rows, cols}, std::move(v));
}

Tensor gaussian(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(rows * cols);
  for (double& x : v) x = n(rng);
  return Tensor({rows, cols}, std::move(v));
}

Box random_box(std::mt19937_64& rng, double w, double h) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x1 = u(rng) * w * 0.6, y1 = u(rng) * h * 0.6;
  return {x1, y1, x1 + w * (0.1 + 0.3 * u(rng)), y1 + h * (0.1 + 0.3 * u(rng))};
}

ModelConfig gradcheck_model(std::size_t dim) {
  ModelConfig c;
  c.dim = dim;
  c.image_dim = dim / 2;
  c.query_dim = dim;
  c.num_queries = 4;
  c.heads = 2;
  c.icn_heads = 2;
  return c;
}

}  // namespace

GradcheckInstance make_gradcheck_instance(const GradcheckSettings& s, std::uint64_t seed) {
  require(s.images >= 1 && s.objects_per_image >= 1 && s.dim >= 4, ErrorKind::kConfig,
          "gradcheck needs at least one image, one object and dim >= 4");
  std::mt19937_64 rng(seed);
  GradcheckInstance inst;
  inst.weights = init_model(gradcheck_model(s.dim), rng());
  const ModelConfig& c = inst.weights.config;
  std::uniform_real_distribution<double> score(0.5, 1.0);
  std::bernoulli_distribution coin(0.5);
  const double w = 64, h = 48;
  for (std::size_t b = 0; b < s.images; ++b) {
    ImageRecord r;
    r.image_id = "gradcheck_" + std::to_string(b);
    r.width = w;
    r.height = h;
    r.detections.push_back({random_box(rng, w, h), score(rng), kPersonClass, gaussian(rng, 1, c.dim).values()});
    for (std::size_t o = 0; o < s.objects_per_image; ++o)
      r.detections.push_back({random_box(rng, w, h), score(rng), static_cast<int>(1 + o % 3),
                              gaussian(rng, 1, c.dim).values()});
    r.f_img = gaussian(rng, 4, c.image_dim);
    validate_record(r);
    const std::size_t k = s.objects_per_image, p = 2, q = 2;
    inst.captions.push_back(unit_rows(rng, 1, c.dim));
    inst.positives.push_back(unit_rows(rng, p, c.dim));
    inst.negatives.push_back(unit_rows(rng, q, c.dim));
    std::vector<double> labels(k * p);
    for (double& y : labels) y = coin(rng) ? 1.0 : 0.0;
    inst.pseudo_labels.push_back(Tensor({k, p}, std::move(labels)));
    inst.records.push_back(std::move(r));
  }
  return inst;
}

Var gradcheck_loss(const std::string& loss, const GradcheckInstance& inst, Tape& tape, const ParameterMap& params) {
  nn::Binder binder(tape, params, true);
  std::vector<losses::BatchItem> items;
  for (std::size_t b = 0; b < inst.records.size(); ++b) {
    ForwardResult fwd = forward(binder, inst.weights.config, inst.records[b]);
    losses::BatchItem item;
    item.interactions = fwd.interactions.features;
    item.context = fwd.translated.context;
    item.caption = tape.constant(inst.captions[b]);
    item.positives = tape.constant(inst.positives[b]);
    item.negatives = tape.constant(inst.negatives[b]);
    item.pseudo_labels = inst.pseudo_labels[b];
    items.push_back(std::move(item));
  }
  if (loss == "L_total") return losses::batch_loss(items).loss.total;
  std::vector<Var> ctx, caps, pos, inter;
  std::vector<losses::I2TItem> i2t;
  Var sr;
  for (const auto& it : items) {
    ctx.push_back(it.context);
    caps.push_back(it.caption);
    pos.push_back(it.positives);
    inter.push_back(it.interactions);
    i2t.push_back({it.interactions, it.positives, it.negatives});
    Var term = losses::soft_relation_loss(it.interactions, it.positives, it.pseudo_labels);
    sr = sr.valid() ? ops::add(sr, term) : term;
  }
  if (loss == "L_c") return losses::context_loss(ctx, caps);
  if (loss == "L_I2T") return losses::i2t_loss(i2t);
  if (loss == "L_T2I") return losses::t2i_loss(pos, inter);
  if (loss == "L_SR") return ops::scale(sr, 1.0 / static_cast<double>(items.size()));
  fail(ErrorKind::kUsage, "unknown loss " + loss);
}

GradcheckReport run_gradcheck(const GradcheckSettings& settings, std::uint64_t seed) {
  const GradcheckInstance inst = make_gradcheck_instance(settings, seed);
  GradcheckReport report;
  report.tolerance = settings.tolerance;
  std::map<std::string, GradcheckGroup> groups;
  for (const auto& [name, value] : inst.weights.params) groups[name].name = name;
  for (const std::string& loss : kGradcheckLosses) {
    GradCheckOptions opts;
    opts.eps = settings.eps;
    opts.max_coords_per_param = settings.coords_per_param;
    opts.seed = seed;
    const GradCheckResult r = finite_difference_check(
        [&](Tape& tape, const ParameterMap& params) { return gradcheck_loss(loss, inst, tape, params); },
        inst.weights.params, opts);
    report.per_loss[loss] = r.max_relative_error;
    report.max_error = std::max(report.max_error, r.max_relative_error);
    report.coordinates_checked += r.coordinates_checked;
    for (const auto& [name, err] : r.per_parameter) {
      GradcheckGroup& g = groups.at(name);
      g.per_loss[loss] = err;
      g.max_error = std::max(g.max_error, err);
    }
  }
  for (auto& [name, g] : groups) report.groups.push_back(std::move(g));
  return report;
}

std::string gradcheck_text(const GradcheckReport& report) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3);
  os << std::left << std::setw(28) << "group";
  for (const std::string& l : kGradcheckLosses) os << std::setw(12) << l;
  os << "status\n";
  for (const GradcheckGroup& g : report.groups) {
    os << std::setw(28) << g.name;
    for (const std::string& l : kGradcheckLosses) os << std::setw(12) << g.per_loss.at(l);
    os << (g.max_error <= report.tolerance ? "ok" : "FAIL") << '\n';
  }
  os << "max relative error " << report.max_error << " (tolerance " << report.tolerance << ", "
     << report.coordinates_checked << " coordinate checks): " << (report.passed() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

Json gradcheck_json(const GradcheckReport& report) {
  Json groups = Json::array();
  for (const GradcheckGroup& g : report.groups)
    groups.push_back({{"group", g.name}, {"per_loss", g.per_loss}, {"max_relative_error", g.max_error}});
  return Json{{"groups", groups},
              {"per_loss", report.per_loss},
              {"max_relative_error", report.max_error},
              {"tolerance", report.tolerance},
              {"coordinates_checked", report.coordinates_checked},
              {"passed", report.passed()}};
}

}  // namespace clhoi

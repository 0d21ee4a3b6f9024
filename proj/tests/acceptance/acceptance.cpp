#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eval/ap.hpp"
#include "losses/losses.hpp"
#include "pipeline/evaluate.hpp"
#include "pipeline/gradcheck.hpp"
#include "pipeline/trainer.hpp"
#include "suite/oracles.hpp"
#include "suite/suite.hpp"

using namespace clhoi;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kGradTolerance = 1e-4;
constexpr double kGradRuntimeSeconds = 120.0;
constexpr double kClosedFormTolerance = 1e-9;
constexpr double kOracleTolerance = 1e-12;
constexpr std::size_t kOracleInstances = 200;
constexpr double kTrainedOverRandom = 2.0;
constexpr double kTable5RuntimeSeconds = 600.0;
constexpr std::size_t kAblationSeeds = 3;
constexpr std::size_t kInvarianceSeeds = 100;
constexpr double kPermutationTolerance = 1e-12;
constexpr double kEquivarianceTolerance = 1e-9;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Verdict gradient_fidelity() {
  const auto start = Clock::now();
  GradcheckSettings s;
  s.coords_per_param = 16;
  s.tolerance = kGradTolerance;
  const GradcheckReport r = run_gradcheck(s, 0);
  const double t = seconds_since(start);
  std::string per_loss;
  for (const auto& [loss, err] : r.per_loss) per_loss += " " + loss + "=" + fmt(err, 3);
  const bool covered = r.per_loss.size() == kGradcheckLosses.size();
  return {r.max_error <= kGradTolerance && t < kGradRuntimeSeconds && covered,
          "max rel err " + fmt(r.max_error, 3) + " <= " + fmt(kGradTolerance) + " over " +
              std::to_string(r.groups.size()) + " groups," + per_loss + "; " + std::to_string(r.coordinates_checked) +
              " coordinate checks; runtime " + fmt(t, 3) + " s < " + fmt(kGradRuntimeSeconds) + " s"};
}

Verdict closed_forms() {
  const auto start = Clock::now();
  const Tensor e1 = Tensor::matrix(1, 2, {1, 0}), e2 = Tensor::matrix(1, 2, {0, 1});
  const double s = losses::set_similarity(e1, Tensor::matrix(2, 2, {1, 0, 0, 1}));
  const double s_ref = std::numbers::e / (1 + std::numbers::e);
  Tape tape;
  const Var v1 = tape.constant(e1), v2 = tape.constant(e2);
  const double lc = losses::context_loss({v1, v2}, {v1, v2}).value().item();
  const double lc_ref = std::log(1 + std::exp(-1.0));
  const double i2t = losses::i2t_loss({{v1, v2, v2}}).value().item();
  const double lc1 = losses::context_loss({v1}, {v2}).value().item();
  const double t2i1 = losses::t2i_loss({v1}, {v2}).value().item();
  const double worst = std::max({std::abs(s - s_ref), std::abs(lc - lc_ref), std::abs(i2t - std::log(2.0)),
                                 std::abs(lc1), std::abs(t2i1)});
  return {worst <= kClosedFormTolerance,
          "s=" + fmt(s, 9) + " (e/(1+e)), L_c=" + fmt(lc, 9) + " (log(1+e^-1)), I2T item=" + fmt(i2t, 9) +
              " (ln 2), B=1 L_c=" + fmt(lc1) + " L_T2I=" + fmt(t2i1) + "; worst deviation " + fmt(worst, 3) +
              " <= " + fmt(kClosedFormTolerance) + "; runtime " + fmt(seconds_since(start), 3) + " s"};
}

Verdict pseudo_label_table() {
  const std::vector<double> grid{0.49, 0.5, 0.51};
  std::vector<double> verb, object;
  for (double a : grid)
    for (double b : grid) {
      verb.push_back(a);
      object.push_back(b);
    }
  const std::size_t n = verb.size();
  const Tensor y = losses::pseudo_labels_from_similarity(Tensor::matrix(n, 1, verb), Tensor::matrix(n, 1, object));
  std::size_t matches = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double expected = (verb[i] >= 0.5 && object[i] >= 0.5) ? 1.0 : 0.0;
    matches += y.data()[i] == expected ? 1 : 0;
  }
  std::size_t threshold_matches = 0;
  for (double v : grid) threshold_matches += losses::threshold(Tensor::scalar(v)).item() == (v >= 0.5 ? 1.0 : 0.0);
  return {matches == n && threshold_matches == grid.size(),
          std::to_string(matches) + "/" + std::to_string(n) + " truth-table cells and " +
              std::to_string(threshold_matches) + "/3 thresholds match 'sim >= 0.5' exactly"};
}

Verdict evaluator_oracle() {
  suite::SuiteOptions o;
  o.filter = "ap.oracle";
  o.seed_count = kOracleInstances;
  const suite::SuiteReport r = suite::run_suite(o);
  const suite::PropertyReport& p = r.properties.at(0);
  const bool oracle_ok = p.passed == p.runs && p.worst_error <= kOracleTolerance && p.tolerance <= kOracleTolerance;

  const Box h{0, 0, 10, 10}, o_box{10, 0, 20, 10}, far{50, 50, 60, 60};
  const std::vector<ImageGroundTruth> gt{{"a", {{h, o_box, 0, 1}}}, {"b", {{h, o_box, 0, 1}}}};
  const double fixture =
      eval::evaluate_ap({{"a", h, o_box, 0, 1, 0.9}, {"c", far, o_box, 0, 1, 0.8}}, gt, eval::ApMode::kFull).mean_ap;

  // A predicted box inside a 2x1 ground-truth box with width w has IoU w / 2.
  const Box gt_box{0, 0, 2, 1};
  const std::vector<ImageGroundTruth> gt_b{{"a", {{gt_box, gt_box, 0, 1}}}};
  std::string boundary;
  bool boundary_ok = true;
  for (const auto& [target, expect_match] : std::vector<std::pair<double, bool>>{{0.499, false}, {0.5, true}, {0.501, true}}) {
    const Box shrunk{0, 0, 2 * target, 1};
    const double human = eval::evaluate_ap({{"a", shrunk, gt_box, 0, 1, 0.9}}, gt_b, eval::ApMode::kFull).mean_ap;
    const double object = eval::evaluate_ap({{"a", gt_box, shrunk, 0, 1, 0.9}}, gt_b, eval::ApMode::kFull).mean_ap;
    const double expected = expect_match ? 1.0 : 0.0;
    boundary_ok = boundary_ok && human == expected && object == expected && std::abs(iou(shrunk, gt_box) - target) <= kOracleTolerance;
    boundary += " " + fmt(target) + (human == 1.0 ? ":match" : ":miss");
  }
  return {oracle_ok && fixture == 0.5 && boundary_ok,
          std::to_string(p.passed) + "/" + std::to_string(p.runs) + " random instances match the threshold oracle (worst " +
              fmt(p.worst_error, 3) + " <= " + fmt(kOracleTolerance) + "); two-GT fixture AP=" + fmt(fixture) +
              "; IoU boundary" + boundary};
}

struct AblationRun {
  double trained = 0;
  double random = 0;
  double seconds = 0;
};

AblationRun train_and_eval(const Config& base, const CorpusData& corpus, Chain chain, std::uint64_t seed) {
  const auto start = Clock::now();
  Config c = base;
  c.model.chain = chain;
  c.seed = seed;
  const auto items = build_training_set(corpus.train, text::TextEncoder(c.model.dim));
  const TrainResult r = train_model(c, items);
  AblationRun run;
  run.trained = evaluate_model(weights_of(r.final), c, corpus.test, c.lambda, 1).full.mean_ap;
  run.seconds = seconds_since(start);
  run.random = evaluate_model(weights_of(r.initial), c, corpus.test, c.lambda, 1).full.mean_ap;
  return run;
}

std::pair<Verdict, Verdict> table_analogs() {
  const Config base;
  const auto gen_start = Clock::now();
  const CorpusData corpus = generate_corpus(base, 0, 1);
  const double gen_seconds = seconds_since(gen_start);
  std::map<Chain, std::vector<AblationRun>> runs;
  for (Chain chain : {Chain::kSpatial, Chain::kVisual, Chain::kContext}) {
    for (std::uint64_t seed = 0; seed < kAblationSeeds; ++seed) {
      runs[chain].push_back(train_and_eval(base, corpus, chain, seed));
      std::fprintf(stderr, "  chain %s seed %llu: trained %.4f random %.4f (%.1f s)\n", to_string(chain),
                   static_cast<unsigned long long>(seed), runs[chain].back().trained, runs[chain].back().random,
                   runs[chain].back().seconds);
    }
  }

  const AblationRun& main = runs[Chain::kContext][0];
  const double runtime = gen_seconds + main.seconds;
  Verdict t5{main.trained >= kTrainedOverRandom * main.random && main.random > 0 && runtime < kTable5RuntimeSeconds,
             "trained Full mAP " + fmt(main.trained, 4) + " vs random-init " + fmt(main.random, 4) + " (ratio " +
                 fmt(main.trained / main.random, 3) + " >= " + fmt(kTrainedOverRandom) + "), random > 0; " +
                 "gen+train+eval " + fmt(runtime, 3) + " s < " + fmt(kTable5RuntimeSeconds) + " s on one thread"};

  std::map<Chain, double> mean;
  for (auto& [chain, list] : runs) {
    for (const AblationRun& r : list) mean[chain] += r.trained / static_cast<double>(list.size());
  }
  const double s = mean[Chain::kSpatial], v = mean[Chain::kVisual], c = mean[Chain::kContext];
  Verdict t4{s < v && v < c, "mean Full mAP over seeds 0-" + std::to_string(kAblationSeeds - 1) + ": spatial-only " +
                                 fmt(s, 4) + " < +visual " + fmt(v, 4) + " < +context " + fmt(c, 4)};
  return {t5, t4};
}

Verdict determinism(const fs::path& cli, const fs::path& work) {
  if (cli.empty() || !fs::exists(cli)) return {false, "CLI binary not found: " + cli.string()};
  fs::remove_all(work);
  fs::create_directories(work);
  const auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + cli.string() + "\" " + args + " > \"" + (work / "log.txt").string() + "\" 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  std::vector<std::string> failures;
  for (const auto& [name, threads] : std::vector<std::pair<std::string, int>>{{"a", 1}, {"b", 4}}) {
    const fs::path d = work / name;
    const std::string t = " --threads " + std::to_string(threads);
    if (!run("gen-data --seed 0 --out \"" + (d / "corpus").string() + "\"" + t) ||
        !run("train --seed 0 --quiet --corpus \"" + (d / "corpus").string() + "\" --out \"" + (d / "run").string() + "\"" + t) ||
        !run("eval --checkpoint \"" + (d / "run" / "checkpoint.bin").string() + "\" --corpus \"" +
             (d / "corpus").string() + "\" --out \"" + (d / "eval").string() + "\"" + t)) {
      failures.push_back("pipeline " + name + " failed: " + slurp(work / "log.txt"));
    }
  }
  std::size_t compared = 0;
  for (const char* f : {"corpus/train/images.jsonl", "corpus/train/supervision.jsonl", "corpus/test/images.jsonl",
                        "corpus/test/gt.jsonl", "run/checkpoint_init.bin", "run/checkpoint_epoch1.bin",
                        "run/checkpoint_epoch3.bin", "run/checkpoint.bin", "run/train_log.csv",
                        "eval/eval_lambda0.5.json", "eval/pr_lambda0.5.csv"}) {
    const fs::path a = work / "a" / f, b = work / "b" / f;
    if (!fs::exists(a) || !fs::exists(b) || slurp(a) != slurp(b)) failures.push_back(std::string(f) + " differs");
    ++compared;
  }
  if (!failures.empty()) return {false, failures.front()};
  return {true, "gen-data -> train -> eval at 1 and 4 threads: " + std::to_string(compared) +
                    " artifacts byte-identical (checkpoints, log, metric JSON, PR CSV)"};
}

Verdict invariance() {
  struct Pinned {
    const char* name;
    double tolerance;
  };
  const std::vector<Pinned> pinned{{"similarity.permutation", kPermutationTolerance},
                                   {"icn.equivariance", kEquivarianceTolerance},
                                   {"scoring.lambda_one_ranking", 0.0}};
  std::string detail;
  bool ok = true;
  for (const Pinned& p : pinned) {
    suite::SuiteOptions o;
    o.filter = p.name;
    o.seed_count = kInvarianceSeeds;
    const suite::SuiteReport r = suite::run_suite(o);
    const suite::PropertyReport& pr = r.properties.at(0);
    const bool pass = pr.runs >= kInvarianceSeeds && pr.passed == pr.runs && pr.worst_error <= p.tolerance &&
                      pr.tolerance <= p.tolerance;
    ok = ok && pass;
    if (!detail.empty()) detail += "; ";
    detail += std::string(p.name) + " " + std::to_string(pr.passed) + "/" + std::to_string(pr.runs) + " worst " +
              fmt(pr.worst_error, 3) + " <= " + fmt(p.tolerance);
  }
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-8"};
  std::string cli_path, work = (fs::temp_directory_path() / "clhoi_acceptance").string();
  std::vector<int> only;
  app.add_option("--cli", cli_path, "Path to the clhoi command-line binary");
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::set<int> selected(only.begin(), only.end());
  const auto wanted = [&](int c) { return selected.empty() || selected.count(c) > 0; };
  const std::map<int, std::string> titles{{1, "gradient fidelity"},        {2, "closed-form loss values"},
                                          {3, "pseudo-label semantics"},   {4, "evaluator oracle"},
                                          {5, "random-init vs trained"},   {6, "ablation ordering"},
                                          {7, "determinism"},              {8, "invariance suite"}};
  std::map<int, Verdict> verdicts;
  const auto record = [&](int c, const std::function<Verdict()>& fn) {
    if (!wanted(c)) return;
    try {
      verdicts[c] = fn();
    } catch (const std::exception& e) {
      verdicts[c] = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d %-26s %s  %s\n", c, titles.at(c).c_str(), verdicts[c].pass ? "PASS" : "FAIL",
                verdicts[c].detail.c_str());
    std::fflush(stdout);
  };

  record(1, gradient_fidelity);
  record(2, closed_forms);
  record(3, pseudo_label_table);
  record(4, evaluator_oracle);
  if (wanted(5) || wanted(6)) {
    std::pair<Verdict, Verdict> tables;
    bool done = false;
    const auto get = [&] {
      if (!done) {
        try {
          tables = table_analogs();
        } catch (const std::exception& e) {
          tables = {{false, std::string("exception: ") + e.what()}, {false, std::string("exception: ") + e.what()}};
        }
        done = true;
      }
      return tables;
    };
    record(5, [&] { return get().first; });
    record(6, [&] { return get().second; });
  }
  record(7, [&] { return determinism(cli_path, fs::path(work) / "determinism"); });
  record(8, invariance);

  bool all = true;
  for (const auto& [c, v] : verdicts) all = all && v.pass;
  std::printf("%s: %zu/%zu criteria passed\n", all ? "ACCEPTED" : "REJECTED",
              static_cast<std::size_t>(std::count_if(verdicts.begin(), verdicts.end(),
                                                     [](const auto& kv) { return kv.second.pass; })),
              verdicts.size());
  return all ? 0 : 1;
}

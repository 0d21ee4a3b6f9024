#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "clhoi/clhoi.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct Failure {
  int code;
};

struct Owned {
  char* p = nullptr;
  ~Owned() { clhoi_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

void check(clhoi_status status) {
  if (status == CLHOI_OK) return;
  std::cerr << "error: " << clhoi_last_error() << '\n';
  throw Failure{clhoi_status_is_io(status) ? kExitIo : kExitValidation};
}

using ConfigPtr = std::unique_ptr<clhoi_config, decltype(&clhoi_config_destroy)>;
using ModelPtr = std::unique_ptr<clhoi_model, decltype(&clhoi_model_destroy)>;

struct Globals {
  std::string config_path;
  std::vector<std::string> settings;
  std::int64_t seed = -1;
  std::string out;
  std::size_t threads = 0;
};

ConfigPtr build_config(const Globals& g, const std::vector<std::string>& extra = {}) {
  clhoi_config* raw = nullptr;
  check(clhoi_config_create(&raw));
  ConfigPtr config(raw, clhoi_config_destroy);
  if (!g.config_path.empty()) check(clhoi_config_load_file(config.get(), g.config_path.c_str()));
  std::vector<std::string> all = g.settings;
  all.insert(all.end(), extra.begin(), extra.end());
  for (const std::string& kv : all) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
      throw Failure{kExitValidation};
    }
    check(clhoi_config_set(config.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
  if (g.seed >= 0) check(clhoi_config_set(config.get(), "seed", std::to_string(g.seed).c_str()));
  check(clhoi_config_validate(config.get()));
  return config;
}

ModelPtr load_model(const std::string& path) {
  clhoi_model* raw = nullptr;
  check(clhoi_model_load(path.c_str(), &raw));
  return ModelPtr(raw, clhoi_model_destroy);
}

std::string chain_from_flags(bool no_visual, bool no_context) {
  if (no_visual) return "spatial";
  if (no_context) return "visual";
  return "";
}

std::string lambda_tag(double lambda) {
  std::ostringstream os;
  os << lambda;
  return os.str();
}

std::filesystem::path out_dir(const Globals& g, const char* fallback) {
  std::filesystem::path p = g.out.empty() ? fallback : g.out;
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive HOI student: corpus generation, training, evaluation and checks"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "Config file, key=value lines or JSON")->check(CLI::ExistingFile);
  app.add_option("--set", g.settings, "Config override key=value (repeatable)");
  app.add_option("--seed", g.seed, "Seed; overrides the config seed")->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads, 0 for all cores");

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic corpus with teacher supervision");

  auto* train = app.add_subcommand("train", "Train the student on a corpus");
  std::string corpus_dir;
  bool no_visual = false, no_context = false;
  train->add_option("--corpus", corpus_dir, "Corpus directory written by gen-data")->required();
  train->add_flag("--no-visual", no_visual, "Spatial stage only");
  train->add_flag("--no-context", no_context, "Stop after the visual stage");
  bool quiet = false;
  train->add_flag("--quiet", quiet, "Print the summary only");

  auto* eval = app.add_subcommand("eval", "Full and Role mAP of a checkpoint on the test split");
  std::string checkpoint;
  std::vector<double> lambdas;
  std::string split_dir;
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("--corpus", corpus_dir, "Corpus directory; its test split is evaluated");
  eval->add_option("--split", split_dir, "Split directory with images.jsonl and gt.jsonl");
  eval->add_option("--lambda", lambdas, "Detection-score weight in [0,1] (repeatable)");
  eval->add_flag("--no-visual", no_visual, "Run the spatial stage only");
  eval->add_flag("--no-context", no_context, "Stop after the visual stage");

  auto* infer = app.add_subcommand("infer", "Score every pair of every image");
  std::string images;
  bool dump_attention = false;
  double infer_lambda = 0.5;
  infer->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  infer->add_option("--images", images, "images.jsonl")->required();
  infer->add_option("--lambda", infer_lambda, "Detection-score weight in [0,1]");
  infer->add_flag("--dump-attention", dump_attention, "Also write attention.csv");

  auto* grad = app.add_subcommand("gradcheck", "Compare loss gradients against central differences");
  std::size_t coords = 16;
  grad->add_option("--coords", coords, "Sampled coordinates per parameter tensor, 0 for all");

  auto* suite = app.add_subcommand("suite", "Run the property suite");
  std::string filter;
  std::size_t seeds = 100;
  bool inject = false;
  suite->add_option("--filter", filter, "Comma-separated property name substrings");
  suite->add_option("--seeds", seeds, "Seeds per property")->check(CLI::PositiveNumber);
  suite->add_flag("--inject-failure", inject, "Register a property that fails on purpose");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitIo;
  }

  try {
    if (*gen) {
      const ConfigPtr config = build_config(g);
      const auto dir = out_dir(g, "corpus");
      Owned report;
      check(clhoi_generate_corpus(config.get(), dir.string().c_str(), g.threads, &report.p));
      std::cout << "corpus written to " << dir.string() << "\nlabel counts (train)\n" << report.str();
      return kExitOk;
    }

    if (*train) {
      const std::string chain = chain_from_flags(no_visual, no_context);
      const ConfigPtr config = build_config(g, chain.empty() ? std::vector<std::string>{} : std::vector{"chain=" + chain});
      const auto dir = out_dir(g, "run");
      const auto start = std::chrono::steady_clock::now();
      struct Progress {
        bool quiet;
      } progress{quiet};
      const auto print_step = [](const clhoi_train_step* s, void* user) {
        if (static_cast<Progress*>(user)->quiet) return;
        std::printf("step %llu epoch %llu lr %g L_c %.6f L_I2T %.6f L_T2I %.6f L_SR %.6f L_total %.6f\n",
                    static_cast<unsigned long long>(s->step), static_cast<unsigned long long>(s->epoch), s->lr,
                    s->loss_context, s->loss_i2t, s->loss_t2i, s->loss_soft_relation, s->loss_total);
      };
      Owned summary;
      check(clhoi_train(config.get(), corpus_dir.c_str(), dir.string().c_str(), print_step, &progress, &summary.p));
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::cout << summary.str() << "\ntrained in " << seconds << " s\n";
      return kExitOk;
    }

    if (*eval) {
      if (split_dir.empty() && corpus_dir.empty()) {
        std::cerr << "error: eval needs --corpus or --split\n";
        return kExitValidation;
      }
      const std::string split = split_dir.empty() ? (std::filesystem::path(corpus_dir) / "test").string() : split_dir;
      const ModelPtr model = load_model(checkpoint);
      if (!g.config_path.empty() || !g.settings.empty()) check(clhoi_model_check_config(model.get(), build_config(g).get()));
      const std::string chain = chain_from_flags(no_visual, no_context);
      if (!chain.empty()) check(clhoi_model_set_chain(model.get(), chain.c_str()));
      if (lambdas.empty()) lambdas.push_back(0.5);
      const auto dir = out_dir(g, "eval");
      for (double lambda : lambdas) {
        const std::string tag = lambda_tag(lambda);
        const auto json_path = dir / ("eval_lambda" + tag + ".json");
        const auto csv_path = dir / ("pr_lambda" + tag + ".csv");
        Owned result;
        check(clhoi_evaluate(model.get(), split.c_str(), lambda, g.threads, json_path.string().c_str(),
                             csv_path.string().c_str(), &result.p));
        std::cout << result.str();
      }
      return kExitOk;
    }

    if (*infer) {
      const ModelPtr model = load_model(checkpoint);
      const auto dir = out_dir(g, "predictions");
      const auto predictions = dir / "predictions.jsonl";
      const auto attention = dir / "attention.csv";
      std::size_t count = 0;
      check(clhoi_infer(model.get(), images.c_str(), infer_lambda, g.threads, predictions.string().c_str(),
                        dump_attention ? attention.string().c_str() : nullptr, &count));
      std::cout << count << " predictions written to " << predictions.string() << '\n';
      if (dump_attention) std::cout << "attention written to " << attention.string() << '\n';
      return kExitOk;
    }

    if (*grad) {
      const auto start = std::chrono::steady_clock::now();
      int passed = 0;
      Owned text, json;
      check(clhoi_gradcheck(g.seed < 0 ? 0 : static_cast<std::uint64_t>(g.seed), coords, &passed, &text.p, &json.p));
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::cout << text.str() << "runtime " << seconds << " s\n";
      if (!g.out.empty()) {
        std::ofstream(out_dir(g, ".") / "gradcheck.json") << json.str() << '\n';
      }
      return passed ? kExitOk : kExitValidation;
    }

    if (*suite) {
      int passed = 0;
      Owned text, json;
      check(clhoi_run_suite(filter.c_str(), seeds, g.seed < 0 ? 0 : static_cast<std::uint64_t>(g.seed), inject ? 1 : 0,
                            g.threads, &passed, &text.p, &json.p));
      std::cout << text.str();
      if (!g.out.empty()) std::ofstream(out_dir(g, ".") / "suite.json") << json.str() << '\n';
      return passed ? kExitOk : kExitValidation;
    }
  } catch (const Failure& f) {
    return f.code;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}

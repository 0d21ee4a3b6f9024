#include "pipeline/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "core/error.hpp"

namespace clhoi {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  require(ec == std::errc() && ptr == v.data() + v.size(), ErrorKind::kParse,
          "config key '" + key + "' expects a number, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  require(ec == std::errc() && ptr == v.data() + v.size(), ErrorKind::kParse,
          "config key '" + key + "' expects a non-negative integer, got '" + v + "'");
  return out;
}

using Setter = std::function<void(Config&, const std::string&, const std::string&)>;

template <typename T>
Setter size_field(T Config::*section, std::size_t T::*field) {
  return [=](Config& c, const std::string& k, const std::string& v) { (c.*section).*field = to_uint(k, v); };
}

template <typename T>
Setter real_field(T Config::*section, double T::*field) {
  return [=](Config& c, const std::string& k, const std::string& v) { (c.*section).*field = to_double(k, v); };
}

const std::map<std::string, Setter>& setters() {
  using C = teacher::CorpusConfig;
  static const std::map<std::string, Setter> table = {
      {"dim",
       [](Config& c, const std::string& k, const std::string& v) { c.model.dim = c.corpus.dim = to_uint(k, v); }},
      {"image_dim",
       [](Config& c, const std::string& k, const std::string& v) {
         c.model.image_dim = c.corpus.image_dim = to_uint(k, v);
       }},
      {"query_dim", size_field(&Config::model, &ModelConfig::query_dim)},
      {"num_queries", size_field(&Config::model, &ModelConfig::num_queries)},
      {"heads", size_field(&Config::model, &ModelConfig::heads)},
      {"former_layers", size_field(&Config::model, &ModelConfig::former_layers)},
      {"icn_heads", size_field(&Config::model, &ModelConfig::icn_heads)},
      {"ffn_mult", size_field(&Config::model, &ModelConfig::ffn_mult)},
      {"chain", [](Config& c, const std::string&, const std::string& v) { c.model.chain = chain_from_string(v); }},
      {"num_verbs", size_field(&Config::corpus, &C::num_verbs)},
      {"num_classes", size_field(&Config::corpus, &C::num_classes)},
      {"train_scenes", size_field(&Config::corpus, &C::train_scenes)},
      {"test_scenes", size_field(&Config::corpus, &C::test_scenes)},
      {"persons_min", size_field(&Config::corpus, &C::persons_min)},
      {"persons_max", size_field(&Config::corpus, &C::persons_max)},
      {"objects_min", size_field(&Config::corpus, &C::objects_min)},
      {"objects_max", size_field(&Config::corpus, &C::objects_max)},
      {"p_interact", real_field(&Config::corpus, &C::p_interact)},
      {"width", real_field(&Config::corpus, &C::width)},
      {"height", real_field(&Config::corpus, &C::height)},
      {"grid", size_field(&Config::corpus, &C::grid)},
      {"embed_noise", real_field(&Config::corpus, &C::embed_noise)},
      {"verb_signal", real_field(&Config::corpus, &C::verb_signal)},
      {"image_noise", real_field(&Config::corpus, &C::image_noise)},
      {"union_noise", real_field(&Config::corpus, &C::union_noise)},
      {"jitter", real_field(&Config::corpus, &C::jitter)},
      {"p_drop", real_field(&Config::corpus, &C::p_drop)},
      {"p_swap", real_field(&Config::corpus, &C::p_swap)},
      {"num_negatives", size_field(&Config::corpus, &C::num_negatives)},
      {"epochs", size_field(&Config::train, &TrainConfig::epochs)},
      {"batch_size", size_field(&Config::train, &TrainConfig::batch_size)},
      {"lr", real_field(&Config::train, &TrainConfig::lr)},
      {"lr_decayed", real_field(&Config::train, &TrainConfig::lr_decayed)},
      {"decay_after_epoch", size_field(&Config::train, &TrainConfig::decay_after_epoch)},
      {"beta1", real_field(&Config::train, &TrainConfig::beta1)},
      {"beta2", real_field(&Config::train, &TrainConfig::beta2)},
      {"adam_eps", real_field(&Config::train, &TrainConfig::adam_eps)},
      {"grad_clip", real_field(&Config::train, &TrainConfig::grad_clip)},
      {"lambda", [](Config& c, const std::string& k, const std::string& v) { c.lambda = to_double(k, v); }},
      {"seed", [](Config& c, const std::string& k, const std::string& v) { c.seed = to_uint(k, v); }},
  };
  return table;
}

std::string scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) {
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    return os.str();
  }
  fail(ErrorKind::kParse, "config values must be scalars, got " + std::string(v.type_name()));
}

void apply_json(Config& c, const Json& j) {
  require(j.is_object(), ErrorKind::kParse, "config JSON must be an object");
  for (const auto& [key, value] : j.items()) {
    if (value.is_object()) {
      apply_json(c, value);
    } else {
      apply_setting(c, key, scalar_text(value));
    }
  }
}

}  // namespace

void Config::validate() const {
  model.validate();
  corpus.validate();
  require(model.dim == corpus.dim && model.image_dim == corpus.image_dim, ErrorKind::kConfig,
          "model and corpus widths differ");
  require(train.epochs >= 1 && train.batch_size >= 1, ErrorKind::kConfig, "epochs and batch_size must be positive");
  require(train.decay_after_epoch <= train.epochs, ErrorKind::kConfig,
          "decay_after_epoch " + std::to_string(train.decay_after_epoch) + " exceeds epochs " +
              std::to_string(train.epochs));
  require(train.lr > 0 && train.lr_decayed > 0, ErrorKind::kConfig, "learning rates must be positive");
  require(train.beta1 >= 0 && train.beta1 < 1 && train.beta2 >= 0 && train.beta2 < 1 && train.adam_eps > 0,
          ErrorKind::kConfig, "invalid Adam hyperparameters");
  require(train.grad_clip > 0, ErrorKind::kConfig, "grad_clip must be positive");
  require(lambda >= 0 && lambda <= 1, ErrorKind::kConfig, "lambda must lie in [0, 1]");
}

double Config::lr_for_epoch(std::size_t epoch) const {
  return epoch <= train.decay_after_epoch ? train.lr : train.lr_decayed;
}

void apply_setting(Config& config, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  require(it != setters().end(), ErrorKind::kConfig, "unknown config key '" + key + "'");
  it->second(config, key, value);
}

Config parse_config(const std::string& text, Config base) {
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    Json j;
    try {
      j = Json::parse(body);
    } catch (const Json::exception& e) {
      fail(ErrorKind::kParse, std::string("config JSON: ") + e.what());
    }
    apply_json(base, j);
    return base;
  }
  std::istringstream in(text);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::kParse,
            "config line " + std::to_string(line_no) + ": expected key=value");
    apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

Config load_config(const std::filesystem::path& path, Config base) { return parse_config(read_text(path), base); }

Json config_to_json(const Config& c) {
  const ModelConfig& m = c.model;
  const teacher::CorpusConfig& k = c.corpus;
  const TrainConfig& t = c.train;
  return Json{
      {"model",
       {{"dim", m.dim}, {"image_dim", m.image_dim}, {"query_dim", m.query_dim}, {"num_queries", m.num_queries},
        {"heads", m.heads}, {"former_layers", m.former_layers}, {"icn_heads", m.icn_heads},
        {"ffn_mult", m.ffn_mult}, {"chain", to_string(m.chain)}}},
      {"corpus",
       {{"num_verbs", k.num_verbs}, {"num_classes", k.num_classes}, {"train_scenes", k.train_scenes},
        {"test_scenes", k.test_scenes}, {"persons_min", k.persons_min}, {"persons_max", k.persons_max},
        {"objects_min", k.objects_min}, {"objects_max", k.objects_max}, {"p_interact", k.p_interact},
        {"width", k.width}, {"height", k.height}, {"grid", k.grid}, {"embed_noise", k.embed_noise},
        {"verb_signal", k.verb_signal}, {"image_noise", k.image_noise}, {"union_noise", k.union_noise},
        {"jitter", k.jitter}, {"p_drop", k.p_drop}, {"p_swap", k.p_swap}, {"num_negatives", k.num_negatives}}},
      {"train",
       {{"epochs", t.epochs}, {"batch_size", t.batch_size}, {"lr", t.lr}, {"lr_decayed", t.lr_decayed},
        {"decay_after_epoch", t.decay_after_epoch}, {"beta1", t.beta1}, {"beta2", t.beta2},
        {"adam_eps", t.adam_eps}, {"grad_clip", t.grad_clip}}},
      {"lambda", c.lambda},
      {"seed", c.seed},
  };
}

Config config_from_json(const Json& j) {
  Config c;
  apply_json(c, j);
  return c;
}

}  // namespace clhoi

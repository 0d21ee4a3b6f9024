#include "text/text_embed.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "core/error.hpp"
#include "data/jsonl.hpp"

namespace clhoi::text {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Uniform in (0, 1], from the top 53 bits.
double unit_open(std::uint64_t& state) {
  return (static_cast<double>(splitmix64(state) >> 11) + 1.0) * 0x1.0p-53;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> tokenize(const std::string& s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  std::istringstream in(lower);
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) tokens.push_back(t);
  return tokens;
}

TextEncoder::TextEncoder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  require(dim > 0, ErrorKind::kConfig, "text encoder dim must be positive");
}

std::vector<double> TextEncoder::bucket_vector(std::size_t bucket) const {
  std::uint64_t state = seed_ ^ (0xd1b54a32d192ed03ull * (bucket + 1));
  std::vector<double> v(dim_);
  // Box-Muller over a portable generator so tables match across platforms.
  for (std::size_t i = 0; i < dim_; i += 2) {
    const double r = std::sqrt(-2.0 * std::log(unit_open(state)));
    const double theta = 2.0 * std::numbers::pi * unit_open(state);
    v[i] = r * std::cos(theta);
    if (i + 1 < dim_) v[i + 1] = r * std::sin(theta);
  }
  return v;
}

std::vector<double> TextEncoder::embed(const std::string& s) const {
  const auto tokens = tokenize(s);
  require(!tokens.empty(), ErrorKind::kUsage, "embed_text: empty string");
  std::vector<double> acc(dim_, 0.0);
  for (const std::string& t : tokens) {
    const auto v = bucket_vector(fnv1a(t) % kHashBuckets);
    for (std::size_t i = 0; i < dim_; ++i) acc[i] += v[i];
  }
  double norm = 0.0;
  for (double x : acc) norm += x * x;
  norm = std::sqrt(norm);
  require(norm > 0.0, ErrorKind::kNumeric, "embed_text: zero vector for '" + s + "'");
  for (double& x : acc) x /= norm;
  return acc;
}

Tensor TextEncoder::encode_label_bank(const std::vector<std::string>& labels) const {
  require(!labels.empty(), ErrorKind::kUsage, "encode_label_bank: empty label list");
  std::vector<std::vector<double>> rows;
  rows.reserve(labels.size());
  for (const std::string& l : labels) rows.push_back(embed(l));
  return Tensor::from_rows(rows);
}

VerbDictionary::VerbDictionary(std::vector<std::string> verbs) : verbs_(std::move(verbs)) {
  std::set<std::string> seen;
  for (const std::string& v : verbs_) {
    require(!v.empty(), ErrorKind::kData, "verb dictionary: empty entry");
    require(seen.insert(v).second, ErrorKind::kData, "verb dictionary: duplicate entry '" + v + "'");
  }
}

VerbDictionary VerbDictionary::parse(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> verbs;
  for (std::string line; std::getline(in, line);) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::transform(line.begin(), line.end(), line.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    verbs.push_back(line);
  }
  return VerbDictionary(std::move(verbs));
}

VerbDictionary VerbDictionary::load(const std::filesystem::path& path) { return parse(read_text(path)); }

std::string VerbDictionary::to_text() const {
  std::string out = "# negative verb dictionary, one verb per line\n";
  for (const std::string& v : verbs_) out += v + "\n";
  return out;
}

bool VerbDictionary::contains(const std::string& v) const {
  return std::find(verbs_.begin(), verbs_.end(), v) != verbs_.end();
}

void VerbDictionary::check_disjoint(const std::vector<std::string>& vocabulary) const {
  for (const std::string& v : vocabulary)
    require(!contains(v), ErrorKind::kData, "verb dictionary overlaps positive vocabulary at '" + v + "'");
}

std::vector<std::string> sample_negatives(const VerbDictionary& dict, const std::set<std::string>& positives,
                                          std::size_t k, std::mt19937_64& rng) {
  std::vector<std::string> pool;
  for (const std::string& v : dict.verbs())
    if (!positives.contains(v)) pool.push_back(v);
  require(pool.size() >= k, ErrorKind::kSampling,
          "need " + std::to_string(k) + " negatives, dictionary offers " + std::to_string(pool.size()));
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

VerbDictionary default_dictionary() {
  return VerbDictionary({"paint", "sing", "read", "write", "dance", "cook", "sleep", "climb", "swim", "draw",
                         "knit", "sew", "pray", "whistle", "bake", "iron", "sweep", "type", "yawn", "juggle"});
}

}  // namespace clhoi::text

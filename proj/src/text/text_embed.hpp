#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace clhoi::text {

inline constexpr std::size_t kHashBuckets = 1u << 16;
inline constexpr std::uint64_t kDefaultEmbedSeed = 0x5eed'c11f'0000'0001ull;

std::vector<std::string> tokenize(const std::string& s);

// Hashed bag-of-tokens encoder: each lowercase whitespace token selects one of
// 2^16 buckets, each bucket owns a fixed seed-derived Gaussian vector, and the
// token vectors are summed and l2-normalized. Stateless and thread-safe.
class TextEncoder {
 public:
  explicit TextEncoder(std::size_t dim, std::uint64_t seed = kDefaultEmbedSeed);

  std::size_t dim() const { return dim_; }
  std::vector<double> embed(const std::string& s) const;
  // One unit row per label, in input order.
  Tensor encode_label_bank(const std::vector<std::string>& labels) const;
  std::vector<double> bucket_vector(std::size_t bucket) const;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

class VerbDictionary {
 public:
  VerbDictionary() = default;
  explicit VerbDictionary(std::vector<std::string> verbs);  // throws on duplicates

  // Plain text, one verb per line, '#' starts a comment.
  static VerbDictionary load(const std::filesystem::path& path);
  static VerbDictionary parse(const std::string& text);
  std::string to_text() const;

  const std::vector<std::string>& verbs() const { return verbs_; }
  std::size_t size() const { return verbs_.size(); }
  bool contains(const std::string& v) const;

  // Throws a data error if any entry is also a positive vocabulary verb.
  void check_disjoint(const std::vector<std::string>& vocabulary) const;

 private:
  std::vector<std::string> verbs_;
};

// k distinct dictionary verbs outside `positives`, drawn without replacement.
std::vector<std::string> sample_negatives(const VerbDictionary& dict, const std::set<std::string>& positives,
                                          std::size_t k, std::mt19937_64& rng);

// Built-in negative-verb dictionary shipped with the library.
VerbDictionary default_dictionary();

}  // namespace clhoi::text

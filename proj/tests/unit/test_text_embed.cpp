#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "core/error.hpp"
#include "data/jsonl.hpp"
#include "doctest.h"
#include "teacher/vocabulary.hpp"
#include "text/text_embed.hpp"

using namespace clhoi;
using namespace clhoi::text;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("tokenize lowercases and splits on whitespace") {
  CHECK(tokenize("  Ride   the\tHorse ") == std::vector<std::string>{"ride", "the", "horse"});
  CHECK(tokenize("").empty());
}

TEST_CASE("embeddings are deterministic unit vectors") {
  const TextEncoder enc(64);
  CHECK(enc.embed("ride bicycle") == enc.embed("ride bicycle"));
  CHECK(TextEncoder(64).embed("kite") == enc.embed("kite"));
  CHECK(enc.embed("Ride  Bicycle") == enc.embed("ride bicycle"));
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> ch('a', 'z'), len(1, 12), words(1, 4);
  for (int i = 0; i < 1000; ++i) {
    std::string s;
    for (int w = words(rng); w > 0; --w) {
      for (int n = len(rng); n > 0; --n) s += static_cast<char>(ch(rng));
      s += ' ';
    }
    CHECK(std::abs(std::sqrt(dot(enc.embed(s), enc.embed(s))) - 1.0) <= 1e-9);
  }
}

TEST_CASE("shared tokens give partial similarity") {
  const TextEncoder enc(64);
  const double c = dot(enc.embed("ride bicycle"), enc.embed("ride horse"));
  CHECK(c < 1.0);
  CHECK(c > 0.0);
}

TEST_CASE("seed changes the projection table") {
  CHECK(TextEncoder(32, 1).embed("hold") != TextEncoder(32, 2).embed("hold"));
}

TEST_CASE("empty string is a usage error") {
  const TextEncoder enc(16);
  try {
    enc.embed("   ");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUsage);
  }
}

TEST_CASE("label bank rows follow input order") {
  const TextEncoder enc(48);
  std::vector<std::string> labels;
  for (int i = 0; i < 26; ++i) labels.push_back("verb" + std::to_string(i));
  const Tensor bank = enc.encode_label_bank(labels);
  CHECK(bank.shape() == Shape{26, 48});
  for (std::size_t r = 0; r < 26; ++r) {
    CHECK(bank.row_values(r) == enc.embed(labels[r]));
    CHECK(std::abs(dot(bank.row_values(r), bank.row_values(r)) - 1.0) <= 1e-9);
  }
  const Tensor dup = enc.encode_label_bank({"ride", "ride"});
  CHECK(dup.row_values(0) == dup.row_values(1));
  CHECK_THROWS_AS(enc.encode_label_bank({}), Error);
}

TEST_CASE("negative sampling") {
  const VerbDictionary dict = default_dictionary();
  std::mt19937_64 rng(3);
  const std::set<std::string> positives{"paint", "sing"};
  for (int i = 0; i < 500; ++i) {
    const auto neg = sample_negatives(dict, positives, 2, rng);
    REQUIRE(neg.size() == 2);
    CHECK(neg[0] != neg[1]);
    for (const auto& v : neg) {
      CHECK(positives.count(v) == 0);
      CHECK(dict.contains(v));
    }
  }
  std::mt19937_64 a(9), b(9);
  CHECK(sample_negatives(dict, positives, 2, a) == sample_negatives(dict, positives, 2, b));
}

TEST_CASE("forced negative sample") {
  const VerbDictionary dict({"a", "b", "c", "d"});
  std::mt19937_64 rng(0);
  auto neg = sample_negatives(dict, {"a", "c"}, 2, rng);
  std::sort(neg.begin(), neg.end());
  CHECK(neg == std::vector<std::string>{"b", "d"});
  try {
    sample_negatives(dict, {"a", "b", "c"}, 2, rng);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kSampling);
  }
}

TEST_CASE("dictionary parsing and disjointness") {
  const VerbDictionary d = VerbDictionary::parse("# negatives\npaint\n\n  sing  # trailing\nread\n");
  CHECK(d.verbs() == std::vector<std::string>{"paint", "sing", "read"});
  CHECK(VerbDictionary::parse(d.to_text()).verbs() == d.verbs());
  CHECK_THROWS_AS(VerbDictionary::parse("a\nb\na\n"), Error);
  CHECK_THROWS_AS(d.check_disjoint({"ride", "sing"}), Error);
  CHECK_NOTHROW(d.check_disjoint({"ride", "hold"}));
  CHECK_NOTHROW(default_dictionary().check_disjoint(teacher::verb_vocabulary(teacher::all_verbs().size())));

  const auto path = std::filesystem::temp_directory_path() / "clhoi_dict.txt";
  write_text(path, d.to_text());
  CHECK(VerbDictionary::load(path).verbs() == d.verbs());
  std::filesystem::remove(path);
}

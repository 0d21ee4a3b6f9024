#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pipeline/config.hpp"
#include "text/text_embed.hpp"

namespace clhoi {

struct SplitData {
  std::vector<ImageRecord> images;
  std::vector<teacher::TeacherSupervision> supervision;  // retained images only
  std::vector<ImageGroundTruth> gt;
};

struct LabelCounts {
  std::map<std::string, std::size_t> clean;  // per verb, before teacher noise
  std::map<std::string, std::size_t> noisy;  // per verb, as emitted
};

struct CorpusData {
  SplitData train;
  SplitData test;
  text::VerbDictionary dictionary;
  LabelCounts train_counts;
};

// Pure function of (config.corpus, seed); per-scene seeds make the result
// independent of `threads`.
CorpusData generate_corpus(const Config& config, std::uint64_t seed, std::size_t threads = 0);

// <out>/dictionary.txt, <out>/{train,test}/{images,supervision,gt}.jsonl
void write_corpus(const CorpusData& corpus, const std::filesystem::path& out);
SplitData read_split(const std::filesystem::path& dir);

std::string label_count_report(const LabelCounts& counts);

// One retained training image with its text targets.
struct TrainItem {
  ImageRecord record;
  Tensor caption;        // 1 x D
  Tensor positives;      // P x D, one row per triplet verb
  Tensor negatives;      // Q x D
  Tensor pseudo_labels;  // K x P, empty when K == 0
};

// Joins images with supervision by image id; images without supervision or
// with no triplets left are dropped. Throws a data error if nothing remains.
std::vector<TrainItem> build_training_set(const SplitData& split, const text::TextEncoder& encoder);

Tensor verb_label_bank(const Config& config, const text::TextEncoder& encoder);

}  // namespace clhoi

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "data/records.hpp"
#include "text/text_embed.hpp"

namespace clhoi::teacher {

struct CorpusConfig {
  std::size_t num_verbs = 6;
  std::size_t num_classes = 5;
  std::size_t train_scenes = 500;
  std::size_t test_scenes = 200;
  std::size_t persons_min = 1, persons_max = 2;
  std::size_t objects_min = 1, objects_max = 3;
  double p_interact = 0.85;  // chance that an object is used by some person
  double width = 640, height = 480;
  std::size_t grid = 4;  // image tokens per side
  std::size_t dim = 64;  // detection / union embedding width
  std::size_t image_dim = 32;
  double embed_noise = 0.5;
  double verb_signal = 0.5;  // verb prototype weight inside detection embeddings
  double image_noise = 0.3;
  double union_noise = 0.3;
  double jitter = 0.05;  // detection box jitter, fraction of box size
  double p_drop = 0.0;
  double p_swap = 0.0;
  std::size_t num_negatives = 2;

  void validate() const;
  bool operator==(const CorpusConfig&) const = default;
};

struct Interaction {
  std::size_t person = 0;
  std::size_t object = 0;
  int verb = 0;

  bool operator==(const Interaction&) const = default;
};

struct SceneSpec {
  double width = 0, height = 0;
  std::vector<Box> persons;
  std::vector<std::pair<Box, int>> objects;  // box, class id (1..C)
  std::vector<Interaction> interactions;
};

// Fixed prototypes shared by every scene of a corpus.
struct World {
  std::vector<std::vector<double>> class_embedding;  // C+1 rows, row 0 = person
  std::vector<std::vector<double>> verb_embedding;   // V rows
  std::vector<std::vector<double>> class_image;      // C+1 rows of D_img
  std::vector<std::vector<double>> verb_image;       // V rows of D_img
};

World make_world(const CorpusConfig& config, std::uint64_t seed);

struct GeneratedScene {
  SceneSpec spec;
  ImageRecord record;
};

// Detections list persons first, then objects, in scene order.
GeneratedScene generate_scene(const CorpusConfig& config, const World& world, const text::TextEncoder& encoder,
                              std::mt19937_64& rng, const std::string& image_id);

std::string teacher_caption(const SceneSpec& scene);
bool caption_has_action(const std::string& caption);

struct Triplet {
  std::string verb;
  std::string object;

  bool operator==(const Triplet&) const = default;
  auto operator<=>(const Triplet&) const = default;
};

// Accepts the caption template and the "*Verb, Object." list format.
std::vector<Triplet> parse_triplets(const std::string& caption);

struct TeacherSupervision {
  std::string image_id;
  std::string caption;
  std::vector<Triplet> triplets;
  std::vector<std::string> negatives;
};

// Empty when the caption yields no triplet (image dropped).
std::optional<TeacherSupervision> build_supervision(const SceneSpec& scene, const std::string& image_id,
                                                    const text::VerbDictionary& dict, std::size_t num_negatives,
                                                    std::mt19937_64& rng);

// Drops each triplet with p_drop, otherwise swaps its verb for a different
// vocabulary verb with p_swap. Caption and negatives are kept.
TeacherSupervision corrupt_supervision(const TeacherSupervision& sup, double p_drop, double p_swap,
                                       const std::vector<std::string>& vocabulary, std::mt19937_64& rng);

Json supervision_to_json(const TeacherSupervision& s);
TeacherSupervision supervision_from_json(const Json& j);
std::vector<TeacherSupervision> read_supervision_jsonl(const std::filesystem::path& path);
void write_supervision_jsonl(const std::filesystem::path& path, const std::vector<TeacherSupervision>& sups);

// Deterministic per-scene seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

}  // namespace clhoi::teacher

#include "pipeline/corpus.hpp"

#include <optional>
#include <random>
#include <sstream>
#include <unordered_map>

#include "core/error.hpp"
#include "losses/losses.hpp"
#include "pipeline/parallel.hpp"
#include "teacher/vocabulary.hpp"

namespace clhoi {

namespace {

enum Stream : std::uint64_t { kScene = 1, kSupervision = 2, kCorruption = 3 };

SplitData generate_split(const Config& config, const teacher::World& world, const text::TextEncoder& encoder,
                         const text::VerbDictionary& dict, std::uint64_t seed, std::uint64_t split,
                         std::size_t scenes, std::size_t threads, LabelCounts* counts) {
  const teacher::CorpusConfig& c = config.corpus;
  const auto vocabulary = teacher::verb_vocabulary(c.num_verbs);
  const std::string prefix = split == 0 ? "train_" : "test_";
  std::vector<teacher::GeneratedScene> generated(scenes);
  std::vector<std::optional<teacher::TeacherSupervision>> clean(scenes), noisy(scenes);
  parallel_for(scenes, threads, [&](std::size_t i) {
    const std::string id = prefix + std::to_string(i);
    std::mt19937_64 scene_rng(teacher::derive_seed(seed, split * 16 + kScene, i));
    generated[i] = teacher::generate_scene(c, world, encoder, scene_rng, id);
    std::mt19937_64 sup_rng(teacher::derive_seed(seed, split * 16 + kSupervision, i));
    clean[i] = teacher::build_supervision(generated[i].spec, id, dict, c.num_negatives, sup_rng);
    if (clean[i]) {
      std::mt19937_64 noise_rng(teacher::derive_seed(seed, split * 16 + kCorruption, i));
      noisy[i] = teacher::corrupt_supervision(*clean[i], c.p_drop, c.p_swap, vocabulary, noise_rng);
    }
  });

  SplitData out;
  for (std::size_t i = 0; i < scenes; ++i) {
    out.gt.push_back({generated[i].record.image_id, generated[i].record.gt});
    out.images.push_back(std::move(generated[i].record));
    if (!noisy[i]) continue;
    if (counts) {
      for (const auto& t : clean[i]->triplets) ++counts->clean[t.verb];
      for (const auto& t : noisy[i]->triplets) ++counts->noisy[t.verb];
    }
    if (!noisy[i]->triplets.empty()) out.supervision.push_back(std::move(*noisy[i]));
  }
  return out;
}

}  // namespace

CorpusData generate_corpus(const Config& config, std::uint64_t seed, std::size_t threads) {
  config.validate();
  const teacher::CorpusConfig& c = config.corpus;
  CorpusData corpus;
  corpus.dictionary = text::default_dictionary();
  corpus.dictionary.check_disjoint(teacher::verb_vocabulary(c.num_verbs));
  for (const auto& v : teacher::verb_vocabulary(c.num_verbs)) corpus.train_counts.clean[v] = corpus.train_counts.noisy[v] = 0;
  const teacher::World world = teacher::make_world(c, seed);
  const text::TextEncoder encoder(c.dim);
  corpus.train = generate_split(config, world, encoder, corpus.dictionary, seed, 0, c.train_scenes, threads,
                                &corpus.train_counts);
  corpus.test = generate_split(config, world, encoder, corpus.dictionary, seed, 1, c.test_scenes, threads, nullptr);
  return corpus;
}

void write_corpus(const CorpusData& corpus, const std::filesystem::path& out) {
  write_text(out / "dictionary.txt", corpus.dictionary.to_text());
  for (const auto& [name, split] : {std::pair{"train", &corpus.train}, std::pair{"test", &corpus.test}}) {
    write_images_jsonl(out / name / "images.jsonl", split->images);
    teacher::write_supervision_jsonl(out / name / "supervision.jsonl", split->supervision);
    write_gt_jsonl(out / name / "gt.jsonl", split->gt);
  }
}

SplitData read_split(const std::filesystem::path& dir) {
  SplitData s;
  s.images = read_images_jsonl(dir / "images.jsonl");
  if (std::filesystem::exists(dir / "supervision.jsonl"))
    s.supervision = teacher::read_supervision_jsonl(dir / "supervision.jsonl");
  if (std::filesystem::exists(dir / "gt.jsonl")) {
    s.gt = read_gt_jsonl(dir / "gt.jsonl");
  } else {
    for (const ImageRecord& r : s.images) s.gt.push_back({r.image_id, r.gt});
  }
  return s;
}

std::string label_count_report(const LabelCounts& counts) {
  std::ostringstream os;
  os << "verb,clean,emitted\n";
  for (const auto& [verb, n] : counts.clean) {
    const auto it = counts.noisy.find(verb);
    os << verb << ',' << n << ',' << (it == counts.noisy.end() ? 0 : it->second) << '\n';
  }
  for (const auto& [verb, n] : counts.noisy)
    if (!counts.clean.count(verb)) os << verb << ",0," << n << '\n';
  return os.str();
}

std::vector<TrainItem> build_training_set(const SplitData& split, const text::TextEncoder& encoder) {
  std::unordered_map<std::string, const teacher::TeacherSupervision*> by_id;
  for (const auto& s : split.supervision) by_id[s.image_id] = &s;
  std::vector<TrainItem> items;
  for (const ImageRecord& r : split.images) {
    const auto it = by_id.find(r.image_id);
    if (it == by_id.end() || it->second->triplets.empty()) continue;
    const teacher::TeacherSupervision& sup = *it->second;
    require(!sup.negatives.empty(), ErrorKind::kData, "image " + r.image_id + " has no negative verbs");
    TrainItem item;
    item.record = r;
    item.caption = Tensor::row(encoder.embed(sup.caption));
    std::vector<std::string> verbs, objects;
    for (const auto& t : sup.triplets) {
      verbs.push_back(t.verb);
      objects.push_back(t.object);
    }
    item.positives = encoder.encode_label_bank(verbs);
    item.negatives = encoder.encode_label_bank(sup.negatives);
    const std::size_t k = enumerate_pairs(r.detections).size();
    if (k > 0) {
      require(r.union_embeddings.has_value() && r.union_embeddings->rows() == k, ErrorKind::kData,
              "image " + r.image_id + " needs one union embedding per pair");
      item.pseudo_labels = losses::pseudo_labels(*r.union_embeddings, item.positives, encoder.encode_label_bank(objects));
    }
    items.push_back(std::move(item));
  }
  require(!items.empty(), ErrorKind::kData, "no training images left after dropping unsupervised images");
  return items;
}

Tensor verb_label_bank(const Config& config, const text::TextEncoder& encoder) {
  return encoder.encode_label_bank(teacher::verb_vocabulary(config.corpus.num_verbs));
}

}  // namespace clhoi

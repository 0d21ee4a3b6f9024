#include "teacher/teacher.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "teacher/vocabulary.hpp"

namespace clhoi::teacher {

namespace {

constexpr std::size_t kSceneRetries = 50;
constexpr std::size_t kPlacementRetries = 40;
constexpr double kMinDetectionIou = 0.7;
const std::string kCaptionPrefix = "the persons in the image are ";

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

void axpy(std::vector<double>& y, double a, const std::vector<double>& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

std::vector<double> normalized(std::vector<double> v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return v;
}

bool inside(const Box& b, double w, double h) { return b.x1 >= 0 && b.y1 >= 0 && b.x2 <= w && b.y2 <= h; }

Box centered(double cx, double cy, double w, double h) { return {cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2}; }

std::optional<Box> place_by_motif(const Box& person, const Motif& m, const CorpusConfig& c, std::mt19937_64& rng) {
  const double pw = person.width();
  const double ph = person.height();
  for (std::size_t i = 0; i < kPlacementRetries; ++i) {
    const double side = uniform(rng, 0, 1) < 0.5 ? -1.0 : 1.0;
    const double cx = person.center_x() + side * (m.dx + uniform(rng, -0.1, 0.1)) * pw;
    const double cy = person.center_y() + (m.dy + uniform(rng, -0.05, 0.05)) * ph;
    const double s = uniform(rng, 0.85, 1.15);
    const Box b = centered(cx, cy, m.width * pw * s, m.height * pw * s);
    if (inside(b, c.width, c.height)) return b;
  }
  return std::nullopt;
}

double overlap_fraction(const Box& b, const Box& cell) {
  const double iw = std::min(b.x2, cell.x2) - std::max(b.x1, cell.x1);
  const double ih = std::min(b.y2, cell.y2) - std::max(b.y1, cell.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  return iw * ih / cell.area();
}

Box jitter_box(const Box& gt, const CorpusConfig& c, std::mt19937_64& rng) {
  if (c.jitter <= 0) return gt;
  for (std::size_t i = 0; i < kPlacementRetries; ++i) {
    const double jw = c.jitter * gt.width();
    const double jh = c.jitter * gt.height();
    Box b{gt.x1 + uniform(rng, -jw, jw), gt.y1 + uniform(rng, -jh, jh), gt.x2 + uniform(rng, -jw, jw),
          gt.y2 + uniform(rng, -jh, jh)};
    b.x1 = std::max(0.0, b.x1);
    b.y1 = std::max(0.0, b.y1);
    b.x2 = std::min(c.width, b.x2);
    b.y2 = std::min(c.height, b.y2);
    if (b.x1 < b.x2 && b.y1 < b.y2 && iou(b, gt) >= kMinDetectionIou) return b;
  }
  return gt;
}

std::optional<SceneSpec> try_scene(const CorpusConfig& c, std::mt19937_64& rng) {
  SceneSpec s;
  s.width = c.width;
  s.height = c.height;
  const std::size_t num_persons = uniform_index(rng, c.persons_min, c.persons_max);
  const std::size_t num_objects = uniform_index(rng, c.objects_min, c.objects_max);

  for (std::size_t p = 0; p < num_persons; ++p) {
    bool placed = false;
    for (std::size_t i = 0; i < kPlacementRetries && !placed; ++i) {
      const double pw = uniform(rng, 0.08, 0.14) * c.width;
      const double ph = pw * uniform(rng, 2.0, 2.6);
      if (pw >= c.width || ph >= c.height) return std::nullopt;
      const double x1 = uniform(rng, 0, c.width - pw);
      const double y1 = uniform(rng, 0, c.height - ph);
      const Box b{x1, y1, x1 + pw, y1 + ph};
      const bool clear = std::all_of(s.persons.begin(), s.persons.end(), [&](const Box& o) { return iou(o, b) < 0.2; });
      if (clear) {
        s.persons.push_back(b);
        placed = true;
      }
    }
    if (!placed) return std::nullopt;
  }

  const auto& verbs = all_verbs();
  for (std::size_t o = 0; o < num_objects; ++o) {
    const int cls = static_cast<int>(uniform_index(rng, 1, c.num_classes));
    if (uniform(rng, 0, 1) < c.p_interact) {
      const std::size_t person = uniform_index(rng, 0, s.persons.size() - 1);
      const int verb = static_cast<int>(uniform_index(rng, 0, c.num_verbs - 1));
      const auto box = place_by_motif(s.persons[person], verbs[static_cast<std::size_t>(verb)].motif, c, rng);
      if (!box) return std::nullopt;
      s.interactions.push_back({person, s.objects.size(), verb});
      s.objects.emplace_back(*box, cls);
    } else {
      const double ref = s.persons.front().width();
      const double w = ref * uniform(rng, 0.3, 1.2);
      const double h = ref * uniform(rng, 0.3, 1.2);
      if (w >= c.width || h >= c.height) return std::nullopt;
      const double x1 = uniform(rng, 0, c.width - w);
      const double y1 = uniform(rng, 0, c.height - h);
      s.objects.emplace_back(Box{x1, y1, x1 + w, y1 + h}, cls);
    }
  }
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

std::string trim(const std::string& s, const char* chars = " \t\r\n") {
  const auto b = s.find_first_not_of(chars);
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(chars);
  return s.substr(b, e - b + 1);
}

std::string collapse_spaces(const std::string& s) {
  std::istringstream in(s);
  std::string out;
  for (std::string w; in >> w;) out += (out.empty() ? "" : " ") + w;
  return out;
}

std::string article(const std::string& noun) {
  return (!noun.empty() && std::string("aeiou").find(noun.front()) != std::string::npos) ? "an" : "a";
}

}  // namespace

void CorpusConfig::validate() const {
  verb_vocabulary(num_verbs);
  object_vocabulary(num_classes);
  require(persons_min >= 1 && persons_min <= persons_max, ErrorKind::kConfig, "invalid persons range");
  require(objects_min >= 1 && objects_min <= objects_max, ErrorKind::kConfig, "invalid objects range");
  require(width > 0 && height > 0, ErrorKind::kConfig, "scene size must be positive");
  require(grid >= 1 && dim >= 1 && image_dim >= 1, ErrorKind::kConfig, "grid and dims must be positive");
  require(p_interact >= 0 && p_interact <= 1, ErrorKind::kConfig, "p_interact outside [0,1]");
  require(p_drop >= 0 && p_drop <= 1 && p_swap >= 0 && p_swap <= 1, ErrorKind::kConfig,
          "p_drop and p_swap must be in [0,1]");
  require(jitter >= 0 && jitter < 0.5, ErrorKind::kConfig, "jitter must be in [0, 0.5)");
  require(embed_noise >= 0 && image_noise >= 0 && union_noise >= 0, ErrorKind::kConfig, "noise must be non-negative");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t z = base ^ (0x9e3779b97f4a7c15ull * (stream + 1)) ^ (0xc2b2ae3d27d4eb4full * (index + 1));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

World make_world(const CorpusConfig& c, std::uint64_t seed) {
  c.validate();
  std::mt19937_64 rng(derive_seed(seed, 0x77, 0));
  World w;
  for (std::size_t i = 0; i <= c.num_classes; ++i) w.class_embedding.push_back(gaussian(rng, c.dim, 1.0));
  for (std::size_t i = 0; i < c.num_verbs; ++i) w.verb_embedding.push_back(gaussian(rng, c.dim, 1.0));
  for (std::size_t i = 0; i <= c.num_classes; ++i) w.class_image.push_back(gaussian(rng, c.image_dim, 1.0));
  for (std::size_t i = 0; i < c.num_verbs; ++i) w.verb_image.push_back(gaussian(rng, c.image_dim, 1.0));
  return w;
}

GeneratedScene generate_scene(const CorpusConfig& c, const World& world, const text::TextEncoder& encoder,
                              std::mt19937_64& rng, const std::string& image_id) {
  require(encoder.dim() == c.dim, ErrorKind::kConfig, "text encoder width must match corpus dim");
  std::optional<SceneSpec> spec;
  for (std::size_t i = 0; i < kSceneRetries && !spec; ++i) spec = try_scene(c, rng);
  require(spec.has_value(), ErrorKind::kGeneration,
          "could not place scene " + image_id + " after " + std::to_string(kSceneRetries) + " attempts");

  GeneratedScene out;
  out.spec = *spec;
  const SceneSpec& s = out.spec;
  ImageRecord& r = out.record;
  r.image_id = image_id;
  r.width = c.width;
  r.height = c.height;

  const auto add_detection = [&](const Box& gt, int cls, const std::vector<int>& verbs) {
    Detection d;
    d.box = jitter_box(gt, c, rng);
    d.score = uniform(rng, 0.5, 1.0);
    d.class_id = cls;
    d.embedding = world.class_embedding[static_cast<std::size_t>(cls)];
    for (int v : verbs) axpy(d.embedding, c.verb_signal, world.verb_embedding[static_cast<std::size_t>(v)]);
    axpy(d.embedding, 1.0, gaussian(rng, c.dim, c.embed_noise));
    r.detections.push_back(std::move(d));
  };
  for (std::size_t p = 0; p < s.persons.size(); ++p) {
    std::vector<int> verbs;
    for (const Interaction& it : s.interactions)
      if (it.person == p) verbs.push_back(it.verb);
    add_detection(s.persons[p], kPersonClass, verbs);
  }
  for (std::size_t o = 0; o < s.objects.size(); ++o) {
    std::vector<int> verbs;
    for (const Interaction& it : s.interactions)
      if (it.object == o) verbs.push_back(it.verb);
    add_detection(s.objects[o].first, s.objects[o].second, verbs);
  }

  // Grid tokens: occupancy-weighted class and interaction prototypes.
  const double cw = c.width / static_cast<double>(c.grid);
  const double ch = c.height / static_cast<double>(c.grid);
  std::vector<std::vector<double>> tokens;
  for (std::size_t gy = 0; gy < c.grid; ++gy) {
    for (std::size_t gx = 0; gx < c.grid; ++gx) {
      const Box cell{static_cast<double>(gx) * cw, static_cast<double>(gy) * ch, static_cast<double>(gx + 1) * cw,
                     static_cast<double>(gy + 1) * ch};
      std::vector<double> t(c.image_dim, 0.0);
      for (const Box& p : s.persons) axpy(t, overlap_fraction(p, cell), world.class_image[0]);
      for (const auto& [b, cls] : s.objects)
        axpy(t, overlap_fraction(b, cell), world.class_image[static_cast<std::size_t>(cls)]);
      for (const Interaction& it : s.interactions) {
        const UnionBox u = union_box(s.persons[it.person], s.objects[it.object].first);
        axpy(t, overlap_fraction(u.box, cell), world.verb_image[static_cast<std::size_t>(it.verb)]);
      }
      axpy(t, 1.0, gaussian(rng, c.image_dim, c.image_noise));
      tokens.push_back(std::move(t));
    }
  }
  r.f_img = Tensor::from_rows(tokens);

  const auto verb_names = verb_vocabulary(c.num_verbs);
  for (const Interaction& it : s.interactions) {
    r.gt.push_back({s.persons[it.person], s.objects[it.object].first, it.verb, s.objects[it.object].second});
  }

  // Union-region embeddings stand in for an image encoder run on union crops.
  const std::size_t np = s.persons.size();
  std::vector<std::vector<double>> union_rows;
  for (const PersonObjectPair& pair : enumerate_pairs(r.detections)) {
    std::vector<double> u;
    if (pair.object_index < np) {
      u = encoder.embed("person");
    } else {
      const std::size_t obj = pair.object_index - np;
      u = encoder.embed(object_name(s.objects[obj].second));
      for (const Interaction& it : s.interactions)
        if (it.person == pair.human_index && it.object == obj)
          axpy(u, 1.0, encoder.embed(verb_names[static_cast<std::size_t>(it.verb)]));
    }
    axpy(u, 1.0, gaussian(rng, c.dim, c.union_noise / std::sqrt(static_cast<double>(c.dim))));
    union_rows.push_back(normalized(std::move(u)));
  }
  if (!union_rows.empty()) r.union_embeddings = Tensor::from_rows(union_rows);
  validate_record(r, c.dim);
  return out;
}

std::string teacher_caption(const SceneSpec& scene) {
  std::vector<std::pair<int, int>> distinct;
  for (const Interaction& it : scene.interactions) {
    const std::pair<int, int> key{it.verb, scene.objects.at(it.object).second};
    if (std::find(distinct.begin(), distinct.end(), key) == distinct.end()) distinct.push_back(key);
  }
  if (distinct.empty()) return "There are persons in the image.";
  std::vector<std::string> clauses;
  for (const auto& [verb, cls] : distinct) {
    const std::string obj = object_name(cls);
    clauses.push_back(all_verbs().at(static_cast<std::size_t>(verb)).gerund + " " + article(obj) + " " + obj);
  }
  std::string body = clauses.front();
  for (std::size_t i = 1; i < clauses.size(); ++i) body += (i + 1 == clauses.size() ? " and " : ", ") + clauses[i];
  return "The persons in the image are " + body + ".";
}

bool caption_has_action(const std::string& caption) { return !parse_triplets(caption).empty(); }

std::vector<Triplet> parse_triplets(const std::string& caption) {
  std::vector<Triplet> out;
  const std::string text = lower(trim(caption));
  if (text.rfind(kCaptionPrefix, 0) == 0) {
    std::string body = trim(text.substr(kCaptionPrefix.size()), " \t\r\n.*");
    for (std::size_t pos; (pos = body.find(" and ")) != std::string::npos;) body.replace(pos, 5, ", ");
    std::istringstream clauses(body);
    for (std::string clause; std::getline(clauses, clause, ',');) {
      std::istringstream words(trim(clause, " \t\r\n.*"));
      std::string verb;
      if (!(words >> verb)) continue;
      std::vector<std::string> rest;
      for (std::string w; words >> w;) rest.push_back(w);
      if (!rest.empty() && (rest.front() == "a" || rest.front() == "an" || rest.front() == "the"))
        rest.erase(rest.begin());
      std::string object;
      for (const std::string& w : rest) object += (object.empty() ? "" : " ") + w;
      if (!object.empty()) out.push_back({lemmatize(verb), object});
    }
    return out;
  }
  // Triplet-list format, one "*Verb, Object." entry per '*' or line.
  std::string segment;
  const auto flush = [&] {
    const std::string s = trim(segment, " \t\r\n.*");
    segment.clear();
    const auto comma = s.find(',');
    if (comma == std::string::npos) return;
    const std::string verb = collapse_spaces(trim(s.substr(0, comma), " \t\r\n.*"));
    const std::string object = collapse_spaces(trim(s.substr(comma + 1), " \t\r\n.*"));
    if (!verb.empty() && !object.empty() && verb.find(' ') == std::string::npos)
      out.push_back({lemmatize(verb), object});
  };
  for (char ch : text) {
    if (ch == '*' || ch == '\n') {
      flush();
    } else {
      segment += ch;
    }
  }
  flush();
  return out;
}

std::optional<TeacherSupervision> build_supervision(const SceneSpec& scene, const std::string& image_id,
                                                    const text::VerbDictionary& dict, std::size_t num_negatives,
                                                    std::mt19937_64& rng) {
  TeacherSupervision sup;
  sup.image_id = image_id;
  sup.caption = teacher_caption(scene);
  sup.triplets = parse_triplets(sup.caption);
  if (sup.triplets.empty()) return std::nullopt;
  std::set<std::string> positives;
  for (const Triplet& t : sup.triplets) positives.insert(t.verb);
  sup.negatives = text::sample_negatives(dict, positives, num_negatives, rng);
  return sup;
}

TeacherSupervision corrupt_supervision(const TeacherSupervision& sup, double p_drop, double p_swap,
                                       const std::vector<std::string>& vocabulary, std::mt19937_64& rng) {
  require(p_drop >= 0 && p_drop <= 1 && p_swap >= 0 && p_swap <= 1, ErrorKind::kConfig,
          "p_drop and p_swap must be in [0,1]");
  TeacherSupervision out = sup;
  out.triplets.clear();
  for (const Triplet& t : sup.triplets) {
    if (uniform(rng, 0, 1) < p_drop) continue;
    Triplet kept = t;
    if (uniform(rng, 0, 1) < p_swap && vocabulary.size() > 1) {
      std::vector<std::string> others;
      for (const std::string& v : vocabulary)
        if (v != t.verb) others.push_back(v);
      kept.verb = others[uniform_index(rng, 0, others.size() - 1)];
    }
    out.triplets.push_back(std::move(kept));
  }
  return out;
}

Json supervision_to_json(const TeacherSupervision& s) {
  Json triplets = Json::array();
  for (const Triplet& t : s.triplets) triplets.push_back({t.verb, t.object});
  return {{"image_id", s.image_id}, {"caption", s.caption}, {"triplets", triplets}, {"negatives", s.negatives}};
}

TeacherSupervision supervision_from_json(const Json& j) {
  TeacherSupervision s;
  s.image_id = j.at("image_id").get<std::string>();
  s.caption = j.at("caption").get<std::string>();
  for (const Json& t : j.at("triplets")) {
    require(t.is_array() && t.size() == 2, ErrorKind::kParse, "triplet must be [verb, object]");
    s.triplets.push_back({t[0].get<std::string>(), t[1].get<std::string>()});
  }
  s.negatives = j.at("negatives").get<std::vector<std::string>>();
  return s;
}

std::vector<TeacherSupervision> read_supervision_jsonl(const std::filesystem::path& path) {
  std::vector<TeacherSupervision> out;
  for_each_jsonl(path, [&](const Json& j, std::size_t) { out.push_back(supervision_from_json(j)); });
  return out;
}

void write_supervision_jsonl(const std::filesystem::path& path, const std::vector<TeacherSupervision>& sups) {
  std::vector<Json> lines;
  for (const TeacherSupervision& s : sups) lines.push_back(supervision_to_json(s));
  write_jsonl(path, lines);
}

}  // namespace clhoi::teacher

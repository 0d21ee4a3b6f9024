#include "teacher/vocabulary.hpp"

#include "core/error.hpp"

namespace clhoi::teacher {

const std::vector<VerbSpec>& all_verbs() {
  static const std::vector<VerbSpec> verbs = {
      {"ride", "riding", {0.0, 0.25, 1.6, 1.3}},
      {"hold", "holding", {0.6, 0.0, 0.35, 0.35}},
      {"throw", "throwing", {1.7, -0.45, 0.3, 0.3}},
      {"carry", "carrying", {0.0, -0.05, 0.8, 1.0}},
      {"kick", "kicking", {0.55, 0.45, 0.4, 0.4}},
      {"eat", "eating", {0.15, -0.35, 0.25, 0.25}},
      {"push", "pushing", {1.0, 0.15, 1.0, 1.6}},
      {"pull", "pulling", {1.1, 0.15, 1.0, 1.6}},
      {"catch", "catching", {0.9, -0.55, 0.3, 0.3}},
      {"wash", "washing", {0.9, 0.2, 0.9, 1.4}},
  };
  return verbs;
}

const std::vector<std::string>& all_object_names() {
  static const std::vector<std::string> names = {"bicycle", "umbrella",   "sports ball", "horse",
                                                 "baseball bat", "kite", "cup",         "skateboard"};
  return names;
}

std::vector<std::string> verb_vocabulary(std::size_t n) {
  require(n >= 1 && n <= all_verbs().size(), ErrorKind::kConfig,
          "num_verbs must be in [1, " + std::to_string(all_verbs().size()) + "]");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(all_verbs()[i].name);
  return out;
}

std::vector<std::string> object_vocabulary(std::size_t n) {
  require(n >= 1 && n <= all_object_names().size(), ErrorKind::kConfig,
          "num_classes must be in [1, " + std::to_string(all_object_names().size()) + "]");
  return {all_object_names().begin(), all_object_names().begin() + static_cast<std::ptrdiff_t>(n)};
}

std::string object_name(int class_id) {
  if (class_id == 0) return "person";
  require(class_id >= 1 && static_cast<std::size_t>(class_id) <= all_object_names().size(), ErrorKind::kData,
          "unknown object class " + std::to_string(class_id));
  return all_object_names()[static_cast<std::size_t>(class_id - 1)];
}

std::optional<int> object_class_id(const std::string& name, std::size_t num_classes) {
  if (name == "person") return 0;
  for (std::size_t i = 0; i < num_classes && i < all_object_names().size(); ++i)
    if (all_object_names()[i] == name) return static_cast<int>(i + 1);
  return std::nullopt;
}

std::optional<int> verb_id(const std::string& name, std::size_t num_verbs) {
  for (std::size_t i = 0; i < num_verbs && i < all_verbs().size(); ++i)
    if (all_verbs()[i].name == name) return static_cast<int>(i);
  return std::nullopt;
}

std::string lemmatize(const std::string& word) {
  for (const VerbSpec& v : all_verbs())
    if (v.gerund == word) return v.name;
  return word;
}

}  // namespace clhoi::teacher

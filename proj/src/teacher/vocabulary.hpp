#pragma once

#include <optional>
#include <string>
#include <vector>

namespace clhoi::teacher {

// Placement of an interacting object relative to its person, in units of the
// person box: center offset (dx along |x| with random side, dy) and size.
struct Motif {
  double dx = 0;
  double dy = 0;
  double width = 0;   // relative to person width
  double height = 0;  // relative to person width
};

struct VerbSpec {
  std::string name;
  std::string gerund;
  Motif motif;
};

const std::vector<VerbSpec>& all_verbs();
const std::vector<std::string>& all_object_names();

// First n entries; throws a config error when n exceeds the built-in tables.
std::vector<std::string> verb_vocabulary(std::size_t n);
std::vector<std::string> object_vocabulary(std::size_t n);

// Object class name for class ids 1..C (0 is the person class).
std::string object_name(int class_id);
std::optional<int> object_class_id(const std::string& name, std::size_t num_classes);
std::optional<int> verb_id(const std::string& name, std::size_t num_verbs);

// Gerund -> base form through the fixed table, e.g. riding -> ride.
std::string lemmatize(const std::string& word);

}  // namespace clhoi::teacher

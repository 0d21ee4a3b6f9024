#include "data/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace clhoi {

void for_each_jsonl(const std::filesystem::path& path, const std::function<void(const Json&, std::size_t)>& fn) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const Json::exception& e) {
      fail(ErrorKind::kParse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    try {
      fn(obj, line_no);
    } catch (const Json::exception& e) {
      fail(ErrorKind::kParse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kParse) throw;
      fail(ErrorKind::kParse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& lines) {
  std::ostringstream out;
  for (const Json& j : lines) out << j.dump() << '\n';
  write_text(path, out.str());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  out.flush();
  require(out.good(), ErrorKind::kIo, "write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace clhoi

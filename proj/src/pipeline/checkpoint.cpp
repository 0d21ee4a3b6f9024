#include "pipeline/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace clhoi {

namespace {

constexpr char kMagic[8] = {'C', 'L', 'H', 'O', 'I', 'C', 'K', 'P'};

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos) {
  require(pos + sizeof(T) <= in.size(), ErrorKind::kLoad, "checkpoint truncated");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    value |= static_cast<T>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += sizeof(T);
  return value;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
  Json tensors = Json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : ck.params) {
    tensors.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
    offset += t.size();
  }
  const Json header{{"format_version", kCheckpointVersion},
                    {"config", config_to_json(ck.config)},
                    {"step", ck.step},
                    {"rng_state", ck.rng_state},
                    {"tensors", tensors},
                    {"num_values", offset}};
  const std::string text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, text.size());
  out += text;
  out.reserve(out.size() + offset * 8);
  for (const auto& [name, t] : ck.params)
    for (double v : t.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(f.good(), ErrorKind::kIo, "cannot write checkpoint " + path.string());
  const std::string bytes = serialize_checkpoint(ck);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(f.good(), ErrorKind::kIo, "failed writing checkpoint " + path.string());
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  require(bytes.size() >= sizeof(kMagic) && std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) == 0, ErrorKind::kLoad,
          "not a checkpoint file (bad magic)");
  std::size_t pos = sizeof(kMagic);
  const auto version = get_le<std::uint32_t>(bytes, pos);
  require(version == kCheckpointVersion, ErrorKind::kLoad,
          "unsupported checkpoint version " + std::to_string(version));
  const auto header_len = get_le<std::uint64_t>(bytes, pos);
  require(pos + header_len <= bytes.size(), ErrorKind::kLoad, "checkpoint header truncated");
  Json header;
  try {
    header = Json::parse(bytes.substr(pos, header_len));
  } catch (const Json::exception& e) {
    fail(ErrorKind::kLoad, std::string("checkpoint header: ") + e.what());
  }
  pos += header_len;

  Checkpoint ck;
  try {
    ck.config = config_from_json(header.at("config"));
    ck.step = header.at("step").get<std::uint64_t>();
    ck.rng_state = header.at("rng_state").get<std::string>();
    const auto total = header.at("num_values").get<std::uint64_t>();
    require(bytes.size() - pos == total * 8, ErrorKind::kLoad,
            "checkpoint payload has " + std::to_string(bytes.size() - pos) + " bytes, expected " +
                std::to_string(total * 8));
    const std::size_t base = pos;
    for (const Json& t : header.at("tensors")) {
      const std::string name = t.at("name").get<std::string>();
      const Shape shape = t.at("shape").get<Shape>();
      const auto offset = t.at("offset").get<std::uint64_t>();
      std::size_t count = 1;
      for (std::size_t d : shape) count *= d;
      require(offset + count <= total, ErrorKind::kLoad, "tensor " + name + " exceeds the payload");
      std::vector<double> values(count);
      std::size_t p = base + offset * 8;
      for (double& v : values) v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, p));
      require(ck.params.emplace(name, Tensor(shape, std::move(values))).second, ErrorKind::kLoad,
              "duplicate tensor " + name);
    }
  } catch (const Json::exception& e) {
    fail(ErrorKind::kLoad, std::string("checkpoint header: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kLoad) throw;
    fail(ErrorKind::kLoad, e.what());
  }
  return ck;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), ErrorKind::kIo, "cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return deserialize_checkpoint(buf.str());
}

void check_parameters(const ParameterMap& params, const ModelConfig& expected) {
  const ModelWeights reference = init_model(expected, 0);
  for (const auto& [name, t] : reference.params) {
    const auto it = params.find(name);
    require(it != params.end(), ErrorKind::kLoad, "checkpoint lacks parameter " + name);
    require(it->second.shape() == t.shape(), ErrorKind::kLoad,
            "parameter " + name + " has shape " + shape_str(it->second.shape()) + ", config expects " +
                shape_str(t.shape()));
  }
  for (const auto& [name, t] : params)
    require(reference.params.count(name) == 1, ErrorKind::kLoad, "checkpoint has unexpected parameter " + name);
}

ModelWeights weights_of(const Checkpoint& ck) {
  check_parameters(ck.params, ck.config.model);
  return {ck.config.model, ck.params};
}

}  // namespace clhoi

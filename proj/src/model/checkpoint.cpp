#include "tsum/model/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "tsum/errors.hpp"

namespace tsum {

namespace {

constexpr char kMagic[8] = {'T', 'S', 'U', 'M', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DataError("checkpoint truncated reading " + what);
  return v;
}

void put_matrix(std::ostream& out, const Matrix& m) {
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
}

void get_matrix(std::istream& in, Matrix& m, const std::string& what) {
  if (!in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double))))
    throw DataError("checkpoint truncated reading " + what);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model, const nlohmann::json& extra) {
  nlohmann::json header;
  header["model"] = to_json(model.config());
  header["step"] = model.step();
  header["params"] = nlohmann::json::array();
  for (const auto& p : model.params())
    header["params"].push_back({{"name", p.name}, {"rows", p.value.rows()}, {"cols", p.value.cols()}});
  header["extra"] = extra.is_null() ? nlohmann::json::object() : extra;
  const std::string text = header.dump();

  // Write to a sibling file first so a crash never leaves a half checkpoint.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& p : model.params()) {
      put_matrix(out, p.value);
      put_matrix(out, p.m);
      put_matrix(out, p.v);
    }
    if (!out) throw DataError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw DataError(path.string() + " is not a tsum checkpoint");
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  const auto len = get<std::uint64_t>(in, "header length");
  if (len > (1ull << 32)) throw DataError("checkpoint header length is implausible");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw DataError("checkpoint truncated in header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint header: ") + e.what());
  }
  Model model(model_config_from_json(header.at("model")));
  const auto& plist = header.at("params");
  if (plist.size() != model.params().size())
    throw ConfigError("checkpoint holds " + std::to_string(plist.size()) + " parameters, config implies " +
                      std::to_string(model.params().size()));
  for (std::size_t i = 0; i < plist.size(); ++i) {
    auto& p = model.params()[i];
    const auto name = plist[i].at("name").get<std::string>();
    const auto rows = plist[i].at("rows").get<std::size_t>();
    const auto cols = plist[i].at("cols").get<std::size_t>();
    if (name != p.name || rows != p.value.rows() || cols != p.value.cols())
      throw ConfigError("checkpoint parameter " + name + " [" + std::to_string(rows) + "x" + std::to_string(cols) +
                        "] does not match " + p.name + " [" + std::to_string(p.value.rows()) + "x" +
                        std::to_string(p.value.cols()) + "]");
  }
  for (auto& p : model.params()) {
    get_matrix(in, p.value, p.name);
    get_matrix(in, p.m, p.name + " (m)");
    get_matrix(in, p.v, p.name + " (v)");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes after checkpoint tensors");
  model.set_step(header.at("step").get<std::uint64_t>());
  return Checkpoint{std::move(model), header.value("extra", nlohmann::json::object())};
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected) {
  auto ck = load_checkpoint(path);
  if (!(ck.model.config() == expected))
    throw ConfigError("checkpoint " + path.string() + " was trained with a different model config");
  return ck;
}

}  // namespace tsum

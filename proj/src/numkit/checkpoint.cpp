#include "cxr/numkit/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "cxr/error.hpp"

namespace cxr::numkit {

namespace {

constexpr char kMagic[8] = {'C', 'X', 'R', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char bytes[8];
  is.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t.tensor;
  return nullptr;
}

void save_checkpoint(const std::filesystem::path& path, std::span<const NamedParameter> params,
                     const nlohmann::json& meta) {
  nlohmann::json header;
  header["format"] = "cxr-checkpoint";
  header["version"] = 1;
  header["meta"] = meta;
  nlohmann::json entries = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& p : params) {
    entries.push_back({{"name", p.name}, {"shape", p.tensor.shape()}, {"offset", offset}, {"count", p.tensor.size()}});
    offset += p.tensor.size() * sizeof(double);
  }
  header["tensors"] = std::move(entries);
  const std::string text = header.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot write checkpoint " + path.string());
  os.write(kMagic, sizeof kMagic);
  write_u64(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& p : params) {
    const auto values = p.tensor.data();
    os.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  }
  if (!os) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint " + path.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0) throw DataError("not a checkpoint: " + path.string());
  const std::uint64_t header_len = read_u64(is);
  std::string text(header_len, '\0');
  is.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!is) throw DataError("truncated checkpoint header: " + path.string());

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad checkpoint header in " + path.string() + ": " + e.what());
  }
  const auto blob_start = is.tellg();
  Checkpoint ckpt;
  ckpt.meta = header.value("meta", nlohmann::json::object());
  for (const auto& entry : header.at("tensors")) {
    Shape shape = entry.at("shape").get<Shape>();
    const auto count = entry.at("count").get<std::uint64_t>();
    const auto offset = entry.at("offset").get<std::uint64_t>();
    if (count != element_count(shape)) throw DataError("checkpoint entry count/shape mismatch: " + path.string());
    std::vector<double> values(count);
    is.seekg(blob_start + static_cast<std::streamoff>(offset));
    is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) throw DataError("truncated checkpoint blob: " + path.string());
    ckpt.tensors.push_back({entry.at("name").get<std::string>(), Tensor::from(std::move(shape), std::move(values))});
  }
  return ckpt;
}

void restore_parameters(const Checkpoint& checkpoint, std::span<NamedParameter> params) {
  for (auto& p : params) {
    const Tensor* src = checkpoint.find(p.name);
    if (!src) throw DataError("checkpoint lacks parameter '" + p.name + "'");
    if (src->shape() != p.tensor.shape()) {
      throw ShapeError("checkpoint parameter '" + p.name + "' has shape " + shape_string(src->shape()) +
                       ", expected " + shape_string(p.tensor.shape()));
    }
    auto dst = p.tensor.mutable_data();
    std::copy(src->data().begin(), src->data().end(), dst.begin());
  }
}

}  // namespace cxr::numkit

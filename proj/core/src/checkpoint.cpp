#include "postcn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace postcn::nn {

namespace {

constexpr char kMagic[] = "PCKPT1\n";
constexpr size_t kMagicLen = 7;

void write_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.write(buf, 4);
}

std::uint32_t read_u32(std::istream& in) {
  char buf[4];
  in.read(buf, 4);
  if (!in) throw NnError("checkpoint: truncated file");
  std::uint32_t v;
  std::memcpy(&v, buf, 4);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& params,
                     const std::string& config_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NnError("checkpoint: cannot open for writing: " + path);
  out.write(kMagic, kMagicLen);
  write_u32(out, static_cast<std::uint32_t>(config_json.size()));
  out.write(config_json.data(), static_cast<std::streamsize>(config_json.size()));
  write_u32(out, static_cast<std::uint32_t>(params.params.size()));
  for (const auto& [name, tensor] : params.params) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, static_cast<std::uint32_t>(tensor.shape.size()));
    for (int d : tensor.shape) write_u32(out, static_cast<std::uint32_t>(d));
    out.write(reinterpret_cast<const char*>(tensor.values.data()),
              static_cast<std::streamsize>(tensor.values.size() * sizeof(double)));
  }
  if (!out) throw NnError("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NnError("checkpoint: cannot open: " + path);
  char magic[kMagicLen];
  in.read(magic, kMagicLen);
  if (!in || std::memcmp(magic, kMagic, kMagicLen) != 0) {
    throw NnError("checkpoint: bad magic in " + path);
  }
  Checkpoint ckpt;
  const auto config_len = read_u32(in);
  ckpt.config_json.resize(config_len);
  in.read(ckpt.config_json.data(), config_len);
  const auto count = read_u32(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto ndim = read_u32(in);
    std::vector<int> shape(ndim);
    for (auto& d : shape) d = static_cast<int>(read_u32(in));
    Tensor t = Tensor::zeros(shape);
    in.read(reinterpret_cast<char*>(t.values.data()),
            static_cast<std::streamsize>(t.values.size() * sizeof(double)));
    if (!in) throw NnError("checkpoint: truncated parameter data in " + path);
    ckpt.params.add(name, std::move(t));
  }
  return ckpt;
}

}  // namespace postcn::nn

#pragma once

#include <string>

#include "postcn/tensor.hpp"

namespace postcn::nn {

// Flat binary checkpoint, little-endian:
//   magic "PCKPT1\n"
//   u32 config length, config bytes (UTF-8 JSON)
//   u32 parameter count, then per parameter in name order:
//     u32 name length, name bytes
//     u32 ndim, u32 dims[ndim]
//     f64 values (row-major)
struct Checkpoint {
  std::string config_json;
  ParamStore params;
};

void save_checkpoint(const std::string& path, const ParamStore& params,
                     const std::string& config_json);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace postcn::nn

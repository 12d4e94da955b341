#pragma once

// Parameter checkpoints.
//
// Layout: 8 bytes magic "CXRCKPT1", uint64 little-endian header length H,
// H bytes of JSON header, then the blob of little-endian float64 values.
// The header lists {name, shape, offset, count} per tensor (offset in bytes
// from the start of the blob) plus a free-form "meta" object.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cxr/numkit/optimizer.hpp"

namespace cxr::numkit {

struct Checkpoint {
  nlohmann::json meta;
  std::vector<NamedParameter> tensors;

  const Tensor* find(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, std::span<const NamedParameter> params,
                     const nlohmann::json& meta = nlohmann::json::object());
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies checkpoint values into `params` by name. Every parameter must be
/// present with an identical shape.
void restore_parameters(const Checkpoint& checkpoint, std::span<NamedParameter> params);

}  // namespace cxr::numkit

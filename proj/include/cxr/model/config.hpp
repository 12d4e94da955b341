#pragma once

#include <cstddef>

#include <json.hpp>

namespace cxr::model {

struct ModelConfig {
  std::size_t image_size = 32;
  std::size_t patch_size = 8;
  std::size_t encoder_layers = 2;
  std::size_t encoder_width = 64;
  std::size_t encoder_heads = 4;
  std::size_t decoder_layers = 2;
  std::size_t decoder_width = 64;
  std::size_t decoder_heads = 4;
  /// Hidden width of the feed-forward blocks as a multiple of the model width.
  std::size_t mlp_ratio = 4;
  std::size_t vocab_size = 0;
  /// Cap on decoder text positions: BOS + context + SEP + report + EOS.
  std::size_t max_text_len = 192;
  std::size_t num_views = 2;
  bool classifier = false;
  std::size_t num_pathologies = 14;
  std::size_t num_classes = 4;

  std::size_t patches_per_view() const {
    return (image_size / patch_size) * (image_size / patch_size);
  }

  /// Throws UsageError describing the first violated constraint.
  void validate() const;
};

nlohmann::json to_json(const ModelConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace cxr::model

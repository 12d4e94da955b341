#pragma once

// Run configuration: every knob of the model, the optimizer, the curriculum
// and the feature switches. Text form is one `key = value` per line with
// `#` comments; a file starting with '{' is read as a JSON object instead.
// A `preset` key, if present, must come first and selects the base values.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cxr/model/config.hpp"

namespace cxr::training {

struct RunConfig {
  std::string preset = "toy";
  std::uint64_t seed = 1;

  std::size_t image_size = 32;
  std::size_t patch_size = 8;
  std::size_t encoder_layers = 2;
  std::size_t encoder_width = 64;
  std::size_t encoder_heads = 4;
  std::size_t decoder_layers = 2;
  std::size_t decoder_width = 64;
  std::size_t decoder_heads = 4;
  std::size_t mlp_ratio = 4;
  std::size_t max_text_len = 192;
  std::size_t max_context_tokens = 45;

  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  /// "constant", or "cosine": linear warmup then cosine decay to 0.
  std::string lr_schedule = "constant";
  double warmup_fraction = 0.05;
  double weight_decay = 0.0;
  std::size_t base_epochs = 8;
  std::size_t patience = 7;
  double cls_weight = 0.1;
  std::size_t val_samples = 256;
  std::size_t beam_size = 1;
  /// 0 evaluates the whole test split after training.
  std::size_t test_samples = 0;

  bool curriculum = true;
  std::size_t bins = 10;
  double fraction = 0.25;

  bool classifier = false;
  std::size_t num_views = 2;
  bool use_context = true;

  /// Throws UsageError on the first out-of-range value.
  void validate() const;
  model::ModelConfig model_config(std::size_t vocab_size) const;
};

struct ConfigKey {
  std::string name;
  std::string help;
};

/// Every accepted key, in file order.
const std::vector<ConfigKey>& config_keys();

/// "toy" or "full"; anything else throws UsageError.
RunConfig preset_config(const std::string& name);

/// Sets one key from its text value. Throws UsageError for unknown keys or
/// unparsable values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Parses the key=value or JSON form described above.
RunConfig parse_run_config(const std::string& text);
/// Accepts a preset name or a path to a config file.
RunConfig load_run_config(const std::string& name_or_path);

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);
/// key = value lines, parseable by parse_run_config.
std::string to_text(const RunConfig& config);

}  // namespace cxr::training

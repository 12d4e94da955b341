#include "cxr/model/config.hpp"

#include <string>

#include "cxr/corpus/study.hpp"
#include "cxr/error.hpp"

namespace cxr::model {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError("invalid model config: " + message);
}

}  // namespace

void ModelConfig::validate() const {
  require(patch_size > 0, "patch_size must be positive");
  require(image_size > 0 && image_size % patch_size == 0,
          "image_size " + std::to_string(image_size) + " is not divisible by patch_size " + std::to_string(patch_size));
  require(encoder_layers > 0 && decoder_layers > 0, "layer counts must be positive");
  require(encoder_heads > 0 && encoder_width % encoder_heads == 0, "encoder_width must divide by encoder_heads");
  require(decoder_heads > 0 && decoder_width % decoder_heads == 0, "decoder_width must divide by decoder_heads");
  require(mlp_ratio > 0, "mlp_ratio must be positive");
  require(vocab_size > 5, "vocab_size must exceed the 5 reserved tokens");
  require(max_text_len >= corpus::kMaxContextTokens + 3,
          "max_text_len must leave room for BOS, the 45-token context, SEP and one report token");
  require(num_views == 1 || num_views == 2, "num_views must be 1 or 2");
  require(num_pathologies > 0 && num_classes > 1, "classifier shape must be positive");
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"image_size", c.image_size},         {"patch_size", c.patch_size},
          {"encoder_layers", c.encoder_layers}, {"encoder_width", c.encoder_width},
          {"encoder_heads", c.encoder_heads},   {"decoder_layers", c.decoder_layers},
          {"decoder_width", c.decoder_width},   {"decoder_heads", c.decoder_heads},
          {"mlp_ratio", c.mlp_ratio},           {"vocab_size", c.vocab_size},
          {"max_text_len", c.max_text_len},     {"num_views", c.num_views},
          {"classifier", c.classifier},         {"num_pathologies", c.num_pathologies},
          {"num_classes", c.num_classes}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "image_size") c.image_size = value.get<std::size_t>();
    else if (key == "patch_size") c.patch_size = value.get<std::size_t>();
    else if (key == "encoder_layers") c.encoder_layers = value.get<std::size_t>();
    else if (key == "encoder_width") c.encoder_width = value.get<std::size_t>();
    else if (key == "encoder_heads") c.encoder_heads = value.get<std::size_t>();
    else if (key == "decoder_layers") c.decoder_layers = value.get<std::size_t>();
    else if (key == "decoder_width") c.decoder_width = value.get<std::size_t>();
    else if (key == "decoder_heads") c.decoder_heads = value.get<std::size_t>();
    else if (key == "mlp_ratio") c.mlp_ratio = value.get<std::size_t>();
    else if (key == "vocab_size") c.vocab_size = value.get<std::size_t>();
    else if (key == "max_text_len") c.max_text_len = value.get<std::size_t>();
    else if (key == "num_views") c.num_views = value.get<std::size_t>();
    else if (key == "classifier") c.classifier = value.get<bool>();
    else if (key == "num_pathologies") c.num_pathologies = value.get<std::size_t>();
    else if (key == "num_classes") c.num_classes = value.get<std::size_t>();
    else throw UsageError("unknown model config key '" + key + "'");
  }
  return c;
}

}  // namespace cxr::model

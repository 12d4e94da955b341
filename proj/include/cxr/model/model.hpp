#pragma once

// Image-captioning transformer: a patch encoder shared by all views, a fusion
// step that adds one learned embedding per view slot and concatenates the
// views, and a text decoder that reads the image tokens as a bidirectional
// prefix followed by causally masked text. An optional classifier maps the
// mean image token to 14 independent 4-way heads.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cxr/corpus/study.hpp"
#include "cxr/corpus/text.hpp"
#include "cxr/model/config.hpp"
#include "cxr/numkit/optimizer.hpp"
#include "cxr/numkit/random.hpp"
#include "cxr/numkit/tensor.hpp"

namespace cxr::model {

using numkit::Tensor;

struct ImageEncoding {
  /// {num_views * patches_per_view, decoder_width}.
  Tensor tokens;
  /// Mean over tokens, {decoder_width}.
  Tensor pooled;
};

struct Linear {
  Tensor weight;  // {in, out}
  Tensor bias;    // {out}
};

struct Norm {
  Tensor gain;
  Tensor bias;
};

struct Block {
  Norm ln1;
  Linear q, k, v, out;
  Norm ln2;
  Linear fc1, fc2;
};

/// Per-layer key/value rows of every position processed so far.
struct DecoderCache {
  std::vector<std::vector<double>> keys;
  std::vector<std::vector<double>> values;
  std::size_t length = 0;
  std::size_t text_length = 0;
};

struct GenerateOptions {
  std::size_t max_text_len = corpus::kMaxTextTokens;
  /// 1 = greedy.
  std::size_t beam_size = 1;
};

class Model {
 public:
  /// Validates the config and draws weights from normal(0, 0.02) with zero
  /// biases and unit layer-norm gains.
  Model(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  /// Every trainable tensor with a stable dotted name, in creation order.
  const std::vector<numkit::NamedParameter>& parameters() const { return params_; }
  std::vector<numkit::NamedParameter>& parameters() { return params_; }

  /// Raw pixel patches, {P, patch_size^2}, row-major over the patch grid,
  /// pixels scaled to [-1, 1]. Throws ShapeError when the image is not
  /// image_size square or the size does not divide by the patch.
  static Tensor patchify(const corpus::GrayImage& image, std::size_t patch_size);
  /// Projected patches plus positional embedding, {P, encoder_width}.
  Tensor embed_patches(const corpus::GrayImage& image) const;
  /// Encoder stack on one view, {P, encoder_width}.
  Tensor encode_view(const corpus::GrayImage& image) const;
  /// Throws ShapeError when the number of images differs from num_views.
  ImageEncoding encode_views(std::span<const corpus::GrayImage> images) const;

  /// Logits for text positions [first_row, n_txt), {n_txt - first_row, vocab}.
  /// Throws ShapeError when the text exceeds max_text_len or has an id
  /// outside the vocabulary.
  Tensor decode(const ImageEncoding& encoding, std::span<const corpus::TokenId> text, std::size_t first_row = 0) const;

  /// {num_pathologies, num_classes}. Throws UsageError when the classifier
  /// is disabled.
  Tensor classify(const ImageEncoding& encoding) const;

  /// Runs the image prefix through the decoder and returns the cache.
  DecoderCache start_cache(const ImageEncoding& encoding) const;
  /// Feeds one text token; returns the next-token logits.
  std::vector<double> step(DecoderCache& cache, corpus::TokenId token) const;

  /// Report tokens decoded after [BOS, context, SEP], without EOS. Stops at
  /// EOS or when the text reaches max_text_len positions.
  corpus::TokenSeq generate(const ImageEncoding& encoding, std::span<const corpus::TokenId> context,
                            const GenerateOptions& options = {}) const;

 private:
  Tensor add_param(numkit::Rng& rng, const std::string& name, numkit::Shape shape, double init_std,
                   double fill = 0.0);
  Linear add_linear(numkit::Rng& rng, const std::string& name, std::size_t in, std::size_t out);
  Norm add_norm(numkit::Rng& rng, const std::string& name, std::size_t width);
  Block add_block(numkit::Rng& rng, const std::string& name, std::size_t width);

  Tensor run_block(const Block& b, const Tensor& x, std::size_t heads, std::size_t prefix) const;
  void step_block(const Block& b, std::size_t layer, std::vector<double>& x, DecoderCache& cache) const;

  ModelConfig config_;
  std::vector<numkit::NamedParameter> params_;

  Linear patch_proj_;
  Tensor patch_pos_;
  std::vector<Block> encoder_;
  Norm encoder_ln_;
  Tensor view_embed_;
  Linear fusion_proj_;
  Norm fusion_ln_;
  Tensor token_embed_;
  Tensor text_pos_;
  std::vector<Block> decoder_;
  Norm decoder_ln_;
  Linear lm_head_;
  std::vector<Linear> heads_;
};

}  // namespace cxr::model

#include "cxr/model/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cxr/error.hpp"

namespace cxr::model {

using corpus::TokenId;
using corpus::Vocab;
using numkit::Shape;

namespace {

constexpr double kInitStd = 0.02;

Tensor linear(const Tensor& x, const Linear& l) { return numkit::add(numkit::matmul(x, l.weight), l.bias); }

Tensor norm(const Tensor& x, const Norm& n) { return numkit::layer_norm(x, n.gain, n.bias); }

// Row vector times a Linear, written to out.
void linear_row(std::span<const double> x, const Linear& l, std::vector<double>& out) {
  const std::size_t in = l.weight.dim(0), width = l.weight.dim(1);
  out.resize(width);
  numkit::kernels::matmul(x, l.weight.data(), out, 1, in, width);
  const auto b = l.bias.data();
  for (std::size_t j = 0; j < width; ++j) out[j] += b[j];
}

void norm_row(std::span<const double> x, const Norm& n, std::vector<double>& out) {
  out.resize(x.size());
  numkit::kernels::layer_norm_row(x, n.gain.data(), n.bias.data(), out);
}

}  // namespace

Model::Model(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  numkit::Rng rng(seed);
  const std::size_t de = config_.encoder_width, dd = config_.decoder_width;
  const std::size_t pp = config_.patch_size * config_.patch_size;

  patch_proj_ = add_linear(rng, "encoder.patch_proj", pp, de);
  patch_pos_ = add_param(rng, "encoder.pos_embed", {config_.patches_per_view(), de}, kInitStd);
  for (std::size_t l = 0; l < config_.encoder_layers; ++l)
    encoder_.push_back(add_block(rng, "encoder.layers." + std::to_string(l), de));
  encoder_ln_ = add_norm(rng, "encoder.ln_final", de);

  if (config_.num_views > 1) view_embed_ = add_param(rng, "fusion.view_embed", {config_.num_views, de}, kInitStd);
  fusion_proj_ = add_linear(rng, "fusion.proj", de, dd);
  fusion_ln_ = add_norm(rng, "fusion.ln", dd);

  token_embed_ = add_param(rng, "decoder.token_embed", {config_.vocab_size, dd}, kInitStd);
  text_pos_ = add_param(rng, "decoder.pos_embed", {config_.max_text_len, dd}, kInitStd);
  for (std::size_t l = 0; l < config_.decoder_layers; ++l)
    decoder_.push_back(add_block(rng, "decoder.layers." + std::to_string(l), dd));
  decoder_ln_ = add_norm(rng, "decoder.ln_final", dd);
  lm_head_ = add_linear(rng, "decoder.lm_head", dd, config_.vocab_size);

  if (config_.classifier) {
    for (std::size_t i = 0; i < config_.num_pathologies; ++i)
      heads_.push_back(add_linear(rng, "classifier.heads." + std::to_string(i), dd, config_.num_classes));
  }
}

Tensor Model::add_param(numkit::Rng& rng, const std::string& name, Shape shape, double init_std, double fill) {
  std::vector<double> values(numkit::element_count(shape), fill);
  if (init_std > 0)
    for (double& v : values) v = init_std * rng.normal();
  auto t = Tensor::from(std::move(shape), std::move(values), true);
  params_.push_back({name, t});
  return t;
}

Linear Model::add_linear(numkit::Rng& rng, const std::string& name, std::size_t in, std::size_t out) {
  Linear l;
  l.weight = add_param(rng, name + ".weight", {in, out}, kInitStd);
  l.bias = add_param(rng, name + ".bias", {out}, 0.0);
  return l;
}

Norm Model::add_norm(numkit::Rng& rng, const std::string& name, std::size_t width) {
  Norm n;
  n.gain = add_param(rng, name + ".gain", {width}, 0.0, 1.0);
  n.bias = add_param(rng, name + ".bias", {width}, 0.0);
  return n;
}

Block Model::add_block(numkit::Rng& rng, const std::string& name, std::size_t width) {
  Block b;
  b.ln1 = add_norm(rng, name + ".ln1", width);
  b.q = add_linear(rng, name + ".attn.q", width, width);
  b.k = add_linear(rng, name + ".attn.k", width, width);
  b.v = add_linear(rng, name + ".attn.v", width, width);
  b.out = add_linear(rng, name + ".attn.out", width, width);
  b.ln2 = add_norm(rng, name + ".ln2", width);
  b.fc1 = add_linear(rng, name + ".mlp.fc1", width, width * config_.mlp_ratio);
  b.fc2 = add_linear(rng, name + ".mlp.fc2", width * config_.mlp_ratio, width);
  return b;
}

Tensor Model::run_block(const Block& b, const Tensor& x, std::size_t heads, std::size_t prefix) const {
  const Tensor h = norm(x, b.ln1);
  const Tensor a = numkit::masked_attention(linear(h, b.q), linear(h, b.k), linear(h, b.v), heads, prefix);
  const Tensor y = numkit::add(x, linear(a, b.out));
  return numkit::add(y, linear(numkit::gelu(linear(norm(y, b.ln2), b.fc1)), b.fc2));
}

Tensor Model::patchify(const corpus::GrayImage& image, std::size_t p) {
  if (p == 0 || image.height != image.width || image.height % p != 0) {
    throw ShapeError("image of " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                     " cannot be cut into " + std::to_string(p) + "x" + std::to_string(p) + " patches");
  }
  if (image.pixels.size() != image.height * image.width) throw ShapeError("image buffer does not match its size");
  const std::size_t grid = image.width / p;
  std::vector<double> out(grid * grid * p * p);
  for (std::size_t gy = 0; gy < grid; ++gy)
    for (std::size_t gx = 0; gx < grid; ++gx)
      for (std::size_t y = 0; y < p; ++y)
        for (std::size_t x = 0; x < p; ++x) {
          const double px = image.pixels[(gy * p + y) * image.width + gx * p + x];
          out[((gy * grid + gx) * p + y) * p + x] = px / 127.5 - 1.0;
        }
  return Tensor::from({grid * grid, p * p}, std::move(out));
}

Tensor Model::embed_patches(const corpus::GrayImage& image) const {
  if (image.height != config_.image_size || image.width != config_.image_size) {
    throw ShapeError("expected a " + std::to_string(config_.image_size) + "x" + std::to_string(config_.image_size) +
                     " image, got " + std::to_string(image.height) + "x" + std::to_string(image.width));
  }
  return numkit::add(linear(patchify(image, config_.patch_size), patch_proj_), patch_pos_);
}

Tensor Model::encode_view(const corpus::GrayImage& image) const {
  Tensor x = embed_patches(image);
  const std::size_t p = config_.patches_per_view();
  for (const auto& b : encoder_) x = run_block(b, x, config_.encoder_heads, p);
  return norm(x, encoder_ln_);
}

ImageEncoding Model::encode_views(std::span<const corpus::GrayImage> images) const {
  if (images.size() != config_.num_views) {
    throw ShapeError("model expects " + std::to_string(config_.num_views) + " views, got " +
                     std::to_string(images.size()));
  }
  std::vector<Tensor> views;
  for (std::size_t v = 0; v < images.size(); ++v) {
    Tensor y = encode_view(images[v]);
    if (config_.num_views > 1) {
      y = numkit::add(y, numkit::reshape(numkit::slice_rows(view_embed_, v, 1), {config_.encoder_width}));
    }
    views.push_back(y);
  }
  ImageEncoding enc;
  enc.tokens = norm(linear(views.size() == 1 ? views[0] : numkit::concat_rows(views), fusion_proj_), fusion_ln_);
  enc.pooled = numkit::mean_rows(enc.tokens);
  return enc;
}

Tensor Model::decode(const ImageEncoding& encoding, std::span<const TokenId> text, std::size_t first_row) const {
  const std::size_t n_txt = text.size();
  if (n_txt == 0 || n_txt > config_.max_text_len) {
    throw ShapeError("decoder text length " + std::to_string(n_txt) + " outside [1, " +
                     std::to_string(config_.max_text_len) + "]");
  }
  if (first_row >= n_txt) throw ShapeError("first logit row past the end of the text");
  for (TokenId id : text) {
    if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size) {
      throw ShapeError("token id " + std::to_string(id) + " outside the vocabulary");
    }
  }
  const std::size_t n_img = encoding.tokens.dim(0);
  const Tensor emb = numkit::add(numkit::embedding_lookup(token_embed_, text), numkit::slice_rows(text_pos_, 0, n_txt));
  const Tensor parts[] = {encoding.tokens, emb};
  Tensor x = numkit::concat_rows(parts);
  for (const auto& b : decoder_) x = run_block(b, x, config_.decoder_heads, n_img);
  const Tensor rows = numkit::slice_rows(x, n_img + first_row, n_txt - first_row);
  return linear(norm(rows, decoder_ln_), lm_head_);
}

Tensor Model::classify(const ImageEncoding& encoding) const {
  if (!config_.classifier) throw UsageError("classifier is disabled in this model");
  const Tensor pooled = numkit::reshape(encoding.pooled, {1, config_.decoder_width});
  std::vector<Tensor> rows;
  for (const auto& h : heads_) rows.push_back(linear(pooled, h));
  return numkit::concat_rows(rows);
}

DecoderCache Model::start_cache(const ImageEncoding& encoding) const {
  numkit::NoGradGuard no_grad;
  DecoderCache cache;
  Tensor x = encoding.tokens;
  const std::size_t n_img = x.dim(0);
  for (const auto& b : decoder_) {
    const Tensor h = norm(x, b.ln1);
    const Tensor k = linear(h, b.k), v = linear(h, b.v);
    cache.keys.emplace_back(k.data().begin(), k.data().end());
    cache.values.emplace_back(v.data().begin(), v.data().end());
    x = run_block(b, x, config_.decoder_heads, n_img);
  }
  cache.length = n_img;
  return cache;
}

void Model::step_block(const Block& b, std::size_t layer, std::vector<double>& x, DecoderCache& cache) const {
  std::vector<double> h, q, k, v, o, f, g;
  norm_row(x, b.ln1, h);
  linear_row(h, b.q, q);
  linear_row(h, b.k, k);
  linear_row(h, b.v, v);
  auto& keys = cache.keys[layer];
  auto& values = cache.values[layer];
  keys.insert(keys.end(), k.begin(), k.end());
  values.insert(values.end(), v.begin(), v.end());
  std::vector<double> a(x.size());
  numkit::kernels::attend_one(q, keys, values, cache.length + 1, config_.decoder_heads, a);
  linear_row(a, b.out, o);
  for (std::size_t j = 0; j < x.size(); ++j) x[j] += o[j];
  norm_row(x, b.ln2, h);
  linear_row(h, b.fc1, f);
  for (double& e : f) e = numkit::kernels::gelu(e);
  linear_row(f, b.fc2, g);
  for (std::size_t j = 0; j < x.size(); ++j) x[j] += g[j];
}

std::vector<double> Model::step(DecoderCache& cache, TokenId token) const {
  if (cache.text_length >= config_.max_text_len) throw ShapeError("decoder cache is full");
  if (token < 0 || static_cast<std::size_t>(token) >= config_.vocab_size) {
    throw ShapeError("token id " + std::to_string(token) + " outside the vocabulary");
  }
  const std::size_t d = config_.decoder_width;
  std::vector<double> x(d);
  const auto emb = token_embed_.data().subspan(static_cast<std::size_t>(token) * d, d);
  const auto pos = text_pos_.data().subspan(cache.text_length * d, d);
  for (std::size_t j = 0; j < d; ++j) x[j] = emb[j] + pos[j];
  for (std::size_t l = 0; l < decoder_.size(); ++l) step_block(decoder_[l], l, x, cache);
  ++cache.length;
  ++cache.text_length;
  std::vector<double> h, logits;
  norm_row(x, decoder_ln_, h);
  linear_row(h, lm_head_, logits);
  return logits;
}

namespace {

// Generation never emits padding or the prompt markers.
void mask_reserved(std::vector<double>& logits) {
  for (TokenId id : {Vocab::kPad, Vocab::kBos, Vocab::kSep}) logits[static_cast<std::size_t>(id)] = -HUGE_VAL;
}

std::vector<double> log_softmax(std::vector<double> logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0;
  for (double v : logits) total += std::exp(v - peak);
  const double log_z = peak + std::log(total);
  for (double& v : logits) v -= log_z;
  return logits;
}

struct Hypothesis {
  DecoderCache cache;
  corpus::TokenSeq tokens;
  double score = 0;
  std::vector<double> logits;
};

}  // namespace

corpus::TokenSeq Model::generate(const ImageEncoding& encoding, std::span<const TokenId> context,
                                 const GenerateOptions& options) const {
  const std::size_t cap = std::min(options.max_text_len, config_.max_text_len);
  std::vector<TokenId> prompt{Vocab::kBos};
  prompt.insert(prompt.end(), context.begin(), context.end());
  prompt.push_back(Vocab::kSep);
  if (prompt.size() >= cap) return {};

  Hypothesis start;
  start.cache = start_cache(encoding);
  for (TokenId t : prompt) start.logits = step(start.cache, t);
  mask_reserved(start.logits);

  if (options.beam_size <= 1) {
    corpus::TokenSeq out;
    std::vector<double> logits = std::move(start.logits);
    DecoderCache& cache = start.cache;
    while (prompt.size() + out.size() < cap) {
      const auto next = static_cast<TokenId>(std::max_element(logits.begin(), logits.end()) - logits.begin());
      if (next == Vocab::kEos) break;
      out.push_back(next);
      if (prompt.size() + out.size() >= cap) break;
      logits = step(cache, next);
      mask_reserved(logits);
    }
    return out;
  }

  // Beam search over summed log-probabilities; finished hypotheses are
  // ranked by mean log-probability per emitted token (EOS included).
  const std::size_t k = options.beam_size;
  std::vector<Hypothesis> beams;
  beams.push_back(std::move(start));
  std::vector<std::pair<double, corpus::TokenSeq>> finished;
  while (!beams.empty() && finished.size() < k) {
    struct Candidate {
      double score;
      std::size_t beam;
      TokenId token;
    };
    std::vector<Candidate> candidates;
    for (std::size_t b = 0; b < beams.size(); ++b) {
      const auto lp = log_softmax(beams[b].logits);
      std::vector<TokenId> ids(lp.size());
      for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<TokenId>(i);
      const std::size_t take = std::min(k, ids.size());
      std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(take), ids.end(),
                        [&](TokenId a, TokenId c) {
                          return lp[static_cast<std::size_t>(a)] > lp[static_cast<std::size_t>(c)] ||
                                 (lp[static_cast<std::size_t>(a)] == lp[static_cast<std::size_t>(c)] && a < c);
                        });
      for (std::size_t i = 0; i < take; ++i)
        candidates.push_back({beams[b].score + lp[static_cast<std::size_t>(ids[i])], b, ids[i]});
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& c) { return a.score > c.score; });
    std::vector<Hypothesis> next;
    for (const auto& c : candidates) {
      if (next.size() + finished.size() >= k) break;
      const Hypothesis& parent = beams[c.beam];
      if (c.token == Vocab::kEos) {
        finished.emplace_back(c.score / static_cast<double>(parent.tokens.size() + 1), parent.tokens);
        continue;
      }
      Hypothesis h;
      h.tokens = parent.tokens;
      h.tokens.push_back(c.token);
      h.score = c.score;
      if (prompt.size() + h.tokens.size() >= cap) {
        finished.emplace_back(h.score / static_cast<double>(h.tokens.size()), std::move(h.tokens));
        continue;
      }
      h.cache = parent.cache;
      h.logits = step(h.cache, c.token);
      mask_reserved(h.logits);
      next.push_back(std::move(h));
    }
    beams = std::move(next);
  }
  if (finished.empty()) return {};
  std::size_t best = 0;
  for (std::size_t i = 1; i < finished.size(); ++i)
    if (finished[i].first > finished[best].first) best = i;
  return finished[best].second;
}

}  // namespace cxr::model

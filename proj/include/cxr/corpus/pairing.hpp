#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "cxr/corpus/study.hpp"
#include "cxr/corpus/text.hpp"

namespace cxr::corpus {

struct TrainingSample {
  std::string study_id;
  /// study_id + "#" + position among the study's samples.
  std::string sample_id;
  std::vector<ViewTag> view_tags;
  /// One entry per view fed to the model (1 or 2).
  std::vector<GrayImage> images;
  /// Context tokens without special markers, at most max_context_tokens.
  TokenSeq context;
  /// Report tokens without special markers, truncated so that
  /// BOS + context + SEP + report + EOS fits in max_text_tokens.
  TokenSeq report;
  /// Preprocessed full report, the reference for text metrics.
  std::string report_text;
  LabelRow labels = all_missing();
  /// Curriculum difficulty signal: report.size().
  std::size_t target_report_length = 0;
};

struct SampleOptions {
  bool use_context = true;
  std::size_t max_context_tokens = kMaxContextTokens;
  std::size_t max_text_tokens = kMaxTextTokens;
};

/// Indices of the AP/PA views, in order.
std::vector<std::size_t> single_view_indices(const std::vector<ViewTag>& tags);

/// Deterministic two-view pairs: every frontal with every non-frontal view,
/// then every pair of distinct frontal views; a lone frontal view pairs with
/// itself. No frontal view gives no pairs. LATERAL and LL are interchangeable.
std::vector<std::array<std::size_t, 2>> multi_view_pairs(const std::vector<ViewTag>& tags);

std::vector<TrainingSample> pair_views_single(const Study& study, const Vocab& vocab, const SampleOptions& options = {});
std::vector<TrainingSample> pair_views_multi(const Study& study, const Vocab& vocab, const SampleOptions& options = {});

/// Samples for every study of `split` (num_views 1 or 2). Studies without a
/// frontal view contribute nothing and are counted in `skipped`.
std::vector<TrainingSample> build_samples(const std::vector<Study>& studies, Split split, std::size_t num_views,
                                          const Vocab& vocab, const SampleOptions& options = {},
                                          std::size_t* skipped = nullptr);

/// Words of the reports and contexts of the training split.
Vocab build_vocab(const std::vector<Study>& studies);

}  // namespace cxr::corpus

#include "cxr/corpus/pairing.hpp"

#include <algorithm>

#include "cxr/error.hpp"
#include "cxr/log.hpp"

namespace cxr::corpus {

namespace {

TrainingSample make_sample(const Study& study, const Vocab& vocab, const SampleOptions& options, std::size_t index,
                           std::initializer_list<std::size_t> views) {
  TrainingSample s;
  s.study_id = study.study_id;
  s.sample_id = study.study_id + "#" + std::to_string(index);
  for (std::size_t v : views) {
    s.view_tags.push_back(study.views[v].tag);
    s.images.push_back(study.views[v].image);
  }
  if (options.use_context) s.context = tokenize(build_context(study, options.max_context_tokens), vocab);
  s.report_text = build_report(study);
  s.report = tokenize(s.report_text, vocab);
  // BOS, SEP and EOS take three slots of the joint budget.
  const std::size_t budget = options.max_text_tokens > s.context.size() + 3
                                 ? options.max_text_tokens - s.context.size() - 3
                                 : 0;
  if (budget == 0) throw DataError("text budget too small for study " + study.study_id);
  if (s.report.size() > budget) s.report.resize(budget);
  s.labels = study.labels;
  s.target_report_length = s.report.size();
  return s;
}

std::vector<ViewTag> tags_of(const Study& study) {
  std::vector<ViewTag> tags;
  for (const auto& v : study.views) tags.push_back(v.tag);
  return tags;
}

}  // namespace

std::vector<std::size_t> single_view_indices(const std::vector<ViewTag>& tags) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tags.size(); ++i)
    if (is_frontal(tags[i])) out.push_back(i);
  return out;
}

std::vector<std::array<std::size_t, 2>> multi_view_pairs(const std::vector<ViewTag>& tags) {
  const auto frontal = single_view_indices(tags);
  std::vector<std::array<std::size_t, 2>> pairs;
  for (std::size_t f : frontal)
    for (std::size_t l = 0; l < tags.size(); ++l)
      if (!is_frontal(tags[l])) pairs.push_back({f, l});
  for (std::size_t i = 0; i < frontal.size(); ++i)
    for (std::size_t j = i + 1; j < frontal.size(); ++j) pairs.push_back({frontal[i], frontal[j]});
  if (pairs.empty() && frontal.size() == 1) pairs.push_back({frontal[0], frontal[0]});
  return pairs;
}

std::vector<TrainingSample> pair_views_single(const Study& study, const Vocab& vocab, const SampleOptions& options) {
  std::vector<TrainingSample> out;
  for (std::size_t i : single_view_indices(tags_of(study)))
    out.push_back(make_sample(study, vocab, options, out.size(), {i}));
  if (out.empty()) log::debug("study " + study.study_id + " has no AP/PA view; no samples");
  return out;
}

std::vector<TrainingSample> pair_views_multi(const Study& study, const Vocab& vocab, const SampleOptions& options) {
  std::vector<TrainingSample> out;
  for (const auto& [a, b] : multi_view_pairs(tags_of(study)))
    out.push_back(make_sample(study, vocab, options, out.size(), {a, b}));
  if (out.empty()) log::debug("study " + study.study_id + " has no AP/PA view; no samples");
  return out;
}

std::vector<TrainingSample> build_samples(const std::vector<Study>& studies, Split split, std::size_t num_views,
                                          const Vocab& vocab, const SampleOptions& options, std::size_t* skipped) {
  if (num_views != 1 && num_views != 2) {
    throw DataError("number of views must be 1 or 2, got " + std::to_string(num_views));
  }
  std::vector<TrainingSample> out;
  std::size_t none = 0;
  for (const auto& study : studies) {
    if (study.split != split) continue;
    auto samples = num_views == 1 ? pair_views_single(study, vocab, options) : pair_views_multi(study, vocab, options);
    if (samples.empty()) ++none;
    for (auto& s : samples) out.push_back(std::move(s));
  }
  if (none > 0) {
    log::info(std::to_string(none) + " " + std::string(split_name(split)) + " studies without a frontal view skipped");
  }
  if (skipped) *skipped = none;
  return out;
}

Vocab build_vocab(const std::vector<Study>& studies) {
  std::vector<std::string> words;
  for (const auto& study : studies) {
    if (study.split != Split::Train || !has_report(study)) continue;
    for (auto& w : split_tokens(build_report(study))) words.push_back(std::move(w));
    for (auto& w : split_tokens(build_context(study))) words.push_back(std::move(w));
  }
  return Vocab::from_words(words);
}

}  // namespace cxr::corpus

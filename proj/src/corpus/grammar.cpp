#include "cxr/corpus/grammar.hpp"

#include <array>
#include <vector>

#include "cxr/corpus/text.hpp"

namespace cxr::corpus {

namespace {

struct ClauseSet {
  std::string_view keyword;
  std::string_view impression;  // positive, short
  std::string_view finding;     // positive, long
  std::string_view negative;
  std::string_view uncertain;
};

// clang-format off
constexpr std::array<ClauseSet, kNumPathologies> kClauses = {{
    {"mediastinum", "widened mediastinum.", "the mediastinum is widened compared to the prior study.",
     "no widening of the mediastinum.", "possible widening of the mediastinum."},
    {"cardiomegaly", "moderate cardiomegaly.", "there is moderate cardiomegaly with a stable cardiac silhouette.",
     "no cardiomegaly.", "possible mild cardiomegaly."},
    {"opacity", "bibasilar opacity.", "there is streaky opacity at the lung bases.",
     "no focal opacity.", "possible opacity at the right base."},
    {"nodule", "pulmonary nodule.", "a round calcified nodule is seen in the right upper lobe.",
     "no suspicious nodule.", "possible small nodule."},
    {"edema", "mild pulmonary edema.", "there is mild interstitial edema with vascular congestion.",
     "no pulmonary edema.", "possible mild edema."},
    {"consolidation", "focal consolidation.", "there is focal consolidation in the left lower lobe.",
     "no focal consolidation.", "possible early consolidation."},
    {"pneumonia", "right lower lobe pneumonia.", "the appearance is consistent with pneumonia in the right lung.",
     "no evidence of pneumonia.", "possible early pneumonia."},
    {"atelectasis", "bibasilar atelectasis.", "there is mild atelectasis at the left base.",
     "no atelectasis.", "possible minimal atelectasis."},
    {"pneumothorax", "small right pneumothorax.", "a small apical pneumothorax is present on the right.",
     "no pneumothorax.", "possible tiny pneumothorax."},
    {"effusion", "small left pleural effusion.",
     "there is a small left pleural effusion with blunting of the costophrenic angle.",
     "no pleural effusion.", "possible small effusion."},
    {"thickening", "pleural thickening.", "there is apical pleural thickening on the left.",
     "no pleural thickening.", "possible pleural thickening."},
    {"fracture", "rib fracture.", "a healing fracture of the left posterior rib is noted.",
     "no acute fracture.", "possible rib fracture."},
    {"catheter", "central venous catheter in place.", "a right internal jugular catheter terminates in the low svc.",
     "no catheter is seen.", "possible retained catheter fragment."},
    {"unremarkable", "unremarkable chest radiograph.", "the lungs are clear and the chest is unremarkable.",
     "the chest is not unremarkable.", "the chest is possibly unremarkable."},
}};
// clang-format on

constexpr std::string_view kAllClear = "no acute cardiopulmonary process.";

constexpr std::array<std::string_view, 2> kOpenings = {
    "single frontal view of the chest.",
    "frontal and lateral views of the chest were obtained.",
};

// Label-neutral sentences: none contains a keyword.
constexpr std::array<std::string_view, 8> kFillers = {
    "comparison is made to the prior study from ___.",
    "the cardiomediastinal and hilar contours are stable.",
    "the osseous structures are intact.",
    "lung volumes are low.",
    "there is no significant interval change since ___.",
    "the visualized upper abdomen is within normal limits.",
    "findings were communicated to dr. ___ by telephone.",
    "the patient is status post median sternotomy with intact wires.",
};

std::string sentence_case(std::string_view s) {
  std::string out(s);
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = static_cast<char>(out[0] - 'a' + 'A');
  return out;
}

void append_sentence(std::string& text, std::string_view sentence) {
  if (!text.empty()) text.push_back(' ');
  text += sentence_case(sentence);
}

bool contains_run(const std::vector<std::string>& words, std::size_t begin, std::size_t end,
                  const std::vector<std::string>& needle) {
  if (needle.empty() || end - begin < needle.size()) return false;
  for (std::size_t i = begin; i + needle.size() <= end; ++i) {
    bool hit = true;
    for (std::size_t k = 0; k < needle.size() && hit; ++k) hit = words[i + k] == needle[k];
    if (hit) return true;
  }
  return false;
}

int class_rank(LabelClass c) {
  switch (c) {
    case LabelClass::Positive: return 3;
    case LabelClass::Uncertain: return 2;
    case LabelClass::Negative: return 1;
    case LabelClass::Missing: return 0;
  }
  return 0;
}

}  // namespace

std::string_view all_clear_sentence() { return kAllClear; }

RenderedSections render_sections(const LabelRow& labels, numkit::Rng& rng, const RenderOptions& options) {
  std::array<std::size_t, kNumPathologies> filler_pick{};
  for (auto& f : filler_pick) f = rng.below(kFillers.size());

  const bool any_positive = positive_count(labels) > 0;
  std::string impression;
  for (std::size_t i = 0; i < kNumPathologies; ++i)
    if (labels[i] == LabelClass::Positive) append_sentence(impression, kClauses[i].impression);
  if (!any_positive) append_sentence(impression, kAllClear);

  std::string findings;
  append_sentence(findings, kOpenings[options.has_lateral_view ? 1 : 0]);
  for (std::size_t i = 0; i < kNumPathologies; ++i) {
    switch (labels[i]) {
      case LabelClass::Positive:
        append_sentence(findings, kClauses[i].finding);
        append_sentence(findings, kFillers[filler_pick[i]]);
        break;
      case LabelClass::Negative: append_sentence(findings, kClauses[i].negative); break;
      case LabelClass::Uncertain: append_sentence(findings, kClauses[i].uncertain); break;
      case LabelClass::Missing: break;
    }
  }

  RenderedSections out;
  if (options.include_impression && !options.include_findings) {
    // The impression alone has to carry the negative and uncertain mentions.
    for (std::size_t i = 0; i < kNumPathologies; ++i) {
      if (labels[i] == LabelClass::Negative) append_sentence(impression, kClauses[i].negative);
      if (labels[i] == LabelClass::Uncertain) append_sentence(impression, kClauses[i].uncertain);
    }
  }
  if (options.include_impression) out.impression = std::move(impression);
  if (options.include_findings || !options.include_impression) out.findings = std::move(findings);
  return out;
}

std::string render_report(const LabelRow& labels, numkit::Rng& rng, const RenderOptions& options) {
  const auto sections = render_sections(labels, rng, options);
  return "impression : " + preprocess_text(sections.impression.value_or("")) +
         " findings : " + preprocess_text(sections.findings.value_or(""));
}

LabelRow rule_label(std::string_view report_text) {
  static const auto keywords = [] {
    std::array<std::vector<std::string>, kNumPathologies> k;
    for (std::size_t i = 0; i < kNumPathologies; ++i) k[i] = split_tokens(kClauses[i].keyword);
    return k;
  }();
  static const std::vector<std::string> cannot_be_excluded{"cannot", "be", "excluded"};

  const auto words = split_tokens(preprocess_text(report_text));
  LabelRow labels = all_missing();
  std::size_t begin = 0;
  while (begin < words.size()) {
    std::size_t end = begin;
    while (end < words.size() && words[end] != "." && words[end] != ":") ++end;

    bool uncertain = contains_run(words, begin, end, cannot_be_excluded);
    bool negated = false;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& w = words[i];
      uncertain = uncertain || w == "possible" || w == "possibly";
      negated = negated || w == "no" || w == "not" || w == "without";
    }
    const LabelClass mention = uncertain ? LabelClass::Uncertain : negated ? LabelClass::Negative : LabelClass::Positive;
    for (std::size_t p = 0; p < kNumPathologies; ++p) {
      if (contains_run(words, begin, end, keywords[p]) && class_rank(mention) > class_rank(labels[p])) {
        labels[p] = mention;
      }
    }
    begin = end + 1;
  }
  return labels;
}

}  // namespace cxr::corpus

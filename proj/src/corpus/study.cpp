#include "cxr/corpus/study.hpp"

#include <array>

#include "cxr/corpus/text.hpp"
#include "cxr/error.hpp"

namespace cxr::corpus {

namespace {

constexpr std::array<std::string_view, 4> kViewNames = {"AP", "PA", "LATERAL", "LL"};
constexpr std::array<std::string_view, 3> kSplitNames = {"train", "validation", "test"};
constexpr std::array<std::string_view, 4> kClassNames = {"Positive", "Negative", "Uncertain", "Missing"};

std::string clean_section(const std::optional<std::string>& section) {
  return section ? preprocess_text(*section) : std::string();
}

}  // namespace

std::string_view label_class_name(LabelClass c) { return kClassNames[static_cast<std::size_t>(c)]; }

std::optional<LabelClass> parse_label_class(std::string_view name) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i)
    if (kClassNames[i] == name) return static_cast<LabelClass>(i);
  return std::nullopt;
}

std::string_view view_tag_name(ViewTag tag) { return kViewNames[static_cast<std::size_t>(tag)]; }

std::optional<ViewTag> parse_view_tag(std::string_view name) {
  for (std::size_t i = 0; i < kViewNames.size(); ++i)
    if (kViewNames[i] == name) return static_cast<ViewTag>(i);
  return std::nullopt;
}

std::string_view split_name(Split split) { return kSplitNames[static_cast<std::size_t>(split)]; }

std::optional<Split> parse_split(std::string_view name) {
  for (std::size_t i = 0; i < kSplitNames.size(); ++i)
    if (kSplitNames[i] == name) return static_cast<Split>(i);
  return std::nullopt;
}

bool has_report(const Study& study) {
  return !clean_section(study.sections.impression).empty() || !clean_section(study.sections.findings).empty();
}

std::string build_report(const Study& study) {
  const std::string impression = clean_section(study.sections.impression);
  const std::string findings = clean_section(study.sections.findings);
  if (impression.empty() && findings.empty()) {
    throw DataError("study " + study.study_id + " has neither impression nor findings");
  }
  return "impression : " + impression + " findings : " + findings;
}

std::string build_context(const Study& study, std::size_t max_tokens) {
  std::string joined = clean_section(study.sections.indication);
  const std::string history = clean_section(study.sections.history);
  if (!history.empty()) {
    if (!joined.empty()) joined.push_back(' ');
    joined += history;
  }
  auto words = split_tokens(joined);
  if (words.size() <= max_tokens) return joined;
  words.resize(max_tokens);
  return join_tokens(words);
}

}  // namespace cxr::corpus

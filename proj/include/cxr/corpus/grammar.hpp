#pragma once

// Sentence-template grammar that renders a label row into report sections,
// and the rule labeler that inverts it. Each pathology owns one keyword that
// appears in every clause about it and in no other sentence of the grammar;
// the clause polarity is carried by cue words ("no", "not", "possible").

#include <optional>
#include <string>
#include <string_view>

#include "cxr/corpus/labels.hpp"
#include "cxr/numkit/random.hpp"

namespace cxr::corpus {

struct RenderOptions {
  bool include_impression = true;
  bool include_findings = true;
  /// Selects the opening sentence of the findings.
  bool has_lateral_view = true;
};

struct RenderedSections {
  std::optional<std::string> impression;
  std::optional<std::string> findings;
};

/// Raw (sentence-case, de-identification markers as "___") section text.
/// Every non-Missing label is stated in at least one included section.
/// Consumes a fixed number of draws from `rng` regardless of the labels.
RenderedSections render_sections(const LabelRow& labels, numkit::Rng& rng, const RenderOptions& options = {});

/// Convenience: both sections rendered and joined the way build_report does.
std::string render_report(const LabelRow& labels, numkit::Rng& rng, const RenderOptions& options = {});

/// The impression sentence used when no label is Positive.
std::string_view all_clear_sentence();

/// Labels any report text. Pathologies never mentioned come out Missing; when
/// one is mentioned several times, Positive beats Uncertain beats Negative.
LabelRow rule_label(std::string_view report_text);

}  // namespace cxr::corpus

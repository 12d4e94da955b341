#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cxr/corpus/study.hpp"
#include "cxr/numkit/random.hpp"

namespace cxr::corpus {

struct DifficultyProfile {
  std::string name;
  /// Standard deviation of the additive pixel noise, in [0,1] intensity units.
  double noise_sigma = 0.05;
  /// Probability that the impression (resp. findings) section is absent.
  double drop_impression = 0.08;
  double drop_findings = 0.12;
};

/// "clean", "standard" or "noisy"; anything else throws DataError.
DifficultyProfile difficulty_profile(std::string_view name);

/// Skewed prior: half of the pathologies are positive in under 5% of studies.
/// No Finding is Positive exactly when no finding other than support devices is.
LabelRow sample_label_row(numkit::Rng& rng);

/// Per-pathology probability of a Positive draw (No Finding is derived).
double positive_prior(std::size_t pathology);

/// Grid cell (row-major in a 4x4 layout) holding the glyph of `pathology`
/// for a view of kind `tag`. Glyph shape is pathology % 4; across all view
/// kinds a (cell, shape) pair names exactly one pathology.
std::size_t glyph_cell(std::size_t pathology, ViewTag tag);

/// Background gradient plus one glyph per Positive pathology plus noise.
GrayImage render_view(const LabelRow& labels, ViewTag tag, std::size_t image_size, double noise_sigma,
                      numkit::Rng& rng);

/// Deterministic in (n_studies, seed, profile, image_size). image_size must
/// be a positive multiple of 4. Throws DataError for n_studies == 0 or an
/// unknown profile.
std::vector<Study> generate_synthetic_corpus(std::size_t n_studies, std::uint64_t seed,
                                             std::string_view profile = "standard", std::size_t image_size = 32);

}  // namespace cxr::corpus

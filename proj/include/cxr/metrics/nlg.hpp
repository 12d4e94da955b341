#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace cxr::metrics {

using Words = std::vector<std::string>;

inline constexpr double kMeteorAlpha = 0.9;
inline constexpr double kMeteorBeta = 3.0;
inline constexpr double kMeteorGamma = 0.5;

struct NgramStats {
  /// Clipped matches and candidate n-gram totals for n = 1..4.
  std::array<double, 4> matched{};
  std::array<double, 4> total{};
  double candidate_length = 0;
  double reference_length = 0;
};

/// Pooled statistics of a corpus with one reference per candidate.
NgramStats corpus_ngram_stats(const std::vector<Words>& candidates, const std::vector<Words>& references);

double brevity_penalty(double candidate_length, double reference_length);

/// Corpus BLEU-n, n in 1..4. Throws DataError for an empty corpus or
/// mismatched sizes.
double bleu(const std::vector<Words>& candidates, const std::vector<Words>& references, std::size_t n);
/// BLEU-1..4 from one pass over the corpus.
std::array<double, 4> bleu_1_to_4(const std::vector<Words>& candidates, const std::vector<Words>& references);

std::size_t lcs_length(const Words& a, const Words& b);
/// LCS F-measure with beta = 1; 0 when either side is empty.
double rouge_l(const Words& candidate, const Words& reference);

struct Alignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  /// (candidate index, reference index), sorted by candidate index.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

/// Exact-match one-to-one alignment built by repeatedly taking the longest
/// run of consecutive unmatched tokens equal on both sides (ties: smallest
/// candidate start, then smallest reference start). Chunks are maximal runs
/// of pairs adjacent on both sides.
Alignment meteor_align(const Words& candidate, const Words& reference);
double meteor(const Words& candidate, const Words& reference);
/// Score from alignment counts; 0 when matches == 0.
double meteor_from_counts(std::size_t matches, std::size_t chunks, std::size_t candidate_length,
                          std::size_t reference_length);

/// Checkpoint selection score M/4 + R/4 + (B1+B2+B3+B4)/8.
double avg_nlg(double meteor_score, double rouge_l_score, const std::array<double, 4>& bleu_scores);

}  // namespace cxr::metrics

#include "cxr/metrics/nlg.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cxr/error.hpp"

namespace cxr::metrics {

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> ngram_counts(const Words& w, std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  for (std::size_t i = 0; i + n <= w.size(); ++i) ++counts[Ngram(w.begin() + i, w.begin() + i + n)];
  return counts;
}

void check_corpus(const std::vector<Words>& candidates, const std::vector<Words>& references) {
  if (candidates.empty()) throw DataError("BLEU needs a non-empty corpus");
  if (candidates.size() != references.size()) {
    throw DataError("BLEU got " + std::to_string(candidates.size()) + " candidates and " +
                    std::to_string(references.size()) + " references");
  }
}

}  // namespace

NgramStats corpus_ngram_stats(const std::vector<Words>& candidates, const std::vector<Words>& references) {
  check_corpus(candidates, references);
  NgramStats s;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    s.candidate_length += static_cast<double>(candidates[i].size());
    s.reference_length += static_cast<double>(references[i].size());
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto cand = ngram_counts(candidates[i], n);
      const auto ref = ngram_counts(references[i], n);
      for (const auto& [gram, count] : cand) {
        const auto it = ref.find(gram);
        s.matched[n - 1] += static_cast<double>(std::min(count, it == ref.end() ? 0 : it->second));
        s.total[n - 1] += static_cast<double>(count);
      }
    }
  }
  return s;
}

double brevity_penalty(double c, double r) {
  if (c > r) return 1.0;
  if (c == 0) return 0.0;
  return std::exp(1.0 - r / c);
}

namespace {

double bleu_from_stats(const NgramStats& s, std::size_t n) {
  double log_sum = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (s.matched[k] == 0) return 0.0;
    log_sum += std::log(s.matched[k] / s.total[k]);
  }
  return brevity_penalty(s.candidate_length, s.reference_length) * std::exp(log_sum / static_cast<double>(n));
}

}  // namespace

double bleu(const std::vector<Words>& candidates, const std::vector<Words>& references, std::size_t n) {
  if (n < 1 || n > 4) throw DataError("BLEU order must be in 1..4, got " + std::to_string(n));
  return bleu_from_stats(corpus_ngram_stats(candidates, references), n);
}

std::array<double, 4> bleu_1_to_4(const std::vector<Words>& candidates, const std::vector<Words>& references) {
  const auto stats = corpus_ngram_stats(candidates, references);
  return {bleu_from_stats(stats, 1), bleu_from_stats(stats, 2), bleu_from_stats(stats, 3), bleu_from_stats(stats, 4)};
}

std::size_t lcs_length(const Words& a, const Words& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const Words& candidate, const Words& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const double l = static_cast<double>(lcs_length(candidate, reference));
  if (l == 0) return 0.0;
  const double p = l / static_cast<double>(candidate.size());
  const double r = l / static_cast<double>(reference.size());
  return 2 * p * r / (p + r);
}

Alignment meteor_align(const Words& candidate, const Words& reference) {
  const std::size_t nc = candidate.size(), nr = reference.size();
  std::vector<char> used_c(nc, 0), used_r(nr, 0);
  Alignment out;
  // run[i][j]: length of the unmatched common run starting at (i, j).
  std::vector<std::size_t> run((nc + 1) * (nr + 1));
  for (;;) {
    std::size_t best = 0, bi = 0, bj = 0;
    for (std::size_t i = nc; i-- > 0;) {
      for (std::size_t j = nr; j-- > 0;) {
        const bool ok = !used_c[i] && !used_r[j] && candidate[i] == reference[j];
        run[i * (nr + 1) + j] = ok ? 1 + run[(i + 1) * (nr + 1) + j + 1] : 0;
      }
    }
    for (std::size_t i = 0; i < nc; ++i) {
      for (std::size_t j = 0; j < nr; ++j) {
        const std::size_t len = run[i * (nr + 1) + j];
        if (len > best) best = len, bi = i, bj = j;
      }
    }
    if (best == 0) break;
    for (std::size_t k = 0; k < best; ++k) {
      used_c[bi + k] = used_r[bj + k] = 1;
      out.pairs.emplace_back(bi + k, bj + k);
    }
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  out.matches = out.pairs.size();
  for (std::size_t k = 0; k < out.pairs.size(); ++k) {
    const bool continues = k > 0 && out.pairs[k].first == out.pairs[k - 1].first + 1 &&
                           out.pairs[k].second == out.pairs[k - 1].second + 1;
    if (!continues) ++out.chunks;
  }
  return out;
}

double meteor_from_counts(std::size_t matches, std::size_t chunks, std::size_t candidate_length,
                          std::size_t reference_length) {
  if (matches == 0) return 0.0;
  const double m = static_cast<double>(matches);
  const double p = m / static_cast<double>(candidate_length);
  const double r = m / static_cast<double>(reference_length);
  const double f_mean = p * r / (kMeteorAlpha * p + (1 - kMeteorAlpha) * r);
  const double penalty = kMeteorGamma * std::pow(static_cast<double>(chunks) / m, kMeteorBeta);
  return f_mean * (1 - penalty);
}

double meteor(const Words& candidate, const Words& reference) {
  const auto a = meteor_align(candidate, reference);
  return meteor_from_counts(a.matches, a.chunks, candidate.size(), reference.size());
}

double avg_nlg(double m, double r, const std::array<double, 4>& b) {
  return m / 4 + r / 4 + (b[0] + b[1] + b[2] + b[3]) / 8;
}

}  // namespace cxr::metrics

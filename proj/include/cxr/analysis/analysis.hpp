#pragma once

// Post-hoc analyses over per-sample evaluation records: metric curves by
// target length, length histograms and run-vs-run comparisons.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cxr/corpus/labels.hpp"

namespace cxr::analysis {

inline constexpr std::size_t kMaxLength = 192;

/// One scored sample, as written to samples.jsonl by evaluation.
struct SampleRecord {
  std::string sample_id;
  std::size_t target_length = 0;
  std::size_t generated_length = 0;
  double meteor = 0;
  double rouge_l = 0;
  corpus::LabelRow truth = corpus::all_missing();
  corpus::LabelRow predicted = corpus::all_missing();
};

/// Throws DataError with the file and line on malformed records.
std::vector<SampleRecord> load_samples(const std::filesystem::path& path);

enum class Metric { Meteor, RougeL, F1Micro };
std::string metric_name(Metric m);

/// Lengths in [lo, hi); the last bucket also holds lengths above the cap.
struct LengthBucket {
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::size_t n = 0;
  std::optional<double> meteor;
  std::optional<double> rouge_l;
  /// Micro F1 over the bucket's label rows.
  std::optional<double> f1_micro;

  std::optional<double> value(Metric m) const;
};

struct LengthBucketSeries {
  std::size_t width = 25;
  std::size_t max_length = kMaxLength;
  std::vector<LengthBucket> buckets;
};

/// Buckets [0, w), [w, 2w), ... covering [0, max_length]; empty buckets
/// keep n = 0 and no means. Throws UsageError for width 0.
LengthBucketSeries metrics_by_length(std::span<const SampleRecord> samples, std::size_t width = 25,
                                     std::size_t max_length = kMaxLength);

struct LengthHistograms {
  std::size_t bin_width = 1;
  std::size_t max_length = kMaxLength;
  /// Lower edge of each bin.
  std::vector<std::size_t> edges;
  std::vector<std::size_t> generated;
  std::vector<std::size_t> target;
  /// Values above max_length, counted in the last bin.
  std::size_t truncated_generated = 0;
  std::size_t truncated_target = 0;
};

LengthHistograms length_histograms(std::span<const std::size_t> generated, std::span<const std::size_t> target,
                                   std::size_t bin_width = 1, std::size_t max_length = kMaxLength);

/// Mean of a metric over the ceil(N/4) samples with the longest targets
/// (stable order on ties). Empty input gives nullopt.
std::optional<double> longest_quartile_mean(std::span<const SampleRecord> samples, Metric metric);

struct TTest {
  double t = 0;
  double df = 0;
  /// Two-sided. Zero variance gives 1 for a zero mean difference and 0
  /// otherwise; fewer than two observations per side gives nullopt.
  std::optional<double> p_value;
};

/// Paired t-test on b - a. Throws DataError on length mismatch.
TTest paired_t_test(std::span<const double> a, std::span<const double> b);
/// Welch's unequal-variance t-test of mean(b) - mean(a).
TTest welch_t_test(std::span<const double> a, std::span<const double> b);

struct BucketComparison {
  /// "lo-hi" with hi exclusive, or "all".
  std::string bucket;
  /// mean over seeds of b minus mean over seeds of a.
  std::optional<double> delta;
  TTest test;
  std::size_t seeds_a = 0;
  std::size_t seeds_b = 0;
};

struct ABReport {
  Metric metric = Metric::RougeL;
  bool paired = false;
  std::vector<BucketComparison> rows;
};

/// Per-bucket comparison of runs a and b (one series per seed). Seeds are
/// paired by position when both sides have the same count, otherwise the
/// Welch test is used. A seed whose bucket is empty is left out of that
/// bucket. The "all" row uses the sample-weighted mean of each seed.
ABReport ab_compare(std::span<const LengthBucketSeries> run_a, std::span<const LengthBucketSeries> run_b,
                    Metric metric);

/// bucket_lo,bucket_hi,n,meteor,rouge_l,f1_micro (empty field for no mean).
std::string bucket_csv(const LengthBucketSeries& series);
/// length,count_generated,count_target.
std::string histogram_csv(const LengthHistograms& h);
/// bucket,delta,p_value.
std::string ab_csv(const ABReport& report);
nlohmann::json to_json(const ABReport& report);

}  // namespace cxr::analysis

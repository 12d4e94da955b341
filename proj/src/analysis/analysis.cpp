#include "cxr/analysis/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "cxr/error.hpp"
#include "cxr/metrics/clinical.hpp"

namespace cxr::analysis {

namespace {

using nlohmann::json;

corpus::LabelRow parse_row(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != corpus::kNumPathologies) throw DataError(where + ": label row must have 14 entries");
  corpus::LabelRow row;
  for (std::size_t i = 0; i < row.size(); ++i) {
    const auto c = j[i].is_string() ? corpus::parse_label_class(j[i].get<std::string>()) : std::nullopt;
    if (!c) throw DataError(where + ": bad label class at position " + std::to_string(i));
    row[i] = *c;
  }
  return row;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance_of(std::span<const double> x, double mean) {
  double s = 0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / static_cast<double>(x.size() - 1);
}

std::optional<double> two_sided_p(double t, double df) {
  if (!(df > 0)) return std::nullopt;
  boost::math::students_t dist(df);
  return 2 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

TTest degenerate(double mean_diff, double df) {
  TTest r;
  r.df = df;
  if (mean_diff == 0) {
    r.t = 0;
    r.p_value = 1.0;
  } else {
    r.t = std::copysign(std::numeric_limits<double>::infinity(), mean_diff);
    r.p_value = 0.0;
  }
  return r;
}

std::optional<double> seed_overall(const LengthBucketSeries& s, Metric m) {
  double total = 0;
  std::size_t n = 0;
  for (const auto& b : s.buckets) {
    if (const auto v = b.value(m)) {
      total += *v * static_cast<double>(b.n);
      n += b.n;
    }
  }
  if (n == 0) return std::nullopt;
  return total / static_cast<double>(n);
}

BucketComparison compare(std::string label, const std::vector<std::optional<double>>& a,
                         const std::vector<std::optional<double>>& b, bool paired) {
  BucketComparison row;
  row.bucket = std::move(label);
  std::vector<double> xa, xb;
  if (paired) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] && b[i]) {
        xa.push_back(*a[i]);
        xb.push_back(*b[i]);
      }
    }
  } else {
    for (const auto& v : a) if (v) xa.push_back(*v);
    for (const auto& v : b) if (v) xb.push_back(*v);
  }
  row.seeds_a = xa.size();
  row.seeds_b = xb.size();
  if (xa.empty() || xb.empty()) return row;
  row.delta = mean_of(xb) - mean_of(xa);
  row.test = paired ? paired_t_test(xa, xb) : welch_t_test(xa, xb);
  return row;
}

}  // namespace

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::Meteor:
      return "meteor";
    case Metric::RougeL:
      return "rouge_l";
    case Metric::F1Micro:
      return "f1_micro";
  }
  return "?";
}

std::optional<double> LengthBucket::value(Metric m) const {
  switch (m) {
    case Metric::Meteor:
      return meteor;
    case Metric::RougeL:
      return rouge_l;
    case Metric::F1Micro:
      return f1_micro;
  }
  return std::nullopt;
}

std::vector<SampleRecord> load_samples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<SampleRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    try {
      const json j = json::parse(line);
      SampleRecord r;
      r.sample_id = j.value("sample_id", std::string());
      r.target_length = j.at("target_length").get<std::size_t>();
      r.generated_length = j.at("generated_length").get<std::size_t>();
      r.meteor = j.at("meteor").get<double>();
      r.rouge_l = j.at("rouge_l").get<double>();
      r.truth = parse_row(j.at("labels"), where);
      r.predicted = parse_row(j.at("predicted_labels"), where);
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return out;
}

LengthBucketSeries metrics_by_length(std::span<const SampleRecord> samples, std::size_t width,
                                     std::size_t max_length) {
  if (width == 0) throw UsageError("bucket width must be positive");
  LengthBucketSeries series;
  series.width = width;
  series.max_length = max_length;
  const std::size_t count = max_length / width + 1;
  std::vector<std::vector<const SampleRecord*>> members(count);
  for (const auto& s : samples) members[std::min(s.target_length, max_length) / width].push_back(&s);
  for (std::size_t k = 0; k < count; ++k) {
    LengthBucket b;
    b.lo = k * width;
    b.hi = std::min((k + 1) * width, max_length + 1);
    b.n = members[k].size();
    if (b.n > 0) {
      double m = 0, r = 0;
      corpus::LabelGrid pred, truth;
      for (const SampleRecord* s : members[k]) {
        m += s->meteor;
        r += s->rouge_l;
        pred.push_back(s->predicted);
        truth.push_back(s->truth);
      }
      b.meteor = m / static_cast<double>(b.n);
      b.rouge_l = r / static_cast<double>(b.n);
      b.f1_micro = metrics::clinical_f1(pred, truth).micro;
    }
    series.buckets.push_back(b);
  }
  return series;
}

LengthHistograms length_histograms(std::span<const std::size_t> generated, std::span<const std::size_t> target,
                                   std::size_t bin_width, std::size_t max_length) {
  if (bin_width == 0) throw UsageError("bin width must be positive");
  LengthHistograms h;
  h.bin_width = bin_width;
  h.max_length = max_length;
  const std::size_t count = max_length / bin_width + 1;
  for (std::size_t k = 0; k < count; ++k) h.edges.push_back(k * bin_width);
  h.generated.assign(count, 0);
  h.target.assign(count, 0);
  for (std::size_t v : generated) {
    h.truncated_generated += v > max_length;
    ++h.generated[std::min(v, max_length) / bin_width];
  }
  for (std::size_t v : target) {
    h.truncated_target += v > max_length;
    ++h.target[std::min(v, max_length) / bin_width];
  }
  return h;
}

std::optional<double> longest_quartile_mean(std::span<const SampleRecord> samples, Metric metric) {
  if (samples.empty()) return std::nullopt;
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return samples[a].target_length > samples[b].target_length; });
  const std::size_t k = (samples.size() + 3) / 4;
  std::vector<SampleRecord> top;
  for (std::size_t i = 0; i < k; ++i) top.push_back(samples[idx[i]]);
  if (metric == Metric::F1Micro) {
    corpus::LabelGrid pred, truth;
    for (const auto& s : top) {
      pred.push_back(s.predicted);
      truth.push_back(s.truth);
    }
    return metrics::clinical_f1(pred, truth).micro;
  }
  double total = 0;
  for (const auto& s : top) total += metric == Metric::Meteor ? s.meteor : s.rouge_l;
  return total / static_cast<double>(k);
}

TTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("paired t-test needs equal sample counts");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = b[i] - a[i];
  TTest r;
  if (d.size() < 2) return r;
  const double n = static_cast<double>(d.size());
  const double m = mean_of(d);
  const double var = variance_of(d, m);
  if (var == 0) return degenerate(m, n - 1);
  r.df = n - 1;
  r.t = m / std::sqrt(var / n);
  r.p_value = two_sided_p(r.t, r.df);
  return r;
}

TTest welch_t_test(std::span<const double> a, std::span<const double> b) {
  TTest r;
  if (a.size() < 2 || b.size() < 2) return r;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double ma = mean_of(a), mb = mean_of(b);
  const double va = variance_of(a, ma) / na, vb = variance_of(b, mb) / nb;
  if (va + vb == 0) return degenerate(mb - ma, na + nb - 2);
  r.t = (mb - ma) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) / (va * va / (na - 1) + vb * vb / (nb - 1));
  r.p_value = two_sided_p(r.t, r.df);
  return r;
}

ABReport ab_compare(std::span<const LengthBucketSeries> run_a, std::span<const LengthBucketSeries> run_b,
                    Metric metric) {
  if (run_a.empty() || run_b.empty()) throw DataError("comparison needs at least one run per side");
  const auto& ref = run_a.front();
  for (const auto* side : {&run_a, &run_b}) {
    for (const auto& s : *side) {
      if (s.width != ref.width || s.max_length != ref.max_length || s.buckets.size() != ref.buckets.size()) {
        throw DataError("runs use different length buckets");
      }
    }
  }
  ABReport report;
  report.metric = metric;
  report.paired = run_a.size() == run_b.size();
  for (std::size_t k = 0; k < ref.buckets.size(); ++k) {
    std::vector<std::optional<double>> a, b;
    for (const auto& s : run_a) a.push_back(s.buckets[k].value(metric));
    for (const auto& s : run_b) b.push_back(s.buckets[k].value(metric));
    report.rows.push_back(compare(std::to_string(ref.buckets[k].lo) + "-" + std::to_string(ref.buckets[k].hi), a, b,
                                  report.paired));
  }
  std::vector<std::optional<double>> a, b;
  for (const auto& s : run_a) a.push_back(seed_overall(s, metric));
  for (const auto& s : run_b) b.push_back(seed_overall(s, metric));
  report.rows.push_back(compare("all", a, b, report.paired));
  return report;
}

std::string bucket_csv(const LengthBucketSeries& series) {
  std::string out = "bucket_lo,bucket_hi,n,meteor,rouge_l,f1_micro\n";
  for (const auto& b : series.buckets) {
    out += std::to_string(b.lo) + "," + std::to_string(b.hi) + "," + std::to_string(b.n) + "," + fmt(b.meteor) + "," +
           fmt(b.rouge_l) + "," + fmt(b.f1_micro) + "\n";
  }
  return out;
}

std::string histogram_csv(const LengthHistograms& h) {
  std::string out = "length,count_generated,count_target\n";
  for (std::size_t k = 0; k < h.edges.size(); ++k) {
    out += std::to_string(h.edges[k]) + "," + std::to_string(h.generated[k]) + "," + std::to_string(h.target[k]) + "\n";
  }
  return out;
}

std::string ab_csv(const ABReport& report) {
  std::string out = "bucket,delta,p_value\n";
  for (const auto& r : report.rows) out += r.bucket + "," + fmt(r.delta) + "," + fmt(r.test.p_value) + "\n";
  return out;
}

nlohmann::json to_json(const ABReport& report) {
  json rows = json::array();
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  for (const auto& r : report.rows) {
    rows.push_back({{"bucket", r.bucket},
                    {"delta", opt(r.delta)},
                    {"t", std::isfinite(r.test.t) ? json(r.test.t) : json(r.test.t > 0 ? "inf" : "-inf")},
                    {"df", r.test.df},
                    {"p_value", opt(r.test.p_value)},
                    {"seeds_a", r.seeds_a},
                    {"seeds_b", r.seeds_b}});
  }
  return {{"metric", metric_name(report.metric)},
          {"test", report.paired ? "paired" : "welch"},
          {"rows", rows}};
}

}  // namespace cxr::analysis

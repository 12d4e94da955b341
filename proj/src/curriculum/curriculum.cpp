#include "cxr/curriculum/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "cxr/error.hpp"

namespace cxr::curriculum {

std::vector<std::size_t> assign_bins(std::span<const std::size_t> lengths, std::size_t b) {
  const std::size_t n = lengths.size();
  if (b == 0 || b > n) {
    throw DataError("number of bins must be in [1, " + std::to_string(n) + "], got " + std::to_string(b));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return lengths[a] < lengths[c]; });
  std::vector<std::size_t> bins(n);
  for (std::size_t k = 0; k < b; ++k) {
    for (std::size_t pos = k * n / b; pos < (k + 1) * n / b; ++pos) bins[order[pos]] = k + 1;
  }
  return bins;
}

std::vector<double> bin_weights(std::size_t b, std::size_t current_bin) {
  if (current_bin < 1 || current_bin > b) {
    throw DataError("current bin " + std::to_string(current_bin) + " outside [1, " + std::to_string(b) + "]");
  }
  std::vector<double> w(b);
  for (std::size_t i = 1; i <= b; ++i) {
    const std::size_t gap = i > current_bin ? i - current_bin : current_bin - i;
    w[i - 1] = 1.0 / (1.0 + static_cast<double>(gap));
  }
  return w;
}

std::vector<double> epoch_weights(std::span<const std::size_t> bins, std::size_t b, std::size_t current_bin) {
  const auto raw = bin_weights(b, current_bin);
  std::vector<double> w(bins.size());
  double total = 0;
  for (std::size_t s = 0; s < bins.size(); ++s) {
    if (bins[s] < 1 || bins[s] > b) throw DataError("sample bin out of range: " + std::to_string(bins[s]));
    w[s] = raw[bins[s] - 1];
    total += w[s];
  }
  for (double& x : w) x /= total;
  return w;
}

std::vector<double> bin_mass(std::span<const std::size_t> bins, std::size_t b, std::size_t current_bin) {
  const auto w = epoch_weights(bins, b, current_bin);
  std::vector<double> mass(b, 0.0);
  for (std::size_t s = 0; s < bins.size(); ++s) mass[bins[s] - 1] += w[s];
  return mass;
}

std::size_t epoch_to_bin(std::size_t epoch, std::size_t b, std::size_t total_epochs) {
  if (epoch < 1 || epoch > total_epochs) {
    throw DataError("epoch " + std::to_string(epoch) + " outside [1, " + std::to_string(total_epochs) + "]");
  }
  return 1 + (epoch - 1) * b / total_epochs;
}

std::size_t sample_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

std::vector<std::size_t> sample_without_replacement(std::span<const double> weights, std::size_t count,
                                                    numkit::Rng& rng) {
  const std::size_t n = weights.size();
  if (count == 0 || count > n) {
    throw DataError("cannot draw " + std::to_string(count) + " of " + std::to_string(n) + " samples");
  }
  double total = 0;
  for (double w : weights) {
    if (!(w >= 0) || !std::isfinite(w)) throw DataError("sampling weights must be finite and non-negative");
    total += w;
  }
  if (!(total > 0)) throw DataError("sampling weights must have a positive sum");

  // Key log(u)/w: larger keys first; zero weight gives -inf.
  std::vector<std::pair<double, std::size_t>> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform_open();
    keys[i] = {weights[i] > 0 ? std::log(u) / weights[i] : -HUGE_VAL, i};
  }
  auto by_key = [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); };
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(count), keys.end(), by_key);
  std::vector<std::size_t> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = keys[k].second;
  return out;
}

std::vector<std::size_t> sample_epoch(std::span<const double> weights, double fraction, numkit::Rng& rng) {
  const std::size_t count = sample_count(fraction, weights.size());
  if (count == 0) throw DataError("fraction " + std::to_string(fraction) + " of " + std::to_string(weights.size()) +
                                  " samples selects nothing");
  return sample_without_replacement(weights, count, rng);
}

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) { return numkit::derive_seed(seed, epoch); }

CurriculumSchedule::CurriculumSchedule(std::span<const std::size_t> lengths, const ScheduleConfig& config)
    : config_(config) {
  if (!(config.fraction > 0 && config.fraction <= 1)) {
    throw DataError("curriculum fraction must be in (0, 1], got " + std::to_string(config.fraction));
  }
  if (config.base_epochs == 0) throw DataError("curriculum needs at least one base epoch");
  bins_ = assign_bins(lengths, config.bins);
  per_epoch_ = sample_count(config.fraction, lengths.size());
  if (per_epoch_ == 0) {
    throw DataError("fraction " + std::to_string(config.fraction) + " of " + std::to_string(lengths.size()) +
                    " samples selects nothing");
  }
  total_epochs_ = static_cast<std::size_t>(std::llround(static_cast<double>(config.base_epochs) / config.fraction));
}

std::size_t CurriculumSchedule::current_bin(std::size_t epoch) const {
  return epoch_to_bin(epoch, config_.bins, total_epochs_);
}

std::vector<double> CurriculumSchedule::weights(std::size_t epoch) const {
  return epoch_weights(bins_, config_.bins, current_bin(epoch));
}

std::vector<std::size_t> CurriculumSchedule::sample(std::size_t epoch, std::uint64_t seed) const {
  numkit::Rng rng(epoch_seed(seed, epoch));
  return sample_without_replacement(weights(epoch), per_epoch_, rng);
}

std::size_t CurriculumSchedule::epoch_budget(std::size_t epoch) const {
  if (epoch < 1 || epoch > total_epochs_) {
    throw DataError("epoch " + std::to_string(epoch) + " outside [1, " + std::to_string(total_epochs_) + "]");
  }
  const double fn = config_.fraction * static_cast<double>(bins_.size());
  auto upto = [&](std::size_t e) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(e) * fn + 1e-9));
  };
  return upto(epoch) - upto(epoch - 1);
}

std::vector<std::size_t> CurriculumSchedule::sample_budgeted(std::size_t epoch, std::uint64_t seed) const {
  numkit::Rng rng(epoch_seed(seed, epoch));
  return sample_without_replacement(weights(epoch), epoch_budget(epoch), rng);
}

std::string CurriculumSchedule::csv(std::uint64_t seed) const {
  std::string out = "epoch,bin,expected_mass,realized_count\n";
  char buf[96];
  for (std::size_t e = 1; e <= total_epochs_; ++e) {
    const auto mass = bin_mass(bins_, config_.bins, current_bin(e));
    std::vector<std::size_t> realized(config_.bins, 0);
    for (std::size_t s : sample(e, seed)) ++realized[bins_[s] - 1];
    for (std::size_t k = 0; k < config_.bins; ++k) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%zu\n", e, k + 1, mass[k], realized[k]);
      out += buf;
    }
  }
  return out;
}

}  // namespace cxr::curriculum

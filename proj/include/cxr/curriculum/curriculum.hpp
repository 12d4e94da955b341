#pragma once

// Length-based curriculum: samples are split into b equal-size bins by target
// length, each epoch focuses on one bin i_e, and a fraction f of the data is
// drawn without replacement with per-sample weight 1/(1+|bin - i_e|).
// Bin and epoch indices are 1-based throughout.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cxr/numkit/random.hpp"

namespace cxr::curriculum {

/// Sorts by length (stable in the original index) and cuts the order into b
/// consecutive chunks whose sizes differ by at most one. Returns the bin of
/// each sample. Throws DataError when b == 0 or b > N.
std::vector<std::size_t> assign_bins(std::span<const std::size_t> lengths, std::size_t b);

/// Raw bin weights 1/(1+|i - i_e|) for i = 1..b. Throws when i_e is outside [1,b].
std::vector<double> bin_weights(std::size_t b, std::size_t current_bin);

/// Per-sample weights normalized to sum 1 over the dataset.
std::vector<double> epoch_weights(std::span<const std::size_t> bins, std::size_t b, std::size_t current_bin);

/// Share of the total weight held by each bin (index 0 is bin 1).
std::vector<double> bin_mass(std::span<const std::size_t> bins, std::size_t b, std::size_t current_bin);

/// Linear ramp 1 + floor((e-1) b / E). Throws when e is outside [1,E].
std::size_t epoch_to_bin(std::size_t epoch, std::size_t b, std::size_t total_epochs);

/// floor(f N), guarded against representation error (0.29 * 100 is 29).
std::size_t sample_count(double fraction, std::size_t n);

/// `count` distinct indices drawn by weighted sampling without replacement,
/// using exponential keys log(u)/w and keeping the largest. Zero-weight
/// indices are only drawn once every positive-weight index is taken.
/// Result is in draw order. Throws when count is 0 or exceeds N, or when the
/// weights do not have a positive sum.
std::vector<std::size_t> sample_without_replacement(std::span<const double> weights, std::size_t count,
                                                    numkit::Rng& rng);

/// sample_without_replacement with count = sample_count(f, N).
std::vector<std::size_t> sample_epoch(std::span<const double> weights, double fraction, numkit::Rng& rng);

/// Random stream of one epoch: derive_seed(seed, epoch).
std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch);

struct ScheduleConfig {
  std::size_t bins = 10;
  double fraction = 0.25;
  /// Epochs of the equivalent full-data run; the curriculum runs N_e / f.
  std::size_t base_epochs = 30;
};

class CurriculumSchedule {
 public:
  /// Throws DataError for f outside (0,1], b > N, or floor(f N) == 0.
  CurriculumSchedule(std::span<const std::size_t> lengths, const ScheduleConfig& config);

  std::size_t num_bins() const { return config_.bins; }
  double fraction() const { return config_.fraction; }
  /// E = round(N_e / f).
  std::size_t total_epochs() const { return total_epochs_; }
  std::size_t samples_per_epoch() const { return per_epoch_; }
  std::size_t dataset_size() const { return bins_.size(); }
  const std::vector<std::size_t>& bins() const { return bins_; }

  std::size_t current_bin(std::size_t epoch) const;
  std::vector<double> weights(std::size_t epoch) const;
  /// Deterministic in (seed, epoch).
  std::vector<std::size_t> sample(std::size_t epoch, std::uint64_t seed) const;

  /// Draw size of epoch e that keeps the run's total at exactly
  /// floor(E f N): floor(e f N) - floor((e-1) f N). Equals
  /// samples_per_epoch() whenever f N is an integer.
  std::size_t epoch_budget(std::size_t epoch) const;
  /// Like sample() but drawing epoch_budget(epoch) indices.
  std::vector<std::size_t> sample_budgeted(std::size_t epoch, std::uint64_t seed) const;

  /// Header "epoch,bin,expected_mass,realized_count", one row per epoch and
  /// bin, for epochs 1..E.
  std::string csv(std::uint64_t seed) const;

 private:
  ScheduleConfig config_;
  std::vector<std::size_t> bins_;
  std::size_t total_epochs_ = 0;
  std::size_t per_epoch_ = 0;
};

}  // namespace cxr::curriculum

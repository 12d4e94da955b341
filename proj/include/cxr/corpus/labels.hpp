#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cxr::corpus {

inline constexpr std::size_t kNumPathologies = 14;
inline constexpr std::size_t kNumLabelClasses = 4;

/// Fixed pathology order used everywhere (label vectors, per-label tables).
inline constexpr std::array<std::string_view, kNumPathologies> kPathologyNames = {
    "Enlarged Cardiomediastinum",
    "Cardiomegaly",
    "Lung Opacity",
    "Lung Lesion",
    "Edema",
    "Consolidation",
    "Pneumonia",
    "Atelectasis",
    "Pneumothorax",
    "Pleural Effusion",
    "Pleural Other",
    "Fracture",
    "Support Devices",
    "No Finding",
};

enum class LabelClass : std::uint8_t { Positive = 0, Negative = 1, Uncertain = 2, Missing = 3 };

using LabelRow = std::array<LabelClass, kNumPathologies>;
/// N samples x 14 pathologies.
using LabelGrid = std::vector<LabelRow>;

std::string_view label_class_name(LabelClass c);
std::optional<LabelClass> parse_label_class(std::string_view name);

inline LabelRow all_missing() {
  LabelRow row;
  row.fill(LabelClass::Missing);
  return row;
}

inline std::size_t positive_count(const LabelRow& row) {
  std::size_t n = 0;
  for (auto c : row) n += c == LabelClass::Positive;
  return n;
}

}  // namespace cxr::corpus

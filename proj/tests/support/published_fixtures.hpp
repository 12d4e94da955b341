#pragma once

// Published per-label and NLG scores used as regression fixtures.

#include <array>
#include <string_view>

namespace cxr::testing {

struct PerLabelRow {
  std::string_view category;
  double f1, precision, recall;
  double support;
};

inline constexpr std::array<PerLabelRow, 14> kPerLabelTable = {{
    {"Enlarged Cardiomediastinum", 0.088, 0.203, 0.057, 230},
    {"Cardiomegaly", 0.642, 0.627, 0.658, 1168},
    {"Lung Opacity", 0.478, 0.532, 0.434, 1131},
    {"Lung Lesion", 0.148, 0.333, 0.096, 178},
    {"Edema", 0.461, 0.492, 0.433, 695},
    {"Consolidation", 0.162, 0.262, 0.118, 187},
    {"Pneumonia", 0.259, 0.282, 0.239, 213},
    {"Atelectasis", 0.432, 0.463, 0.404, 890},
    {"Pneumothorax", 0.310, 0.310, 0.310, 71},
    {"Pleural Effusion", 0.669, 0.676, 0.661, 1116},
    {"Pleural Other", 0.113, 0.296, 0.070, 114},
    {"Fracture", 0.033, 0.143, 0.019, 161},
    {"Support Devices", 0.766, 0.776, 0.757, 1327},
    {"No Finding", 0.317, 0.244, 0.451, 193},
}};

inline constexpr double kReportedMacroF1 = 0.349;
inline constexpr double kReportedMicroF1 = 0.537;

struct NlgRow {
  std::array<double, 4> bleu;
  double rouge_l;
  double meteor;
};

/// Best configuration: multi-view, context and curriculum.
inline constexpr NlgRow kBestNlgRow = {{0.403, 0.286, 0.215, 0.168}, 0.312, 0.369};

}  // namespace cxr::testing

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cxr/corpus/labels.hpp"

namespace cxr::corpus {

inline constexpr std::size_t kMaxContextTokens = 45;
inline constexpr std::size_t kMaxTextTokens = 192;

enum class ViewTag : std::uint8_t { AP, PA, Lateral, LL };
enum class Split : std::uint8_t { Train, Validation, Test };

std::string_view view_tag_name(ViewTag tag);
std::optional<ViewTag> parse_view_tag(std::string_view name);
inline bool is_frontal(ViewTag tag) { return tag == ViewTag::AP || tag == ViewTag::PA; }

std::string_view split_name(Split split);
std::optional<Split> parse_split(std::string_view name);

/// 8-bit grayscale, row-major.
struct GrayImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;

  bool operator==(const GrayImage&) const = default;
};

struct View {
  ViewTag tag = ViewTag::PA;
  GrayImage image;
  /// Relative to the manifest directory.
  std::string image_path;
};

/// Raw report sections; nullopt when the section is absent.
struct Sections {
  std::optional<std::string> impression;
  std::optional<std::string> findings;
  std::optional<std::string> indication;
  std::optional<std::string> history;
};

struct Study {
  std::string study_id;
  std::string patient_id;
  std::vector<View> views;
  Sections sections;
  LabelRow labels = all_missing();
  Split split = Split::Train;
};

/// True when impression or findings is non-empty after preprocessing.
bool has_report(const Study& study);

/// "impression : <impression> findings : <findings>" from preprocessed
/// sections; an absent section renders empty. Throws DataError when both
/// are absent.
std::string build_report(const Study& study);

/// Preprocessed "indication history", cut to the first max_tokens tokens.
std::string build_context(const Study& study, std::size_t max_tokens = kMaxContextTokens);

}  // namespace cxr::corpus

#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "cxr/corpus/study.hpp"

namespace cxr::corpus {

/// Binary P5, maxval 255.
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
GrayImage read_pgm(const std::filesystem::path& path);

/// One manifest record (keys sorted, images referenced by path only).
nlohmann::json study_to_json(const Study& study);
/// Fills everything but the view images.
Study study_from_json(const nlohmann::json& record);

/// Writes `path` as JSON lines and every view image under its image_path,
/// relative to the manifest directory.
void save_manifest(const std::vector<Study>& corpus, const std::filesystem::path& path);

struct LoadedCorpus {
  std::vector<Study> studies;
  /// Records dropped for having neither impression nor findings.
  std::size_t dropped = 0;
};

/// Throws DataError naming the line for malformed records and naming the
/// file for missing or unreadable images.
LoadedCorpus load_manifest(const std::filesystem::path& path);

}  // namespace cxr::corpus

#include "cxr/corpus/manifest.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "cxr/error.hpp"
#include "cxr/log.hpp"

namespace cxr::corpus {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kSectionKeys[] = {"findings", "history", "impression", "indication"};

std::optional<std::string>* section_slot(Sections& s, std::string_view key) {
  if (key == "impression") return &s.impression;
  if (key == "findings") return &s.findings;
  if (key == "indication") return &s.indication;
  if (key == "history") return &s.history;
  return nullptr;
}

const std::optional<std::string>& section_slot(const Sections& s, std::string_view key) {
  return *section_slot(const_cast<Sections&>(s), key);
}

// Reads the next whitespace-delimited header field, skipping '#' comments.
std::string pgm_field(std::istream& in) {
  std::string field;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!field.empty()) break;
      continue;
    }
    field.push_back(static_cast<char>(c));
  }
  return field;
}

std::size_t pgm_number(std::istream& in, const fs::path& path) {
  const std::string field = pgm_field(in);
  if (field.empty() || field.find_first_not_of("0123456789") != std::string::npos) {
    throw DataError("malformed PGM header in " + path.string());
  }
  return std::stoul(field);
}

}  // namespace

void write_pgm(const fs::path& path, const GrayImage& image) {
  if (image.pixels.size() != image.height * image.width) {
    throw DataError("image buffer does not match its size for " + path.string());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write image " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw DataError("cannot write image " + path.string());
}

GrayImage read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing image file " + path.string());
  if (pgm_field(in) != "P5") throw DataError("not a binary PGM (P5) image: " + path.string());
  GrayImage img;
  img.width = pgm_number(in, path);
  img.height = pgm_number(in, path);
  const std::size_t maxval = pgm_number(in, path);
  if (maxval != 255) throw DataError("PGM maxval must be 255 in " + path.string());
  img.pixels.resize(img.width * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (static_cast<std::size_t>(in.gcount()) != img.pixels.size()) {
    throw DataError("truncated PGM pixel data in " + path.string());
  }
  return img;
}

json study_to_json(const Study& study) {
  json sections = json::object();
  for (const char* key : kSectionKeys) {
    const auto& value = section_slot(study.sections, key);
    if (value) sections[key] = *value;
  }
  json labels = json::array();
  for (LabelClass c : study.labels) labels.push_back(std::string(label_class_name(c)));
  json views = json::array();
  for (const auto& v : study.views) {
    views.push_back({{"image_path", v.image_path}, {"tag", std::string(view_tag_name(v.tag))}});
  }
  return {{"labels", labels},
          {"patient_id", study.patient_id},
          {"sections", sections},
          {"split", std::string(split_name(study.split))},
          {"study_id", study.study_id},
          {"views", views}};
}

Study study_from_json(const json& record) {
  if (!record.is_object()) throw DataError("record is not a JSON object");
  Study s;
  s.study_id = record.at("study_id").get<std::string>();
  s.patient_id = record.at("patient_id").get<std::string>();
  const auto split = parse_split(record.at("split").get<std::string>());
  if (!split) throw DataError("unknown split '" + record.at("split").get<std::string>() + "'");
  s.split = *split;

  for (const auto& [key, value] : record.at("sections").items()) {
    auto* slot = section_slot(s.sections, key);
    if (!slot) throw DataError("unknown section '" + key + "'");
    if (!value.is_null()) *slot = value.get<std::string>();
  }

  const auto& labels = record.at("labels");
  if (!labels.is_array() || labels.size() != kNumPathologies) {
    throw DataError("labels must be an array of " + std::to_string(kNumPathologies) + " entries");
  }
  for (std::size_t i = 0; i < kNumPathologies; ++i) {
    const auto name = labels[i].get<std::string>();
    const auto c = parse_label_class(name);
    if (!c) throw DataError("unknown label class '" + name + "'");
    s.labels[i] = *c;
  }

  const auto& views = record.at("views");
  if (!views.is_array() || views.empty()) throw DataError("study " + s.study_id + " has no views");
  for (const auto& v : views) {
    View view;
    const auto tag_name = v.at("tag").get<std::string>();
    const auto tag = parse_view_tag(tag_name);
    if (!tag) throw DataError("unknown view tag '" + tag_name + "'");
    view.tag = *tag;
    view.image_path = v.at("image_path").get<std::string>();
    if (fs::path(view.image_path).is_absolute()) throw DataError("image path must be relative: " + view.image_path);
    s.views.push_back(std::move(view));
  }
  return s;
}

void save_manifest(const std::vector<Study>& corpus, const fs::path& path) {
  const fs::path root = path.parent_path();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write manifest " + path.string());
  for (const auto& study : corpus) {
    for (const auto& view : study.views) {
      const fs::path image = root / view.image_path;
      fs::create_directories(image.parent_path());
      write_pgm(image, view.image);
    }
    out << study_to_json(study).dump() << '\n';
  }
  if (!out) throw DataError("cannot write manifest " + path.string());
}

LoadedCorpus load_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest " + path.string());
  const fs::path root = path.parent_path();
  LoadedCorpus loaded;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Study study;
    try {
      study = study_from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed record: " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!has_report(study)) {
      ++loaded.dropped;
      continue;
    }
    for (auto& view : study.views) view.image = read_pgm(root / view.image_path);
    loaded.studies.push_back(std::move(study));
  }
  if (loaded.dropped > 0) {
    log::info(std::to_string(loaded.dropped) + " studies without impression or findings dropped");
  }
  return loaded;
}

}  // namespace cxr::corpus

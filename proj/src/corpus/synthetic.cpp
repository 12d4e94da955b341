#include "cxr/corpus/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "cxr/corpus/grammar.hpp"
#include "cxr/error.hpp"

namespace cxr::corpus {

namespace {

using numkit::Rng;

constexpr std::size_t kNoFinding = 13;
constexpr std::size_t kSupportDevices = 12;
constexpr std::size_t kGrid = 4;

constexpr std::array<double, kNumPathologies> kPositivePrior = {
    0.04, 0.30, 0.30, 0.04, 0.20, 0.04, 0.04, 0.25, 0.03, 0.30, 0.02, 0.03, 0.35, 0.0};
constexpr std::array<double, kNumPathologies> kNegativePrior = {
    0.05, 0.15, 0.05, 0.03, 0.15, 0.20, 0.10, 0.03, 0.25, 0.25, 0.02, 0.05, 0.02, 0.0};
constexpr double kUncertainPrior = 0.03;

struct Hint {
  std::size_t pathology;
  std::string_view indication;
};

constexpr std::array<Hint, 6> kIndicationHints = {{
    {12, "Picc."},
    {6, "Fever, evaluate for pneumonia."},
    {4, "Evaluate for fluid overload."},
    {8, "Post procedure, to assess for pneumothorax."},
    {9, "Evaluate for effusion."},
    {11, "Fall, rib pain."},
}};

constexpr std::array<std::string_view, 5> kIndications = {
    "Shortness of breath.", "Chest pain.", "Cough.", "Evaluate for acute process.", "___ year old with dyspnea.",
};

constexpr std::array<std::string_view, 5> kHistories = {
    "___ year old man with copd.", "___ year old woman with chf.", "History of smoking.", "Status post cabg.",
    "___ year old with fever.",
};

struct ViewSet {
  double cumulative;
  std::vector<ViewTag> tags;
};

const std::vector<ViewSet>& view_sets() {
  static const std::vector<ViewSet> sets = {
      {0.30, {ViewTag::PA, ViewTag::Lateral}},
      {0.55, {ViewTag::AP}},
      {0.70, {ViewTag::AP, ViewTag::Lateral}},
      {0.80, {ViewTag::PA}},
      {0.90, {ViewTag::AP, ViewTag::PA, ViewTag::LL}},
      {0.96, {ViewTag::PA, ViewTag::Lateral, ViewTag::LL}},
      {1.00, {ViewTag::Lateral}},
  };
  return sets;
}

std::string make_id(char prefix, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%06zu", prefix, index);
  return buf;
}

bool glyph_pixel(std::size_t shape, std::size_t y, std::size_t x, std::size_t size) {
  const std::size_t thick = std::max<std::size_t>(1, size / 4);
  switch (shape % 4) {
    case 0: return true;
    case 1: return y < thick || x < thick || y >= size - thick || x >= size - thick;
    case 2: {
      const std::size_t lo = (size - thick) / 2;
      return (y >= lo && y < lo + thick) || (x >= lo && x < lo + thick);
    }
    default: return y == x || y + x == size - 1;
  }
}

}  // namespace

DifficultyProfile difficulty_profile(std::string_view name) {
  if (name == "clean") return {"clean", 0.0, 0.08, 0.12};
  if (name == "standard") return {"standard", 0.05, 0.08, 0.12};
  if (name == "noisy") return {"noisy", 0.15, 0.08, 0.12};
  throw DataError("unknown difficulty profile '" + std::string(name) + "' (expected clean, standard or noisy)");
}

double positive_prior(std::size_t pathology) { return kPositivePrior.at(pathology); }

LabelRow sample_label_row(Rng& rng) {
  LabelRow row = all_missing();
  bool finding = false;
  for (std::size_t i = 0; i < kNoFinding; ++i) {
    const double u = rng.uniform();
    if (u < kPositivePrior[i]) {
      row[i] = LabelClass::Positive;
      finding = finding || i != kSupportDevices;
    } else if (u < kPositivePrior[i] + kNegativePrior[i]) {
      row[i] = LabelClass::Negative;
    } else if (u < kPositivePrior[i] + kNegativePrior[i] + kUncertainPrior) {
      row[i] = LabelClass::Uncertain;
    }
  }
  if (!finding) row[kNoFinding] = LabelClass::Positive;
  return row;
}

std::size_t glyph_cell(std::size_t pathology, ViewTag tag) {
  switch (tag) {
    case ViewTag::PA: return pathology;
    case ViewTag::AP: return (pathology / kGrid) * kGrid + (kGrid - 1 - pathology % kGrid);
    case ViewTag::Lateral:
    case ViewTag::LL: return (5 * pathology + 2) % (kGrid * kGrid);
  }
  return pathology;
}

GrayImage render_view(const LabelRow& labels, ViewTag tag, std::size_t image_size, double noise_sigma, Rng& rng) {
  if (image_size == 0 || image_size % kGrid != 0) {
    throw DataError("image size must be a positive multiple of 4, got " + std::to_string(image_size));
  }
  const std::size_t cell = image_size / kGrid;
  const std::size_t margin = cell / 8;
  const std::size_t glyph = cell - 2 * margin;
  std::vector<double> canvas(image_size * image_size);
  for (std::size_t y = 0; y < image_size; ++y) {
    for (std::size_t x = 0; x < image_size; ++x) {
      const double fx = (static_cast<double>(x) + 0.5) / static_cast<double>(image_size) - 0.5;
      canvas[y * image_size + x] = 0.2 + 0.1 * std::cos(std::numbers::pi * fx);
    }
  }
  for (std::size_t p = 0; p < kNumPathologies; ++p) {
    if (labels[p] != LabelClass::Positive) continue;
    const std::size_t c = glyph_cell(p, tag);
    const std::size_t y0 = (c / kGrid) * cell + margin;
    const std::size_t x0 = (c % kGrid) * cell + margin;
    for (std::size_t y = 0; y < glyph; ++y)
      for (std::size_t x = 0; x < glyph; ++x)
        if (glyph_pixel(p, y, x, glyph)) canvas[(y0 + y) * image_size + x0 + x] = 0.9;
  }
  GrayImage img{image_size, image_size, std::vector<std::uint8_t>(canvas.size())};
  for (std::size_t i = 0; i < canvas.size(); ++i) {
    const double v = std::clamp(canvas[i] + noise_sigma * rng.normal(), 0.0, 1.0);
    img.pixels[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return img;
}

std::vector<Study> generate_synthetic_corpus(std::size_t n_studies, std::uint64_t seed, std::string_view profile_name,
                                             std::size_t image_size) {
  if (n_studies == 0) throw DataError("synthetic corpus needs at least one study");
  const DifficultyProfile profile = difficulty_profile(profile_name);
  if (image_size == 0 || image_size % kGrid != 0) {
    throw DataError("image size must be a positive multiple of 4, got " + std::to_string(image_size));
  }

  // Patients own 1-3 consecutive studies; the split is drawn per patient.
  Rng patients(numkit::derive_seed(seed, 0xA11CE));
  std::vector<std::size_t> patient_of(n_studies);
  std::vector<Split> split_of;
  for (std::size_t i = 0; i < n_studies;) {
    const std::size_t count = 1 + patients.below(3);
    const double u = patients.uniform();
    split_of.push_back(u < 0.7 ? Split::Train : u < 0.8 ? Split::Validation : Split::Test);
    for (std::size_t k = 0; k < count && i < n_studies; ++k, ++i) patient_of[i] = split_of.size() - 1;
  }

  std::vector<Study> corpus(n_studies);
  for (std::size_t i = 0; i < n_studies; ++i) {
    Rng rng(numkit::derive_seed(seed, i + 1));
    Study& s = corpus[i];
    s.study_id = make_id('s', i);
    s.patient_id = make_id('p', patient_of[i]);
    s.split = split_of[patient_of[i]];
    s.labels = sample_label_row(rng);

    const double pick = rng.uniform();
    const auto& sets = view_sets();
    const auto set = std::find_if(sets.begin(), sets.end(), [&](const ViewSet& v) { return pick < v.cumulative; });
    const auto& tags = set == sets.end() ? sets.back().tags : set->tags;
    bool lateral = false;
    for (std::size_t k = 0; k < tags.size(); ++k) {
      View v;
      v.tag = tags[k];
      v.image = render_view(s.labels, v.tag, image_size, profile.noise_sigma, rng);
      v.image_path = "images/" + s.study_id + "_" + std::to_string(k) + ".pgm";
      lateral = lateral || !is_frontal(v.tag);
      s.views.push_back(std::move(v));
    }

    const double drop = rng.uniform();
    RenderOptions opts;
    opts.has_lateral_view = lateral;
    opts.include_impression = drop >= profile.drop_impression;
    opts.include_findings = drop < profile.drop_impression || drop >= profile.drop_impression + profile.drop_findings;
    auto sections = render_sections(s.labels, rng, opts);
    s.sections.impression = std::move(sections.impression);
    s.sections.findings = std::move(sections.findings);

    const double u_ind = rng.uniform();
    const double u_hint = rng.uniform();
    const std::size_t general = rng.below(kIndications.size());
    const double u_hist = rng.uniform();
    const std::size_t history = rng.below(kHistories.size());
    if (u_ind < 0.8) {
      std::string_view text = kIndications[general];
      if (u_hint < 0.5) {
        for (const auto& hint : kIndicationHints) {
          if (s.labels[hint.pathology] == LabelClass::Positive) {
            text = hint.indication;
            break;
          }
        }
      }
      s.sections.indication = std::string(text);
    }
    if (u_hist < 0.6) s.sections.history = std::string(kHistories[history]);
  }
  return corpus;
}

}  // namespace cxr::corpus

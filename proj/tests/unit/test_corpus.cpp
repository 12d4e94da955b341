#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cxr/corpus/grammar.hpp"
#include "cxr/corpus/manifest.hpp"
#include "cxr/corpus/pairing.hpp"
#include "cxr/corpus/synthetic.hpp"
#include "cxr/corpus/text.hpp"
#include "cxr/error.hpp"

using namespace cxr::corpus;
namespace fs = std::filesystem;
using cxr::numkit::Rng;

namespace {

Study study_with(std::vector<ViewTag> tags) {
  Study s;
  s.study_id = "s1";
  s.patient_id = "p1";
  s.sections.impression = "No acute process.";
  s.sections.findings = "Lungs are clear.";
  s.sections.indication = "Picc.";
  for (std::size_t i = 0; i < tags.size(); ++i) {
    View v;
    v.tag = tags[i];
    v.image = GrayImage{2, 2, {static_cast<std::uint8_t>(i), 1, 2, 3}};
    v.image_path = "images/v" + std::to_string(i) + ".pgm";
    s.views.push_back(v);
  }
  return s;
}

LabelRow random_labels(Rng& rng) {
  LabelRow row;
  for (auto& c : row) c = static_cast<LabelClass>(rng.below(kNumLabelClasses));
  return row;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("cxr_corpus_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("preprocess_text examples") {
  CHECK(preprocess_text("No acute cardiopulmonary process.") == "no acute cardiopulmonary process.");
  CHECK(preprocess_text("IMPRESSION:  PICC @ tip!") == "impression: picc tip");
  CHECK(preprocess_text("") == "");
  CHECK(preprocess_text("Seen by Dr. ___ on [**2101-3-4**].") == "seen by dr. _ on _.");
  CHECK(preprocess_text("  a\t\nb  ") == "a b");
}

TEST_CASE("tokenize and detokenize") {
  const auto vocab = Vocab::from_words(split_tokens("no acute process ."));
  CHECK(vocab.token(Vocab::kPad) == "<pad>");
  CHECK(vocab.size() == Vocab::kNumSpecial + 4);
  const auto seq = tokenize("no acute process .", vocab);
  CHECK(seq.size() == 4);
  CHECK(detokenize(seq, vocab) == "no acute process.");
  CHECK(tokenize("no chest", vocab)[1] == Vocab::kUnk);
  const auto again = Vocab::from_json(vocab.to_json());
  CHECK(again.size() == vocab.size());
  CHECK(tokenize("acute process", again) == tokenize("acute process", vocab));
}

TEST_CASE("tokenize round trip over grammar reports") {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const auto text = render_report(random_labels(rng), rng);
    const auto vocab = Vocab::from_words(split_tokens(text));
    const auto ids = tokenize(text, vocab);
    for (auto id : ids) CHECK(id != Vocab::kUnk);
    CHECK(detokenize(ids, vocab) == join_tokens(split_tokens(text)));
    CHECK(tokenize(detokenize(ids, vocab), vocab) == ids);
  }
}

TEST_CASE("build_report and build_context") {
  Study s = study_with({ViewTag::PA});
  s.sections = {};
  s.sections.impression = "a.";
  s.sections.findings = "b.";
  CHECK(build_report(s) == "impression : a. findings : b.");
  s.sections.impression.reset();
  s.sections.findings = "x";
  CHECK(build_report(s) == "impression :  findings : x");
  s.sections.findings.reset();
  CHECK_THROWS_AS(build_report(s), cxr::DataError);
  CHECK_FALSE(has_report(s));

  s.sections.indication = "picc.";
  CHECK(build_context(s) == "picc.");
  s.sections.indication.reset();
  CHECK(build_context(s) == "");
  std::string long_text;
  for (int i = 0; i < 60; ++i) long_text += "w" + std::to_string(i) + " ";
  s.sections.indication = long_text;
  const auto words = split_tokens(build_context(s));
  REQUIRE(words.size() == 45);
  CHECK(words.front() == "w0");
  CHECK(words.back() == "w44");
}

TEST_CASE("view pairing rules") {
  using V = ViewTag;
  const auto vocab = Vocab::from_words({});
  CHECK(pair_views_single(study_with({V::AP, V::PA, V::Lateral}), vocab).size() == 2);
  CHECK(pair_views_single(study_with({V::Lateral}), vocab).empty());
  CHECK(pair_views_single(study_with({V::AP}), vocab).size() == 1);

  CHECK(multi_view_pairs({V::AP}) == std::vector<std::array<std::size_t, 2>>{{0, 0}});
  CHECK(multi_view_pairs({V::AP, V::Lateral}) == std::vector<std::array<std::size_t, 2>>{{0, 1}});
  CHECK(multi_view_pairs({V::AP, V::PA, V::Lateral}) ==
        std::vector<std::array<std::size_t, 2>>{{0, 2}, {1, 2}, {0, 1}});
  CHECK(multi_view_pairs({V::Lateral, V::LL}).empty());
  CHECK(multi_view_pairs({V::PA, V::LL}) == multi_view_pairs({V::PA, V::Lateral}));

  const auto samples = pair_views_multi(study_with({V::AP}), vocab);
  REQUIRE(samples.size() == 1);
  CHECK(samples[0].images.size() == 2);
  CHECK(samples[0].images[0] == samples[0].images[1]);
}

TEST_CASE("pairing invariants over random view sets") {
  Rng rng(11);
  for (int t = 0; t < 500; ++t) {
    std::vector<ViewTag> tags(1 + rng.below(5));
    for (auto& tag : tags) tag = static_cast<ViewTag>(rng.below(4));
    const bool any_frontal = std::any_of(tags.begin(), tags.end(), is_frontal);
    const auto pairs = multi_view_pairs(tags);
    CHECK(pairs.empty() == !any_frontal);
    std::set<std::array<std::size_t, 2>> distinct(pairs.begin(), pairs.end());
    CHECK(distinct.size() == pairs.size());
    for (const auto& [a, b] : pairs) CHECK((is_frontal(tags[a]) || is_frontal(tags[b])));
    for (auto i : single_view_indices(tags)) CHECK(is_frontal(tags[i]));
  }
}

TEST_CASE("sample text respects the joint length cap") {
  Study s = study_with({ViewTag::PA});
  std::string ctx, rep;
  for (int i = 0; i < 80; ++i) ctx += "c ";
  for (int i = 0; i < 300; ++i) rep += "r ";
  s.sections.indication = ctx;
  s.sections.findings = rep;
  const auto vocab = Vocab::from_words({"c", "r"});
  const auto samples = pair_views_single(s, vocab);
  REQUIRE(samples.size() == 1);
  CHECK(samples[0].context.size() == 45);
  CHECK(samples[0].context.size() + samples[0].report.size() + 3 == 192);
  CHECK(samples[0].target_report_length == samples[0].report.size());

  SampleOptions no_ctx;
  no_ctx.use_context = false;
  const auto bare = pair_views_single(s, vocab, no_ctx);
  CHECK(bare[0].context.empty());
  CHECK(bare[0].report.size() == 189);
}

TEST_CASE("rule_label inverts the grammar for 1000 random label vectors") {
  Rng rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const auto labels = random_labels(rng);
    RenderOptions opts;
    const auto mode = rng.below(3);
    opts.include_impression = mode != 2;
    opts.include_findings = mode != 1;
    opts.has_lateral_view = rng.bernoulli(0.5);
    const auto report = render_report(labels, rng, opts);
    REQUIRE(rule_label(report) == labels);
  }
}

TEST_CASE("rule_label fixed cases") {
  CHECK(rule_label("") == all_missing());
  auto edema = all_missing();
  edema[4] = LabelClass::Positive;
  CHECK(rule_label("There is mild interstitial edema with vascular congestion.") == edema);
  CHECK(rule_label("no acute cardiopulmonary process.") == all_missing());
}

TEST_CASE("all-negative labels produce the all-clear sentence") {
  Rng rng(3);
  LabelRow row = all_missing();
  row[1] = LabelClass::Negative;
  row[8] = LabelClass::Negative;
  const auto sections = render_sections(row, rng);
  REQUIRE(sections.impression);
  CHECK(preprocess_text(*sections.impression).find(all_clear_sentence()) != std::string::npos);
}

TEST_CASE("more positive labels give strictly longer reports") {
  Rng order_rng(8);
  for (int t = 0; t < 100; ++t) {
    LabelRow row = all_missing();
    std::vector<std::size_t> perm(kNumPathologies);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    order_rng.shuffle(std::span<std::size_t>(perm));
    std::size_t previous = 0;
    std::size_t previous_sentences = 0;
    for (std::size_t k = 0; k < kNumPathologies; ++k) {
      if (k > 0) row[perm[k - 1]] = LabelClass::Positive;
      Rng rng(99);
      const auto report = render_report(row, rng);
      const auto words = split_tokens(report);
      const auto sentences = static_cast<std::size_t>(std::count(words.begin(), words.end(), "."));
      if (k > 1) {
        CHECK(words.size() > previous);
        CHECK(sentences > previous_sentences);
      }
      previous = words.size();
      previous_sentences = sentences;
    }
  }
}

TEST_CASE("synthetic corpus is deterministic and labels round trip") {
  const auto a = generate_synthetic_corpus(120, 7);
  const auto b = generate_synthetic_corpus(120, 7);
  const auto c = generate_synthetic_corpus(120, 8);
  std::string ja, jb, jc;
  for (const auto& s : a) ja += study_to_json(s).dump();
  for (const auto& s : b) jb += study_to_json(s).dump();
  for (const auto& s : c) jc += study_to_json(s).dump();
  CHECK(ja == jb);
  CHECK(ja != jc);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].views.size() == b[i].views.size());
    for (std::size_t v = 0; v < a[i].views.size(); ++v) CHECK(a[i].views[v].image == b[i].views[v].image);
    CHECK(has_report(a[i]));
    CHECK(rule_label(build_report(a[i])) == a[i].labels);
  }
}

TEST_CASE("synthetic corpus argument validation") {
  CHECK_THROWS_AS(generate_synthetic_corpus(0, 1), cxr::DataError);
  CHECK_THROWS_AS(generate_synthetic_corpus(10, 1, "hard"), cxr::DataError);
  CHECK_THROWS_AS(generate_synthetic_corpus(10, 1, "standard", 30), cxr::DataError);
  CHECK_NOTHROW(generate_synthetic_corpus(3, 1, "clean"));
  CHECK_NOTHROW(generate_synthetic_corpus(3, 1, "noisy"));
}

TEST_CASE("synthetic corpus statistics") {
  const auto corpus = generate_synthetic_corpus(2000, 13);
  std::array<double, kNumPathologies> prevalence{};
  std::set<std::string> train_patients, other_patients;
  std::array<std::size_t, 3> split_counts{};
  std::vector<double> xs, ys;
  for (const auto& s : corpus) {
    for (std::size_t p = 0; p < kNumPathologies; ++p) prevalence[p] += s.labels[p] == LabelClass::Positive;
    ++split_counts[static_cast<std::size_t>(s.split)];
    (s.split == Split::Train ? train_patients : other_patients).insert(s.patient_id);
    xs.push_back(static_cast<double>(positive_count(s.labels)));
    ys.push_back(static_cast<double>(split_tokens(build_report(s)).size()));
  }
  std::size_t rare = 0;
  for (double& p : prevalence) rare += (p / corpus.size()) < 0.05;
  CHECK(rare >= 7);
  for (const auto& p : train_patients) CHECK(other_patients.count(p) == 0);
  CHECK(split_counts[0] > split_counts[2]);
  CHECK(split_counts[2] > split_counts[1]);

  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i] / n, my += ys[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  CHECK(sxy / std::sqrt(sxx * syy) > 0.5);
}

TEST_CASE("glyphs land in view-dependent cells") {
  std::set<std::size_t> pa, ap, lat;
  for (std::size_t p = 0; p < kNumPathologies; ++p) {
    pa.insert(glyph_cell(p, ViewTag::PA));
    ap.insert(glyph_cell(p, ViewTag::AP));
    lat.insert(glyph_cell(p, ViewTag::Lateral));
    CHECK(glyph_cell(p, ViewTag::Lateral) == glyph_cell(p, ViewTag::LL));
  }
  CHECK(pa.size() == kNumPathologies);
  CHECK(ap.size() == kNumPathologies);
  CHECK(lat.size() == kNumPathologies);

  // A glyph is readable without knowing the view kind.
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> owner;
  for (ViewTag tag : {ViewTag::PA, ViewTag::AP, ViewTag::Lateral}) {
    for (std::size_t p = 0; p < kNumPathologies; ++p) {
      const auto [it, fresh] = owner.emplace(std::pair{glyph_cell(p, tag), p % 4}, p);
      CHECK((fresh || it->second == p));
    }
  }

  Rng rng(1);
  LabelRow row = all_missing();
  const auto empty = render_view(row, ViewTag::PA, 32, 0.0, rng);
  row[0] = LabelClass::Positive;
  const auto marked = render_view(row, ViewTag::PA, 32, 0.0, rng);
  // Pathology 0 sits in the top-left 8x8 cell of a 32x32 PA image.
  for (std::size_t y = 0; y < 32; ++y)
    for (std::size_t x = 0; x < 32; ++x)
      if (y >= 8 || x >= 8) CHECK(empty.pixels[y * 32 + x] == marked.pixels[y * 32 + x]);
  CHECK(empty.pixels[4 * 32 + 4] < marked.pixels[4 * 32 + 4]);
}

TEST_CASE("manifest round trip is lossless and byte stable") {
  const auto dir = scratch_dir("roundtrip");
  auto corpus = generate_synthetic_corpus(40, 21);
  Study no_text = corpus.back();
  no_text.study_id = "s_empty";
  no_text.sections.impression.reset();
  no_text.sections.findings.reset();
  corpus.push_back(no_text);

  save_manifest(corpus, dir / "manifest.jsonl");
  const auto loaded = load_manifest(dir / "manifest.jsonl");
  CHECK(loaded.dropped == 1);
  REQUIRE(loaded.studies.size() == corpus.size() - 1);
  for (std::size_t i = 0; i < loaded.studies.size(); ++i) {
    const auto& x = loaded.studies[i];
    const auto& y = corpus[i];
    CHECK(x.study_id == y.study_id);
    CHECK(x.labels == y.labels);
    CHECK(x.split == y.split);
    CHECK(x.sections.impression == y.sections.impression);
    CHECK(x.sections.findings == y.sections.findings);
    CHECK(x.sections.history == y.sections.history);
    REQUIRE(x.views.size() == y.views.size());
    for (std::size_t v = 0; v < x.views.size(); ++v) {
      CHECK(x.views[v].tag == y.views[v].tag);
      CHECK(x.views[v].image == y.views[v].image);
    }
  }

  const auto dir2 = scratch_dir("roundtrip2");
  save_manifest(loaded.studies, dir2 / "manifest.jsonl");
  const auto first = read_file(dir / "manifest.jsonl");
  const auto second = read_file(dir2 / "manifest.jsonl");
  CHECK(first.substr(0, second.size()) == second);
  CHECK(read_file(dir / corpus[0].views[0].image_path) == read_file(dir2 / corpus[0].views[0].image_path));
}

TEST_CASE("manifest errors name the line or the file") {
  const auto dir = scratch_dir("errors");
  const auto corpus = generate_synthetic_corpus(2, 4);
  save_manifest(corpus, dir / "manifest.jsonl");
  {
    std::ofstream out(dir / "manifest.jsonl", std::ios::app);
    out << "{not json\n";
  }
  try {
    load_manifest(dir / "manifest.jsonl");
    FAIL("expected a data error");
  } catch (const cxr::DataError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }

  const auto dir2 = scratch_dir("missing");
  save_manifest(corpus, dir2 / "manifest.jsonl");
  fs::remove(dir2 / corpus[1].views[0].image_path);
  try {
    load_manifest(dir2 / "manifest.jsonl");
    FAIL("expected a data error");
  } catch (const cxr::DataError& e) {
    CHECK(std::string(e.what()).find(corpus[1].views[0].image_path) != std::string::npos);
  }
}

TEST_CASE("vocab covers training reports") {
  const auto corpus = generate_synthetic_corpus(200, 3);
  const auto vocab = build_vocab(corpus);
  std::size_t skipped = 0;
  const auto samples = build_samples(corpus, Split::Train, 2, vocab, {}, &skipped);
  CHECK_FALSE(samples.empty());
  for (const auto& s : samples) {
    CHECK(s.images.size() == 2);
    for (auto id : s.report) CHECK(id != Vocab::kUnk);
  }
  CHECK_THROWS_AS(build_samples(corpus, Split::Train, 3, vocab), cxr::DataError);
}

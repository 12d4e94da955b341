#include "cxr/metrics/report.hpp"

#include <cstdio>

#include "cxr/corpus/text.hpp"
#include "cxr/error.hpp"

namespace cxr::metrics {

EvalReport evaluate(const std::vector<std::string>& generated, const std::vector<std::string>& references,
                    const corpus::LabelGrid* truth) {
  if (generated.size() != references.size()) {
    throw DataError("got " + std::to_string(generated.size()) + " generated reports for " +
                    std::to_string(references.size()) + " references");
  }
  if (generated.empty()) throw DataError("nothing to evaluate");
  std::vector<Words> cand, ref;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    cand.push_back(corpus::split_tokens(corpus::preprocess_text(generated[i])));
    ref.push_back(corpus::split_tokens(corpus::preprocess_text(references[i])));
  }
  EvalReport out;
  out.bleu = bleu_1_to_4(cand, ref);
  for (std::size_t i = 0; i < cand.size(); ++i) {
    SampleScores s{rouge_l(cand[i], ref[i]), meteor(cand[i], ref[i])};
    out.rouge_l += s.rouge_l;
    out.meteor += s.meteor;
    out.samples.push_back(s);
  }
  out.rouge_l /= static_cast<double>(cand.size());
  out.meteor /= static_cast<double>(cand.size());
  const auto labels = truth ? *truth : label_predictions(references);
  out.clinical = clinical_f1(label_predictions(generated), labels);
  return out;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json per_label = nlohmann::json::array();
  for (std::size_t p = 0; p < corpus::kNumPathologies; ++p) {
    const auto& s = r.clinical.per_label[p];
    per_label.push_back({{"category", std::string(corpus::kPathologyNames[p])},
                         {"f1", s.f1},
                         {"precision", s.precision},
                         {"recall", s.recall},
                         {"support", s.support}});
  }
  return {{"B1", r.bleu[0]},
          {"B2", r.bleu[1]},
          {"B3", r.bleu[2]},
          {"B4", r.bleu[3]},
          {"RG_L", r.rouge_l},
          {"M", r.meteor},
          {"AVG_NLG", r.avg_nlg()},
          {"F1_MA", r.clinical.macro},
          {"F1_MI", r.clinical.micro},
          {"F1_MI5", r.clinical.micro5},
          {"F1_EX", r.clinical.example},
          {"num_samples", r.samples.size()},
          {"per_label", per_label}};
}

std::string per_label_csv(const ClinicalF1& c) {
  std::string out = "Category,F1,P,R,Support\n";
  char buf[160];
  std::size_t tp = 0, fp = 0, fn = 0, support = 0;
  double mp = 0, mr = 0;
  for (std::size_t p = 0; p < corpus::kNumPathologies; ++p) {
    const auto& s = c.per_label[p];
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%zu\n", std::string(corpus::kPathologyNames[p]).c_str(),
                  s.f1, s.precision, s.recall, s.support);
    out += buf;
    tp += s.tp, fp += s.fp, fn += s.fn, support += s.support;
    mp += s.precision / corpus::kNumPathologies;
    mr += s.recall / corpus::kNumPathologies;
  }
  std::snprintf(buf, sizeof buf, "MACRO_AVG,%.17g,%.17g,%.17g,%zu\n", c.macro, mp, mr, support);
  out += buf;
  const auto micro = label_score(tp, fp, fn);
  std::snprintf(buf, sizeof buf, "MICRO_AVG,%.17g,%.17g,%.17g,%zu\n", micro.f1, micro.precision, micro.recall,
                support);
  out += buf;
  return out;
}

}  // namespace cxr::metrics

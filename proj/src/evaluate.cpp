// SPDX-License-Identifier: Apache-2.0
#include "hrseq/evaluate.hpp"

#include <ostream>

namespace hrseq {

TokenSeq unframe(const TokenSeq& framed) {
  TokenSeq out;
  for (TokenId id : framed) {
    if (id != Vocabulary::kGo && id != Vocabulary::kEos) out.push_back(id);
  }
  return out;
}

Evaluation evaluate_predictions(const Predictor& predict,
                                const std::vector<TrainingExample>& examples) {
  if (examples.empty()) throw InvalidInput("evaluate: no test examples");
  Evaluation ev;
  ev.predictions.reserve(examples.size());
  ev.references.reserve(examples.size());
  for (const auto& ex : examples) {
    ev.predictions.push_back(predict(ex));
    ev.references.push_back(unframe(ex.target));
  }
  ev.report = bleu(ev.predictions, ev.references);
  return ev;
}

Evaluation evaluate_model(const ModelParams& params, const std::vector<TrainingExample>& examples,
                          const InferenceConfig& cfg) {
  return evaluate_predictions(
      [&](const TrainingExample& ex) {
        const DecodeSource source = prepare_source(params, ex.context);
        return beam_search(params, source, cfg).front().content();
      },
      examples);
}

void write_evaluation_report(std::ostream& out, const Evaluation& evaluation) {
  write_bleu_report(out, evaluation.report);
  out << "examples\t" << evaluation.predictions.size() << '\n';
}

}  // namespace hrseq

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "hrseq/bleu.hpp"
#include "hrseq/corpus.hpp"
#include "hrseq/inference.hpp"
#include "hrseq/model.hpp"

namespace hrseq {

struct Evaluation {
  BleuReport report;
  std::vector<TokenSeq> predictions;  // unframed, one per example
  std::vector<TokenSeq> references;   // unframed gold targets
};

/// Produces the unframed next sentence for an example's context.
using Predictor = std::function<TokenSeq(const TrainingExample&)>;

Evaluation evaluate_predictions(const Predictor& predict,
                                const std::vector<TrainingExample>& examples);

/// Beam-decodes every example's next sentence and scores it against the gold one.
Evaluation evaluate_model(const ModelParams& params, const std::vector<TrainingExample>& examples,
                          const InferenceConfig& cfg);

/// Strips the <go> ... <eos> framing.
TokenSeq unframe(const TokenSeq& framed);

/// Writes the report plus an `examples` line.
void write_evaluation_report(std::ostream& out, const Evaluation& evaluation);

}  // namespace hrseq

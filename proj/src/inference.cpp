// SPDX-License-Identifier: Apache-2.0
#include "hrseq/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hrseq {

void InferenceConfig::validate() const {
  if (beam_width < 1) throw InvalidInput("beam width must be >= 1");
  if (max_decode_len < 1) throw InvalidInput("max_decode_len must be >= 1");
}

double Hypothesis::score(double alpha) const {
  if (alpha == 0.0 || tokens.empty()) return log_prob;
  return log_prob / std::pow(static_cast<double>(tokens.size()), alpha);
}

TokenSeq Hypothesis::content() const {
  TokenSeq out = tokens;
  if (!out.empty() && out.back() == Vocabulary::kEos) out.pop_back();
  return out;
}

namespace {

bool candidate_token(TokenId id) { return id != Vocabulary::kUnk && id != Vocabulary::kGo; }

TokenId last_token(const Hypothesis& h) { return h.tokens.empty() ? Vocabulary::kGo : h.tokens.back(); }

struct Ranking {
  double alpha;
  bool operator()(const Hypothesis& a, const Hypothesis& b) const {
    const double sa = a.score(alpha);
    const double sb = b.score(alpha);
    if (sa != sb) return sa > sb;
    return a.tokens < b.tokens;
  }
};

}  // namespace

Hypothesis greedy_decode(const ModelParams& params, const DecodeSource& source,
                         const InferenceConfig& cfg) {
  cfg.validate();
  Hypothesis h;
  h.state = source.encoded.s;
  while (!h.finished) {
    StepOutput out = decoder_step(params, h.state, last_token(h), source);
    const Vector logp = log_softmax(out.logits);
    TokenId best = Vocabulary::kEos;
    for (TokenId id = 0; id < logp.dim(); ++id) {
      if (candidate_token(id) && logp[id] > logp[best]) best = id;
    }
    h.tokens.push_back(best);
    h.log_prob += logp[best];
    h.state = std::move(out.h);
    h.finished = best == Vocabulary::kEos || h.tokens.size() >= cfg.max_decode_len;
  }
  return h;
}

std::vector<Hypothesis> beam_search(const ModelParams& params, const DecodeSource& source,
                                    const InferenceConfig& cfg) {
  cfg.validate();
  const Ranking rank{cfg.length_norm_alpha};
  const std::size_t k = cfg.beam_width;

  std::vector<Hypothesis> live(1);
  live.front().state = source.encoded.s;
  std::vector<Hypothesis> finished;

  for (std::size_t step = 1; step <= cfg.max_decode_len && !live.empty(); ++step) {
    std::vector<Hypothesis> candidates;
    for (const Hypothesis& h : live) {
      StepOutput out = decoder_step(params, h.state, last_token(h), source);
      const Vector logp = log_softmax(out.logits);
      for (TokenId id = 0; id < logp.dim(); ++id) {
        if (!candidate_token(id)) continue;
        Hypothesis c;
        c.tokens = h.tokens;
        c.tokens.push_back(id);
        c.log_prob = h.log_prob + logp[id];
        c.state = out.h;
        c.finished = id == Vocabulary::kEos || step == cfg.max_decode_len;
        candidates.push_back(std::move(c));
      }
    }
    std::sort(candidates.begin(), candidates.end(), rank);

    // Finished candidates retire without taking a live slot; at most k of
    // each kind are kept per step.
    live.clear();
    std::size_t retired = 0;
    for (Hypothesis& c : candidates) {
      if (live.size() == k || retired == k) break;
      if (c.finished) {
        finished.push_back(std::move(c));
        ++retired;
      } else {
        live.push_back(std::move(c));
      }
    }

    // Without length normalisation scores only fall as hypotheses grow, so
    // once the k-th best finished score beats every live one, nothing live
    // can still enter the result.
    if (cfg.length_norm_alpha == 0.0 && finished.size() >= k && !live.empty()) {
      std::sort(finished.begin(), finished.end(), rank);
      finished.resize(k);
      if (finished.back().log_prob > live.front().log_prob) break;
    }
  }

  std::sort(finished.begin(), finished.end(), rank);
  if (finished.size() > k) finished.resize(k);
  return finished;
}

OracleResult exhaustive_oracle(const ModelParams& params, const DecodeSource& source,
                               std::size_t max_len, std::size_t limit) {
  if (max_len < 1) throw InvalidInput("exhaustive_oracle: max_len must be >= 1");
  std::size_t allowed = 0;
  for (TokenId id = 0; id < params.config.vocab_size; ++id) allowed += candidate_token(id);

  double space = 0.0;  // sequences ending in eos at length t, plus full-length ones
  for (std::size_t t = 1; t <= max_len; ++t) space += std::pow(allowed - 1.0, t - 1.0);
  space += std::pow(allowed - 1.0, static_cast<double>(max_len));
  if (space > static_cast<double>(limit)) {
    throw InvalidInput("exhaustive_oracle: " + std::to_string(static_cast<long double>(space)) +
                       " sequences exceed the enumeration limit of " + std::to_string(limit));
  }

  OracleResult result;
  result.best.log_prob = -std::numeric_limits<double>::infinity();
  const Ranking rank{0.0};

  std::function<void(Hypothesis&)> expand = [&](Hypothesis& h) {
    const StepOutput out = decoder_step(params, h.state, last_token(h), source);
    const Vector logp = log_softmax(out.logits);
    for (TokenId id = 0; id < logp.dim(); ++id) {
      if (!candidate_token(id)) continue;
      Hypothesis c;
      c.tokens = h.tokens;
      c.tokens.push_back(id);
      c.log_prob = h.log_prob + logp[id];
      c.state = out.h;
      c.finished = id == Vocabulary::kEos || c.tokens.size() == max_len;
      if (c.finished) {
        ++result.enumerated;
        if (result.best.tokens.empty() || rank(c, result.best)) result.best = c;
      } else {
        expand(c);
      }
    }
  };
  Hypothesis root;
  root.state = source.encoded.s;
  expand(root);
  return result;
}

double sequence_log_prob(const ModelParams& params, const DecodeSource& source,
                         const TokenSeq& tokens) {
  Vector h = source.encoded.s;
  TokenId prev = Vocabulary::kGo;
  double total = 0.0;
  for (TokenId id : tokens) {
    StepOutput out = decoder_step(params, h, prev, source);
    total += log_softmax(out.logits)[id];
    h = std::move(out.h);
    prev = id;
  }
  return total;
}

Paragraph generate_paragraph(const ModelParams& params, const Vocabulary& vocab,
                             const Sentence& seed, std::size_t num_sentences,
                             std::size_t num_window, const InferenceConfig& cfg,
                             const WindowObserver& observer) {
  if (seed.empty()) throw InvalidInput("generate_paragraph: seed sentence is empty");
  cfg.validate();
  Paragraph paragraph;
  paragraph.sentences.push_back(seed);
  std::vector<TokenSeq> encoded{vocab.encode(seed)};

  for (std::size_t i = 0; i < num_sentences; ++i) {
    const std::size_t target = encoded.size();
    const ContextWindow window = context_window(target, num_window);
    if (observer) observer(target, window);
    const std::vector<TokenSeq> context(encoded.begin() + static_cast<std::ptrdiff_t>(window.first),
                                        encoded.begin() + static_cast<std::ptrdiff_t>(window.last));
    const DecodeSource source = prepare_source(params, context);
    const std::vector<Hypothesis> beams = beam_search(params, source, cfg);
    const TokenSeq content = beams.front().content();

    TokenSeq framed{Vocabulary::kGo};
    framed.insert(framed.end(), content.begin(), content.end());
    framed.push_back(Vocabulary::kEos);
    encoded.push_back(std::move(framed));
    paragraph.sentences.push_back(vocab.decode(content));
  }
  return paragraph;
}

}  // namespace hrseq

// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "hrseq/decoder.hpp"
#include "hrseq/inference.hpp"
#include "test_support.hpp"

using namespace hrseq;
using hrseq::testing::random_sentence;
using hrseq::testing::tiny_config;

namespace {

constexpr TokenId kA = Vocabulary::kReserved;
constexpr TokenId kB = Vocabulary::kReserved + 1;

struct RandomModel {
  ModelParams params;
  DecodeSource source;
};

/// init_range 2 gives peaked enough distributions for the search to matter.
RandomModel random_model(std::uint64_t seed, std::size_t words, Variant variant = Variant::HredAttention) {
  RandomModel m;
  m.params = init_params(tiny_config(variant, words), 2.0, seed);
  Rng rng(seed ^ 0xABCDEFu);
  m.source = prepare_source(m.params, {random_sentence(rng, m.params.config.vocab_size, 1, 3)});
  return m;
}

/// Decoder whose state after reading w_prev is roughly a one-hot of
/// w_prev, with output weights wired so go → a → b → eos.
ModelParams chain_model() {
  ModelConfig cfg = tiny_config(Variant::Hred, 3);
  ModelParams p(cfg);
  auto& emb = p.encoder.embedding;
  emb(Vocabulary::kGo, 0) = 1.0;
  emb(kA, 1) = 1.0;
  emb(kB, 2) = 1.0;
  auto& gru = p.decoder.dec_layer;
  for (std::size_t i = 0; i < cfg.dec_hidden; ++i) {
    for (std::size_t j = 0; j < cfg.embed_dim; ++j) gru.w_z(i, j) = 10.0;
  }
  for (std::size_t j = 0; j < cfg.embed_dim; ++j) gru.w(j, j) = 5.0;
  p.decoder.w_out(kA, 0) = 20.0;
  p.decoder.w_out(kB, 1) = 20.0;
  p.decoder.w_out(Vocabulary::kEos, 2) = 20.0;
  return p;
}

}  // namespace

TEST_CASE("greedy_decode") {
  SUBCASE("constructed model emits a then b") {
    const ModelParams p = chain_model();
    const DecodeSource src = prepare_source(p, {{1, kA, 2}});
    const Hypothesis h = greedy_decode(p, src, {});
    CHECK(h.tokens == TokenSeq{kA, kB, Vocabulary::kEos});
    CHECK(h.content() == TokenSeq{kA, kB});
    CHECK(beam_search(p, src, {}).front().tokens == h.tokens);
    CHECK(exhaustive_oracle(p, src, 4).best.tokens == h.tokens);
  }
  SUBCASE("output bias peaked on eos gives an empty sentence") {
    ModelParams p(tiny_config(Variant::HredAttention));
    p.decoder.b_out[Vocabulary::kEos] = 10.0;
    const DecodeSource src = prepare_source(p, {{1, 3, 2}});
    const Hypothesis h = greedy_decode(p, src, {});
    CHECK(h.content().empty());
    CHECK(h.finished);
  }
  SUBCASE("unk and go are never emitted") {
    ModelParams p(tiny_config(Variant::Hred));
    p.decoder.b_out[Vocabulary::kUnk] = 50.0;
    p.decoder.b_out[Vocabulary::kGo] = 50.0;
    p.decoder.b_out[kB] = 1.0;
    const DecodeSource src = prepare_source(p, {{1, 3, 2}});
    InferenceConfig cfg;
    cfg.max_decode_len = 3;
    CHECK(greedy_decode(p, src, cfg).tokens == TokenSeq{kB, kB, kB});
  }
}

TEST_CASE("beam width one equals greedy") {
  InferenceConfig cfg;
  cfg.beam_width = 1;
  cfg.max_decode_len = 6;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const RandomModel m = random_model(seed, 4);
    const Hypothesis g = greedy_decode(m.params, m.source, cfg);
    const auto beams = beam_search(m.params, m.source, cfg);
    REQUIRE(beams.size() == 1);
    CHECK(beams[0].tokens == g.tokens);
    CHECK(beams[0].log_prob == g.log_prob);
  }
}

TEST_CASE("exhaustive_oracle") {
  SUBCASE("two words plus eos at length two") {
    const RandomModel m = random_model(3, 2);
    const OracleResult r = exhaustive_oracle(m.params, m.source, 2);
    CHECK(r.enumerated == 7);
    // verify the maximum by listing the seven sequences by hand
    const std::vector<TokenSeq> all{{2}, {kA, 2}, {kB, 2}, {kA, kA}, {kA, kB}, {kB, kA}, {kB, kB}};
    double best = -1e300;
    for (const auto& s : all) best = std::max(best, sequence_log_prob(m.params, m.source, s));
    CHECK(r.best.log_prob == best);
  }
  SUBCASE("enumeration guard") {
    const RandomModel m = random_model(3, 20);
    CHECK_THROWS_AS(exhaustive_oracle(m.params, m.source, 6), InvalidInput);
  }
}

TEST_CASE("wide beam matches the exhaustive oracle") {
  InferenceConfig cfg;
  cfg.beam_width = 64;
  cfg.max_decode_len = 3;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const RandomModel m = random_model(seed, 4);
    const OracleResult oracle = exhaustive_oracle(m.params, m.source, 3);
    const auto beams = beam_search(m.params, m.source, cfg);
    CHECK(beams.front().tokens == oracle.best.tokens);
    CHECK(beams.front().log_prob == oracle.best.log_prob);
  }
}

TEST_CASE("beam search properties over random models") {
  InferenceConfig cfg;
  cfg.max_decode_len = 8;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const RandomModel m = random_model(seed, 6);
    cfg.beam_width = 5;
    const auto beams = beam_search(m.params, m.source, cfg);
    const Hypothesis g = greedy_decode(m.params, m.source, cfg);
    CHECK(beams.front().log_prob >= g.log_prob);
    CHECK(beams.size() <= 5);
    for (std::size_t i = 0; i < beams.size(); ++i) {
      const Hypothesis& h = beams[i];
      CHECK(h.finished);
      CHECK(h.tokens.size() <= cfg.max_decode_len);
      // log-probability is recomputable one step at a time
      CHECK(h.log_prob == doctest::Approx(sequence_log_prob(m.params, m.source, h.tokens)).epsilon(1e-12));
      if (i > 0) CHECK(beams[i - 1].log_prob >= h.log_prob);
    }
  }
}

TEST_CASE("length normalisation changes the ranking rule") {
  Hypothesis h;
  h.tokens = {3, 4, 2};
  h.log_prob = -6.0;
  CHECK(h.score(0.0) == -6.0);
  CHECK(h.score(1.0) == -2.0);
}

TEST_CASE("generate_paragraph") {
  const Vocabulary vocab = Vocabulary::build({Paragraph{{{"a", "b", "c"}, {"d", "e"}}}}, 1);
  const ModelParams p = init_params(tiny_config(Variant::HredAttention, vocab.size() - 3), 1.0, 4);
  InferenceConfig cfg;
  cfg.max_decode_len = 6;
  SUBCASE("no sentences requested") {
    const Paragraph out = generate_paragraph(p, vocab, {"a", "b"}, 0, 5, cfg);
    CHECK(out.sentences == std::vector<Sentence>{{"a", "b"}});
  }
  SUBCASE("window slides over generated sentences") {
    std::vector<std::pair<std::size_t, ContextWindow>> seen;
    const Paragraph out = generate_paragraph(
        p, vocab, {"a"}, 8, 5, cfg,
        [&](std::size_t target, const ContextWindow& w) { seen.emplace_back(target, w); });
    CHECK(out.sentences.size() == 9);
    REQUIRE(seen.size() == 8);
    CHECK(seen[0].first == 1);
    CHECK(seen[0].second.first == 0);
    CHECK(seen[0].second.last == 1);
    // 0-based sentence 6 is the seventh sentence: context sentences 2..6 (1-based)
    CHECK(seen[5].first == 6);
    CHECK(seen[5].second.first == 1);
    CHECK(seen[5].second.last == 6);
    for (const auto& [target, w] : seen) CHECK(w.last - w.first <= 5);
  }
  SUBCASE("deterministic") {
    CHECK(generate_paragraph(p, vocab, {"c", "d"}, 4, 5, cfg).sentences ==
          generate_paragraph(p, vocab, {"c", "d"}, 4, 5, cfg).sentences);
  }
  SUBCASE("empty seed rejected") {
    CHECK_THROWS_AS(generate_paragraph(p, vocab, {}, 2, 5, cfg), InvalidInput);
  }
}

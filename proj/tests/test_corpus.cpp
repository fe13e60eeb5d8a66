// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "hrseq/corpus.hpp"
#include "hrseq/synthetic.hpp"
#include "test_support.hpp"

using namespace hrseq;

namespace {

std::vector<Paragraph> parse(const std::string& text, CorpusOptions options = {}) {
  std::istringstream in(text);
  return load_corpus(in, options);
}

Paragraph paragraph_of(std::size_t sentences) {
  Paragraph p;
  for (std::size_t i = 0; i < sentences; ++i) p.sentences.push_back({"s" + std::to_string(i)});
  return p;
}

}  // namespace

TEST_CASE("load_corpus") {
  SUBCASE("two paragraphs of three sentences") {
    const auto ps = parse("a b\nc d e\nf\n\ng h\ni\nj k\n");
    REQUIRE(ps.size() == 2);
    CHECK(ps[0].sentences.size() == 3);
    CHECK(ps[1].sentences.size() == 3);
    CHECK(ps[0].sentences[1] == Sentence{"c", "d", "e"});
  }
  SUBCASE("over-long sentence is dropped, the rest kept") {
    std::string longline;
    for (int i = 0; i < 25; ++i) longline += "t" + std::to_string(i) + " ";
    const auto ps = parse("a b\n" + longline + "\nc d\n");
    REQUIRE(ps.size() == 1);
    CHECK(ps[0].sentences == std::vector<Sentence>{{"a", "b"}, {"c", "d"}});
  }
  SUBCASE("exactly max_sentence_len tokens is kept") {
    std::string line;
    for (int i = 0; i < 20; ++i) line += "x ";
    CHECK(parse(line + "\n")[0].sentences[0].size() == 20);
  }
  SUBCASE("empty input") {
    CHECK(parse("").empty());
    CHECK(parse("\n\n  \n").empty());
  }
  SUBCASE("paragraph emptied by filtering is dropped") {
    std::string line;
    for (int i = 0; i < 21; ++i) line += "x ";
    CHECK(parse(line + "\n\na\n").size() == 1);
  }
  SUBCASE("multiple blank lines and CRLF") {
    const auto ps = parse("a\r\nb\r\n\r\n\r\nc\r\n");
    REQUIRE(ps.size() == 2);
    CHECK(ps[0].sentences[1] == Sentence{"b"});
  }
  SUBCASE("invalid UTF-8 reports its line") {
    try {
      parse("ok\nfine\nbad \xC3\x28 byte\n");
      FAIL("expected CorpusError");
    } catch (const CorpusError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse("\xED\xA0\x80\n"), CorpusError);  // surrogate
    CHECK_THROWS_AS(parse("\xC0\xAF\n"), CorpusError);      // overlong
  }
  SUBCASE("character tokenizer") {
    const auto ps = parse("故乡 在\n", {20, Tokenizer::Character});
    CHECK(ps[0].sentences[0] == Sentence{"故", "乡", "在"});
  }
  SUBCASE("fixture file") {
    const auto ps = load_corpus_file(HRSEQ_TEST_DATA_DIR "/two_paragraphs.txt");
    CHECK(ps.size() == 2);
  }
}

TEST_CASE("write_corpus round-trips") {
  const auto ps = parse("a b\nc\n\nd e f\ng\n");
  std::ostringstream out;
  write_corpus(out, ps);
  CHECK(parse(out.str()) == ps);
}

TEST_CASE("build_vocab") {
  SUBCASE("frequency threshold") {
    Paragraph p;
    p.sentences.push_back(Sentence(12, "a"));
    p.sentences.push_back(Sentence(3, "b"));
    const Vocabulary v = Vocabulary::build({p}, 10);
    CHECK(v.size() == 4);
    CHECK(v.token(0) == "<unk>");
    CHECK(v.token(1) == "<go>");
    CHECK(v.token(2) == "<eos>");
    CHECK(v.token(3) == "a");
    CHECK(v.frequency(3) == 12);
    CHECK(v.id("b") == Vocabulary::kUnk);
  }
  SUBCASE("min_count 1 keeps everything; ids by frequency then lexicographic") {
    const auto ps = parse("c b a\nb c\nd\n");
    const Vocabulary v = Vocabulary::build(ps, 1);
    CHECK(v.size() == 7);
    CHECK(v.token(3) == "b");
    CHECK(v.token(4) == "c");
    CHECK(v.token(5) == "a");
    CHECK(v.token(6) == "d");
  }
  SUBCASE("rejects min_count 0") {
    CHECK_THROWS_AS(Vocabulary::build({}, 0), InvalidInput);
  }
  SUBCASE("reserved spellings in the corpus are not duplicated") {
    const Vocabulary v = Vocabulary::build(parse("<eos> x\n"), 1);
    CHECK(v.size() == 4);
  }
  SUBCASE("size = |{freq >= min_count}| + 3 against a separate counter") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      SuccessorCorpusOptions o;
      o.paragraphs = 30;
      const auto ps = successor_corpus(o, seed);
      for (std::size_t min_count : {1u, 5u, 20u, 40u}) {
        std::map<std::string, std::size_t> counts;
        for (const auto& p : ps) for (const auto& s : p.sentences) for (const auto& t : s) counts[t]++;
        std::size_t kept = 0;
        for (const auto& [tok, c] : counts) kept += c >= min_count;
        const Vocabulary v = Vocabulary::build(ps, min_count);
        CHECK(v.size() == kept + 3);
        for (TokenId id = 3; id < v.size(); ++id) CHECK(v.frequency(id) >= min_count);
      }
    }
  }
  SUBCASE("determinism") {
    const auto ps = successor_corpus({}, 4);
    CHECK(Vocabulary::build(ps, 2) == Vocabulary::build(ps, 2));
  }
}

TEST_CASE("vocabulary file") {
  const Vocabulary v = Vocabulary::build(parse("x y y\nz\n"), 1);
  std::ostringstream out;
  v.save(out);
  CHECK(out.str() == "<unk>\n<go>\n<eos>\ny\nx\nz\n");
  std::istringstream in(out.str());
  CHECK(Vocabulary::load(in) == v);

  std::istringstream bad("<go>\n<unk>\n<eos>\n");
  CHECK_THROWS_AS(Vocabulary::load(bad), CorpusError);
  std::istringstream dup("<unk>\n<go>\n<eos>\na\na\n");
  CHECK_THROWS_AS(Vocabulary::load(dup), CorpusError);
}

TEST_CASE("encode_sentence") {
  const Vocabulary v = Vocabulary::build(parse("a b\n"), 1);
  const TokenId a = v.id("a");
  const TokenId b = v.id("b");
  CHECK(v.encode({"a", "b"}) == TokenSeq{Vocabulary::kGo, a, b, Vocabulary::kEos});
  CHECK(v.encode({"zzz"}) == TokenSeq{Vocabulary::kGo, Vocabulary::kUnk, Vocabulary::kEos});
  CHECK(v.encode({}) == TokenSeq{Vocabulary::kGo, Vocabulary::kEos});

  // decode(encode(s)) == s for in-vocabulary sentences
  Rng rng(5);
  const Vocabulary big = Vocabulary::build(successor_corpus({}, 1), 1);
  for (int trial = 0; trial < 100; ++trial) {
    Sentence s;
    const std::size_t len = rng.below(8);
    for (std::size_t i = 0; i < len; ++i) s.push_back(big.token(3 + rng.below(big.size() - 3)));
    CHECK(big.decode(big.encode(s)) == s);
  }
}

TEST_CASE("split_corpus") {
  std::vector<Paragraph> ps;
  for (std::size_t i = 0; i < 100; ++i) ps.push_back(paragraph_of(i % 7 + 1));
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i].sentences[0][0] = "id" + std::to_string(i);

  SUBCASE("ten paragraphs at 0.9") {
    const std::vector<Paragraph> ten(ps.begin(), ps.begin() + 10);
    const CorpusSplit s = split_corpus(ten, 0.9, 1);
    CHECK(s.train.size() == 9);
    CHECK(s.test.size() == 1);
  }
  SUBCASE("same seed, same split") {
    const CorpusSplit a = split_corpus(ps, 0.9, 77);
    const CorpusSplit b = split_corpus(ps, 0.9, 77);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
  }
  SUBCASE("different seeds reorder, sizes stay 90/10, partition exact") {
    const CorpusSplit a = split_corpus(ps, 0.9, 1);
    const CorpusSplit b = split_corpus(ps, 0.9, 2);
    CHECK(a.train.size() == 90);
    CHECK(b.train.size() == 90);
    CHECK(a.test.size() == 10);
    CHECK(a.train != b.train);
    std::multiset<std::string> seen;
    for (const auto& p : a.train) seen.insert(p.sentences[0][0]);
    for (const auto& p : a.test) seen.insert(p.sentences[0][0]);
    CHECK(seen.size() == 100);
    CHECK(std::set<std::string>(seen.begin(), seen.end()).size() == 100);
  }
  SUBCASE("fraction bounds") {
    CHECK_THROWS_AS(split_corpus(ps, 0.0, 1), InvalidInput);
    CHECK_THROWS_AS(split_corpus(ps, 1.0, 1), InvalidInput);
  }
}

TEST_CASE("make_training_examples") {
  const Vocabulary v;
  SUBCASE("window larger than prefix") {
    const auto ex = make_training_examples(paragraph_of(3), 5, v);
    REQUIRE(ex.size() == 2);
    CHECK(ex[0].context.size() == 1);
    CHECK(ex[1].context.size() == 2);
  }
  SUBCASE("M=8, Num=5, last target sees S3..S7") {
    Paragraph p = paragraph_of(8);
    const Vocabulary named = Vocabulary::build({p}, 1);
    const auto ex = make_training_examples(p, 5, named);
    REQUIRE(ex.size() == 7);
    const auto& last = ex.back();
    REQUIRE(last.context.size() == 5);
    for (std::size_t k = 0; k < 5; ++k) CHECK(last.context[k] == named.encode(p.sentences[2 + k]));
    CHECK(last.target == named.encode(p.sentences[7]));
    const ContextWindow w = context_window(7, 5);
    CHECK(w.first == 2);
    CHECK(w.last == 7);
  }
  SUBCASE("single sentence yields nothing") {
    CHECK(make_training_examples(paragraph_of(1), 5, v).empty());
  }
  SUBCASE("count M-1 and context length in [1, Num]") {
    for (std::size_t m = 1; m <= 12; ++m) {
      for (std::size_t num : {1u, 2u, 5u}) {
        const auto ex = make_training_examples(paragraph_of(m), num, v);
        CHECK(ex.size() == m - 1);
        for (const auto& e : ex) {
          CHECK(e.context.size() >= 1);
          CHECK(e.context.size() <= num);
          CHECK(e.target.size() >= 3);
        }
      }
    }
  }
  SUBCASE("num_window 0 rejected") {
    CHECK_THROWS_AS(make_training_examples(paragraph_of(3), 0, v), InvalidInput);
  }
}

TEST_CASE("synthetic corpora have the advertised structure") {
  const auto succ = successor_corpus({}, 3);
  CHECK(succ.size() == 200);
  CHECK(Vocabulary::build(succ, 1).size() <= 25);
  for (const auto& p : succ) {
    for (std::size_t m = 1; m < p.sentences.size(); ++m) {
      REQUIRE(p.sentences[m].size() == p.sentences[m - 1].size());
      for (std::size_t i = 0; i < p.sentences[m].size(); ++i) {
        const std::size_t prev = std::stoul(p.sentences[m - 1][i].substr(1));
        CHECK(p.sentences[m][i] == "w" + std::to_string(successor_index(prev, 20)));
      }
    }
  }
  const auto lr = long_range_corpus({}, 3);
  CHECK(Vocabulary::build(lr, 1).size() <= 25);
  for (const auto& p : lr) {
    for (std::size_t m = 3; m < p.sentences.size(); ++m) {
      CHECK(p.sentences[m].back() == p.sentences[m - 3].back());
    }
  }
}

TEST_CASE("vocabulary at full scale") {
  // 7030 distinct tokens of which 1985 fall under the threshold.
  Paragraph p;
  for (int i = 0; i < 7030; ++i) {
    const std::size_t count = i < 1985 ? 1 : 2;
    p.sentences.push_back(Sentence(count, "tok" + std::to_string(i)));
  }
  const Vocabulary v = Vocabulary::build({p}, 2);
  CHECK(v.size() == 5045 + 3);
}

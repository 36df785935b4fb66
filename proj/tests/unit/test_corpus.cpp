#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "support/testing.hpp"
#include "tsum/corpus.hpp"
#include "tsum/errors.hpp"
#include "tsum/stats.hpp"
#include "tsum/tagger.hpp"

using namespace tsum;
using tsum::testing::doc;

namespace {

IngestResult ingest_text(const std::string& text) {
  std::istringstream in(text);
  return ingest(in);
}

std::vector<Document> random_docs(std::mt19937_64& rng, std::size_t n, std::size_t alphabet) {
  std::uniform_int_distribution<std::size_t> len(1, 6), sym(0, alphabet - 1);
  std::vector<Document> out;
  for (std::size_t i = 0; i < n; ++i) {
    Document d;
    d.id = std::to_string(i);
    for (std::size_t k = len(rng); k > 0; --k) d.source_tokens.push_back("t" + std::to_string(sym(rng)));
    for (std::size_t k = len(rng); k > 0; --k) d.target_tokens.push_back("t" + std::to_string(sym(rng)));
    out.push_back(d);
  }
  return out;
}

}  // namespace

TEST(Ingest, TokenizesRecord) {
  auto r = ingest_text(R"({"source":"the cat sat","target":"cat sits"})" "\n");
  ASSERT_EQ(r.documents.size(), 1u);
  EXPECT_EQ(r.documents[0].source_tokens, (std::vector<std::string>{"the", "cat", "sat"}));
  EXPECT_EQ(r.documents[0].target_tokens, (std::vector<std::string>{"cat", "sits"}));
}

TEST(Ingest, LowercasesAndSplitsOnAnyWhitespace) {
  EXPECT_EQ(tokenize("  The\tCAT\n sat  "), (std::vector<std::string>{"the", "cat", "sat"}));
  EXPECT_TRUE(tokenize(" \t ").empty());
}

TEST(Ingest, EmptyTargetIsSkippedAndCounted) {
  auto r = ingest_text(R"({"source":"a b","target":""})" "\n" R"({"source":"a b","target":"c"})" "\n");
  EXPECT_EQ(r.documents.size(), 1u);
  EXPECT_EQ(r.skipped_empty, 1u);
}

TEST(Ingest, DuplicateFixtureYieldsThreeThenTwo) {
  auto r = ingest_text(R"({"source":"a b","target":"x"})" "\n" R"({"source":"c d","target":"y"})" "\n"
                       R"({"source":"a b","target":"x"})" "\n");
  EXPECT_EQ(r.documents.size(), 3u);
  EXPECT_EQ(deduplicate(r.documents).size(), 2u);
}

TEST(Ingest, MalformedRecordReportsLineNumber) {
  auto r = ingest_text(R"({"source":"a","target":"b"})" "\n" "{not json\n" R"({"source":"a"})" "\n");
  EXPECT_EQ(r.documents.size(), 1u);
  ASSERT_EQ(r.errors.size(), 2u);
  EXPECT_EQ(r.errors[0].line, 2u);
  EXPECT_EQ(r.errors[1].line, 3u);
  EXPECT_NE(r.errors[1].message.find("target"), std::string::npos);
}

TEST(Ingest, ParseRecordThrowsWithLine) {
  try {
    parse_record("[1,2]", 17, "x");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("17"), std::string::npos);
  }
}

TEST(Ingest, ProvidedPosTagsMustAlign) {
  auto ok = parse_record(R"({"source":"the cat","target":"cat","pos":["DET","NOUN"]})", 1, "a");
  ASSERT_TRUE(ok);
  EXPECT_EQ(ok->pos_tags, (std::vector<PosTag>{PosTag::DET, PosTag::NOUN}));
  EXPECT_THROW(parse_record(R"({"source":"the cat","target":"cat","pos":["DET"]})", 1, "a"), DataError);
  EXPECT_THROW(parse_record(R"({"source":"the cat","target":"cat","pos":["DET","BOGUS"]})", 1, "a"), DataError);
}

TEST(Ingest, MissingFileIsDataError) { EXPECT_THROW(ingest("/nonexistent/corpus.jsonl"), DataError); }

TEST(Dedup, Examples) {
  auto a = doc("a b", "x", "1"), b = doc("c", "y", "2");
  auto out = deduplicate({a, b, a});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].id, "1");
  EXPECT_EQ(out[1].id, "2");
  EXPECT_EQ(deduplicate({a, a, a}).size(), 1u);
  EXPECT_EQ(deduplicate({doc("a b", "x"), doc("a b", "z")}).size(), 2u);
}

TEST(Dedup, KeyDoesNotConfuseTokenBoundaries) {
  // "a b" / "c" and "a" / "b c" join to the same characters.
  EXPECT_EQ(deduplicate({doc("a b", "c"), doc("a", "b c")}).size(), 2u);
}

TEST(Dedup, IdempotentAndMatchesPairwiseScan) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto docs = random_docs(rng, 30, 2);
    auto once = deduplicate(docs);
    auto twice = deduplicate(once);
    ASSERT_EQ(once.size(), twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(once[i].id, twice[i].id);
    std::vector<std::string> brute;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      bool seen = false;
      for (std::size_t j = 0; j < i; ++j)
        seen |= docs[j].source_tokens == docs[i].source_tokens && docs[j].target_tokens == docs[i].target_tokens;
      if (!seen) brute.push_back(docs[i].id);
    }
    ASSERT_EQ(brute.size(), once.size());
    for (std::size_t i = 0; i < brute.size(); ++i) EXPECT_EQ(brute[i], once[i].id);
  }
}

TEST(Split, TenDocsTwoValid) {
  std::vector<Document> docs;
  for (int i = 0; i < 10; ++i) docs.push_back(doc("s" + std::to_string(i), "t", std::to_string(i)));
  auto s = split(docs, 2, 42);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.valid.size(), 2u);
  std::set<std::string> ids;
  for (auto& d : s.train) ids.insert(d.id);
  for (auto& d : s.valid) EXPECT_FALSE(ids.count(d.id));
}

TEST(Split, DeterministicForSeed) {
  std::vector<Document> docs;
  for (int i = 0; i < 40; ++i) docs.push_back(doc("s", "t", std::to_string(i)));
  auto a = split(docs, 7, 9), b = split(docs, 7, 9), c = split(docs, 7, 10);
  auto ids = [](const std::vector<Document>& v) {
    std::vector<std::string> out;
    for (auto& d : v) out.push_back(d.id);
    return out;
  };
  EXPECT_EQ(ids(a.valid), ids(b.valid));
  EXPECT_EQ(ids(a.train), ids(b.train));
  EXPECT_NE(ids(a.valid), ids(c.valid));
}

TEST(Split, ZeroValidKeepsEverything) {
  std::vector<Document> docs{doc("a", "b", "1"), doc("c", "d", "2")};
  auto s = split(docs, 0, 1);
  EXPECT_TRUE(s.valid.empty());
  ASSERT_EQ(s.train.size(), 2u);
  EXPECT_EQ(s.train[0].id, "1");
}

TEST(Split, TooManyValidIsConfigError) {
  EXPECT_THROW(split({doc("a", "b")}, 2, 1), ConfigError);
}

TEST(Split, PartitionProperty) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = rng() % 25;
    std::vector<Document> docs;
    for (std::size_t i = 0; i < n; ++i) docs.push_back(doc("s", "t", std::to_string(i)));
    const std::size_t k = n ? rng() % (n + 1) : 0;
    auto s = split(docs, k, rng());
    ASSERT_EQ(s.valid.size(), k);
    std::multiset<std::string> all;
    for (auto& d : s.train) all.insert(d.id);
    for (auto& d : s.valid) {
      EXPECT_EQ(std::count_if(s.train.begin(), s.train.end(), [&](auto& t) { return t.id == d.id; }), 0);
      all.insert(d.id);
    }
    std::multiset<std::string> expected;
    for (auto& d : docs) expected.insert(d.id);
    EXPECT_EQ(all, expected);
  }
}

TEST(Pos, LexiconExamples) {
  LexiconTagger tagger({{"the", PosTag::DET}, {"cat", PosTag::NOUN}, {"runs", PosTag::VERB}}, false);
  std::vector<std::string> toks{"the", "cat", "runs"};
  EXPECT_EQ(annotate_pos(toks, tagger), (std::vector<PosTag>{PosTag::DET, PosTag::NOUN, PosTag::VERB}));
  EXPECT_TRUE(annotate_pos(std::vector<std::string>{}, tagger).empty());
  EXPECT_EQ(annotate_pos(std::vector<std::string>{"zzzqqq"}, tagger), (std::vector<PosTag>{PosTag::X}));
}

TEST(Pos, BundledTaggerShapesAndClosedClasses) {
  LexiconTagger tagger;
  EXPECT_EQ(tagger.tag_token("the"), PosTag::DET);
  EXPECT_EQ(tagger.tag_token("1999"), PosTag::NUM);
  EXPECT_EQ(tagger.tag_token(","), PosTag::PUNC);
  EXPECT_EQ(tagger.tag_token("of"), PosTag::ADP);
  EXPECT_FALSE(tagger.tag_token("zzzqqq").has_value());
}

TEST(Pos, WrongLengthTaggerIsContractViolation) {
  struct Broken : PosTagger {
    std::vector<std::optional<PosTag>> tag(std::span<const std::string>) const override { return {}; }
  } broken;
  EXPECT_THROW(annotate_pos(std::vector<std::string>{"a"}, broken), ContractViolation);
}

TEST(Pos, TagNamesRoundTrip) {
  for (std::size_t i = 0; i < kNumPosTags; ++i) {
    auto t = static_cast<PosTag>(i);
    EXPECT_EQ(parse_pos_tag(to_string(t)), t);
  }
  EXPECT_FALSE(parse_pos_tag("NOPE"));
}

TEST(Stats, DocumentFrequencyExample) {
  std::vector<Document> train{doc("a a b", "x"), doc("a c", "y")};
  auto s = compute_corpus_stats(train, 3, 3);
  EXPECT_EQ(s.num_documents, 2u);
  EXPECT_EQ(s.document_frequency.at("a"), 2u);
  EXPECT_EQ(s.document_frequency.at("b"), 1u);
  EXPECT_EQ(s.document_frequency.at("c"), 1u);
  // Target tokens do not count.
  EXPECT_EQ(s.document_frequency.count("x"), 0u);
}

TEST(Stats, FormulaExamples) {
  EXPECT_NEAR(inverse_document_frequency(2, 2), 1.0 + std::log(2.0 / 3.0), 1e-15);
  EXPECT_NEAR(inverse_document_frequency(2, 2), 0.5945, 1e-4);
  EXPECT_DOUBLE_EQ(term_frequency(2, 3), 2.0 / 3.0);
  std::vector<Document> train{doc("a a b", "x"), doc("a c", "y")};
  EXPECT_NEAR(compute_corpus_stats(train, 2, 2).idf("a"), 0.5945, 1e-4);
}

TEST(Stats, EmptyTrainOrZeroBinsIsConfigError) {
  EXPECT_THROW(compute_corpus_stats(std::vector<Document>{}, 3, 3), ConfigError);
  EXPECT_THROW(compute_corpus_stats(std::vector<Document>{doc("a", "b")}, 0, 3), ConfigError);
}

TEST(Stats, QuantileBoundariesStrictlyIncreasing) {
  EXPECT_EQ(quantile_boundaries({1, 2, 3, 4}, 2), (std::vector<double>{3}));
  EXPECT_EQ(quantile_boundaries({5, 5, 5, 5}, 4), (std::vector<double>{5}));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + rng() % 50);
    for (auto& x : v) x = static_cast<double>(rng() % 7);
    auto b = quantile_boundaries(v, 1 + rng() % 10);
    for (std::size_t i = 1; i < b.size(); ++i) EXPECT_LT(b[i - 1], b[i]);
  }
}

TEST(Stats, DfMatchesBruteForceAndBinsAreTotal) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    auto docs = random_docs(rng, 1 + rng() % 20, 6);
    const std::size_t n_tf = 1 + rng() % 6, n_idf = 1 + rng() % 6;
    auto s = compute_corpus_stats(docs, n_tf, n_idf);
    std::set<std::string> vocab;
    for (auto& d : docs) vocab.insert(d.source_tokens.begin(), d.source_tokens.end());
    for (const auto& t : vocab) {
      std::size_t df = 0;
      for (auto& d : docs) df += std::find(d.source_tokens.begin(), d.source_tokens.end(), t) != d.source_tokens.end();
      EXPECT_EQ(s.document_frequency.at(t), df);
      EXPECT_GE(df, 1u);
      EXPECT_LE(df, s.num_documents);
    }
    LexiconTagger tagger;
    for (auto d : docs) {
      annotate(d, s, tagger);
      ASSERT_TRUE(d.annotated());
      for (auto b : d.tf_bins) EXPECT_LT(b, n_tf);
      for (auto b : d.idf_bins) EXPECT_LT(b, n_idf);
    }
  }
}

TEST(Stats, OutOfRangeValuesClamp) {
  std::vector<Document> train{doc("a a b", "x"), doc("a c d e", "y"), doc("f", "z")};
  auto s = compute_corpus_stats(train, 3, 3);
  EXPECT_EQ(s.tf_bin(-5.0), 0u);
  EXPECT_EQ(s.tf_bin(1e9), std::min<std::size_t>(s.tf_bin_boundaries.size(), 2));
  EXPECT_LT(s.idf_bin(s.idf("never-seen")), 3u);
}

TEST(Stats, ShardedEqualsSingleThreaded) {
  std::mt19937_64 rng(21);
  auto docs = random_docs(rng, 200, 30);
  auto one = compute_corpus_stats(docs, 10, 10, 1);
  for (std::size_t shards : {2u, 3u, 7u, 64u}) EXPECT_EQ(compute_corpus_stats(docs, 10, 10, shards), one);
}

TEST(Stats, AccumulatorMergeIsCommutative) {
  std::mt19937_64 rng(4);
  auto docs = random_docs(rng, 40, 10);
  StatsAccumulator a, b;
  for (std::size_t i = 0; i < docs.size(); ++i) (i % 3 ? a : b).add(docs[i]);
  StatsAccumulator ab = a, ba = b;
  ab.merge(b);
  ba.merge(a);
  EXPECT_EQ(ab.finish(5, 5), ba.finish(5, 5));
}

TEST(Stats, SaveLoadRoundTrip) {
  std::vector<Document> train{doc("a a b", "x"), doc("a c", "y"), doc("b d e e", "z")};
  auto s = compute_corpus_stats(train, 4, 4);
  auto dir = tsum::testing::scratch_dir("stats_roundtrip");
  save_stats(s, dir / "stats.json");
  EXPECT_EQ(load_stats(dir / "stats.json"), s);
  std::ofstream(dir / "bad.json") << R"({"format":"other"})";
  EXPECT_THROW(load_stats(dir / "bad.json"), DataError);
}

TEST(Annotated, WriteThenReadKeepsAnnotations) {
  std::vector<Document> train{doc("the cat sat", "cat sits", "k1")};
  auto s = compute_corpus_stats(train, 3, 3);
  LexiconTagger tagger;
  annotate(train[0], s, tagger);
  std::stringstream ss;
  write_annotated(ss, train[0], "train");
  auto back = parse_record(ss.str(), 1, "other");
  ASSERT_TRUE(back);
  EXPECT_EQ(back->id, "k1");
  EXPECT_EQ(back->split, "train");
  EXPECT_EQ(back->pos_tags, train[0].pos_tags);
  EXPECT_EQ(back->tf_bins, train[0].tf_bins);
  EXPECT_EQ(back->idf_bins, train[0].idf_bins);
}

TEST(Annotated, SuppliedTagsTakePrecedence) {
  auto d = *parse_record(R"({"source":"the cat","target":"x","pos":["NOUN","NOUN"]})", 1, "a");
  auto s = compute_corpus_stats(std::vector<Document>{d}, 2, 2);
  annotate(d, s, LexiconTagger{});
  EXPECT_EQ(d.pos_tags[0], PosTag::NOUN);
}

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "synq/graph_enhance.hpp"
#include "synq/index.hpp"
#include "synq/matcher.hpp"

using namespace synq;

namespace {

const std::string kFixtures = SYNQ_FIXTURES;
const std::string kData = SYNQ_DATA;

Corpus courts() {
  return enhance_corpus(load_corpus(kFixtures + "/courts"), {}, default_rule_set());
}

Corpus random_corpus(std::uint64_t seed, std::size_t docs) {
  std::mt19937_64 rng(seed);
  std::vector<Document> ds;
  for (std::size_t d = 0; d < docs; ++d) {
    Document doc;
    doc.doc_id = "r" + std::to_string(d);
    for (std::size_t k = 1; k <= 3; ++k) {
      doc.sentences.push_back(
          oracle::random_tree(rng, 1 + rng() % 10, make_sentence_id(doc.doc_id, k)));
    }
    ds.push_back(std::move(doc));
  }
  return Corpus("random", std::move(ds));
}

}  // namespace

TEST(Index, PostingsAreSortedAndComplete) {
  auto c = courts();
  auto idx = build_index(c);
  ASSERT_EQ(idx.sentence_table.size(), c.sentence_count());
  // every sentence containing a lemma appears in its posting
  for (std::size_t o = 0; o < c.sentence_count(); ++o) {
    for (const auto& t : c.sentence_at(o).tokens) {
      const auto& p = idx.lemma_postings.at(text::fold(t.lemma));
      EXPECT_TRUE(std::binary_search(p.begin(), p.end(), o));
      const auto& u = idx.upos_postings.at(t.upos);
      EXPECT_TRUE(std::binary_search(u.begin(), u.end(), o));
    }
    for (const auto& e : c.sentence_at(o).enhanced_edges) {
      const auto& p = idx.deprel_postings.at(e.deprel);
      EXPECT_TRUE(std::binary_search(p.begin(), p.end(), o));
    }
  }
  for (const auto* m : {&idx.lemma_postings, &idx.upos_postings, &idx.deprel_postings}) {
    for (const auto& [k, p] : *m) EXPECT_TRUE(std::is_sorted(p.begin(), p.end())) << k;
  }
  EXPECT_EQ(idx.lemma_postings.at("testimony").size(), 6u);
}

TEST(Index, CandidatesAreSupersetOfMatches) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto c = random_corpus(seed, 8);
    auto idx = build_index(c);
    std::mt19937_64 rng(seed * 7919);
    for (int i = 0; i < 20; ++i) {
      auto q = oracle::random_pattern(rng, 3);
      auto cands = candidates(idx, c, q);
      for (std::size_t o = 0; o < c.sentence_count(); ++o) {
        if (!oracle::brute_force(c.sentence_at(o), q).empty()) {
          EXPECT_TRUE(std::binary_search(cands.ordinals.begin(), cands.ordinals.end(), o))
              << "seed " << seed << " query " << to_dsl(q);
        }
      }
    }
  }
}

TEST(Index, RarestFirstIntersection) {
  auto c = courts();
  auto idx = build_index(c);
  auto q = resolve_lists(parse_graph_dsl("node t lemma=testimony\n"
                                         "node a list=[reliable|honest]\n"
                                         "edge a -nsubj-> t\n"),
                         {});
  auto cands = candidates(idx, c, q);
  EXPECT_FALSE(cands.full_scan);
  std::vector<std::string> ids;
  for (auto o : cands.ordinals) ids.push_back(c.sentence_at(o).sentence_id);
  // d04#s2 and d05#s1 carry both lemmas and an nsubj, but not between them
  EXPECT_EQ(ids, (std::vector<std::string>{"d01#s1", "d03#s1", "d04#s2", "d05#s1", "d08#s1"}));
}

TEST(Index, NoIndexableConstraintMeansFullScan) {
  auto c = courts();
  auto idx = build_index(c);
  GraphQuery q;
  q.nodes.resize(2);
  q.nodes[0].id = "a";
  q.nodes[0].capture = "x";
  q.nodes[1].id = "b";
  q.edges.push_back({0, 1, "*"});
  auto cands = candidates(idx, q);
  EXPECT_TRUE(cands.full_scan);
  EXPECT_EQ(cands.ordinals.size(), c.sentence_count());
}

TEST(Index, UnresolvedListRejected) {
  auto idx = build_index(courts());
  auto q = parse_graph_dsl("node a list=@credible\n");
  EXPECT_THROW(candidates(idx, q), Error);
}

TEST(Index, SerializationRoundTrip) {
  auto c = courts();
  auto idx = build_index(c);
  auto bytes = serialize_index(idx);
  EXPECT_EQ(bytes.substr(0, 8), "SYNQIDX1");
  EXPECT_EQ(deserialize_index(bytes), idx);
  EXPECT_EQ(serialize_index(deserialize_index(bytes)), bytes);
}

TEST(Index, CorruptionDetected) {
  auto bytes = serialize_index(build_index(courts()));
  auto code = [](const std::string& b) {
    try {
      deserialize_index(b);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Empty;
  };
  EXPECT_EQ(code("XXXXXXXX" + bytes.substr(8)), ErrorCode::CorruptIndex);
  for (std::size_t cut : {std::size_t{3}, std::size_t{12}, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_EQ(code(bytes.substr(0, cut)), ErrorCode::CorruptIndex) << cut;
  }
  EXPECT_EQ(code(bytes + "x"), ErrorCode::CorruptIndex);
}

TEST(Index, FingerprintTracksContent) {
  auto c = courts();
  auto idx = build_index(c);
  EXPECT_NO_THROW(check_fingerprint(idx, c));
  // corpus id and metadata are not part of the fingerprint
  auto docs = c.documents();
  docs[0].metadata["year"] = "1999";
  EXPECT_NO_THROW(check_fingerprint(idx, Corpus("renamed", docs)));
  docs[0].sentences[0].tokens[1].lemma = "statement";
  try {
    check_fingerprint(idx, Corpus("courts", docs));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FingerprintMismatch);
  }
}

TEST(Index, EmptyCorpusRejected) {
  try {
    build_index(Corpus("empty", {}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyCorpus);
  }
}

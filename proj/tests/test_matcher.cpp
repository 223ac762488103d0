#include <gtest/gtest.h>

#include <random>
#include <set>

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

std::vector<GraphQuery> queries(const std::string& file) {
  auto lists = parse_word_lists(text::read_file(kData + "/lists.txt"));
  std::vector<GraphQuery> out;
  for (const auto& r : parse_query_file(text::read_file(kFixtures + "/" + file))) {
    out.push_back(compile_record(r, lists));
  }
  return out;
}

std::vector<std::vector<TokenIndex>> assignments(const SentenceMatches& m) {
  std::vector<std::vector<TokenIndex>> out;
  for (const auto& x : m.matches) out.push_back(x.assignment);
  return out;
}

}  // namespace

TEST(Matcher, AgreesWithExhaustiveEnumeration) {
  std::mt19937_64 rng(20240601);
  std::size_t nonempty = 0;
  for (int i = 0; i < 500; ++i) {
    auto s = oracle::random_tree(rng, 1 + rng() % 12, "r#s" + std::to_string(i));
    auto q = oracle::random_pattern(rng, 4);
    auto expected = oracle::brute_force(s, q);
    auto got = assignments(match_sentence(s, q));
    ASSERT_EQ(got, expected) << "case " << i << "\n" << to_conllu(s) << to_dsl(q);
    nonempty += !expected.empty();
  }
  // the generator must exercise real matches, not only empty results
  EXPECT_GT(nonempty, 100u);
}

TEST(Matcher, AssignmentIsInjective) {
  auto s = oracle::build("x#s1", {{"a", "a", "NOUN", 0, "root"}, {"b", "b", "NOUN", 1, "amod"}});
  auto q = parse_graph_dsl("node x pos=NOUN\nnode y pos=NOUN\nedge x -*-> y\n");
  auto m = match_sentence(s, q);
  ASSERT_EQ(m.matches.size(), 1u);
  EXPECT_EQ(m.matches[0].assignment, (std::vector<TokenIndex>{1, 2}));
}

TEST(Matcher, UsesEnhancedEdges) {
  auto raw = load_corpus(kFixtures + "/control.conllu");
  auto q = parse_graph_dsl("node d lemma=dance\nnode s capture=subj lemma=I\nedge d -nsubj-> s\n");
  EXPECT_TRUE(match_sentence(raw.sentence("control#s1"), q).matches.empty());
  auto enhanced = enhance_corpus(raw, {}, default_rule_set());
  EXPECT_EQ(match_sentence(enhanced.sentence("control#s1"), q).matches.size(), 1u);
  EXPECT_TRUE(match_sentence(enhanced.sentence("control#s2"), q).matches.empty());
}

TEST(Matcher, CapturesCarrySpansAndText) {
  auto c = courts();
  auto q = queries("extraction.queries").at(0);
  auto ms = search_full_scan(c, q);
  ASSERT_EQ(ms.matches.size(), 3u);
  const auto& m = ms.matches[1];
  EXPECT_EQ(m.sentence_id, "d03#s1");
  const auto& w = m.captures.at("witness");
  EXPECT_EQ(w.text, "Her testimony");
  EXPECT_EQ(w.span.char_start, 0u);
  EXPECT_EQ(w.span.char_end, 13u);
  const auto& a = m.captures.at("adj");
  EXPECT_EQ(a.text, "honest");  // adjectives are not expanded
  EXPECT_EQ(a.lemma, "honest");
}

TEST(Matcher, StructuralNodesDoNotMultiplyMatches) {
  // nsubj from any head: one match per subject, whichever head is used
  auto s = oracle::build("x#s1", {{"v", "v", "VERB", 0, "root"},
                                  {"n", "n", "NOUN", 1, "nsubj"},
                                  {"w", "w", "VERB", 1, "conj"}},
                         {{3, 2, "nsubj"}});
  auto q = parse_graph_dsl("node h\nnode s capture=subj pos=NOUN\nedge h -nsubj-> s\n");
  auto m = match_sentence(s, q);
  ASSERT_EQ(m.matches.size(), 1u);
  EXPECT_EQ(m.matches[0].assignment, (std::vector<TokenIndex>{1, 2}));
}

TEST(Matcher, CapTruncates) {
  auto c = courts();
  auto q = parse_graph_dsl("node d capture=det lemma=the\n");
  auto all = search_full_scan(c, q);
  EXPECT_FALSE(all.truncated);
  auto some = search_full_scan(c, q, 3);
  EXPECT_TRUE(some.truncated);
  ASSERT_EQ(some.matches.size(), 3u);
  EXPECT_TRUE(std::equal(some.matches.begin(), some.matches.end(), all.matches.begin()));
  auto exact = search_full_scan(c, q, all.matches.size());
  EXPECT_FALSE(exact.truncated);
}

TEST(Matcher, IndexedSearchEqualsFullScan) {
  auto c = courts();
  auto idx = build_index(c);
  for (const auto& q : queries("bundled.queries")) {
    EXPECT_EQ(search(idx, c, q), search_full_scan(c, q)) << q.name;
  }
}

TEST(Matcher, StaleIndexRejected) {
  auto c = courts();
  auto idx = build_index(load_corpus(kFixtures + "/courts"));  // not enhanced
  try {
    search(idx, c, queries("extraction.queries").at(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FingerprintMismatch);
  }
}

TEST(Matcher, AggregateByLemmaAndForm) {
  auto c = courts();
  auto ms = search_full_scan(c, queries("extraction.queries").at(0));
  auto agg = aggregate(ms, "adj");
  ASSERT_EQ(agg.size(), 2u);
  EXPECT_EQ(agg[0], (std::pair<std::string, std::size_t>{"reliable", 2}));
  EXPECT_EQ(agg[1], (std::pair<std::string, std::size_t>{"honest", 1}));
  auto forms = aggregate(ms, "witness", AggregateKey::Form);
  EXPECT_EQ(forms.at(0), (std::pair<std::string, std::size_t>{"testimony", 3}));
  try {
    aggregate(ms, "nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownCapture);
  }
}

TEST(Extraction, ReportMatchesSetAlgebra) {
  auto c = courts();
  auto idx = build_index(c);
  auto qs = queries("extraction.queries");
  auto rep = run_query_set(qs, idx, c);

  // oracle: per-query sentence sets from exhaustive matching
  std::vector<std::set<std::string>> sets(qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    for (std::size_t o = 0; o < c.sentence_count(); ++o) {
      if (!oracle::brute_force(c.sentence_at(o), qs[i]).empty()) {
        sets[i].insert(c.sentence_at(o).sentence_id);
      }
    }
  }
  std::set<std::string> all;
  for (const auto& s : sets) all.insert(s.begin(), s.end());
  ASSERT_EQ(rep.queries.size(), 2u);
  for (std::size_t i = 0; i < qs.size(); ++i) {
    std::set<std::string> others;
    for (std::size_t j = 0; j < qs.size(); ++j) {
      if (j != i) others.insert(sets[j].begin(), sets[j].end());
    }
    std::size_t unique = 0;
    for (const auto& s : sets[i]) unique += !others.count(s);
    EXPECT_EQ(rep.queries[i].total, sets[i].size());
    EXPECT_EQ(rep.queries[i].unique, unique);
  }
  EXPECT_EQ(rep.total_extracted, all.size());
  std::map<std::string, std::size_t> per_doc;
  for (const auto& s : all) ++per_doc[s.substr(0, s.find('#'))];
  std::size_t multiple = 0;
  for (const auto& [d, n] : per_doc) multiple += n > 1;
  EXPECT_EQ(rep.documents_with_any, per_doc.size());
  EXPECT_EQ(rep.documents_with_multiple, multiple);

  // planted values
  EXPECT_EQ(rep.document_count, 10u);
  EXPECT_EQ(rep.total_extracted, 5u);
  EXPECT_DOUBLE_EQ(rep.pct_with_any(), 40.0);
  EXPECT_DOUBLE_EQ(rep.pct_with_multiple(), 10.0);
  EXPECT_EQ(rep.queries[0].unique, 2u);
  EXPECT_EQ(rep.queries[1].unique, 2u);
}

TEST(Extraction, ReportFormatIsStable) {
  auto c = courts();
  auto rep = run_query_set(queries("extraction.queries"), build_index(c), c);
  const std::string expected =
      "queries: 2\n"
      "query.1.name: credible_testimony\n"
      "query.1.total: 3\n"
      "query.1.unique: 2\n"
      "query.2.name: trust_complainant\n"
      "query.2.total: 3\n"
      "query.2.unique: 2\n"
      "documents: 10\n"
      "total_extracted_sentences: 5\n"
      "documents_with_extraction: 4\n"
      "documents_with_multiple: 1\n"
      "coverage_at_least_one_pct: 40.00\n"
      "coverage_multiple_pct: 10.00\n";
  EXPECT_EQ(format_report(rep), expected);
  auto ex = format_extracted(rep, c);
  EXPECT_EQ(ex.substr(0, ex.find('\n')),
            "d01\td01#s1\tThe testimony of the complainant was reliable.");
}

TEST(Extraction, FormatMatchesLayout) {
  auto c = courts();
  auto ms = search_full_scan(c, queries("extraction.queries").at(1));
  auto text = format_matches(ms);
  EXPECT_EQ(text.substr(0, text.find('\n')), "# query=trust_complainant matches=3 truncated=0");
  EXPECT_NE(text.find("d03#s2\twho\tcomplainant\t"), std::string::npos);
}

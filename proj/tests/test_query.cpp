#include <gtest/gtest.h>

#include "synq/query.hpp"

using namespace synq;

namespace {

const std::string kFixtures = SYNQ_FIXTURES;
const std::string kData = SYNQ_DATA;

ErrorCode dsl_error(std::string_view dsl, std::size_t* line = nullptr) {
  try {
    parse_graph_dsl(dsl);
  } catch (const Error& e) {
    if (line) *line = e.line().value_or(0);
    return e.code();
  }
  ADD_FAILURE() << "parsed: " << dsl;
  return ErrorCode::Empty;
}

SentenceGraph parse_of(std::string_view conllu) {
  return load_conllu(conllu, "example").sentences.at(0);
}

constexpr std::string_view kReliable =
    "1\tThe\tthe\tDET\t_\t_\t2\tdet\t_\t_\n"
    "2\ttestimony\ttestimony\tNOUN\t_\t_\t4\tnsubj\t_\t_\n"
    "3\twas\tbe\tAUX\t_\t_\t4\tcop\t_\t_\n"
    "4\treliable\treliable\tADJ\t_\t_\t0\troot\t_\t_\n";

}  // namespace

TEST(Dsl, ParsesNodesEdgesAndInlineLists) {
  auto q = parse_graph_dsl(
      "name: q1\n"
      "node t capture=witness lemma=testimony\n"
      "node a capture=adj list=[Reliable|honest] pos=ADJ\n"
      "edge a -nsubj-> t\n");
  EXPECT_EQ(q.name, "q1");
  ASSERT_EQ(q.nodes.size(), 2u);
  EXPECT_EQ(*q.nodes[0].lemma, "testimony");
  EXPECT_EQ(*q.nodes[1].upos, "ADJ");
  ASSERT_EQ(q.edges.size(), 1u);
  EXPECT_EQ(q.edges[0].head, 1u);
  EXPECT_EQ(q.edges[0].dependent, 0u);
  auto r = resolve_lists(q, {});
  EXPECT_EQ(*r.nodes[1].lemma_set, (std::set<std::string>{"honest", "reliable"}));
  EXPECT_EQ(q.capture_names(), (std::vector<std::string>{"witness", "adj"}));
}

TEST(Dsl, RoundTripsThroughText) {
  const std::string dsl =
      "name: rt\n"
      "node v lemma=trust\n"
      "node o capture=who list=@witness\n"
      "node i list=[a|b]\n"
      "node x\n"
      "edge v -obj-> o\n"
      "edge v -*-> x\n"
      "edge o -amod-> i\n";
  auto q = parse_graph_dsl(dsl);
  EXPECT_EQ(to_dsl(q), dsl);
  EXPECT_EQ(to_dsl(parse_graph_dsl(to_dsl(q))), to_dsl(q));
}

TEST(Dsl, ErrorsCarryLines) {
  std::size_t line = 0;
  EXPECT_EQ(dsl_error("node a lemma=x\nnode b\nedge a -nsubj> b\n", &line), ErrorCode::SyntaxError);
  EXPECT_EQ(line, 3u);
  EXPECT_EQ(dsl_error("node a lemma=x\nedge a -nsubj-> zz\n", &line), ErrorCode::UnknownNodeId);
  EXPECT_EQ(line, 2u);
  EXPECT_EQ(dsl_error("node a lemma=x\nfrobnicate\n", &line), ErrorCode::SyntaxError);
  EXPECT_EQ(line, 2u);
  EXPECT_EQ(dsl_error("node a lemma=x list=@l\n"), ErrorCode::SyntaxError);
  EXPECT_EQ(dsl_error("node a lemma=x\nnode a\n"), ErrorCode::SyntaxError);
  EXPECT_EQ(dsl_error("node a capture=c\nnode b capture=c\nedge a -x-> b\n"), ErrorCode::SyntaxError);
}

TEST(Dsl, StructuralInvariants) {
  EXPECT_EQ(dsl_error("node a lemma=x\nnode b lemma=y\n"), ErrorCode::DisconnectedPattern);
  EXPECT_EQ(dsl_error("node a\nnode b\nedge a -nsubj-> b\n"), ErrorCode::NoConstrainedNode);
  EXPECT_EQ(dsl_error(""), ErrorCode::NoConstrainedNode);
}

TEST(Lists, ParseAndResolve) {
  auto t = parse_word_lists(text::read_file(kData + "/lists.txt"));
  ASSERT_TRUE(t.find("credible"));
  EXPECT_TRUE(t.find("credible")->count("reliable"));
  auto q = resolve_lists(parse_graph_dsl("node a list=@credible\n"), t);
  EXPECT_TRUE(q.nodes[0].lemma_set->count("honest"));
  try {
    resolve_lists(parse_graph_dsl("node a list=@missing\n"), t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownList);
  }
  EXPECT_THROW(parse_word_lists("no colon here\n"), Error);
}

TEST(Example, CompilesSteinerSubtree) {
  auto q = compile_example("The w:testimony was $reliable", parse_of(kReliable), {});
  ASSERT_EQ(q.nodes.size(), 2u);
  EXPECT_EQ(q.nodes[0].id, "w");
  EXPECT_EQ(*q.nodes[0].capture, "w");
  EXPECT_FALSE(q.nodes[0].lemma);
  EXPECT_EQ(q.nodes[1].id, "t4");
  EXPECT_EQ(*q.nodes[1].lemma, "reliable");
  ASSERT_EQ(q.edges.size(), 1u);
  EXPECT_EQ(q.edges[0].head, 1u);
  EXPECT_EQ(q.edges[0].dependent, 0u);
  EXPECT_EQ(q.edges[0].deprel, "nsubj");
}

TEST(Example, KeepsUnmarkedTokensOnThePath) {
  // Both marked tokens hang off "testimony", which is not marked.
  constexpr std::string_view parse =
      "1\tThe\tthe\tDET\t_\t_\t2\tdet\t_\t_\n"
      "2\ttestimony\ttestimony\tNOUN\t_\t_\t0\troot\t_\t_\n"
      "3\tof\tof\tADP\t_\t_\t5\tcase\t_\t_\n"
      "4\tthe\tthe\tDET\t_\t_\t5\tdet\t_\t_\n"
      "5\tvictim\tvictim\tNOUN\t_\t_\t2\tnmod\t_\t_\n";
  auto q = compile_example("$The testimony of the who:victim", parse_of(parse), {});
  ASSERT_EQ(q.nodes.size(), 3u);
  EXPECT_EQ(q.nodes[1].id, "s2");
  EXPECT_TRUE(q.nodes[1].structural());
  EXPECT_EQ(q.edges.size(), 2u);
}

TEST(Example, InlineAndNamedLists) {
  WordListTable t;
  t.lists["credible"] = {"reliable", "honest"};
  auto q = compile_example("The w:[testimony|account] was adj:@credible", parse_of(kReliable), t);
  ASSERT_EQ(q.nodes.size(), 2u);
  EXPECT_TRUE(q.nodes[0].lemma_set->count("account"));
  EXPECT_TRUE(q.nodes[1].lemma_set->count("honest"));
}

TEST(Example, Errors) {
  auto code = [&](std::string_view m, const WordListTable& t = {}) {
    try {
      compile_example(m, parse_of(kReliable), t);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Empty;
  };
  EXPECT_EQ(code("The testimony was"), ErrorCode::MarkupMismatch);
  EXPECT_EQ(code("The testimony is $reliable"), ErrorCode::MarkupMismatch);
  EXPECT_EQ(code("The testimony was reliable"), ErrorCode::NoMarkedToken);
  EXPECT_EQ(code("The w:testimony was a:@nope"), ErrorCode::UnknownList);
}

TEST(QueryFile, SplitsRecordsAndNumbersLines) {
  auto recs = parse_query_file(text::read_file(kFixtures + "/bundled.queries"));
  ASSERT_EQ(recs.size(), 10u);
  EXPECT_EQ(recs[0].name, "credible_testimony");
  EXPECT_EQ(recs[7].kind, QueryRecord::Kind::Example);
  EXPECT_TRUE(recs[7].parse_conllu);
  auto lists = parse_word_lists(text::read_file(kData + "/lists.txt"));
  for (const auto& r : recs) EXPECT_NO_THROW(compile_record(r, lists)) << r.name;
}

TEST(QueryFile, DslErrorReportsFileLine) {
  auto recs = parse_query_file(text::read_file(kFixtures + "/bad.queries"));
  ASSERT_EQ(recs.size(), 1u);
  try {
    compile_record(recs[0], {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SyntaxError);
    EXPECT_EQ(e.line().value_or(0), 3u);
  }
  auto two = parse_query_file("node a lemma=x\n---\nname: second\nnode b lemma=y\nedge b -r-> q\n");
  try {
    compile_record(two.at(1), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.line().value_or(0), 5u);
  }
}

TEST(QueryFile, ExampleWithoutParseNeedsParser) {
  auto recs = parse_query_file("name: ex\nexample: The w:testimony was $reliable\n");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_FALSE(recs[0].parse_conllu);
  try {
    compile_record(recs[0], {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParserUnavailable);
  }
  auto parse = parse_of(kReliable);
  EXPECT_EQ(compile_record(recs[0], {}, &parse).nodes.size(), 2u);
}

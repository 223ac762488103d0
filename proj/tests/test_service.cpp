#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <thread>

#include "synq/service.hpp"

using namespace synq;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = SYNQ_FIXTURES;
const std::string kData = SYNQ_DATA;

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("synq_svc_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << bytes;
}

std::vector<AnnotationRecord> ratings() {
  return parse_records(text::read_file(kFixtures + "/ratings.tsv"));
}

ServiceConfig config(std::optional<fs::path> log = std::nullopt) {
  ServiceConfig cfg;
  cfg.lists = parse_word_lists(text::read_file(kData + "/lists.txt"));
  cfg.enhancement = parse_enhancement_config(text::read_file(kData + "/rules.txt"));
  cfg.annotation_log = std::move(log);
  return cfg;
}

std::unique_ptr<Service> courts_service(std::optional<fs::path> log = std::nullopt) {
  auto s = std::make_unique<Service>(config(std::move(log)));
  s->add_corpus("courts", load_corpus(kFixtures + "/courts"));
  return s;
}

std::string error_code(const Response& r) { return r.body.at("error").at("code").get<std::string>(); }

}  // namespace

TEST(Store, AcknowledgedRecordsSurviveReopen) {
  TempDir d;
  const auto log = d.path / "ann.log";
  auto recs = ratings();
  {
    AnnotationStore s(log);
    for (const auto& r : recs) s.append(r);
  }
  AnnotationStore again(log);
  EXPECT_EQ(again.log(), recs);
  EXPECT_EQ(again.view(), replay(recs));
}

TEST(Store, LastWriteWinsPerSentenceAndAnnotator) {
  TempDir d;
  AnnotationStore s(d.path / "a.log");
  auto g = LabelOntology::builtin().granular_labels();
  s.append({"d01#s1", "ann1", g[0], {}, 0, 0, {}});
  s.append({"d01#s1", "ann2", g[1], {}, 0, 0, {}});
  s.append({"d01#s1", "ann1", g[2], {}, 1, 0, {}});
  ASSERT_EQ(s.records().size(), 2u);
  EXPECT_EQ(s.view().at({"d01#s1", "ann1"}).primary_label, g[2]);
  EXPECT_EQ(s.log().size(), 3u);
}

TEST(Store, InvalidRecordNotWritten) {
  TempDir d;
  const auto log = d.path / "a.log";
  AnnotationStore s(log);
  try {
    s.append({"d01#s1", "ann1", "Credible but", {}, 0, 0, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidRecord);
  }
  EXPECT_TRUE(s.log().empty());
  EXPECT_TRUE(!fs::exists(log) || fs::file_size(log) == 0);
}

TEST(Store, CrashAtAnyByteLeavesAcknowledgedPrefix) {
  TempDir d;
  const auto full = d.path / "full.log";
  std::vector<AnnotationRecord> recs;
  auto all = ratings();
  recs.assign(all.begin(), all.begin() + 10);
  recs.push_back(all[0]);
  recs.back().primary_label = all[4].primary_label;  // an overwrite inside the log
  {
    AnnotationStore s(full);
    for (const auto& r : recs) s.append(r);
  }
  const auto bytes = text::read_file(full.string());
  for (std::size_t cut = 0; cut <= bytes.size(); ++cut) {
    const auto prefix = bytes.substr(0, cut);
    std::vector<AnnotationRecord> acked;
    std::size_t complete = 0;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
      if (prefix[i] == '\n') {
        acked.push_back(parse_record(std::string_view(prefix).substr(complete, i - complete)));
        complete = i + 1;
      }
    }
    const auto path = d.path / "cut.log";
    write_bytes(path, prefix);
    AnnotationStore s(path);
    ASSERT_EQ(s.view(), replay(acked)) << "cut at " << cut;
    ASSERT_EQ(fs::file_size(path), complete) << "torn tail kept at " << cut;
    // the store keeps accepting appends after recovery
    s.append(recs.back());
    AnnotationStore reopened(path);
    auto expected = acked;
    expected.push_back(recs.back());
    ASSERT_EQ(reopened.log(), expected) << "cut at " << cut;
  }
}

TEST(Store, CorruptCompleteLineIsAnError) {
  TempDir d;
  const auto path = d.path / "bad.log";
  write_bytes(path, "d01#s1\tann1\tbroken\n");
  try {
    AnnotationStore s(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StorageFailure);
  }
}

TEST(Service, SearchEqualsLibrarySearch) {
  auto owner = courts_service();
  auto& svc = *owner;
  auto cfg = config();
  auto c = enhance_corpus(load_corpus(kFixtures + "/courts"), cfg.enhancement.labels,
                          cfg.enhancement.rules);
  auto idx = build_index(c);
  for (const auto& r : parse_query_file(text::read_file(kFixtures + "/bundled.queries"))) {
    SearchRequest req{"courts", r.body, r.kind, r.parse_conllu, kDefaultMatchCap};
    auto resp = svc.handle_search(req);
    auto direct = search(idx, c, compile_record(r, cfg.lists));
    EXPECT_EQ(resp.matches.matches, direct.matches) << r.name;
    EXPECT_EQ(resp.matches.truncated, direct.truncated) << r.name;
  }
}

TEST(Service, SearchIsStateless) {
  auto owner = courts_service();
  auto& svc = *owner;
  const std::string body =
      R"({"corpus":"courts","query":"node t capture=w lemma=testimony\nnode a capture=adj list=@credible\nedge a -nsubj-> t\n"})";
  auto first = svc.handle("POST", "/search", body);
  ASSERT_EQ(first.status, 200) << first.body.dump();
  svc.handle("POST", "/search", R"({"corpus":"courts","query":"node x lemma=court\n"})");
  auto second = svc.handle("POST", "/search", body);
  EXPECT_EQ(first.body, second.body);
  EXPECT_EQ(first.body["matches"].size(), 3u);
  EXPECT_EQ(first.body["aggregations"]["adj"][0]["value"], "reliable");
}

TEST(Service, ExampleWithoutParserIsUnavailable) {
  auto owner = courts_service();
  auto& svc = *owner;
  auto r = svc.handle("POST", "/search",
                      R"({"corpus":"courts","kind":"example","query":"The w:testimony was $reliable"})");
  EXPECT_EQ(r.status, 503);
  EXPECT_EQ(error_code(r), "ParserUnavailable");
}

TEST(Service, CompileErrorCarriesLine) {
  auto owner = courts_service();
  auto& svc = *owner;
  auto r = svc.handle("POST", "/search",
                      R"({"corpus":"courts","query":"node t lemma=x\nnode a\nedge t -nsubj> a\n"})");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(error_code(r), "CompileError");
  EXPECT_EQ(r.body["error"]["line"], 3);
  EXPECT_NE(r.body["error"]["message"].get<std::string>().find("SyntaxError"), std::string::npos);
}

TEST(Service, UnknownCorpusAndBadBodies) {
  auto owner = courts_service();
  auto& svc = *owner;
  auto r = svc.handle("POST", "/search", R"({"corpus":"nope","query":"node a lemma=x\n"})");
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(error_code(r), "UnknownCorpus");
  EXPECT_EQ(svc.handle("POST", "/search", "{not json").status, 400);
  EXPECT_EQ(svc.handle("POST", "/search", R"({"corpus":"courts"})").status, 400);
  EXPECT_EQ(svc.handle("GET", "/nowhere", "").status, 400);
}

TEST(Service, ReportsNeedTheirInputs) {
  auto owner = courts_service();
  auto& svc = *owner;
  auto r = svc.handle("POST", "/reports/coverage", R"({"corpus":"courts"})");
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(error_code(r), "MissingData");
  EXPECT_EQ(svc.handle("POST", "/reports/iaa", "{}").status, 409);
}

TEST(Service, ExtractFeedsCoverageAndContribution) {
  auto owner = courts_service();
  auto& svc = *owner;
  const auto queries = text::read_file(kFixtures + "/extraction.queries");
  json body = {{"corpus", "courts"}, {"queries", queries}};
  auto ex = svc.handle("POST", "/extract", body.dump());
  ASSERT_EQ(ex.status, 200) << ex.body.dump();

  auto cfg = config();
  auto c = enhance_corpus(load_corpus(kFixtures + "/courts"), cfg.enhancement.labels,
                          cfg.enhancement.rules);
  std::vector<GraphQuery> qs;
  for (const auto& r : parse_query_file(queries)) qs.push_back(compile_record(r, cfg.lists));
  auto rep = run_query_set(qs, build_index(c), c);

  auto contrib = svc.handle("POST", "/reports/query_contrib", R"({"corpus":"courts"})").body;
  ASSERT_EQ(contrib["queries"].size(), rep.queries.size());
  for (std::size_t i = 0; i < rep.queries.size(); ++i) {
    EXPECT_EQ(contrib["queries"][i]["name"], rep.queries[i].name);
    EXPECT_EQ(contrib["queries"][i]["total"], rep.queries[i].total);
    EXPECT_EQ(contrib["queries"][i]["unique"], rep.queries[i].unique);
  }
  auto cov = svc.handle("POST", "/reports/coverage", R"({"corpus":"courts"})").body;
  EXPECT_DOUBLE_EQ(cov["coverage_at_least_one_pct"].get<double>(), 40.0);
  EXPECT_DOUBLE_EQ(cov["coverage_multiple_pct"].get<double>(), 10.0);
}

TEST(Service, AnnotationsDriveAgreementReport) {
  TempDir d;
  auto owner = courts_service(d.path / "ann.log");
  auto& svc = *owner;
  auto recs = ratings();
  for (const auto& r : recs) {
    auto resp = svc.handle("POST", "/annotations", to_json(r).dump());
    ASSERT_EQ(resp.status, 200) << resp.body.dump();
  }
  auto got = svc.handle("POST", "/reports/iaa", R"({"level":"high","exclude_not_relevant":true})").body;
  const double expected = krippendorff_alpha(RatingsMatrix::from_records(recs), LabelOntology::builtin(),
                                             {Level::High, true});
  EXPECT_DOUBLE_EQ(got["alpha"].get<double>(), expected);

  auto listed = svc.handle("GET", "/annotations", "").body["records"];
  EXPECT_EQ(listed.size(), recs.size());
  EXPECT_EQ(record_from_json(listed[0]), svc.annotations()[0]);

  auto dist = svc.handle("POST", "/reports/label_dist", R"({"level":"high"})").body["distribution"];
  double sum = 0;
  for (const auto& [k, v] : dist.items()) sum += v.get<double>();
  EXPECT_NEAR(sum, 1.0, 1e-12);
  auto hist = svc.handle("POST", "/reports/context_hist", "{}");
  EXPECT_EQ(hist.status, 200);

  // a restarted service sees the same annotations
  auto again = courts_service(d.path / "ann.log");
  EXPECT_EQ(again->annotations(), svc.annotations());
}

TEST(Service, AnnotationsMustReferToKnownSentences) {
  TempDir d;
  auto owner = courts_service(d.path / "ann.log");
  auto& svc = *owner;
  auto r = ratings().at(0);
  r.sentence_id = "d99#s1";
  auto resp = svc.handle("POST", "/annotations", to_json(r).dump());
  EXPECT_EQ(resp.status, 404);
  EXPECT_EQ(error_code(resp), "UnknownSentence");
  r = ratings().at(0);
  r.primary_label = "Credible but";
  EXPECT_EQ(error_code(svc.handle("POST", "/annotations", to_json(r).dump())), "InvalidRecord");
  EXPECT_TRUE(svc.annotations().empty());
}

TEST(Service, IngestSuggestAndContext) {
  Service svc(config());
  json ingest = {{"name", "planted"}, {"path", kFixtures + "/suggest.conllu"}};
  ASSERT_EQ(svc.handle("POST", "/corpora/ingest", ingest.dump()).status, 200);
  auto listed = svc.handle("GET", "/corpora", "").body["corpora"];
  ASSERT_EQ(listed.size(), 1u);
  EXPECT_EQ(listed[0]["name"], "planted");

  auto sug = svc.handle("POST", "/suggest",
                        R"({"corpus":"planted","pairs":["testimony:reliable"],"k":2,"keep":"both"})");
  ASSERT_EQ(sug.status, 200) << sug.body.dump();
  EXPECT_EQ(sug.body["suggestions"][0]["path"], "up:nsubj");
  EXPECT_EQ(sug.body["suggestions"][0]["count"], 5);

  auto ctx = svc.handle("POST", "/context",
                        R"({"corpus":"planted","sentence_id":"planted#s2","before":1,"after":1})");
  ASSERT_EQ(ctx.status, 200) << ctx.body.dump();
  ASSERT_EQ(ctx.body["sentences"].size(), 3u);
  EXPECT_EQ(ctx.body["sentences"][0]["sentence_id"], "planted#s1");
}

TEST(Http, RoundTripOverLoopback) {
  auto owner = courts_service();
  auto& svc = *owner;
  HttpFrontend front(svc);
  const int port = front.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread t([&] { front.listen(); });
  front.wait_until_ready();

  httplib::Client cli("127.0.0.1", port);
  const std::string body = R"({"corpus":"courts","query":"node c capture=c lemma=court\n"})";
  auto res = cli.Post("/search", body, "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body), svc.handle("POST", "/search", body).body);
  auto miss = cli.Post("/search", R"({"corpus":"x","query":"node a lemma=y\n"})", "application/json");
  ASSERT_TRUE(miss);
  EXPECT_EQ(miss->status, 404);
  auto corpora = cli.Get("/corpora");
  ASSERT_TRUE(corpora);
  EXPECT_EQ(json::parse(corpora->body)["corpora"][0]["name"], "courts");

  front.stop();
  t.join();
}

#pragma once

// Long-running request/response service: corpora, search, suggestions,
// context windows, annotation persistence and reports.
//
// Requests and responses are JSON objects. Every error response has the shape
//   {"error": {"code": "<ErrorCode name>", "message": "...", "line": n?}}

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "synq/corpus.hpp"
#include "synq/error.hpp"
#include "synq/graph_enhance.hpp"
#include "synq/index.hpp"
#include "synq/matcher.hpp"
#include "synq/ontology_eval.hpp"
#include "synq/query.hpp"
#include "synq/suggest.hpp"
#include "synq/text.hpp"

namespace synq {

using json = nlohmann::ordered_json;

// Latest record per (sentence_id, annotator_id) from a record sequence.
inline std::map<std::pair<std::string, std::string>, AnnotationRecord> replay(
    const std::vector<AnnotationRecord>& log) {
  std::map<std::pair<std::string, std::string>, AnnotationRecord> view;
  for (const auto& r : log) view[{r.sentence_id, r.annotator_id}] = r;
  return view;
}

// Append-only annotation log, one record per line. A record is acknowledged
// only after its line has been written and fsync'ed. A torn final line (no
// terminating newline) is discarded on open.
class AnnotationStore {
 public:
  explicit AnnotationStore(std::filesystem::path log_path,
                           LabelOntology ontology = LabelOntology::builtin())
      : path_(std::move(log_path)), ontology_(std::move(ontology)) {
    reload();
  }

  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;
  ~AnnotationStore() { close_fd(); }

  const std::filesystem::path& path() const { return path_; }

  void reload() {
    std::lock_guard lock(mu_);
    close_fd();
    log_.clear();
    std::string content;
    if (std::filesystem::exists(path_)) content = text::read_file(path_.string());
    const auto complete = content.rfind('\n');
    const std::size_t keep = complete == std::string::npos ? 0 : complete + 1;
    if (keep < content.size()) {
      std::error_code ec;
      std::filesystem::resize_file(path_, keep, ec);
      if (ec) throw Error(ErrorCode::StorageFailure, "cannot drop torn tail: " + ec.message());
    }
    auto lines = text::lines(std::string_view(content).substr(0, keep));
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      try {
        log_.push_back(parse_record(lines[i], i + 1));
      } catch (const Error& e) {
        throw Error(ErrorCode::StorageFailure,
                    path_.string() + ":" + std::to_string(i + 1) + ": " + e.detail());
      }
    }
    view_ = replay(log_);
  }

  // Validates, appends durably, then updates the in-memory view.
  void append(const AnnotationRecord& r) {
    validate_record(r, ontology_);
    std::lock_guard lock(mu_);
    if (fd_ < 0) {
      fd_ = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
      if (fd_ < 0) throw Error(ErrorCode::StorageFailure, std::strerror(errno));
    }
    const auto line = format_record(r) + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
      auto n = ::write(fd_, line.data() + written, line.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::StorageFailure, std::strerror(errno));
      }
      written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw Error(ErrorCode::StorageFailure, std::strerror(errno));
    log_.push_back(r);
    view_[{r.sentence_id, r.annotator_id}] = r;
  }

  std::vector<AnnotationRecord> records() const {
    std::lock_guard lock(mu_);
    std::vector<AnnotationRecord> out;
    for (const auto& [key, r] : view_) out.push_back(r);
    return out;
  }

  std::vector<AnnotationRecord> log() const {
    std::lock_guard lock(mu_);
    return log_;
  }

  std::map<std::pair<std::string, std::string>, AnnotationRecord> view() const {
    std::lock_guard lock(mu_);
    return view_;
  }

 private:
  void close_fd() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  std::filesystem::path path_;
  LabelOntology ontology_;
  mutable std::mutex mu_;
  int fd_ = -1;
  std::vector<AnnotationRecord> log_;
  std::map<std::pair<std::string, std::string>, AnnotationRecord> view_;
};

// Out-of-process parser: POSTs raw text, expects CoNLL-U back.
struct ParserAdapter {
  std::string endpoint;  // e.g. "http://127.0.0.1:9000/parse"
  int timeout_seconds = 10;
  bool enabled = false;

  SentenceGraph parse(const std::string& sentence) const {
    if (!enabled || endpoint.empty()) {
      throw Error(ErrorCode::ParserUnavailable, "no parser configured; attach a parse");
    }
    auto scheme_end = endpoint.find("://");
    auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = endpoint.find('/', host_start);
    const auto base = endpoint.substr(0, path_start);
    const auto route = path_start == std::string::npos ? "/" : endpoint.substr(path_start);
    httplib::Client cli(base);
    cli.set_connection_timeout(timeout_seconds, 0);
    cli.set_read_timeout(timeout_seconds, 0);
    auto res = cli.Post(route, sentence, "text/plain; charset=utf-8");
    if (!res || res->status != 200) {
      throw Error(ErrorCode::ParserUnavailable, "parser request to " + endpoint + " failed");
    }
    auto doc = load_conllu(res->body, "parsed");
    if (doc.sentences.size() != 1) {
      throw Error(ErrorCode::ParserUnavailable, "parser returned " +
                                                    std::to_string(doc.sentences.size()) +
                                                    " sentences");
    }
    return std::move(doc.sentences.front());
  }
};

struct ServiceConfig {
  WordListTable lists;
  EnhancementConfig enhancement{LabelMap{}, default_rule_set()};
  LabelOntology ontology = LabelOntology::builtin();
  std::optional<std::filesystem::path> annotation_log;
  ParserAdapter parser;
};

struct SearchRequest {
  std::string corpus;
  std::string query;
  QueryRecord::Kind kind = QueryRecord::Kind::Dsl;
  std::optional<std::string> parse_conllu;
  std::size_t limit = kDefaultMatchCap;
};

struct SearchResponse {
  GraphQuery query;
  MatchSet matches;
  std::map<std::string, std::vector<std::pair<std::string, std::size_t>>> aggregations;
};

inline json to_json(const AnnotationRecord& r) {
  json j;
  j["sentence_id"] = r.sentence_id;
  j["annotator_id"] = r.annotator_id;
  j["primary_label"] = r.primary_label;
  j["secondary_label"] = r.secondary_label ? json(*r.secondary_label) : json(nullptr);
  j["context_before"] = r.context_before;
  j["context_after"] = r.context_after;
  j["correction_target"] = r.correction_target ? json(*r.correction_target) : json(nullptr);
  return j;
}

inline AnnotationRecord record_from_json(const json& j) {
  AnnotationRecord r;
  try {
    r.sentence_id = j.at("sentence_id").get<std::string>();
    r.annotator_id = j.at("annotator_id").get<std::string>();
    r.primary_label = j.at("primary_label").get<std::string>();
    if (j.contains("secondary_label") && !j["secondary_label"].is_null()) {
      r.secondary_label = j["secondary_label"].get<std::string>();
    }
    r.context_before = j.value("context_before", std::size_t{0});
    r.context_after = j.value("context_after", std::size_t{0});
    if (j.contains("correction_target") && !j["correction_target"].is_null()) {
      r.correction_target = j["correction_target"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidRecord, e.what());
  }
  return r;
}

inline json to_json(const MatchSet& ms) {
  json j;
  j["query"] = ms.query_name;
  j["truncated"] = ms.truncated;
  j["matches"] = json::array();
  for (const auto& m : ms.matches) {
    json jm;
    jm["sentence_id"] = m.sentence_id;
    jm["captures"] = json::object();
    for (const auto& [name, c] : m.captures) {
      jm["captures"][name] = {{"token", c.token},         {"lemma", c.lemma},
                              {"form", c.form},           {"text", c.text},
                              {"char_start", c.span.char_start}, {"char_end", c.span.char_end}};
    }
    j["matches"].push_back(std::move(jm));
  }
  return j;
}

inline json to_json(const ExtractionReport& r) {
  json j;
  j["queries"] = json::array();
  for (const auto& q : r.queries) {
    j["queries"].push_back({{"name", q.name}, {"total", q.total}, {"unique", q.unique}});
  }
  j["documents"] = r.document_count;
  j["total_extracted_sentences"] = r.total_extracted;
  j["documents_with_extraction"] = r.documents_with_any;
  j["documents_with_multiple"] = r.documents_with_multiple;
  j["coverage_at_least_one_pct"] = r.pct_with_any();
  j["coverage_multiple_pct"] = r.pct_with_multiple();
  j["extracted"] = json::object();
  for (const auto& d : r.documents) j["extracted"][d.doc_id] = d.sentence_ids;
  return j;
}

struct Response {
  int status = 200;
  json body;
};

class Service {
 public:
  explicit Service(ServiceConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.annotation_log) {
      store_ = std::make_unique<AnnotationStore>(*cfg_.annotation_log, cfg_.ontology);
    }
  }

  // Enhances and indexes the corpus, replacing any corpus of the same name.
  void add_corpus(const std::string& name, const Corpus& raw) {
    auto entry = std::make_shared<Entry>();
    entry->corpus = enhance_corpus(raw, cfg_.enhancement.labels, cfg_.enhancement.rules);
    entry->index = build_index(entry->corpus);
    std::unique_lock lock(mu_);
    entry->generation = ++generation_;
    corpora_[name] = std::move(entry);
    extractions_.erase(name);
  }

  std::vector<std::string> corpus_names() const {
    std::shared_lock lock(mu_);
    std::vector<std::string> out;
    for (const auto& [name, e] : corpora_) out.push_back(name);
    return out;
  }

  const Corpus& corpus(const std::string& name) const { return entry(name)->corpus; }

  SearchResponse handle_search(const SearchRequest& req) const {
    auto e = entry(req.corpus);
    SearchResponse resp;
    resp.query = compile(req);
    resp.matches = search(e->index, e->corpus, resp.query, req.limit);
    for (const auto& cap : resp.matches.capture_names) {
      resp.aggregations[cap] = aggregate(resp.matches, cap, AggregateKey::Lemma);
    }
    return resp;
  }

  ExtractionReport extract(const std::string& corpus_name, const std::string& query_file) {
    auto e = entry(corpus_name);
    std::vector<GraphQuery> qs;
    for (const auto& r : parse_query_file(query_file)) qs.push_back(compile_or_wrap(r, nullptr));
    if (qs.empty()) throw Error(ErrorCode::BadRequest, "query set is empty");
    auto rep = run_query_set(qs, e->index, e->corpus);
    std::lock_guard lock(extract_mu_);
    extractions_[corpus_name] = rep;
    return rep;
  }

  void append_annotation(const AnnotationRecord& r) {
    if (!store_) throw Error(ErrorCode::StorageFailure, "no annotation log configured");
    for (const auto* id : {&r.sentence_id, r.correction_target ? &*r.correction_target : nullptr}) {
      if (id && !sentence_known(*id)) throw Error(ErrorCode::UnknownSentence, *id);
    }
    store_->append(r);
  }

  std::vector<AnnotationRecord> annotations() const {
    return store_ ? store_->records() : std::vector<AnnotationRecord>{};
  }

  json report(const std::string& kind, const json& params) const {
    auto level = parse_level(params.value("level", std::string("high")));
    if (kind == "iaa") {
      auto recs = annotations();
      if (recs.empty()) throw Error(ErrorCode::MissingData, "iaa");
      AlphaOptions opts{level, params.value("exclude_not_relevant", false)};
      const auto alpha = krippendorff_alpha(RatingsMatrix::from_records(recs), cfg_.ontology, opts);
      return {{"kind", "iaa"},
              {"level", level == Level::High ? "high" : "granular"},
              {"exclude_not_relevant", opts.exclude_not_relevant},
              {"alpha", alpha}};
    }
    if (kind == "coverage" || kind == "query_contrib") {
      const auto name = params.value("corpus", std::string());
      std::lock_guard lock(extract_mu_);
      auto it = extractions_.find(name);
      if (it == extractions_.end()) throw Error(ErrorCode::MissingData, kind);
      const auto& r = it->second;
      if (kind == "coverage") {
        return {{"kind", "coverage"},
                {"documents", r.document_count},
                {"total_extracted_sentences", r.total_extracted},
                {"coverage_at_least_one_pct", r.pct_with_any()},
                {"coverage_multiple_pct", r.pct_with_multiple()}};
      }
      json q = json::array();
      for (const auto& c : r.queries) {
        q.push_back({{"name", c.name}, {"total", c.total}, {"unique", c.unique}});
      }
      return {{"kind", "query_contrib"}, {"queries", q}};
    }
    if (kind == "label_dist") {
      auto recs = annotations();
      if (recs.empty()) throw Error(ErrorCode::MissingData, kind);
      std::vector<std::string> labels;
      for (const auto& r : recs) labels.push_back(cfg_.ontology.at_level(r.primary_label, level));
      auto d = distribution_of(labels, cfg_.ontology.domain(level, true));
      json j = {{"kind", "label_dist"}, {"distribution", json::object()}};
      for (const auto& l : cfg_.ontology.domain(level, true)) j["distribution"][l] = d.at(l);
      return j;
    }
    if (kind == "context_hist") {
      auto recs = annotations();
      if (recs.empty()) throw Error(ErrorCode::MissingData, kind);
      json bins = json::array();
      for (const auto& [key, n] : context_size_histogram(recs)) {
        bins.push_back({{"before", key.first}, {"after", key.second}, {"count", n}});
      }
      return {{"kind", "context_hist"}, {"bins", bins}};
    }
    throw Error(ErrorCode::BadRequest, "unknown report kind " + kind);
  }

  // Routes one request. Never throws; failures become error responses.
  Response handle(const std::string& method, const std::string& path, const std::string& body) {
    try {
      json req = body.empty() ? json::object() : json::parse(body);
      return {200, dispatch(method, path, req)};
    } catch (const json::exception& e) {
      return error_response(Error(ErrorCode::BadRequest, e.what()));
    } catch (const Error& e) {
      return error_response(e);
    }
  }

  static Response error_response(const Error& e) {
    json err = {{"code", std::string(to_string(e.code()))}, {"message", e.detail()}};
    if (e.line()) err["line"] = *e.line();
    int status = 400;
    switch (e.code()) {
      case ErrorCode::UnknownCorpus:
      case ErrorCode::UnknownSentence: status = 404; break;
      case ErrorCode::ParserUnavailable: status = 503; break;
      case ErrorCode::StorageFailure: status = 500; break;
      case ErrorCode::MissingData: status = 409; break;
      default: break;
    }
    return {status, {{"error", err}}};
  }

 private:
  struct Entry {
    Corpus corpus;
    Index index;
    std::uint64_t generation = 0;
  };

  std::shared_ptr<const Entry> entry(const std::string& name) const {
    std::shared_lock lock(mu_);
    auto it = corpora_.find(name);
    if (it == corpora_.end()) throw Error(ErrorCode::UnknownCorpus, name);
    return it->second;
  }

  bool sentence_known(const std::string& id) const {
    std::shared_lock lock(mu_);
    for (const auto& [name, e] : corpora_) {
      if (e->corpus.contains(id)) return true;
    }
    return false;
  }

  // Query-language failures surface as CompileError with the original code in
  // the message; parser availability is reported as is.
  GraphQuery compile_or_wrap(const QueryRecord& r, const SentenceGraph* parse) const {
    try {
      return compile_record(r, cfg_.lists, parse);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParserUnavailable) throw;
      throw Error(ErrorCode::CompileError, std::string(to_string(e.code())) + ": " + e.detail(),
                  e.line());
    }
  }

  GraphQuery compile(const SearchRequest& req) const {
    QueryRecord r;
    r.name = "request";
    r.kind = req.kind;
    if (req.kind == QueryRecord::Kind::Dsl) {
      r.body = req.query;
      return compile_or_wrap(r, nullptr);
    }
    r.body = req.query;
    r.parse_conllu = req.parse_conllu;
    if (req.parse_conllu) return compile_or_wrap(r, nullptr);
    // Strip markup to recover the plain sentence for the external parser.
    std::string plain;
    for (auto piece : text::split_ws(req.query)) {
      auto item = detail::parse_markup_item(piece);
      std::string word = item.word.value_or(
          item.inline_list && !item.inline_list->empty() ? *item.inline_list->begin() : "");
      if (!plain.empty()) plain += ' ';
      plain += word;
    }
    auto parsed = cfg_.parser.parse(plain);
    return compile_or_wrap(r, &parsed);
  }

  json dispatch(const std::string& method, const std::string& path, const json& req) {
    auto str = [&](const char* key) {
      if (!req.contains(key) || !req[key].is_string()) {
        throw Error(ErrorCode::BadRequest, std::string("missing string field '") + key + "'");
      }
      return req[key].get<std::string>();
    };
    if (method == "GET" && path == "/corpora") {
      json list = json::array();
      std::shared_lock lock(mu_);
      for (const auto& [name, e] : corpora_) {
        list.push_back({{"name", name},
                        {"documents", e->corpus.documents().size()},
                        {"sentences", e->corpus.sentence_count()},
                        {"fingerprint", e->index.corpus_fingerprint},
                        {"generation", e->generation}});
      }
      return {{"corpora", list}};
    }
    if (method == "POST" && path == "/corpora/ingest") {
      const auto name = str("name");
      Corpus c = req.contains("conllu") ? load_corpus_text(str("conllu"), name, name)
                                        : load_corpus(str("path"));
      add_corpus(name, c);
      return {{"name", name}, {"documents", c.documents().size()}, {"sentences", c.sentence_count()}};
    }
    if (method == "POST" && path == "/search") {
      SearchRequest sr;
      sr.corpus = str("corpus");
      sr.query = str("query");
      const auto kind = req.value("kind", std::string("dsl"));
      if (kind == "example") {
        sr.kind = QueryRecord::Kind::Example;
      } else if (kind != "dsl") {
        throw Error(ErrorCode::BadRequest, "kind must be dsl|example");
      }
      if (req.contains("parse") && req["parse"].is_string()) sr.parse_conllu = req["parse"].get<std::string>();
      sr.limit = req.value("limit", kDefaultMatchCap);
      auto resp = handle_search(sr);
      json j = to_json(resp.matches);
      const auto& c = corpus(sr.corpus);
      for (auto& m : j["matches"]) m["text"] = sentence_text(c.sentence(m["sentence_id"].get<std::string>()));
      j["aggregations"] = json::object();
      for (const auto& [cap, rows] : resp.aggregations) {
        json arr = json::array();
        for (const auto& [v, n] : rows) arr.push_back({{"value", v}, {"count", n}});
        j["aggregations"][cap] = arr;
      }
      j["dsl"] = to_dsl(resp.query);
      return j;
    }
    if (method == "POST" && path == "/suggest") {
      auto e = entry(str("corpus"));
      std::vector<SeedPair> pairs;
      for (const auto& p : req.at("pairs")) {
        auto parsed = parse_seed_pairs(p.get<std::string>());
        pairs.insert(pairs.end(), parsed.begin(), parsed.end());
      }
      if (pairs.empty()) throw Error(ErrorCode::BadRequest, "no seed pairs");
      const auto keep = parse_keep_lexical(req.value("keep", std::string("none")));
      const auto k = req.value("k", std::size_t{10});
      json out = json::array();
      for (const auto& sig : mine_paths(e->corpus, pairs, std::max<std::size_t>(k, 1))) {
        auto q = path_to_query(sig, keep, pairs.front());
        out.push_back({{"count", sig.count},
                       {"path", canonical(sig.steps)},
                       {"examples", sig.example_sentence_ids},
                       {"dsl", to_dsl(q)}});
      }
      return {{"suggestions", out}};
    }
    if (method == "POST" && path == "/context") {
      auto e = entry(str("corpus"));
      json out = json::array();
      for (const auto& s : context_window(e->corpus, str("sentence_id"), req.value("before", std::size_t{0}),
                                          req.value("after", std::size_t{0}))) {
        out.push_back({{"sentence_id", s.sentence_id}, {"text", sentence_text(s)}});
      }
      return {{"sentences", out}};
    }
    if (method == "POST" && path == "/annotations") {
      append_annotation(record_from_json(req));
      return {{"ack", true}};
    }
    if (method == "GET" && path == "/annotations") {
      json out = json::array();
      for (const auto& r : annotations()) out.push_back(to_json(r));
      return {{"records", out}};
    }
    if (method == "POST" && path == "/extract") {
      const auto name = str("corpus");
      return to_json(extract(name, str("queries")));
    }
    const std::string prefix = "/reports/";
    if (method == "POST" && text::starts_with(path, prefix)) {
      return report(path.substr(prefix.size()), req);
    }
    throw Error(ErrorCode::BadRequest, "no route for " + method + " " + path);
  }

  ServiceConfig cfg_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<const Entry>> corpora_;
  std::uint64_t generation_ = 0;
  std::unique_ptr<AnnotationStore> store_;
  mutable std::mutex extract_mu_;
  std::map<std::string, ExtractionReport> extractions_;
};

// HTTP front end bound to a local address.
class HttpFrontend {
 public:
  explicit HttpFrontend(Service& service) : service_(service) {
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
      auto r = service_.handle(req.method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    server_.Get(".*", route);
    server_.Post(".*", route);
  }

  // Binds and returns the port (0 picks a free one).
  int bind(const std::string& host, int port) {
    if (port == 0) return server_.bind_to_any_port(host);
    if (!server_.bind_to_port(host, port)) {
      throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
  }

  bool listen() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

 private:
  Service& service_;
  httplib::Server server_;
};

}  // namespace synq

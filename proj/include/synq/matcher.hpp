#pragma once

// Exact pattern matching of GraphQuery over sentence graphs.
//
// A match is an injective assignment of pattern nodes to tokens such that
// every node constraint holds and every pattern edge is realized, with the
// same direction, by a base or enhanced edge. Assignments that differ only on
// structural nodes are collapsed into one match.

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "synq/corpus.hpp"
#include "synq/error.hpp"
#include "synq/graph_enhance.hpp"
#include "synq/index.hpp"
#include "synq/query.hpp"
#include "synq/text.hpp"

namespace synq {

inline constexpr std::size_t kDefaultMatchCap = 10000;

struct Capture {
  TokenIndex token = 0;
  TokenSpan span;
  std::string lemma;
  std::string form;
  std::string text;  // surface text of span

  friend bool operator==(const Capture&, const Capture&) = default;
};

struct Match {
  std::string sentence_id;
  // Token per pattern node, aligned with GraphQuery::nodes.
  std::vector<TokenIndex> assignment;
  std::map<std::string, Capture> captures;

  friend bool operator==(const Match&, const Match&) = default;
};

struct SentenceMatches {
  std::vector<Match> matches;
  bool truncated = false;
};

struct MatchSet {
  std::string query_name;
  std::vector<std::string> capture_names;
  std::vector<Match> matches;
  bool truncated = false;

  friend bool operator==(const MatchSet&, const MatchSet&) = default;
};

namespace detail {

// Outgoing and incoming typed edges over base and enhanced layers.
struct Adjacency {
  std::vector<std::vector<std::pair<TokenIndex, const std::string*>>> out, in;

  explicit Adjacency(const SentenceGraph& s) : out(s.size() + 1), in(s.size() + 1) {
    auto add = [&](const Edge& e) {
      if (e.head == kRoot) return;
      out[e.head].emplace_back(e.dependent, &e.deprel);
      in[e.dependent].emplace_back(e.head, &e.deprel);
    };
    for (const auto& e : s.base_edges) add(e);
    for (const auto& e : s.enhanced_edges) add(e);
  }

  bool has(TokenIndex head, TokenIndex dep, const QueryEdge& qe) const {
    for (const auto& [d, rel] : out[head]) {
      if (d == dep && (qe.wildcard() || *rel == qe.deprel)) return true;
    }
    return false;
  }
};

inline bool token_satisfies(const Token& t, const NodeConstraint& n) {
  if (n.upos && t.upos != *n.upos) return false;
  if (n.lemma && text::fold(t.lemma) != text::fold(*n.lemma)) return false;
  if (n.word_list) {
    if (!n.lemma_set) throw Error(ErrorCode::UnknownList, *n.word_list + " (unresolved)");
    if (!n.lemma_set->count(text::fold(t.lemma))) return false;
  }
  return true;
}

inline bool is_nominal(const Token& t) { return t.upos == "NOUN" || t.upos == "PROPN"; }

}  // namespace detail

inline Capture make_capture(const SentenceGraph& s, const std::string& sentence_text_value,
                            TokenIndex token) {
  const auto& t = s.token(token);
  Capture c;
  c.token = token;
  c.span = detail::is_nominal(t) ? expand_np(s, token)
                                 : TokenSpan{token, token, t.char_start, t.char_end};
  c.lemma = t.lemma;
  c.form = t.form;
  c.text = text::utf8_substr(sentence_text_value, c.span.char_start, c.span.char_end);
  return c;
}

// All matches of q in s, up to cap, ordered by assignment.
inline SentenceMatches match_sentence(const SentenceGraph& s, const GraphQuery& q,
                                      std::size_t cap = kDefaultMatchCap) {
  SentenceMatches result;
  const auto k = q.nodes.size();
  if (k == 0 || s.size() == 0) return result;

  std::vector<std::vector<TokenIndex>> domain(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (const auto& t : s.tokens) {
      if (detail::token_satisfies(t, q.nodes[i])) domain[i].push_back(t.index);
    }
    if (domain[i].empty()) return result;
  }

  // Search order: most selective node first, then grow along pattern edges.
  std::vector<std::vector<std::size_t>> incident(k);
  for (std::size_t e = 0; e < q.edges.size(); ++e) {
    incident[q.edges[e].head].push_back(e);
    incident[q.edges[e].dependent].push_back(e);
  }
  std::vector<std::size_t> order;
  std::vector<bool> placed(k, false);
  while (order.size() < k) {
    std::size_t best = k;
    bool best_adjacent = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (placed[i]) continue;
      bool adjacent = false;
      for (auto e : incident[i]) {
        const auto other = q.edges[e].head == i ? q.edges[e].dependent : q.edges[e].head;
        if (placed[other]) adjacent = true;
      }
      if (best == k || (adjacent && !best_adjacent) ||
          (adjacent == best_adjacent && domain[i].size() < domain[best].size())) {
        best = i;
        best_adjacent = adjacent;
      }
    }
    placed[best] = true;
    order.push_back(best);
  }

  const detail::Adjacency adj(s);
  std::vector<TokenIndex> assign(k, 0);
  std::vector<bool> used(s.size() + 1, false);
  std::vector<std::vector<TokenIndex>> found;

  auto consistent = [&](std::size_t node, TokenIndex tok) {
    for (auto e : incident[node]) {
      const auto& qe = q.edges[e];
      const auto h = qe.head == node ? tok : assign[qe.head];
      const auto d = qe.dependent == node ? tok : assign[qe.dependent];
      if (h == 0 || d == 0) continue;  // other endpoint not yet assigned
      if (!adj.has(h, d, qe)) return false;
    }
    return true;
  };

  auto recurse = [&](auto&& self, std::size_t depth) -> void {
    if (depth == k) {
      found.push_back(assign);
      return;
    }
    const auto node = order[depth];
    // Seed candidates from an already-assigned neighbour when possible.
    std::vector<TokenIndex> cands;
    bool seeded = false;
    for (auto e : incident[node]) {
      const auto& qe = q.edges[e];
      if (qe.head == node && assign[qe.dependent] != 0) {
        for (const auto& [h, rel] : adj.in[assign[qe.dependent]]) cands.push_back(h);
        seeded = true;
        break;
      }
      if (qe.dependent == node && assign[qe.head] != 0) {
        for (const auto& [d, rel] : adj.out[assign[qe.head]]) cands.push_back(d);
        seeded = true;
        break;
      }
    }
    if (seeded) {
      std::sort(cands.begin(), cands.end());
      cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    }
    const auto& pool = seeded ? cands : domain[node];
    for (auto tok : pool) {
      if (used[tok]) continue;
      if (seeded && !std::binary_search(domain[node].begin(), domain[node].end(), tok)) continue;
      if (!consistent(node, tok)) continue;
      used[tok] = true;
      assign[node] = tok;
      self(self, depth + 1);
      assign[node] = 0;
      used[tok] = false;
    }
  };
  recurse(recurse, 0);

  // Collapse assignments that agree on every non-structural node, keeping the
  // smallest full assignment of each class.
  std::sort(found.begin(), found.end());
  std::vector<std::size_t> key_nodes;
  for (std::size_t i = 0; i < k; ++i) {
    if (!q.nodes[i].structural()) key_nodes.push_back(i);
  }
  std::set<std::vector<TokenIndex>> seen_keys;
  const auto sentence_text_value = sentence_text(s);
  for (const auto& a : found) {
    std::vector<TokenIndex> key;
    for (auto i : key_nodes) key.push_back(a[i]);
    if (!seen_keys.insert(key).second) continue;
    if (result.matches.size() == cap) {
      result.truncated = true;
      break;
    }
    Match m;
    m.sentence_id = s.sentence_id;
    m.assignment = a;
    for (std::size_t i = 0; i < k; ++i) {
      if (q.nodes[i].capture) {
        m.captures.emplace(*q.nodes[i].capture, make_capture(s, sentence_text_value, a[i]));
      }
    }
    result.matches.push_back(std::move(m));
  }
  return result;
}

namespace detail {

inline MatchSet search_ordinals(const Corpus& c, const GraphQuery& q,
                                const Postings& ordinals, std::size_t limit) {
  MatchSet ms;
  ms.query_name = q.name;
  ms.capture_names = q.capture_names();
  for (auto ord : ordinals) {
    const auto& s = c.sentence_at(ord);
    const auto remaining = limit - ms.matches.size();
    if (remaining == 0) {
      if (!match_sentence(s, q, 1).matches.empty()) {
        ms.truncated = true;
        break;
      }
      continue;
    }
    auto r = match_sentence(s, q, remaining);
    for (auto& m : r.matches) ms.matches.push_back(std::move(m));
    if (r.truncated) {
      ms.truncated = true;
      break;
    }
  }
  return ms;
}

}  // namespace detail

// Matches over the index candidates, in corpus order, stopping after limit.
inline MatchSet search(const Index& idx, const Corpus& c, const GraphQuery& q,
                       std::size_t limit = kDefaultMatchCap) {
  auto cands = candidates(idx, c, q);
  return detail::search_ordinals(c, q, cands.ordinals, limit);
}

// Same contract as search() without index pruning.
inline MatchSet search_full_scan(const Corpus& c, const GraphQuery& q,
                                 std::size_t limit = kDefaultMatchCap) {
  Postings all(c.sentence_count());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<SentenceOrdinal>(i);
  return detail::search_ordinals(c, q, all, limit);
}

enum class AggregateKey { Lemma, Form };

// (value, count) pairs, count descending then value ascending.
inline std::vector<std::pair<std::string, std::size_t>> aggregate(
    const MatchSet& ms, const std::string& capture, AggregateKey key = AggregateKey::Lemma) {
  if (std::find(ms.capture_names.begin(), ms.capture_names.end(), capture) ==
      ms.capture_names.end()) {
    throw Error(ErrorCode::UnknownCapture, capture);
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& m : ms.matches) {
    auto it = m.captures.find(capture);
    if (it == m.captures.end()) continue;
    ++counts[key == AggregateKey::Lemma ? it->second.lemma : it->second.form];
  }
  std::vector<std::pair<std::string, std::size_t>> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

struct QueryContribution {
  std::string name;
  std::size_t total = 0;   // distinct sentences matched
  std::size_t unique = 0;  // matched by this query and no other
};

struct DocumentExtraction {
  std::string doc_id;
  std::vector<std::string> sentence_ids;  // document order
};

struct ExtractionReport {
  std::vector<QueryContribution> queries;
  // Only documents with at least one extracted sentence, in corpus order.
  std::vector<DocumentExtraction> documents;
  std::size_t document_count = 0;
  std::size_t total_extracted = 0;
  std::size_t documents_with_any = 0;
  std::size_t documents_with_multiple = 0;

  double pct_with_any() const {
    return document_count ? 100.0 * static_cast<double>(documents_with_any) /
                                static_cast<double>(document_count)
                          : 0.0;
  }
  double pct_with_multiple() const {
    return document_count ? 100.0 * static_cast<double>(documents_with_multiple) /
                                static_cast<double>(document_count)
                          : 0.0;
  }
};

// Set of sentence ordinals with at least one match.
inline std::set<SentenceOrdinal> matched_sentences(const Index& idx, const Corpus& c,
                                                   const GraphQuery& q) {
  std::set<SentenceOrdinal> out;
  for (auto ord : candidates(idx, q).ordinals) {
    if (!match_sentence(c.sentence_at(ord), q, 1).matches.empty()) out.insert(ord);
  }
  return out;
}

// Runs every query over the corpus; the union of matched sentences per
// document is the extraction output.
inline ExtractionReport run_query_set(const std::vector<GraphQuery>& qs, const Index& idx,
                                      const Corpus& c) {
  check_fingerprint(idx, c);
  std::vector<std::set<SentenceOrdinal>> hits;
  hits.reserve(qs.size());
  for (const auto& q : qs) hits.push_back(matched_sentences(idx, c, q));

  std::map<SentenceOrdinal, std::size_t> hit_count;
  for (const auto& h : hits) {
    for (auto o : h) ++hit_count[o];
  }
  ExtractionReport rep;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    QueryContribution qc;
    qc.name = qs[i].name;
    qc.total = hits[i].size();
    qc.unique = static_cast<std::size_t>(std::count_if(
        hits[i].begin(), hits[i].end(), [&](auto o) { return hit_count[o] == 1; }));
    rep.queries.push_back(std::move(qc));
  }
  rep.document_count = c.documents().size();
  rep.total_extracted = hit_count.size();
  for (const auto& [ord, n] : hit_count) {
    const auto& doc = c.document_of(ord);
    if (rep.documents.empty() || rep.documents.back().doc_id != doc.doc_id) {
      rep.documents.push_back({doc.doc_id, {}});
    }
    rep.documents.back().sentence_ids.push_back(c.sentence_at(ord).sentence_id);
  }
  rep.documents_with_any = rep.documents.size();
  rep.documents_with_multiple = static_cast<std::size_t>(
      std::count_if(rep.documents.begin(), rep.documents.end(),
                    [](const auto& d) { return d.sentence_ids.size() > 1; }));
  return rep;
}

// One line per match:
//   <sentence_id>{<TAB><capture><TAB><lemma><TAB><char_start><TAB><char_end><TAB><text>}
// preceded by "# query=<name> matches=<n> truncated=<0|1>".
inline std::string format_matches(const MatchSet& ms) {
  std::string out = "# query=" + ms.query_name + " matches=" +
                    std::to_string(ms.matches.size()) +
                    " truncated=" + (ms.truncated ? "1" : "0") + "\n";
  for (const auto& m : ms.matches) {
    out += m.sentence_id;
    for (const auto& name : ms.capture_names) {
      auto it = m.captures.find(name);
      if (it == m.captures.end()) continue;
      const auto& c = it->second;
      out += "\t" + name + "\t" + c.lemma + "\t" + std::to_string(c.span.char_start) + "\t" +
             std::to_string(c.span.char_end) + "\t" + c.text;
    }
    out += "\n";
  }
  return out;
}

inline std::string format_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// "key: value" block. Field names are stable.
inline std::string format_report(const ExtractionReport& r) {
  std::string out;
  out += "queries: " + std::to_string(r.queries.size()) + "\n";
  for (std::size_t i = 0; i < r.queries.size(); ++i) {
    const auto p = "query." + std::to_string(i + 1) + ".";
    out += p + "name: " + r.queries[i].name + "\n";
    out += p + "total: " + std::to_string(r.queries[i].total) + "\n";
    out += p + "unique: " + std::to_string(r.queries[i].unique) + "\n";
  }
  out += "documents: " + std::to_string(r.document_count) + "\n";
  out += "total_extracted_sentences: " + std::to_string(r.total_extracted) + "\n";
  out += "documents_with_extraction: " + std::to_string(r.documents_with_any) + "\n";
  out += "documents_with_multiple: " + std::to_string(r.documents_with_multiple) + "\n";
  out += "coverage_at_least_one_pct: " + format_percent(r.pct_with_any()) + "\n";
  out += "coverage_multiple_pct: " + format_percent(r.pct_with_multiple()) + "\n";
  return out;
}

// "<doc_id><TAB><sentence_id><TAB><text>" per extracted sentence.
inline std::string format_extracted(const ExtractionReport& r, const Corpus& c) {
  std::string out;
  for (const auto& d : r.documents) {
    for (const auto& sid : d.sentence_ids) {
      out += d.doc_id + "\t" + sid + "\t" + sentence_text(c.sentence(sid)) + "\n";
    }
  }
  return out;
}

}  // namespace synq

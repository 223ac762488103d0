#pragma once

// Graph queries: the line-based DSL, the search-by-example compiler and
// word-list resolution.
//
// DSL:
//   name: <query name>
//   node <id> [capture=<name>] [lemma=<l>] [list=@<name>|list=[a|b]] [pos=<P>]
//   edge <head id> -<deprel|*>-> <dependent id>
//
// Example markup, one item per parse token:
//   word          scaffold, dropped from the pattern unless on a path
//   $word         lemma anchor
//   name:word     unconstrained capture
//   name:$word    capture + lemma
//   name:[a|b]    capture + inline lemma list
//   name:@list    capture + named list (matches any token at that position)

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "synq/corpus.hpp"
#include "synq/error.hpp"
#include "synq/text.hpp"

namespace synq {

struct NodeConstraint {
  std::string id;
  std::optional<std::string> capture;
  std::optional<std::string> lemma;
  std::optional<std::string> word_list;
  std::optional<std::string> upos;
  // Case-folded members of word_list once resolved.
  std::optional<std::set<std::string>> lemma_set;

  // Path-interior node with no constraints and no capture.
  bool structural() const { return !capture && !lemma && !word_list && !upos; }
  // Restricts which tokens can match (captures alone do not).
  bool constrained() const { return lemma || word_list || upos; }

  friend bool operator==(const NodeConstraint&, const NodeConstraint&) = default;
};

inline constexpr std::string_view kWildcard = "*";

struct QueryEdge {
  std::size_t head = 0;  // node position in GraphQuery::nodes
  std::size_t dependent = 0;
  std::string deprel;  // "*" matches any relation

  bool wildcard() const { return deprel == kWildcard; }
  friend bool operator==(const QueryEdge&, const QueryEdge&) = default;
};

struct GraphQuery {
  std::string name;
  std::vector<NodeConstraint> nodes;
  std::vector<QueryEdge> edges;
  // Anonymous lists introduced by inline [a|b] markup.
  std::map<std::string, std::set<std::string>> inline_lists;

  std::optional<std::size_t> find_node(std::string_view id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].id == id) return i;
    }
    return std::nullopt;
  }

  std::vector<std::string> capture_names() const {
    std::vector<std::string> out;
    for (const auto& n : nodes) {
      if (n.capture) out.push_back(*n.capture);
    }
    return out;
  }

  friend bool operator==(const GraphQuery&, const GraphQuery&) = default;
};

struct WordListTable {
  std::map<std::string, std::set<std::string>> lists;

  const std::set<std::string>* find(std::string_view name) const {
    auto it = lists.find(std::string(name));
    return it == lists.end() ? nullptr : &it->second;
  }
};

// "<listname>: w1, w2, w3" per line; '#' comments.
inline WordListTable parse_word_lists(std::string_view content) {
  WordListTable t;
  auto all = text::lines(content);
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto line = text::trim(all[i]);
    if (line.empty() || line[0] == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorCode::InvalidConfig, "expected '<name>: words'", i + 1);
    }
    auto name = text::trim(line.substr(0, colon));
    if (!name.empty() && name[0] == '@') name.remove_prefix(1);
    if (name.empty()) throw Error(ErrorCode::InvalidConfig, "empty list name", i + 1);
    std::set<std::string> words;
    for (auto w : text::split(line.substr(colon + 1), ',')) {
      auto tw = text::trim(w);
      if (!tw.empty()) words.insert(text::fold(tw));
    }
    if (words.empty()) {
      throw Error(ErrorCode::InvalidConfig, "list " + std::string(name) + " is empty",
                  i + 1);
    }
    t.lists[std::string(name)].insert(words.begin(), words.end());
  }
  return t;
}

// Checks the GraphQuery invariants. Parsers call this; hand-built queries may
// skip it.
inline void validate_query(const GraphQuery& q) {
  std::set<std::string> ids, captures;
  if (q.nodes.empty()) throw Error(ErrorCode::NoConstrainedNode, "query has no nodes");
  for (const auto& n : q.nodes) {
    if (!ids.insert(n.id).second) {
      throw Error(ErrorCode::SyntaxError, "duplicate node id " + n.id);
    }
    if (n.capture && !captures.insert(*n.capture).second) {
      throw Error(ErrorCode::SyntaxError, "duplicate capture " + *n.capture);
    }
    if (n.lemma && n.word_list) {
      throw Error(ErrorCode::SyntaxError, "node " + n.id + " has both lemma and list");
    }
  }
  for (const auto& e : q.edges) {
    if (e.head >= q.nodes.size() || e.dependent >= q.nodes.size()) {
      throw Error(ErrorCode::UnknownNodeId, "edge endpoint out of range");
    }
    if (e.head == e.dependent) {
      throw Error(ErrorCode::SyntaxError, "self edge on " + q.nodes[e.head].id);
    }
  }
  // Connectivity of the undirected pattern graph.
  std::vector<std::size_t> parent(q.nodes.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : q.edges) parent[find(e.head)] = find(e.dependent);
  for (std::size_t i = 1; i < q.nodes.size(); ++i) {
    if (find(i) != find(0)) {
      throw Error(ErrorCode::DisconnectedPattern,
                  "node " + q.nodes[i].id + " is not connected to " + q.nodes[0].id);
    }
  }
  if (std::all_of(q.nodes.begin(), q.nodes.end(),
                  [](const auto& n) { return n.structural(); })) {
    throw Error(ErrorCode::NoConstrainedNode, "every node is structural");
  }
}

namespace detail {

inline std::set<std::string> parse_inline_list(std::string_view body) {
  // body without the brackets
  std::set<std::string> out;
  for (auto w : text::split(body, '|')) {
    auto tw = text::trim(w);
    if (!tw.empty()) out.insert(text::fold(tw));
  }
  return out;
}

inline std::string intern_inline(GraphQuery& q, std::set<std::string> words) {
  for (const auto& [name, members] : q.inline_lists) {
    if (members == words) return name;
  }
  auto name = "_inline" + std::to_string(q.inline_lists.size());
  q.inline_lists.emplace(name, std::move(words));
  return name;
}

}  // namespace detail

inline GraphQuery parse_graph_dsl(std::string_view dsl) {
  GraphQuery q;
  auto fail = [](ErrorCode code, const std::string& msg, std::size_t line) {
    throw Error(code, msg + " (line " + std::to_string(line) + ")", line);
  };
  auto all = text::lines(dsl);
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto lineno = i + 1;
    auto line = text::trim(all[i]);
    if (line.empty() || line[0] == '#') continue;
    if (text::starts_with(line, "name:")) {
      q.name = std::string(text::trim(line.substr(5)));
      continue;
    }
    auto words = text::split_ws(line);
    if (words[0] == "node") {
      if (words.size() < 2) fail(ErrorCode::SyntaxError, "node needs an id", lineno);
      NodeConstraint n;
      n.id = std::string(words[1]);
      if (q.find_node(n.id)) fail(ErrorCode::SyntaxError, "duplicate node " + n.id, lineno);
      for (std::size_t w = 2; w < words.size(); ++w) {
        auto eq = words[w].find('=');
        if (eq == std::string_view::npos || eq == 0 || eq + 1 == words[w].size()) {
          fail(ErrorCode::SyntaxError, "expected key=value, got '" +
                                           std::string(words[w]) + "'", lineno);
        }
        auto key = words[w].substr(0, eq);
        auto value = std::string(words[w].substr(eq + 1));
        auto set_once = [&](std::optional<std::string>& slot) {
          if (slot) fail(ErrorCode::SyntaxError, "repeated " + std::string(key), lineno);
          slot = value;
        };
        if (key == "capture") {
          set_once(n.capture);
        } else if (key == "lemma") {
          set_once(n.lemma);
        } else if (key == "pos") {
          set_once(n.upos);
        } else if (key == "list") {
          if (value.size() > 2 && value.front() == '[' && value.back() == ']') {
            auto members = detail::parse_inline_list(
                std::string_view(value).substr(1, value.size() - 2));
            if (members.empty()) fail(ErrorCode::SyntaxError, "empty inline list", lineno);
            value = detail::intern_inline(q, std::move(members));
          } else if (value.size() > 1 && value.front() == '@') {
            value.erase(0, 1);
          } else {
            fail(ErrorCode::SyntaxError, "list must be @name or [a|b]", lineno);
          }
          set_once(n.word_list);
        } else {
          fail(ErrorCode::SyntaxError, "unknown node attribute " + std::string(key), lineno);
        }
      }
      if (n.lemma && n.word_list) {
        fail(ErrorCode::SyntaxError, "node " + n.id + " has both lemma and list", lineno);
      }
      q.nodes.push_back(std::move(n));
    } else if (words[0] == "edge") {
      if (words.size() != 4) {
        fail(ErrorCode::SyntaxError, "expected 'edge <src> -<rel>-> <dst>'", lineno);
      }
      auto arrow = words[2];
      if (arrow.size() < 4 || arrow.front() != '-' || !arrow.ends_with("->")) {
        fail(ErrorCode::SyntaxError, "bad edge arrow '" + std::string(arrow) + "'", lineno);
      }
      auto rel = arrow.substr(1, arrow.size() - 3);
      auto src = q.find_node(words[1]);
      auto dst = q.find_node(words[3]);
      if (!src) fail(ErrorCode::UnknownNodeId, "unknown node " + std::string(words[1]), lineno);
      if (!dst) fail(ErrorCode::UnknownNodeId, "unknown node " + std::string(words[3]), lineno);
      if (*src == *dst) fail(ErrorCode::SyntaxError, "self edge", lineno);
      q.edges.push_back({*src, *dst, std::string(rel)});
    } else {
      fail(ErrorCode::SyntaxError, "unknown statement '" + std::string(words[0]) + "'",
           lineno);
    }
  }
  validate_query(q);
  return q;
}

inline std::string to_dsl(const GraphQuery& q) {
  std::string out;
  if (!q.name.empty()) out += "name: " + q.name + "\n";
  for (const auto& n : q.nodes) {
    out += "node " + n.id;
    if (n.capture) out += " capture=" + *n.capture;
    if (n.lemma) out += " lemma=" + *n.lemma;
    if (n.word_list) {
      auto it = q.inline_lists.find(*n.word_list);
      if (it != q.inline_lists.end()) {
        out += " list=[";
        bool first = true;
        for (const auto& w : it->second) {
          if (!first) out += '|';
          out += w;
          first = false;
        }
        out += "]";
      } else {
        out += " list=@" + *n.word_list;
      }
    }
    if (n.upos) out += " pos=" + *n.upos;
    out += "\n";
  }
  for (const auto& e : q.edges) {
    out += "edge " + q.nodes[e.head].id + " -" + e.deprel + "-> " +
           q.nodes[e.dependent].id + "\n";
  }
  return out;
}

// Materializes every list reference into NodeConstraint::lemma_set.
inline GraphQuery resolve_lists(GraphQuery q, const WordListTable& lists) {
  for (auto& n : q.nodes) {
    if (!n.word_list) continue;
    const std::set<std::string>* members = nullptr;
    auto it = q.inline_lists.find(*n.word_list);
    if (it != q.inline_lists.end()) {
      members = &it->second;
    } else {
      members = lists.find(*n.word_list);
    }
    if (!members) throw Error(ErrorCode::UnknownList, *n.word_list);
    std::set<std::string> folded;
    for (const auto& m : *members) folded.insert(text::fold(m));
    n.lemma_set = std::move(folded);
  }
  return q;
}

namespace detail {

struct MarkupItem {
  std::optional<std::string> capture;
  std::optional<std::string> word;  // surface word to check against the parse
  bool lemma_anchor = false;
  std::optional<std::set<std::string>> inline_list;
  std::optional<std::string> named_list;

  bool marked() const { return capture || lemma_anchor; }
};

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto ok_first = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  if (!ok_first(s[0])) return false;
  return std::all_of(s.begin(), s.end(),
                     [&](char c) { return ok_first(c) || (c >= '0' && c <= '9'); });
}

inline MarkupItem parse_markup_item(std::string_view tok) {
  MarkupItem item;
  auto colon = tok.find(':');
  std::string_view rest = tok;
  if (colon != std::string_view::npos && colon + 1 < tok.size() &&
      is_identifier(tok.substr(0, colon))) {
    item.capture = std::string(tok.substr(0, colon));
    rest = tok.substr(colon + 1);
  }
  if (rest.size() > 1 && rest[0] == '$') {
    item.lemma_anchor = true;
    item.word = std::string(rest.substr(1));
  } else if (item.capture && rest.size() > 2 && rest.front() == '[' && rest.back() == ']') {
    item.inline_list = parse_inline_list(rest.substr(1, rest.size() - 2));
  } else if (item.capture && rest.size() > 1 && rest[0] == '@') {
    item.named_list = std::string(rest.substr(1));
  } else {
    item.word = std::string(rest);
  }
  return item;
}

}  // namespace detail

// Compiles a marked-up example sentence against its parse. The pattern is the
// minimal subtree of the parse connecting all marked tokens; relations and
// directions are copied verbatim.
inline GraphQuery compile_example(std::string_view marked, const SentenceGraph& parse,
                                  const WordListTable& lists) {
  auto pieces = text::split_ws(marked);
  if (pieces.size() != parse.size()) {
    throw Error(ErrorCode::MarkupMismatch,
                "markup has " + std::to_string(pieces.size()) + " tokens, parse has " +
                    std::to_string(parse.size()));
  }
  std::vector<detail::MarkupItem> items;
  std::vector<TokenIndex> marked_tokens;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    auto item = detail::parse_markup_item(pieces[i]);
    const auto& tok = parse.tokens[i];
    bool aligned = true;
    if (item.word) {
      aligned = *item.word == tok.form;
    } else if (item.inline_list) {
      aligned = item.inline_list->count(text::fold(tok.form)) ||
                item.inline_list->count(text::fold(tok.lemma));
    }
    if (!aligned) {
      throw Error(ErrorCode::MarkupMismatch,
                  "markup token " + std::to_string(i + 1) + " '" + std::string(pieces[i]) +
                      "' does not align with parse token '" + tok.form + "'");
    }
    if (item.named_list && !lists.find(*item.named_list)) {
      throw Error(ErrorCode::UnknownList, *item.named_list);
    }
    if (item.marked()) marked_tokens.push_back(tok.index);
    items.push_back(std::move(item));
  }
  if (marked_tokens.empty()) throw Error(ErrorCode::NoMarkedToken, std::string(marked));

  // Steiner subtree: union of tree paths between marked tokens. In a tree this
  // is every token on the path from each marked token to the LCA of all of
  // them.
  const auto n = parse.size();
  std::vector<std::size_t> depth(n + 1, 0);
  for (TokenIndex t = 1; t <= n; ++t) {
    std::size_t d = 0;
    for (TokenIndex cur = t; cur != kRoot; cur = parse.token(cur).head) ++d;
    depth[t] = d;
  }
  auto lca = [&](TokenIndex a, TokenIndex b) {
    while (depth[a] > depth[b]) a = parse.token(a).head;
    while (depth[b] > depth[a]) b = parse.token(b).head;
    while (a != b) {
      a = parse.token(a).head;
      b = parse.token(b).head;
    }
    return a;
  };
  TokenIndex top = marked_tokens.front();
  for (auto t : marked_tokens) top = lca(top, t);
  std::vector<bool> in_tree(n + 1, false);
  for (auto t : marked_tokens) {
    for (TokenIndex cur = t;; cur = parse.token(cur).head) {
      in_tree[cur] = true;
      if (cur == top) break;
    }
  }

  GraphQuery q;
  std::vector<std::size_t> node_of(n + 1, SIZE_MAX);
  for (TokenIndex t = 1; t <= n; ++t) {
    if (!in_tree[t]) continue;
    const auto& item = items[t - 1];
    NodeConstraint node;
    if (item.capture) {
      node.id = *item.capture;
      node.capture = item.capture;
    } else {
      node.id = (item.lemma_anchor ? "t" : "s") + std::to_string(t);
    }
    if (item.lemma_anchor) node.lemma = parse.token(t).lemma;
    if (item.inline_list) node.word_list = detail::intern_inline(q, *item.inline_list);
    if (item.named_list) node.word_list = item.named_list;
    node_of[t] = q.nodes.size();
    q.nodes.push_back(std::move(node));
  }
  for (TokenIndex t = 1; t <= n; ++t) {
    if (!in_tree[t] || t == top) continue;
    const auto& tok = parse.token(t);
    q.edges.push_back({node_of[tok.head], node_of[t], tok.deprel});
  }
  validate_query(q);
  return resolve_lists(std::move(q), lists);
}

// One record of a query file. Records are separated by "---" lines and carry
// a "name: <query name>" header. An example record has an "example: <markup>"
// line, optionally followed by the CoNLL-U parse of the example.
struct QueryRecord {
  enum class Kind { Dsl, Example };
  std::string name;
  Kind kind = Kind::Dsl;
  std::string body;  // DSL text, or the markup for Example
  std::optional<std::string> parse_conllu;
  std::size_t first_line = 1;
};

inline std::vector<QueryRecord> parse_query_file(std::string_view content) {
  std::vector<QueryRecord> out;
  auto all = text::lines(content);
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    QueryRecord r;
    r.first_line = start + 1;
    std::string dsl, parse;
    bool any = false;
    for (std::size_t i = start; i < end; ++i) {
      auto line = text::trim(all[i]);
      if (text::starts_with(line, "name:") && r.name.empty()) {
        r.name = std::string(text::trim(line.substr(5)));
        dsl += "\n";
        continue;
      }
      if (text::starts_with(line, "example:")) {
        r.kind = QueryRecord::Kind::Example;
        r.body = std::string(text::trim(line.substr(8)));
        any = true;
        continue;
      }
      if (!line.empty() && line[0] != '#') any = true;
      if (r.kind == QueryRecord::Kind::Example) {
        parse += std::string(all[i]) + "\n";
      } else {
        // Keep line numbering stable inside the record.
        dsl += std::string(all[i]) + "\n";
      }
    }
    if (!any) return;
    if (r.kind == QueryRecord::Kind::Dsl) {
      r.body = dsl;
    } else {
      if (std::any_of(parse.begin(), parse.end(), [](char c) { return c == '\t'; })) {
        r.parse_conllu = parse;
      }
    }
    if (r.name.empty()) r.name = "query" + std::to_string(out.size() + 1);
    out.push_back(std::move(r));
  };
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (text::trim(all[i]) == "---") {
      flush(i);
      start = i + 1;
    }
  }
  flush(all.size());
  return out;
}

// Compiles a DSL record or an example record that has its parse attached.
// Errors carry line numbers relative to the query file.
inline GraphQuery compile_record(const QueryRecord& r, const WordListTable& lists,
                                 const SentenceGraph* external_parse = nullptr) {
  try {
    GraphQuery q;
    if (r.kind == QueryRecord::Kind::Dsl) {
      q = resolve_lists(parse_graph_dsl(r.body), lists);
    } else {
      std::optional<SentenceGraph> own;
      const SentenceGraph* parse = external_parse;
      if (!parse) {
        if (!r.parse_conllu) {
          throw Error(ErrorCode::ParserUnavailable,
                      "example query '" + r.name + "' has no attached parse");
        }
        auto doc = load_conllu(*r.parse_conllu, "example");
        if (doc.sentences.size() != 1) {
          throw Error(ErrorCode::MarkupMismatch, "example parse must be one sentence");
        }
        own = std::move(doc.sentences.front());
        parse = &*own;
      }
      q = compile_example(r.body, *parse, lists);
    }
    q.name = r.name;
    return q;
  } catch (const Error& e) {
    if (e.line() && r.kind == QueryRecord::Kind::Dsl) {
      auto line = *e.line() + r.first_line - 1;
      throw Error(e.code(), e.detail() + " [query file line " + std::to_string(line) + "]",
                  line);
    }
    throw;
  }
}

}  // namespace synq

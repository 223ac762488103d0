#pragma once

// Query suggestions mined from seed lemma pairs: every tree path connecting
// an occurrence of lemma_a to an occurrence of lemma_b is collected, and the
// paths are ranked by how often they occur.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "synq/corpus.hpp"
#include "synq/error.hpp"
#include "synq/query.hpp"
#include "synq/text.hpp"

namespace synq {

struct SeedPair {
  std::string lemma_a;
  std::string lemma_b;
};

// "a:b" per line, e.g. complainant:reliable. Surrounding quotes are ignored.
inline std::vector<SeedPair> parse_seed_pairs(std::string_view content) {
  std::vector<SeedPair> out;
  auto all = text::lines(content);
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto line = text::trim(all[i]);
    if (line.empty() || line[0] == '#') continue;
    while (!line.empty() && (line.front() == '`' || line.front() == '"' || line.front() == '\'')) {
      line.remove_prefix(1);
    }
    while (!line.empty() && (line.back() == '`' || line.back() == '"' || line.back() == '\'')) {
      line.remove_suffix(1);
    }
    auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorCode::InvalidConfig, "expected 'lemma_a:lemma_b'", i + 1);
    }
    SeedPair p{std::string(text::trim(line.substr(0, colon))),
               std::string(text::trim(line.substr(colon + 1)))};
    if (p.lemma_a.empty() || p.lemma_b.empty() || text::fold(p.lemma_a) == text::fold(p.lemma_b)) {
      throw Error(ErrorCode::InvalidConfig, "seed pair needs two distinct lemmas", i + 1);
    }
    out.push_back(std::move(p));
  }
  return out;
}

struct PathStep {
  enum class Direction { Up, Down };
  Direction direction = Direction::Up;
  std::string deprel;

  friend auto operator<=>(const PathStep&, const PathStep&) = default;
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct PathSignature {
  std::vector<PathStep> steps;  // from the a-slot to the b-slot
  std::size_t count = 0;
  std::vector<std::string> example_sentence_ids;  // at most 5, corpus order

  friend bool operator==(const PathSignature&, const PathSignature&) = default;
};

inline constexpr std::size_t kMaxExamples = 5;

inline std::string canonical(const std::vector<PathStep>& steps) {
  std::string out;
  for (const auto& s : steps) {
    if (!out.empty()) out += ' ';
    out += (s.direction == PathStep::Direction::Up ? "up:" : "down:") + s.deprel;
  }
  return out;
}

struct MineOptions {
  // Follow enhanced edges too (shortest path); base tree only by default.
  bool use_enhanced = false;
};

namespace detail {

// Unique tree path through the lowest common ancestor.
inline std::vector<PathStep> tree_path(const SentenceGraph& s, TokenIndex from, TokenIndex to) {
  std::vector<TokenIndex> up_from, up_to;
  for (TokenIndex c = from; c != kRoot; c = s.token(c).head) up_from.push_back(c);
  for (TokenIndex c = to; c != kRoot; c = s.token(c).head) up_to.push_back(c);
  // Strip the common suffix (shared ancestors) but keep the LCA itself.
  std::size_t i = up_from.size(), j = up_to.size();
  while (i > 0 && j > 0 && up_from[i - 1] == up_to[j - 1]) {
    --i;
    --j;
  }
  std::vector<PathStep> steps;
  for (std::size_t k = 0; k < i; ++k) {
    steps.push_back({PathStep::Direction::Up, s.token(up_from[k]).deprel});
  }
  for (std::size_t k = j; k-- > 0;) {
    steps.push_back({PathStep::Direction::Down, s.token(up_to[k]).deprel});
  }
  return steps;
}

// Breadth-first shortest path over base and enhanced edges, ignoring
// direction for reachability; ties resolve to the smallest (token, step).
inline std::vector<PathStep> graph_path(const SentenceGraph& s, TokenIndex from, TokenIndex to) {
  using Hop = std::tuple<TokenIndex, PathStep>;
  std::vector<std::vector<Hop>> nbrs(s.size() + 1);
  auto add = [&](const Edge& e) {
    if (e.head == kRoot) return;
    nbrs[e.dependent].emplace_back(e.head, PathStep{PathStep::Direction::Up, e.deprel});
    nbrs[e.head].emplace_back(e.dependent, PathStep{PathStep::Direction::Down, e.deprel});
  };
  for (const auto& e : s.base_edges) add(e);
  for (const auto& e : s.enhanced_edges) add(e);
  for (auto& n : nbrs) std::sort(n.begin(), n.end());

  std::vector<bool> seen(s.size() + 1, false);
  std::vector<std::pair<TokenIndex, PathStep>> prev(s.size() + 1);
  std::deque<TokenIndex> queue{from};
  seen[from] = true;
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    if (cur == to) break;
    for (const auto& [next, step] : nbrs[cur]) {
      if (seen[next]) continue;
      seen[next] = true;
      prev[next] = {cur, step};
      queue.push_back(next);
    }
  }
  std::vector<PathStep> steps;
  if (!seen[to]) return steps;
  for (TokenIndex c = to; c != from; c = prev[c].first) steps.push_back(prev[c].second);
  std::reverse(steps.begin(), steps.end());
  return steps;
}

}  // namespace detail

// Ranked by count descending, then canonical string ascending.
inline std::vector<PathSignature> mine_paths(const Corpus& c, const std::vector<SeedPair>& pairs,
                                             std::size_t k, MineOptions opts = {}) {
  std::map<std::string, PathSignature> by_key;
  for (std::size_t ord = 0; ord < c.sentence_count(); ++ord) {
    const auto& s = c.sentence_at(ord);
    for (const auto& pair : pairs) {
      const auto a = text::fold(pair.lemma_a), b = text::fold(pair.lemma_b);
      std::vector<TokenIndex> as, bs;
      for (const auto& t : s.tokens) {
        const auto l = text::fold(t.lemma);
        if (l == a) as.push_back(t.index);
        if (l == b) bs.push_back(t.index);
      }
      for (auto i : as) {
        for (auto j : bs) {
          if (i == j) continue;
          auto steps = opts.use_enhanced ? detail::graph_path(s, i, j) : detail::tree_path(s, i, j);
          if (steps.empty()) continue;
          auto& sig = by_key[canonical(steps)];
          if (sig.count == 0) sig.steps = std::move(steps);
          ++sig.count;
          auto& ex = sig.example_sentence_ids;
          if (ex.size() < kMaxExamples && std::find(ex.begin(), ex.end(), s.sentence_id) == ex.end()) {
            ex.push_back(s.sentence_id);
          }
        }
      }
    }
  }
  std::vector<std::pair<std::string, PathSignature>> ranked(by_key.begin(), by_key.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& x, const auto& y) { return x.second.count > y.second.count; });
  std::vector<PathSignature> out;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.push_back(std::move(ranked[i].second));
  return out;
}

enum class KeepLexical { None, A, B, Both };

inline KeepLexical parse_keep_lexical(std::string_view v) {
  if (v == "none") return KeepLexical::None;
  if (v == "a") return KeepLexical::A;
  if (v == "b") return KeepLexical::B;
  if (v == "both") return KeepLexical::Both;
  throw Error(ErrorCode::BadRequest, "keep_lexical must be none|a|b|both");
}

// Endpoints become captures X and Y; interior nodes are structural.
inline GraphQuery path_to_query(const PathSignature& p, KeepLexical keep, const SeedPair& pair) {
  GraphQuery q;
  q.name = "path " + canonical(p.steps);
  const auto n = p.steps.size() + 1;
  for (std::size_t i = 0; i < n; ++i) {
    NodeConstraint node;
    if (i == 0) {
      node.id = "X";
      node.capture = "X";
      if (keep == KeepLexical::A || keep == KeepLexical::Both) node.lemma = pair.lemma_a;
    } else if (i + 1 == n) {
      node.id = "Y";
      node.capture = "Y";
      if (keep == KeepLexical::B || keep == KeepLexical::Both) node.lemma = pair.lemma_b;
    } else {
      node.id = "p" + std::to_string(i);
    }
    q.nodes.push_back(std::move(node));
  }
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    const auto& st = p.steps[i];
    if (st.direction == PathStep::Direction::Up) {
      q.edges.push_back({i + 1, i, st.deprel});
    } else {
      q.edges.push_back({i, i + 1, st.deprel});
    }
  }
  return q;
}

// Query-file text: one DSL record per suggestion, each preceded by
// "# count=<n>" and "# path=<steps>" comments.
inline std::string format_suggestions(const std::vector<PathSignature>& sigs, KeepLexical keep,
                                      const SeedPair& pair) {
  std::string out;
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    if (i > 0) out += "---\n";
    auto q = path_to_query(sigs[i], keep, pair);
    q.name = "suggestion" + std::to_string(i + 1);
    out += "# count=" + std::to_string(sigs[i].count) + "\n";
    out += "# path=" + canonical(sigs[i].steps) + "\n";
    out += to_dsl(q);
  }
  return out;
}

}  // namespace synq

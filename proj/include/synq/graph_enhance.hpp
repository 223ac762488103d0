#pragma once

// Label canonicalization, enhancement rules that add edges on top of the
// base tree, and noun-phrase span expansion.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "synq/corpus.hpp"
#include "synq/error.hpp"
#include "synq/text.hpp"

namespace synq {

// Single-step label substitution, separately for deprels and UPOS tags.
struct LabelMap {
  std::map<std::string, std::string> deprel;
  std::map<std::string, std::string> upos;

  bool empty() const { return deprel.empty() && upos.empty(); }

  // A target that is itself a source would make canonicalize non-idempotent.
  void validate() const {
    for (const auto* table : {&deprel, &upos}) {
      for (const auto& [from, to] : *table) {
        if (from != to && table->count(to)) {
          throw Error(ErrorCode::InvalidConfig,
                      "label map chains " + from + " -> " + to + " -> " +
                          table->at(to));
        }
      }
    }
  }
};

inline SentenceGraph canonicalize(SentenceGraph s, const LabelMap& m) {
  if (m.empty()) return s;
  auto sub = [](const std::map<std::string, std::string>& table, std::string& label) {
    auto it = table.find(label);
    if (it != table.end()) label = it->second;
  };
  for (auto& t : s.tokens) {
    sub(m.deprel, t.deprel);
    sub(m.upos, t.upos);
  }
  for (auto& e : s.enhanced_edges) sub(m.deprel, e.deprel);
  rebuild_base_edges(s);
  normalize_enhanced(s);
  return s;
}

// Participants a rule can refer to, relative to a trigger edge
// head --trigger_deprel--> dependent.
enum class RuleRole { Head, Dependent, HeadSubject, HeadObject };

struct EnhancementRule {
  std::string name;
  std::string trigger_deprel;
  // Head lemma must be in RuleSet::control_verbs.
  bool require_control_lemma = false;
  // Head must have a dependent for each of these deprels.
  std::set<std::string> required;
  // Head having a dependent with any of these deprels vetoes the rule.
  std::set<std::string> blockers;
  RuleRole source = RuleRole::Dependent;
  RuleRole target = RuleRole::HeadSubject;
  std::string new_deprel;
};

struct RuleSet {
  std::vector<EnhancementRule> rules;
  std::set<std::string> control_verbs;

  void validate() const {
    std::set<std::string> names;
    for (const auto& r : rules) {
      if (!names.insert(r.name).second) {
        throw Error(ErrorCode::InvalidConfig, "duplicate rule name " + r.name);
      }
      if (r.trigger_deprel.empty() || r.new_deprel.empty()) {
        throw Error(ErrorCode::InvalidConfig, "rule " + r.name + " is incomplete");
      }
    }
  }
};

// Subject control ("I want to dance": dance -nsubj-> I) and object control
// ("I told him to dance": dance -nsubj-> him, never -> I).
inline std::vector<EnhancementRule> default_control_rules() {
  EnhancementRule subject;
  subject.name = "subject-control";
  subject.trigger_deprel = "xcomp";
  subject.require_control_lemma = true;
  subject.blockers = {"obj", "iobj"};
  subject.source = RuleRole::Dependent;
  subject.target = RuleRole::HeadSubject;
  subject.new_deprel = "nsubj";

  EnhancementRule object;
  object.name = "object-control";
  object.trigger_deprel = "xcomp";
  object.required = {"obj"};
  object.source = RuleRole::Dependent;
  object.target = RuleRole::HeadObject;
  object.new_deprel = "nsubj";
  return {subject, object};
}

inline RuleSet default_rule_set() {
  RuleSet r;
  r.rules = default_control_rules();
  r.control_verbs = {"want", "try", "begin", "start", "decide", "refuse", "agree",
                     "hope", "plan", "continue", "intend", "רצה", "ניסה", "החליט",
                     "התחיל", "סירב", "הסכים"};
  return r;
}

namespace detail {

inline bool is_subject(std::string_view deprel) {
  return deprel == "nsubj" || text::starts_with(deprel, "nsubj:");
}

inline std::vector<TokenIndex> resolve_role(
    RuleRole role, TokenIndex head, TokenIndex dependent,
    const std::vector<std::vector<TokenIndex>>& kids, const SentenceGraph& s) {
  switch (role) {
    case RuleRole::Head: return {head};
    case RuleRole::Dependent: return {dependent};
    case RuleRole::HeadSubject:
    case RuleRole::HeadObject: {
      std::vector<TokenIndex> out;
      for (auto k : kids[head]) {
        const auto& rel = s.token(k).deprel;
        if (role == RuleRole::HeadSubject ? is_subject(rel) : rel == "obj") {
          out.push_back(k);
        }
      }
      return out;
    }
  }
  return {};
}

}  // namespace detail

// One ordered pass over the rules. Triggers are read from the base tree only,
// so an edge added by one rule never fires another. Base edges are never
// touched.
inline SentenceGraph apply_rules(SentenceGraph s, const RuleSet& rules) {
  const auto kids = children_of(s);
  auto has_dependent_with = [&](TokenIndex head, const std::string& rel) {
    return std::any_of(kids[head].begin(), kids[head].end(),
                       [&](TokenIndex k) { return s.token(k).deprel == rel; });
  };
  std::vector<Edge> added;
  for (const auto& rule : rules.rules) {
    for (const auto& t : s.tokens) {
      if (t.head == kRoot || t.deprel != rule.trigger_deprel) continue;
      const TokenIndex head = t.head;
      const auto& head_tok = s.token(head);
      if (rule.require_control_lemma &&
          !rules.control_verbs.count(head_tok.lemma) &&
          !rules.control_verbs.count(text::fold(head_tok.lemma))) {
        continue;
      }
      bool ok = std::all_of(rule.required.begin(), rule.required.end(),
                            [&](const auto& r) { return has_dependent_with(head, r); });
      ok = ok && std::none_of(rule.blockers.begin(), rule.blockers.end(),
                              [&](const auto& b) { return has_dependent_with(head, b); });
      if (!ok) continue;
      for (auto src : detail::resolve_role(rule.source, head, t.index, kids, s)) {
        for (auto dst : detail::resolve_role(rule.target, head, t.index, kids, s)) {
          if (src != dst) added.push_back({src, dst, rule.new_deprel});
        }
      }
    }
  }
  s.enhanced_edges.insert(s.enhanced_edges.end(), added.begin(), added.end());
  normalize_enhanced(s);
  return s;
}

// Applies canonicalization then rules to every sentence.
inline Corpus enhance_corpus(const Corpus& c, const LabelMap& m, const RuleSet& r) {
  std::vector<Document> docs = c.documents();
  for (auto& d : docs) {
    for (auto& s : d.sentences) s = apply_rules(canonicalize(std::move(s), m), r);
  }
  return Corpus(c.corpus_id(), std::move(docs));
}

struct TokenSpan {
  TokenIndex first = 0;
  TokenIndex last = 0;
  std::size_t char_start = 0;
  std::size_t char_end = 0;

  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

inline const std::set<std::string>& np_modifier_relations() {
  static const std::set<std::string> rels = {"det", "amod", "compound", "nmod:poss"};
  return rels;
}

// Contiguous span around a noun covering its modifiers on either side.
// Growth stops at the first token that is not a direct modifier.
inline TokenSpan expand_np(const SentenceGraph& s, TokenIndex head) {
  if (head < 1 || head > s.size()) {
    throw Error(ErrorCode::InvalidIndex,
                "token " + std::to_string(head) + " not in " + s.sentence_id);
  }
  const auto& rels = np_modifier_relations();
  auto is_modifier = [&](TokenIndex i) {
    const auto& t = s.token(i);
    return t.head == head && rels.count(t.deprel) > 0;
  };
  TokenIndex first = head, last = head;
  while (first > 1 && is_modifier(first - 1)) --first;
  while (last < s.size() && is_modifier(last + 1)) ++last;
  return {first, last, s.token(first).char_start, s.token(last).char_end};
}

namespace detail {

inline RuleRole parse_role(std::string_view v, std::size_t line) {
  if (v == "head") return RuleRole::Head;
  if (v == "dependent") return RuleRole::Dependent;
  if (v == "head_subject") return RuleRole::HeadSubject;
  if (v == "head_object") return RuleRole::HeadObject;
  throw Error(ErrorCode::InvalidConfig, "unknown role '" + std::string(v) + "'", line);
}

}  // namespace detail

struct EnhancementConfig {
  LabelMap labels;
  RuleSet rules;
};

// Plain-text config. Sections:
//   [deprel] / [upos]   "source<TAB>target" per line
//   [control]           one lemma per line
//   [rule <name>]       "trigger<TAB>xcomp", "control_lemma<TAB>yes",
//                       "require<TAB>obj", "block<TAB>obj",
//                       "add<TAB><source role><TAB><target role><TAB><deprel>"
// Without any [rule] section the default control rules are used.
inline EnhancementConfig parse_enhancement_config(std::string_view content) {
  EnhancementConfig cfg;
  std::string section;
  bool saw_control = false;
  auto all = text::lines(content);
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto lineno = i + 1;
    auto line = text::trim(all[i]);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = std::string(text::trim(line.substr(1, line.size() - 2)));
      if (text::starts_with(section, "rule ")) {
        EnhancementRule r;
        r.name = std::string(text::trim(std::string_view(section).substr(5)));
        cfg.rules.rules.push_back(std::move(r));
        section = "rule";
      } else if (section == "control") {
        saw_control = true;
      } else if (section != "deprel" && section != "upos") {
        throw Error(ErrorCode::InvalidConfig, "unknown section [" + section + "]",
                    lineno);
      }
      continue;
    }
    if (section.empty()) {
      throw Error(ErrorCode::InvalidConfig, "entry outside of a section", lineno);
    }
    if (section == "control") {
      cfg.rules.control_verbs.insert(std::string(line));
      continue;
    }
    auto cols = text::split(line, '\t');
    for (auto& c : cols) c = text::trim(c);
    if (section == "deprel" || section == "upos") {
      if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
        throw Error(ErrorCode::InvalidConfig, "expected source<TAB>target", lineno);
      }
      auto& table = section == "deprel" ? cfg.labels.deprel : cfg.labels.upos;
      table[std::string(cols[0])] = std::string(cols[1]);
      continue;
    }
    auto& rule = cfg.rules.rules.back();
    const auto key = cols[0];
    if (key == "trigger" && cols.size() == 2) {
      rule.trigger_deprel = std::string(cols[1]);
    } else if (key == "control_lemma" && cols.size() == 2) {
      rule.require_control_lemma = cols[1] == "yes" || cols[1] == "true";
    } else if (key == "require" && cols.size() == 2) {
      rule.required.insert(std::string(cols[1]));
    } else if (key == "block" && cols.size() == 2) {
      rule.blockers.insert(std::string(cols[1]));
    } else if (key == "add" && cols.size() == 4) {
      rule.source = detail::parse_role(cols[1], lineno);
      rule.target = detail::parse_role(cols[2], lineno);
      rule.new_deprel = std::string(cols[3]);
    } else {
      throw Error(ErrorCode::InvalidConfig, "bad rule line '" + std::string(line) + "'",
                  lineno);
    }
  }
  if (cfg.rules.rules.empty()) cfg.rules.rules = default_control_rules();
  if (!saw_control) cfg.rules.control_verbs = default_rule_set().control_verbs;
  cfg.labels.validate();
  cfg.rules.validate();
  return cfg;
}

}  // namespace synq

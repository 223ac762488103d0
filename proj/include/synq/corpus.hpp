#pragma once

// In-memory model of dependency-parsed corpora and the CoNLL-U reader/writer.
//
// A Corpus is immutable once loaded. Sentence identity is "<doc_id>#s<k>"
// with k the 1-based position of the sentence inside its document.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "synq/error.hpp"
#include "synq/text.hpp"

namespace synq {

// 1-based token position within a sentence; 0 denotes the artificial root.
using TokenIndex = std::uint32_t;
inline constexpr TokenIndex kRoot = 0;

struct Token {
  TokenIndex index = 0;
  std::string form;
  std::string lemma;
  std::string upos;
  TokenIndex head = 0;
  std::string deprel;
  bool space_after = true;
  // Code-point offsets into sentence_text(); half-open [char_start, char_end).
  std::size_t char_start = 0;
  std::size_t char_end = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Edge {
  TokenIndex head = 0;
  TokenIndex dependent = 0;
  std::string deprel;

  friend auto operator<=>(const Edge&, const Edge&) = default;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct SentenceGraph {
  std::string sentence_id;
  std::vector<Token> tokens;
  // Sorted, duplicate-free. base_edges mirror the HEAD/DEPREL columns and
  // include the (0, root, "root") edge.
  std::vector<Edge> base_edges;
  std::vector<Edge> enhanced_edges;

  std::size_t size() const { return tokens.size(); }
  const Token& token(TokenIndex i) const { return tokens.at(i - 1); }

  friend bool operator==(const SentenceGraph&, const SentenceGraph&) = default;
};

struct Document {
  std::string doc_id;
  std::map<std::string, std::string> metadata;
  std::vector<SentenceGraph> sentences;

  friend bool operator==(const Document&, const Document&) = default;
};

// Position of a sentence inside a corpus.
struct SentenceLocation {
  std::size_t document = 0;
  std::size_t sentence = 0;
};

class Corpus {
 public:
  Corpus() = default;
  Corpus(std::string corpus_id, std::vector<Document> documents)
      : corpus_id_(std::move(corpus_id)), documents_(std::move(documents)) {
    build_lookup();
  }

  const std::string& corpus_id() const { return corpus_id_; }
  const std::vector<Document>& documents() const { return documents_; }
  std::size_t sentence_count() const { return order_.size(); }

  // Sentences in corpus order (document order, then sentence order). The
  // position in this list is the sentence ordinal used by the index.
  const std::vector<SentenceLocation>& sentence_order() const { return order_; }

  const SentenceGraph& sentence_at(std::size_t ordinal) const {
    const auto& loc = order_.at(ordinal);
    return documents_[loc.document].sentences[loc.sentence];
  }

  const Document& document_of(std::size_t ordinal) const {
    return documents_.at(order_.at(ordinal).document);
  }

  std::optional<std::size_t> ordinal_of(std::string_view sentence_id) const {
    auto it = by_id_.find(std::string(sentence_id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(std::string_view sentence_id) const {
    return ordinal_of(sentence_id).has_value();
  }

  const SentenceGraph& sentence(std::string_view sentence_id) const {
    auto ord = ordinal_of(sentence_id);
    if (!ord) {
      throw Error(ErrorCode::UnknownSentence, std::string(sentence_id));
    }
    return sentence_at(*ord);
  }

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.corpus_id_ == b.corpus_id_ && a.documents_ == b.documents_;
  }

 private:
  void build_lookup() {
    std::unordered_set<std::string> doc_ids;
    for (std::size_t d = 0; d < documents_.size(); ++d) {
      if (!doc_ids.insert(documents_[d].doc_id).second) {
        throw Error(ErrorCode::DuplicateDocument, documents_[d].doc_id);
      }
      const auto& sents = documents_[d].sentences;
      for (std::size_t s = 0; s < sents.size(); ++s) {
        auto [it, fresh] = by_id_.emplace(sents[s].sentence_id, order_.size());
        if (!fresh) {
          throw Error(ErrorCode::DuplicateDocument,
                      "duplicate sentence id " + sents[s].sentence_id);
        }
        order_.push_back({d, s});
      }
    }
  }

  std::string corpus_id_;
  std::vector<Document> documents_;
  std::vector<SentenceLocation> order_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

inline std::string make_sentence_id(std::string_view doc_id, std::size_t k) {
  return std::string(doc_id) + "#s" + std::to_string(k);
}

// Concatenates forms, separated by one space unless the preceding token has
// SpaceAfter=No.
inline std::string sentence_text(const SentenceGraph& s) {
  std::string out;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    out += s.tokens[i].form;
    if (i + 1 < s.tokens.size() && s.tokens[i].space_after) out += ' ';
  }
  return out;
}

// Recomputes char offsets from forms and space_after flags.
inline void assign_char_offsets(SentenceGraph& s) {
  std::size_t pos = 0;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    auto& t = s.tokens[i];
    t.char_start = pos;
    t.char_end = pos + text::utf8_length(t.form);
    pos = t.char_end;
    if (i + 1 < s.tokens.size() && t.space_after) ++pos;
  }
}

inline void rebuild_base_edges(SentenceGraph& s) {
  s.base_edges.clear();
  s.base_edges.reserve(s.tokens.size());
  for (const auto& t : s.tokens) s.base_edges.push_back({t.head, t.index, t.deprel});
  std::sort(s.base_edges.begin(), s.base_edges.end());
}

// Sorts and dedupes enhanced edges and drops any that duplicate a base edge.
inline void normalize_enhanced(SentenceGraph& s) {
  auto& e = s.enhanced_edges;
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  std::erase_if(e, [&](const Edge& x) {
    return std::binary_search(s.base_edges.begin(), s.base_edges.end(), x);
  });
}

namespace detail {

struct Location {
  std::size_t sentence_ordinal;  // 1-based within the parsed text
  std::size_t line;              // 1-based
};

inline std::string where(const Location& loc) {
  return "sentence " + std::to_string(loc.sentence_ordinal) + ", line " +
         std::to_string(loc.line);
}

// Validates the tree: one root, heads in range, no cycles.
inline void validate_tree(const SentenceGraph& s, std::size_t ordinal,
                          const std::vector<std::size_t>& token_lines) {
  const auto n = s.tokens.size();
  std::size_t roots = 0;
  for (const auto& t : s.tokens) {
    const Location loc{ordinal, token_lines[t.index - 1]};
    if (t.head > n) {
      throw Error(ErrorCode::HeadOutOfRange,
                  "head " + std::to_string(t.head) + " of token " +
                      std::to_string(t.index) + " exceeds sentence length " +
                      std::to_string(n) + " (" + where(loc) + ")",
                  loc.line);
    }
    if (t.head == t.index) {
      throw Error(ErrorCode::CyclicTree,
                  "token " + std::to_string(t.index) + " is its own head (" +
                      where(loc) + ")",
                  loc.line);
    }
    if (t.head == kRoot && ++roots > 1) {
      throw Error(ErrorCode::MultipleRoots,
                  "second root at token " + std::to_string(t.index) + " (" +
                      where(loc) + ")",
                  loc.line);
    }
  }
  // 0 = unvisited, 1 = on current walk, 2 = known to reach root.
  std::vector<std::uint8_t> state(n + 1, 0);
  state[0] = 2;
  for (TokenIndex start = 1; start <= n; ++start) {
    std::vector<TokenIndex> walk;
    TokenIndex cur = start;
    while (state[cur] == 0) {
      state[cur] = 1;
      walk.push_back(cur);
      cur = s.tokens[cur - 1].head;
    }
    if (state[cur] == 1) {
      const auto line = token_lines[cur - 1];
      throw Error(ErrorCode::CyclicTree,
                  "cycle through token " + std::to_string(cur) + " (" +
                      where({ordinal, line}) + ")",
                  line);
    }
    for (auto w : walk) state[w] = 2;
  }
  if (n > 0 && roots == 0) {
    throw Error(ErrorCode::CyclicTree,
                "no root in sentence " + std::to_string(ordinal),
                token_lines.front());
  }
}

struct Block {
  std::vector<std::pair<std::size_t, std::string_view>> lines;  // (lineno, text)
};

struct RawDocument {
  std::string doc_id;
  std::map<std::string, std::string> metadata;
  std::vector<Block> blocks;
  std::vector<std::size_t> block_ordinals;
};

inline bool parse_comment_kv(std::string_view line, std::string_view key,
                             std::string& value) {
  // "# <key> = <value>"
  auto body = text::trim(line.substr(1));
  if (!text::starts_with(body, key)) return false;
  auto rest = text::trim(body.substr(key.size()));
  if (rest.empty() || rest[0] != '=') return false;
  value = std::string(text::trim(rest.substr(1)));
  return true;
}

inline SentenceGraph parse_block(const Block& block, std::size_t ordinal) {
  SentenceGraph s;
  std::vector<std::size_t> token_lines;
  struct PendingDeps {
    TokenIndex dependent;
    std::string_view deps;
    std::size_t line;
  };
  std::vector<PendingDeps> pending;
  // Multiword ranges whose MISC says SpaceAfter=No; applied to the last
  // member token.
  std::vector<TokenIndex> mwt_no_space;

  for (const auto& [lineno, line] : block.lines) {
    if (line.empty() || line[0] == '#') continue;
    auto cols = text::split(line, '\t');
    if (cols.size() != 10) {
      throw Error(ErrorCode::MalformedLine,
                  "expected 10 tab-separated columns, found " +
                      std::to_string(cols.size()) + " (" +
                      where({ordinal, lineno}) + ")",
                  lineno);
    }
    const auto id = cols[0];
    if (id.find('-') != std::string_view::npos) {
      auto range = text::split(id, '-');
      std::uint64_t last = 0;
      if (range.size() == 2 && text::parse_uint(range[1], last) &&
          cols[9].find("SpaceAfter=No") != std::string_view::npos) {
        mwt_no_space.push_back(static_cast<TokenIndex>(last));
      }
      continue;
    }
    if (id.find('.') != std::string_view::npos) continue;  // empty node

    std::uint64_t idx = 0, head = 0;
    if (!text::parse_uint(id, idx) || idx != s.tokens.size() + 1) {
      throw Error(ErrorCode::MalformedLine,
                  "bad token id '" + std::string(id) + "' (" +
                      where({ordinal, lineno}) + ")",
                  lineno);
    }
    if (!text::parse_uint(cols[6], head)) {
      throw Error(ErrorCode::MalformedLine,
                  "bad head '" + std::string(cols[6]) + "' (" +
                      where({ordinal, lineno}) + ")",
                  lineno);
    }
    if (cols[7].empty() || cols[7] == "_") {
      throw Error(ErrorCode::MalformedLine,
                  "empty deprel (" + where({ordinal, lineno}) + ")", lineno);
    }
    Token t;
    t.index = static_cast<TokenIndex>(idx);
    t.form = std::string(cols[1]);
    t.lemma = std::string(cols[2]);
    t.upos = std::string(cols[3]);
    t.head = static_cast<TokenIndex>(std::min<std::uint64_t>(head, UINT32_MAX));
    t.deprel = std::string(cols[7]);
    for (auto item : text::split(cols[9], '|')) {
      if (item == "SpaceAfter=No") t.space_after = false;
    }
    if (cols[8] != "_" && !cols[8].empty()) {
      pending.push_back({t.index, cols[8], lineno});
    }
    s.tokens.push_back(std::move(t));
    token_lines.push_back(lineno);
  }
  for (auto last : mwt_no_space) {
    if (last >= 1 && last <= s.tokens.size()) s.tokens[last - 1].space_after = false;
  }

  validate_tree(s, ordinal, token_lines);
  rebuild_base_edges(s);

  // DEPS: "head:deprel|head:deprel"; the deprel itself may contain ':'.
  for (const auto& p : pending) {
    for (auto item : text::split(p.deps, '|')) {
      auto colon = item.find(':');
      std::uint64_t head = 0;
      if (colon == std::string_view::npos ||
          !text::parse_uint(item.substr(0, colon), head) ||
          colon + 1 >= item.size()) {
        throw Error(ErrorCode::MalformedLine,
                    "bad DEPS entry '" + std::string(item) + "' (" +
                        where({ordinal, p.line}) + ")",
                    p.line);
      }
      if (head > s.tokens.size()) {
        throw Error(ErrorCode::HeadOutOfRange,
                    "DEPS head " + std::to_string(head) + " (" +
                        where({ordinal, p.line}) + ")",
                    p.line);
      }
      if (head == kRoot) continue;
      s.enhanced_edges.push_back({static_cast<TokenIndex>(head), p.dependent,
                                  std::string(item.substr(colon + 1))});
    }
  }
  normalize_enhanced(s);
  assign_char_offsets(s);
  return s;
}

// Splits CoNLL-U text into documents at "# newdoc id = ..." markers.
inline std::vector<RawDocument> split_documents(std::string_view content,
                                                const std::string& default_id) {
  std::vector<RawDocument> docs;
  Block current;
  bool block_has_tokens = false;
  std::size_t ordinal = 0;

  auto ensure_doc = [&] {
    if (docs.empty()) docs.push_back({default_id, {}, {}, {}});
  };
  auto flush = [&] {
    if (block_has_tokens) {
      ensure_doc();
      docs.back().blocks.push_back(std::move(current));
      docs.back().block_ordinals.push_back(++ordinal);
    }
    current = Block{};
    block_has_tokens = false;
  };

  auto all = text::lines(content);
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto line = all[i];
    const auto lineno = i + 1;
    if (text::trim(line).empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      std::string value;
      if (parse_comment_kv(line, "newdoc id", value)) {
        flush();
        docs.push_back({value, {}, {}, {}});
        continue;
      }
      if (text::starts_with(text::trim(line.substr(1)), "meta ")) {
        // "# meta <key> = <value>"
        auto body = text::trim(line.substr(1)).substr(5);
        auto eq = body.find('=');
        if (eq != std::string_view::npos) {
          ensure_doc();
          docs.back().metadata[std::string(text::trim(body.substr(0, eq)))] =
              std::string(text::trim(body.substr(eq + 1)));
        }
        continue;
      }
    } else {
      block_has_tokens = true;
    }
    current.lines.emplace_back(lineno, line);
  }
  flush();
  return docs;
}

inline Document build_document(const RawDocument& raw) {
  Document doc;
  doc.doc_id = raw.doc_id;
  doc.metadata = raw.metadata;
  for (std::size_t b = 0; b < raw.blocks.size(); ++b) {
    auto s = parse_block(raw.blocks[b], raw.block_ordinals[b]);
    s.sentence_id = make_sentence_id(doc.doc_id, b + 1);
    doc.sentences.push_back(std::move(s));
  }
  return doc;
}

}  // namespace detail

// Parses one document. "# newdoc" markers inside the text are ignored; every
// sentence block belongs to doc_id.
inline Document load_conllu(std::string_view conllu, const std::string& doc_id,
                            std::map<std::string, std::string> metadata = {}) {
  auto raw = detail::split_documents(conllu, doc_id);
  detail::RawDocument merged{doc_id, {}, {}, {}};
  for (auto& r : raw) {
    for (std::size_t b = 0; b < r.blocks.size(); ++b) {
      merged.blocks.push_back(std::move(r.blocks[b]));
      merged.block_ordinals.push_back(r.block_ordinals[b]);
    }
  }
  auto doc = detail::build_document(merged);
  doc.metadata = std::move(metadata);
  return doc;
}

// Parses a multi-document CoNLL-U text. Sentences before the first
// "# newdoc id" marker belong to default_doc_id.
inline std::vector<Document> load_documents(std::string_view conllu,
                                            const std::string& default_doc_id) {
  std::vector<Document> docs;
  for (const auto& raw : detail::split_documents(conllu, default_doc_id)) {
    docs.push_back(detail::build_document(raw));
  }
  return docs;
}

inline Corpus load_corpus_text(std::string_view conllu, const std::string& corpus_id,
                               const std::string& default_doc_id = "doc") {
  return Corpus(corpus_id, load_documents(conllu, default_doc_id));
}

// Loads a corpus manifest directory (every *.conllu file in name order plus an
// optional metadata.tsv with "doc_id<TAB>key<TAB>value" lines) or a single
// CoNLL-U store file.
inline Corpus load_corpus(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) {
    throw Error(ErrorCode::IoError, "no such corpus: " + path.string());
  }
  if (!fs::is_directory(path)) {
    return load_corpus_text(text::read_file(path.string()), path.stem().string(),
                            path.stem().string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().extension() == ".conllu") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<Document> docs;
  for (const auto& f : files) {
    try {
      for (auto& d : load_documents(text::read_file(f.string()), f.stem().string())) {
        docs.push_back(std::move(d));
      }
    } catch (const Error& e) {
      throw Error(e.code(), f.filename().string() + ": " + e.detail(), e.line());
    }
  }
  auto meta_path = path / "metadata.tsv";
  if (fs::exists(meta_path)) {
    auto content = text::read_file(meta_path.string());
    auto lines = text::lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (text::trim(lines[i]).empty() || lines[i][0] == '#') continue;
      auto cols = text::split(lines[i], '\t');
      if (cols.size() != 3) {
        throw Error(ErrorCode::MalformedLine,
                    "metadata.tsv: expected doc_id, key, value", i + 1);
      }
      for (auto& d : docs) {
        if (d.doc_id == cols[0]) d.metadata[std::string(cols[1])] = std::string(cols[2]);
      }
    }
  }
  auto name = path.filename().string();
  if (name.empty()) name = path.parent_path().filename().string();
  return Corpus(name, std::move(docs));
}

// Writes a sentence back as CoNLL-U. Enhanced edges go to the DEPS column;
// base edges are not repeated there.
inline std::string to_conllu(const SentenceGraph& s) {
  std::string out;
  out += "# sent_id = " + s.sentence_id + "\n";
  out += "# text = " + sentence_text(s) + "\n";
  for (const auto& t : s.tokens) {
    std::string deps;
    for (const auto& e : s.enhanced_edges) {
      if (e.dependent != t.index) continue;
      if (!deps.empty()) deps += '|';
      deps += std::to_string(e.head) + ":" + e.deprel;
    }
    if (deps.empty()) deps = "_";
    out += std::to_string(t.index) + "\t" + t.form + "\t" + t.lemma + "\t" + t.upos +
           "\t_\t_\t" + std::to_string(t.head) + "\t" + t.deprel + "\t" + deps + "\t" +
           (t.space_after ? "_" : "SpaceAfter=No") + "\n";
  }
  out += "\n";
  return out;
}

inline std::string to_conllu(const Document& d) {
  std::string out = "# newdoc id = " + d.doc_id + "\n";
  for (const auto& [k, v] : d.metadata) out += "# meta " + k + " = " + v + "\n";
  for (const auto& s : d.sentences) out += to_conllu(s);
  return out;
}

inline std::string to_conllu(const Corpus& c) {
  std::string out;
  for (const auto& d : c.documents()) out += to_conllu(d);
  return out;
}

// Sentences around sentence_id within its own document, clipped at the
// document edges, in document order.
inline std::vector<SentenceGraph> context_window(const Corpus& c,
                                                 std::string_view sentence_id,
                                                 std::size_t before,
                                                 std::size_t after) {
  auto ord = c.ordinal_of(sentence_id);
  if (!ord) throw Error(ErrorCode::UnknownSentence, std::string(sentence_id));
  const auto loc = c.sentence_order()[*ord];
  const auto& sents = c.documents()[loc.document].sentences;
  const auto first = loc.sentence >= before ? loc.sentence - before : 0;
  const auto last = std::min(sents.size() - 1, loc.sentence + after);
  return {sents.begin() + static_cast<std::ptrdiff_t>(first),
          sents.begin() + static_cast<std::ptrdiff_t>(last) + 1};
}

// Base-tree children lists, indexed by head (0 = root).
inline std::vector<std::vector<TokenIndex>> children_of(const SentenceGraph& s) {
  std::vector<std::vector<TokenIndex>> kids(s.tokens.size() + 1);
  for (const auto& t : s.tokens) kids[t.head].push_back(t.index);
  return kids;
}

}  // namespace synq

#pragma once

// Sentence-granular inverted index used to prune the sentences a query has
// to be matched against.
//
// On-disk layout (all integers little-endian):
//   "SYNQIDX1"                     8-byte magic
//   u64  corpus fingerprint
//   u32  sentence count, then per sentence: u32 byte length + sentence_id
//   three posting maps, in the order lemma, upos, deprel:
//     u32 key count, then per key in ascending byte order:
//       u32 byte length + key, u32 posting length, posting ordinals (u32)

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <iterator>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "synq/corpus.hpp"
#include "synq/error.hpp"
#include "synq/query.hpp"
#include "synq/text.hpp"

namespace synq {

using SentenceOrdinal = std::uint32_t;
using Postings = std::vector<SentenceOrdinal>;

inline constexpr std::string_view kIndexMagic = "SYNQIDX1";

// Content hash over everything the matcher can observe. The corpus id and
// document metadata are not part of it.
inline std::uint64_t fingerprint(const Corpus& c) {
  text::Fnv1a h;
  for (const auto& d : c.documents()) {
    h.update_field(d.doc_id);
    h.update_u64(d.sentences.size());
    for (const auto& s : d.sentences) {
      h.update_field(s.sentence_id);
      h.update_u64(s.tokens.size());
      for (const auto& t : s.tokens) {
        h.update_field(t.form);
        h.update_field(t.lemma);
        h.update_field(t.upos);
        h.update_field(t.deprel);
        h.update_u64(t.head);
        h.update_u64(t.space_after ? 1 : 0);
      }
      h.update_u64(s.enhanced_edges.size());
      for (const auto& e : s.enhanced_edges) {
        h.update_u64(e.head);
        h.update_u64(e.dependent);
        h.update_field(e.deprel);
      }
    }
  }
  return h.digest();
}

struct Index {
  // Lemma keys are case-folded.
  std::map<std::string, Postings> lemma_postings;
  std::map<std::string, Postings> upos_postings;
  std::map<std::string, Postings> deprel_postings;
  std::vector<std::string> sentence_table;
  std::uint64_t corpus_fingerprint = 0;

  friend bool operator==(const Index&, const Index&) = default;
};

inline Index build_index(const Corpus& c) {
  if (c.sentence_count() == 0) throw Error(ErrorCode::EmptyCorpus, c.corpus_id());
  Index idx;
  auto add = [](std::map<std::string, Postings>& m, const std::string& key,
                SentenceOrdinal ord) {
    auto& p = m[key];
    if (p.empty() || p.back() != ord) p.push_back(ord);
  };
  for (std::size_t ord = 0; ord < c.sentence_count(); ++ord) {
    const auto& s = c.sentence_at(ord);
    const auto o = static_cast<SentenceOrdinal>(ord);
    idx.sentence_table.push_back(s.sentence_id);
    for (const auto& t : s.tokens) {
      add(idx.lemma_postings, text::fold(t.lemma), o);
      add(idx.upos_postings, t.upos, o);
    }
    for (const auto& e : s.base_edges) add(idx.deprel_postings, e.deprel, o);
    for (const auto& e : s.enhanced_edges) add(idx.deprel_postings, e.deprel, o);
  }
  idx.corpus_fingerprint = fingerprint(c);
  return idx;
}

struct CandidateSet {
  Postings ordinals;
  // No indexable constraint: every sentence is a candidate.
  bool full_scan = false;

  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
};

namespace detail {

inline Postings lookup(const std::map<std::string, Postings>& m, const std::string& key) {
  auto it = m.find(key);
  return it == m.end() ? Postings{} : it->second;
}

inline Postings unite(const Postings& a, const Postings& b) {
  Postings out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace detail

// Sentences that can possibly match q: the intersection of one posting per
// hard constraint, rarest first. A superset of the true matches.
inline CandidateSet candidates(const Index& idx, const GraphQuery& q) {
  std::vector<Postings> lists;
  for (const auto& n : q.nodes) {
    if (n.lemma) lists.push_back(detail::lookup(idx.lemma_postings, text::fold(*n.lemma)));
    if (n.word_list) {
      if (!n.lemma_set) throw Error(ErrorCode::UnknownList, *n.word_list + " (unresolved)");
      Postings u;
      for (const auto& m : *n.lemma_set) u = detail::unite(u, detail::lookup(idx.lemma_postings, m));
      lists.push_back(std::move(u));
    }
    if (n.upos) lists.push_back(detail::lookup(idx.upos_postings, *n.upos));
  }
  for (const auto& e : q.edges) {
    if (!e.wildcard()) lists.push_back(detail::lookup(idx.deprel_postings, e.deprel));
  }
  CandidateSet out;
  if (lists.empty()) {
    out.full_scan = true;
    out.ordinals.resize(idx.sentence_table.size());
    for (std::size_t i = 0; i < out.ordinals.size(); ++i) {
      out.ordinals[i] = static_cast<SentenceOrdinal>(i);
    }
    return out;
  }
  std::stable_sort(lists.begin(), lists.end(),
                   [](const auto& a, const auto& b) { return a.size() < b.size(); });
  out.ordinals = lists.front();
  for (std::size_t i = 1; i < lists.size() && !out.ordinals.empty(); ++i) {
    Postings next;
    std::set_intersection(out.ordinals.begin(), out.ordinals.end(), lists[i].begin(),
                          lists[i].end(), std::back_inserter(next));
    out.ordinals = std::move(next);
  }
  return out;
}

inline void check_fingerprint(const Index& idx, const Corpus& c) {
  if (idx.corpus_fingerprint != fingerprint(c)) {
    throw Error(ErrorCode::FingerprintMismatch,
                "index was built for a different corpus than " + c.corpus_id());
  }
}

inline CandidateSet candidates(const Index& idx, const Corpus& c, const GraphQuery& q) {
  check_fingerprint(idx, c);
  return candidates(idx, q);
}

namespace detail {

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void bytes(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void raw(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }
  std::string bytes() {
    auto n = u32();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw Error(ErrorCode::CorruptIndex, "truncated index");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_index(const Index& idx) {
  detail::Writer w;
  w.raw(kIndexMagic);
  w.u64(idx.corpus_fingerprint);
  w.u32(static_cast<std::uint32_t>(idx.sentence_table.size()));
  for (const auto& id : idx.sentence_table) w.bytes(id);
  for (const auto* m : {&idx.lemma_postings, &idx.upos_postings, &idx.deprel_postings}) {
    w.u32(static_cast<std::uint32_t>(m->size()));
    for (const auto& [key, post] : *m) {
      w.bytes(key);
      w.u32(static_cast<std::uint32_t>(post.size()));
      for (auto o : post) w.u32(o);
    }
  }
  return w.take();
}

inline Index deserialize_index(std::string_view data) {
  detail::Reader r(data);
  if (r.raw(kIndexMagic.size()) != kIndexMagic) {
    throw Error(ErrorCode::CorruptIndex, "bad magic");
  }
  Index idx;
  idx.corpus_fingerprint = r.u64();
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) idx.sentence_table.push_back(r.bytes());
  for (auto* m : {&idx.lemma_postings, &idx.upos_postings, &idx.deprel_postings}) {
    const auto keys = r.u32();
    std::string prev;
    for (std::uint32_t k = 0; k < keys; ++k) {
      auto key = r.bytes();
      if (k > 0 && !(prev < key)) throw Error(ErrorCode::CorruptIndex, "keys out of order");
      const auto len = r.u32();
      Postings post;
      post.reserve(len);
      for (std::uint32_t j = 0; j < len; ++j) {
        auto o = r.u32();
        if (o >= n || (!post.empty() && o <= post.back())) {
          throw Error(ErrorCode::CorruptIndex, "bad posting for " + key);
        }
        post.push_back(o);
      }
      prev = key;
      m->emplace(std::move(key), std::move(post));
    }
  }
  if (!r.done()) throw Error(ErrorCode::CorruptIndex, "trailing bytes");
  return idx;
}

}  // namespace synq

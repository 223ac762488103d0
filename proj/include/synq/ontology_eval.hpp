#pragma once

// Credibility label ontology, annotation records and the evaluation metrics
// built on them: Krippendorff's alpha, majority gold, accuracy/confusion, KL
// divergence, label distributions, baselines and a lexicon classifier.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "synq/error.hpp"
#include "synq/text.hpp"

namespace synq {

inline constexpr std::string_view kNotRelevant = "Not relevant";

enum class Level { Granular, High };

inline Level parse_level(std::string_view v) {
  if (v == "granular") return Level::Granular;
  if (v == "high") return Level::High;
  throw Error(ErrorCode::BadRequest, "level must be granular|high, got '" + std::string(v) + "'");
}

// The shipped two-tier ontology. High-level labels are unindented; each
// granular child follows on a line indented by a tab or spaces. "Not
// relevant" stands alone and is its own parent.
inline constexpr std::string_view kDefaultOntology =
    "Unequivocal credibility\n"
    "\tVictim is not making fake allegations or not deemed vengeful\n"
    "\tVictim is clear, simple, without exaggeration, authentic\n"
    "Credible because\n"
    "\tVictim is credible because of external support\n"
    "\tVictim is credible because accused is less credible\n"
    "Credible but\n"
    "\tVictim is credible but has some problems\n"
    "\tVictim is credible but it is a sole testimony or lacks external support\n"
    "Not credible\n"
    "\tVictim presented several versions or was not consistent\n"
    "\tVictim is deemed vengeful, not authentic, or making fake allegations\n"
    "Not relevant\n";

class LabelOntology {
 public:
  static LabelOntology parse(std::string_view content) {
    LabelOntology o;
    std::string current;
    auto all = text::lines(content);
    for (std::size_t i = 0; i < all.size(); ++i) {
      const auto raw = all[i];
      auto line = text::trim(raw);
      if (line.empty() || line[0] == '#') continue;
      const bool child = raw[0] == '\t' || raw[0] == ' ';
      const std::string label(line);
      if (o.parent_.count(label)) {
        throw Error(ErrorCode::InvalidConfig, "label listed twice: " + label, i + 1);
      }
      if (!child) {
        current = label;
        o.high_.push_back(label);
        if (label == kNotRelevant) current.clear();
        o.parent_[label] = label;
        continue;
      }
      if (current.empty()) {
        throw Error(ErrorCode::InvalidConfig, "granular label without a parent: " + label, i + 1);
      }
      o.granular_.push_back(label);
      o.parent_[label] = current;
    }
    if (!o.parent_.count(std::string(kNotRelevant))) {
      throw Error(ErrorCode::InvalidConfig, "ontology lacks 'Not relevant'");
    }
    for (const auto& h : o.high_) {
      if (h != kNotRelevant && o.children(h).empty()) {
        throw Error(ErrorCode::InvalidConfig, "high-level label without children: " + h);
      }
    }
    return o;
  }

  static const LabelOntology& builtin() {
    static const LabelOntology o = parse(kDefaultOntology);
    return o;
  }

  // High-level labels in file order, excluding Not relevant.
  std::vector<std::string> high_labels() const {
    std::vector<std::string> out;
    for (const auto& h : high_) {
      if (h != kNotRelevant) out.push_back(h);
    }
    return out;
  }
  const std::vector<std::string>& granular_labels() const { return granular_; }

  std::vector<std::string> children(std::string_view high) const {
    std::vector<std::string> out;
    for (const auto& g : granular_) {
      if (parent_.at(g) == high) out.push_back(g);
    }
    return out;
  }

  bool contains(std::string_view label) const { return parent_.count(std::string(label)) > 0; }
  bool is_granular(std::string_view label) const {
    return std::find(granular_.begin(), granular_.end(), label) != granular_.end();
  }

  // Parent of a granular label. High-level labels and Not relevant map to
  // themselves.
  const std::string& to_high_level(std::string_view label) const {
    auto it = parent_.find(std::string(label));
    if (it == parent_.end()) throw Error(ErrorCode::UnknownLabel, std::string(label));
    return it->second;
  }

  std::string at_level(std::string_view label, Level level) const {
    if (level == Level::High) return to_high_level(label);
    if (!contains(label)) throw Error(ErrorCode::UnknownLabel, std::string(label));
    return std::string(label);
  }

  // Label domain at a level, Not relevant last when included.
  std::vector<std::string> domain(Level level, bool include_not_relevant = true) const {
    auto out = level == Level::High ? high_labels() : granular_;
    if (include_not_relevant) out.emplace_back(kNotRelevant);
    return out;
  }

 private:
  std::vector<std::string> high_;
  std::vector<std::string> granular_;
  std::map<std::string, std::string> parent_;
};

// The published shape: 8 granular labels, 4 parents with 2 children each.
inline void check_two_by_four(const LabelOntology& o) {
  if (o.granular_labels().size() != 8 || o.high_labels().size() != 4) {
    throw Error(ErrorCode::InvalidConfig, "expected 8 granular and 4 high-level labels");
  }
  for (const auto& h : o.high_labels()) {
    if (o.children(h).size() != 2) {
      throw Error(ErrorCode::InvalidConfig, "expected 2 children under " + h);
    }
  }
}

struct AnnotationRecord {
  std::string sentence_id;
  std::string annotator_id;
  std::string primary_label;
  std::optional<std::string> secondary_label;
  std::size_t context_before = 0;
  std::size_t context_after = 0;
  std::optional<std::string> correction_target;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

inline void validate_record(const AnnotationRecord& r, const LabelOntology& o) {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidRecord, m); };
  if (r.sentence_id.empty() || r.annotator_id.empty()) bad("sentence_id and annotator_id required");
  for (const auto* f : {&r.sentence_id, &r.annotator_id}) {
    if (f->find_first_of("\t\n") != std::string::npos) bad("ids must not contain tabs or newlines");
  }
  if (r.primary_label != kNotRelevant && !o.is_granular(r.primary_label)) {
    bad("primary label must be granular or Not relevant: " + r.primary_label);
  }
  if (r.secondary_label) {
    if (!o.is_granular(*r.secondary_label)) bad("secondary label must be granular");
    if (*r.secondary_label == r.primary_label) bad("secondary label equals primary");
  }
  if (r.correction_target) {
    if (r.primary_label != kNotRelevant) bad("correction_target requires primary Not relevant");
    if (r.correction_target->empty()) bad("empty correction_target");
  }
}

// Tab-separated, fields in declaration order; "_" marks an absent optional.
inline std::string format_record(const AnnotationRecord& r) {
  return r.sentence_id + "\t" + r.annotator_id + "\t" + r.primary_label + "\t" +
         r.secondary_label.value_or("_") + "\t" + std::to_string(r.context_before) + "\t" +
         std::to_string(r.context_after) + "\t" + r.correction_target.value_or("_");
}

inline AnnotationRecord parse_record(std::string_view line, std::size_t lineno = 0) {
  auto cols = text::split(line, '\t');
  if (cols.size() != 7) {
    throw Error(ErrorCode::InvalidRecord,
                "expected 7 tab-separated fields, found " + std::to_string(cols.size()),
                lineno ? std::optional<std::size_t>(lineno) : std::nullopt);
  }
  AnnotationRecord r;
  r.sentence_id = std::string(cols[0]);
  r.annotator_id = std::string(cols[1]);
  r.primary_label = std::string(cols[2]);
  if (cols[3] != "_") r.secondary_label = std::string(cols[3]);
  std::uint64_t before = 0, after = 0;
  if (!text::parse_uint(cols[4], before) || !text::parse_uint(cols[5], after)) {
    throw Error(ErrorCode::InvalidRecord, "context counts must be non-negative integers",
                lineno ? std::optional<std::size_t>(lineno) : std::nullopt);
  }
  r.context_before = before;
  r.context_after = after;
  if (cols[6] != "_") r.correction_target = std::string(cols[6]);
  return r;
}

inline std::vector<AnnotationRecord> parse_records(std::string_view content) {
  std::vector<AnnotationRecord> out;
  auto all = text::lines(content);
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (text::trim(all[i]).empty() || all[i][0] == '#') continue;
    out.push_back(parse_record(all[i], i + 1));
  }
  return out;
}

// unit -> rater -> label.
struct RatingsMatrix {
  std::map<std::string, std::map<std::string, std::string>> ratings;

  // Later records for the same (sentence, annotator) replace earlier ones.
  static RatingsMatrix from_records(const std::vector<AnnotationRecord>& records) {
    RatingsMatrix m;
    for (const auto& r : records) m.ratings[r.sentence_id][r.annotator_id] = r.primary_label;
    return m;
  }

  RatingsMatrix at_level(Level level, const LabelOntology& o) const {
    RatingsMatrix out;
    for (const auto& [unit, row] : ratings) {
      for (const auto& [rater, label] : row) out.ratings[unit][rater] = o.at_level(label, level);
    }
    return out;
  }
};

struct AlphaOptions {
  Level level = Level::Granular;
  bool exclude_not_relevant = false;
};

// Nominal Krippendorff's alpha over per-unit value lists, via the
// coincidence matrix. Units with fewer than two values are not pairable and
// are dropped.
inline double krippendorff_alpha_nominal(const std::vector<std::vector<std::string>>& units) {
  std::map<std::pair<std::string, std::string>, double> o;
  for (const auto& values : units) {
    const auto m = values.size();
    if (m < 2) continue;
    std::map<std::string, std::size_t> counts;
    for (const auto& v : values) ++counts[v];
    for (const auto& [c, nc] : counts) {
      for (const auto& [k, nk] : counts) {
        const double pairs = static_cast<double>(nc) * static_cast<double>(c == k ? nk - 1 : nk);
        if (pairs > 0) o[{c, k}] += pairs / static_cast<double>(m - 1);
      }
    }
  }
  std::map<std::string, double> marginal;
  double n = 0;
  for (const auto& [ck, v] : o) {
    marginal[ck.first] += v;
    n += v;
  }
  if (n <= 0) throw Error(ErrorCode::InsufficientData, "no unit has two or more ratings");
  double disagree_observed = 0;
  for (const auto& [ck, v] : o) {
    if (ck.first != ck.second) disagree_observed += v;
  }
  double disagree_expected = 0;
  for (const auto& [c, nc] : marginal) {
    for (const auto& [k, nk] : marginal) {
      if (c != k) disagree_expected += nc * nk;
    }
  }
  const double d_o = disagree_observed / n;
  const double d_e = disagree_expected / (n * (n - 1));
  if (d_e == 0) return 1.0;  // a single category everywhere
  return 1.0 - d_o / d_e;
}

inline double krippendorff_alpha(const RatingsMatrix& r, const LabelOntology& o,
                                 AlphaOptions opts = {}) {
  std::vector<std::vector<std::string>> units;
  for (const auto& [unit, row] : r.ratings) {
    std::vector<std::string> values;
    for (const auto& [rater, label] : row) {
      auto v = o.at_level(label, opts.level);
      if (opts.exclude_not_relevant && v == kNotRelevant) continue;
      values.push_back(std::move(v));
    }
    units.push_back(std::move(values));
  }
  return krippendorff_alpha_nominal(units);
}

// Strict plurality per unit; nullopt when the top count is tied.
inline std::map<std::string, std::optional<std::string>> majority_labels(const RatingsMatrix& r) {
  std::map<std::string, std::optional<std::string>> out;
  for (const auto& [unit, row] : r.ratings) {
    std::map<std::string, std::size_t> counts;
    for (const auto& [rater, label] : row) ++counts[label];
    std::size_t best = 0, ties = 0;
    std::string winner;
    for (const auto& [label, n] : counts) {
      if (n > best) {
        best = n;
        ties = 1;
        winner = label;
      } else if (n == best) {
        ++ties;
      }
    }
    out[unit] = ties == 1 ? std::optional<std::string>(winner) : std::nullopt;
  }
  return out;
}

struct ConfusionMatrix {
  std::vector<std::string> labels;
  // counts[gold][pred], indices into labels.
  std::vector<std::vector<std::size_t>> counts;

  std::size_t at(std::string_view gold, std::string_view pred) const {
    auto gi = std::find(labels.begin(), labels.end(), gold);
    auto pi = std::find(labels.begin(), labels.end(), pred);
    if (gi == labels.end() || pi == labels.end()) return 0;
    return counts[static_cast<std::size_t>(gi - labels.begin())]
                 [static_cast<std::size_t>(pi - labels.begin())];
  }
};

struct AccuracyResult {
  double accuracy = 0;
  std::size_t correct = 0;
  std::size_t total = 0;
  ConfusionMatrix confusion;
};

struct AccuracyOptions {
  Level level = Level::Granular;
  // A secondary label equal to gold also counts as correct.
  bool accept_secondary = false;
  const std::map<std::string, std::string>* secondary = nullptr;
};

// Units with unresolved gold and units missing from pred are left out.
inline AccuracyResult accuracy_confusion(const std::map<std::string, std::string>& pred,
                                         const std::map<std::string, std::optional<std::string>>& gold,
                                         const LabelOntology& o, AccuracyOptions opts = {}) {
  AccuracyResult res;
  std::vector<std::pair<std::string, std::string>> pairs;  // (gold, pred)
  for (const auto& [unit, g] : gold) {
    if (!g) continue;
    auto it = pred.find(unit);
    if (it == pred.end()) continue;
    const auto gl = o.at_level(*g, opts.level);
    auto pl = o.at_level(it->second, opts.level);
    if (opts.accept_secondary && opts.secondary && pl != gl) {
      auto s = opts.secondary->find(unit);
      if (s != opts.secondary->end() && o.at_level(s->second, opts.level) == gl) pl = gl;
    }
    pairs.emplace_back(gl, pl);
  }
  if (pairs.empty()) throw Error(ErrorCode::EmptyOverlap, "no shared units with resolved gold");

  res.confusion.labels = o.domain(opts.level, true);
  std::set<std::string> extra;
  for (const auto& [g, p] : pairs) {
    for (const auto* l : {&g, &p}) {
      if (std::find(res.confusion.labels.begin(), res.confusion.labels.end(), *l) ==
          res.confusion.labels.end()) {
        extra.insert(*l);
      }
    }
  }
  res.confusion.labels.insert(res.confusion.labels.end(), extra.begin(), extra.end());
  const auto n = res.confusion.labels.size();
  res.confusion.counts.assign(n, std::vector<std::size_t>(n, 0));
  auto pos = [&](const std::string& l) {
    return static_cast<std::size_t>(
        std::find(res.confusion.labels.begin(), res.confusion.labels.end(), l) -
        res.confusion.labels.begin());
  };
  for (const auto& [g, p] : pairs) {
    ++res.confusion.counts[pos(g)][pos(p)];
    if (g == p) ++res.correct;
  }
  res.total = pairs.size();
  res.accuracy = static_cast<double>(res.correct) / static_cast<double>(res.total);
  return res;
}

struct AnnotatorAccuracy {
  std::map<std::string, double> per_annotator;
  double mean = 0;
};

// Each annotator against the majority of all annotators, over units rated by
// at least two annotators.
inline AnnotatorAccuracy annotator_vs_majority(const std::vector<AnnotationRecord>& records,
                                               const LabelOntology& o, AccuracyOptions opts = {}) {
  auto matrix = RatingsMatrix::from_records(records).at_level(opts.level, o);
  std::erase_if(matrix.ratings, [](const auto& kv) { return kv.second.size() < 2; });
  const auto gold = majority_labels(matrix);
  std::map<std::string, std::map<std::string, std::string>> by_annotator, secondary;
  for (const auto& [unit, row] : matrix.ratings) {
    for (const auto& [rater, label] : row) by_annotator[rater][unit] = label;
  }
  for (const auto& r : records) {
    if (r.secondary_label && matrix.ratings.count(r.sentence_id)) {
      secondary[r.annotator_id][r.sentence_id] = *r.secondary_label;
    }
  }
  AnnotatorAccuracy out;
  for (const auto& [rater, pred] : by_annotator) {
    auto o2 = opts;
    o2.secondary = &secondary[rater];
    try {
      out.per_annotator[rater] = accuracy_confusion(pred, gold, o, o2).accuracy;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyOverlap) throw;
    }
  }
  if (out.per_annotator.empty()) throw Error(ErrorCode::EmptyOverlap, "no shared units");
  double sum = 0;
  for (const auto& [rater, acc] : out.per_annotator) sum += acc;
  out.mean = sum / static_cast<double>(out.per_annotator.size());
  return out;
}

struct LabelDistribution {
  std::map<std::string, double> probabilities;

  void validate() const {
    double sum = 0;
    for (const auto& [label, p] : probabilities) {
      if (!(p >= 0) || !std::isfinite(p)) {
        throw Error(ErrorCode::InvalidDistribution, "negative or non-finite mass on " + label);
      }
      sum += p;
    }
    if (probabilities.empty() || std::fabs(sum - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidDistribution, "probabilities must sum to 1");
    }
  }

  double at(std::string_view label) const {
    auto it = probabilities.find(std::string(label));
    return it == probabilities.end() ? 0.0 : it->second;
  }
};

// Scales non-negative weights (counts, percentages) to a distribution.
inline LabelDistribution normalize(const std::map<std::string, double>& weights) {
  double sum = 0;
  for (const auto& [label, w] : weights) {
    if (!(w >= 0)) throw Error(ErrorCode::InvalidDistribution, "negative weight on " + label);
    sum += w;
  }
  if (sum <= 0) throw Error(ErrorCode::Empty, "no mass to normalize");
  LabelDistribution d;
  for (const auto& [label, w] : weights) d.probabilities[label] = w / sum;
  return d;
}

inline LabelDistribution distribution_of(const std::vector<std::string>& labels) {
  if (labels.empty()) throw Error(ErrorCode::Empty, "empty label multiset");
  std::map<std::string, double> counts;
  for (const auto& l : labels) counts[l] += 1;
  return normalize(counts);
}

// Includes zero-mass bins for every label of domain.
inline LabelDistribution distribution_of(const std::vector<std::string>& labels,
                                         const std::vector<std::string>& domain) {
  auto d = distribution_of(labels);
  for (const auto& [label, p] : d.probabilities) {
    if (std::find(domain.begin(), domain.end(), label) == domain.end()) {
      throw Error(ErrorCode::DomainMismatch, "label outside domain: " + label);
    }
  }
  for (const auto& l : domain) d.probabilities.emplace(l, 0.0);
  return d;
}

enum class LogBase { Nats, Bits };

inline constexpr double kDefaultKlEpsilon = 1e-6;

// KL(p || q). When q has an empty bin, q is smoothed to (q + eps) / (1 + n eps).
inline double kl_divergence(const LabelDistribution& p, const LabelDistribution& q,
                            double epsilon = kDefaultKlEpsilon, LogBase base = LogBase::Nats) {
  p.validate();
  q.validate();
  std::set<std::string> pk, qk;
  for (const auto& [l, v] : p.probabilities) pk.insert(l);
  for (const auto& [l, v] : q.probabilities) qk.insert(l);
  if (pk != qk) throw Error(ErrorCode::DomainMismatch, "distributions cover different labels");
  const bool smooth = std::any_of(q.probabilities.begin(), q.probabilities.end(),
                                  [](const auto& kv) { return kv.second == 0.0; });
  const double n = static_cast<double>(q.probabilities.size());
  double sum = 0;
  for (const auto& [label, pi] : p.probabilities) {
    if (pi == 0) continue;
    double qi = q.probabilities.at(label);
    if (smooth) qi = (qi + epsilon) / (1.0 + n * epsilon);
    sum += pi * std::log(pi / qi);
  }
  if (base == LogBase::Bits) sum /= std::log(2.0);
  return std::max(0.0, sum);
}

enum class BaselineKind { Random, Majority };

inline BaselineKind parse_baseline(std::string_view v) {
  if (v == "random") return BaselineKind::Random;
  if (v == "majority") return BaselineKind::Majority;
  throw Error(ErrorCode::BadRequest, "baseline must be random|majority");
}

// Random: seeded uniform draw from domain. Majority: most frequent training
// label everywhere, ties to the lexicographically first.
inline std::map<std::string, std::string> baseline_predict(BaselineKind kind,
                                                           const std::vector<std::string>& train,
                                                           const std::vector<std::string>& units,
                                                           std::uint64_t seed,
                                                           const std::vector<std::string>& domain) {
  std::map<std::string, std::string> out;
  if (kind == BaselineKind::Majority) {
    if (train.empty()) throw Error(ErrorCode::EmptyTraining, "majority baseline needs training labels");
    std::map<std::string, std::size_t> counts;
    for (const auto& l : train) ++counts[l];
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    for (const auto& u : units) out[u] = best->first;
    return out;
  }
  if (domain.empty()) throw Error(ErrorCode::EmptyTraining, "random baseline needs a label domain");
  std::mt19937_64 rng(seed);
  const std::uint64_t n = domain.size();
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % n;
  for (const auto& u : units) {
    std::uint64_t draw = 0;
    do {
      draw = rng();
    } while (draw >= limit);
    out[u] = domain[draw % n];
  }
  return out;
}

// phrase -> label, matched case-insensitively at word boundaries.
struct Lexicon {
  std::vector<std::pair<std::string, std::string>> entries;  // folded phrase, label
};

// "phrase<TAB>label" per line.
inline Lexicon parse_lexicon(std::string_view content) {
  Lexicon lex;
  auto all = text::lines(content);
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto line = text::trim(all[i]);
    if (line.empty() || line[0] == '#') continue;
    auto cols = text::split(line, '\t');
    if (cols.size() != 2 || text::trim(cols[0]).empty() || text::trim(cols[1]).empty()) {
      throw Error(ErrorCode::InvalidConfig, "expected phrase<TAB>label", i + 1);
    }
    lex.entries.emplace_back(text::fold(text::trim(cols[0])), std::string(text::trim(cols[1])));
  }
  return lex;
}

namespace detail {

inline bool word_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

}  // namespace detail

// Label of the longest lexicon phrase found in text (earliest on ties, then
// lexicon order); Not relevant when nothing matches.
inline std::string rule_classifier(std::string_view sentence, const Lexicon& lex) {
  const auto folded = text::fold(sentence);
  std::size_t best_len = 0, best_pos = 0;
  const std::string* best = nullptr;
  for (const auto& [phrase, label] : lex.entries) {
    if (phrase.empty()) continue;
    for (auto pos = folded.find(phrase); pos != std::string::npos; pos = folded.find(phrase, pos + 1)) {
      const auto end = pos + phrase.size();
      const bool left_ok = pos == 0 || !detail::word_char(static_cast<unsigned char>(folded[pos - 1])) ||
                           !detail::word_char(static_cast<unsigned char>(phrase.front()));
      const bool right_ok = end == folded.size() ||
                            !detail::word_char(static_cast<unsigned char>(folded[end])) ||
                            !detail::word_char(static_cast<unsigned char>(phrase.back()));
      if (!left_ok || !right_ok) continue;
      const auto len = text::utf8_length(phrase);
      if (!best || len > best_len || (len == best_len && pos < best_pos)) {
        best = &label;
        best_len = len;
        best_pos = pos;
      }
      break;  // earliest occurrence of this phrase is enough
    }
  }
  return best ? *best : std::string(kNotRelevant);
}

inline std::map<std::pair<std::size_t, std::size_t>, std::size_t> context_size_histogram(
    const std::vector<AnnotationRecord>& records) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> out;
  for (const auto& r : records) ++out[{r.context_before, r.context_after}];
  return out;
}

// Figures reported for the original, non-public court-decision corpus and
// its fine-tuned classifier. They cannot be recomputed from shipped data and
// are used only as labelled reference lines in report output.
namespace published {
inline constexpr std::size_t kDocuments = 855;
inline constexpr std::size_t kExtractedSentences = 1662;
inline constexpr double kCoverageAtLeastOnePct = 67.0;
inline constexpr double kCoverageMultiplePct = 43.0;
inline constexpr double kAlphaHighExcludingNotRelevant = 0.7;
inline constexpr double kAnnotatorAccuracyHigh = 0.72;
inline constexpr double kAnnotatorAccuracyGranular = 0.54;
inline constexpr double kKlHigh = 0.23;
inline constexpr double kKlGranular = 0.36;
inline constexpr double kRandomAccuracyHighPct = 6.2;
inline constexpr double kRandomAccuracyGranularPct = 3.1;
inline constexpr double kMajorityAccuracyHighPct = 56.0;
inline constexpr double kMajorityAccuracyGranularPct = 44.0;
}  // namespace published

}  // namespace synq

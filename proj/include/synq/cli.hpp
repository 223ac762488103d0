#pragma once

// Batch entry points. run() never calls exit(); it returns
//   0  success
//   1  usage error (synopsis on the diagnostic stream)
//   2  data error

#include <csignal>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "synq/corpus.hpp"
#include "synq/error.hpp"
#include "synq/graph_enhance.hpp"
#include "synq/index.hpp"
#include "synq/matcher.hpp"
#include "synq/ontology_eval.hpp"
#include "synq/query.hpp"
#include "synq/service.hpp"
#include "synq/suggest.hpp"
#include "synq/text.hpp"

namespace synq::cli {

inline constexpr std::string_view kSynopsis =
    "usage: synq <command> [options]\n"
    "commands:\n"
    "  ingest    --corpus <dir|store> --out <store> [--rules <file>]\n"
    "  index     --corpus <dir|store> --out <file> [--rules <file>]\n"
    "  search    --corpus <dir|store> --queries <file> [--index <file>] [--lists <file>]\n"
    "            [--rules <file>] [--limit <n>] [--full-scan] [--out <file>]\n"
    "  suggest   --corpus <dir|store> --pairs <file> [--k <n>] [--keep none|a|b|both]\n"
    "            [--enhanced] [--rules <file>] [--out <file>]\n"
    "  extract   --corpus <dir|store> --queries <file> [--index <file>] [--lists <file>]\n"
    "            [--rules <file>] [--out <file>] [--extracted <file>]\n"
    "  classify  --extracted <file> --lexicon <file> [--out <file>]\n"
    "  eval iaa      --ratings <file> [--level high|granular] [--exclude-not-relevant]\n"
    "  eval dist     --gold <file> --pred <file> [--epsilon <x>] [--bits]\n"
    "  eval coverage --corpus <dir|store> --queries <file> [--lists <file>]\n"
    "  eval contrib  --corpus <dir|store> --queries <file> [--lists <file>]\n"
    "  eval context  --ratings <file>\n"
    "  eval accuracy --ratings <file> [--level high|granular] [--accept-secondary]\n"
    "  eval baseline --train <file> --test <file> --kind random|majority [--seed <n>]\n"
    "  serve     --corpus <dir|store> [--name <s>] [--port <n>] [--annotations <file>]\n"
    "            [--lists <file>] [--rules <file>] [--parser <url>]\n";

namespace detail {

struct Common {
  std::string corpus;
  std::string index;
  std::string queries;
  std::string lists;
  std::string rules;
  std::string ontology;
  std::string out;
  std::size_t limit = kDefaultMatchCap;
  std::uint64_t seed = 0;
};

inline EnhancementConfig load_rules(const std::string& path) {
  if (path.empty()) return {LabelMap{}, default_rule_set()};
  return parse_enhancement_config(text::read_file(path));
}

inline WordListTable load_lists(const std::string& path) {
  if (path.empty()) return {};
  return parse_word_lists(text::read_file(path));
}

inline LabelOntology load_ontology(const std::string& path) {
  if (path.empty()) return LabelOntology::builtin();
  return LabelOntology::parse(text::read_file(path));
}

inline Corpus load_enhanced(const Common& o) {
  auto cfg = load_rules(o.rules);
  return enhance_corpus(load_corpus(o.corpus), cfg.labels, cfg.rules);
}

inline Index load_or_build_index(const Common& o, const Corpus& c) {
  if (o.index.empty()) return build_index(c);
  auto idx = deserialize_index(text::read_file(o.index));
  check_fingerprint(idx, c);
  return idx;
}

inline std::vector<GraphQuery> load_queries(const Common& o) {
  const auto lists = load_lists(o.lists);
  std::vector<GraphQuery> out;
  for (const auto& r : parse_query_file(text::read_file(o.queries))) {
    out.push_back(compile_record(r, lists));
  }
  if (out.empty()) throw Error(ErrorCode::SyntaxError, "query file has no queries");
  return out;
}

inline void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
  } else {
    text::write_file(path, content);
  }
}

inline std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// "label<TAB>weight" lines, or bare labels counted once each.
inline LabelDistribution load_distribution(const std::string& path) {
  std::map<std::string, double> weights;
  auto content = text::read_file(path);
  auto lines = text::lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = text::trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    auto cols = text::split(line, '\t');
    if (cols.size() == 1) {
      weights[std::string(cols[0])] += 1.0;
    } else if (cols.size() == 2) {
      try {
        weights[std::string(text::trim(cols[0]))] += std::stod(std::string(cols[1]));
      } catch (const std::exception&) {
        throw Error(ErrorCode::MalformedLine, path + ": bad weight", i + 1);
      }
    } else {
      throw Error(ErrorCode::MalformedLine, path + ": expected label[<TAB>weight]", i + 1);
    }
  }
  return normalize(weights);
}

inline std::vector<AnnotationRecord> load_records(const std::string& path) {
  return parse_records(text::read_file(path));
}

inline std::string extraction_summary(const ExtractionReport& r, bool coverage, bool contrib) {
  std::string out;
  if (coverage) {
    out += "documents: " + std::to_string(r.document_count) + "\n";
    out += "documents_with_extraction: " + std::to_string(r.documents_with_any) + "\n";
    out += "documents_with_multiple: " + std::to_string(r.documents_with_multiple) + "\n";
    out += "coverage_at_least_one_pct: " + format_percent(r.pct_with_any()) + "\n";
    out += "coverage_multiple_pct: " + format_percent(r.pct_with_multiple()) + "\n";
    out += "reference: " + fixed(published::kCoverageAtLeastOnePct, 0) + "% / " +
           fixed(published::kCoverageMultiplePct, 0) + "% over " +
           std::to_string(published::kDocuments) + " documents (original corpus, not shipped)\n";
  }
  if (contrib) {
    out += "query\ttotal\tunique\n";
    for (const auto& q : r.queries) {
      out += q.name + "\t" + std::to_string(q.total) + "\t" + std::to_string(q.unique) + "\n";
    }
  }
  return out;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"synq: syntactic search and annotation evaluation"};
  app.require_subcommand(1);
  app.set_help_flag("-h,--help");
  detail::Common o;

  auto add_corpus = [&](CLI::App* c, bool required = true) {
    auto* opt = c->add_option("--corpus", o.corpus, "CoNLL-U directory or store file");
    if (required) opt->required();
    c->add_option("--rules", o.rules, "enhancement config");
  };

  auto* ingest = app.add_subcommand("ingest", "CoNLL-U directory -> corpus store");
  add_corpus(ingest);
  ingest->add_option("--out", o.out)->required();

  auto* index = app.add_subcommand("index", "corpus -> index file");
  add_corpus(index);
  index->add_option("--out", o.out)->required();

  bool full_scan = false;
  auto* search_cmd = app.add_subcommand("search", "run a query file");
  add_corpus(search_cmd);
  search_cmd->add_option("--queries", o.queries)->required();
  search_cmd->add_option("--index", o.index);
  search_cmd->add_option("--lists", o.lists);
  search_cmd->add_option("--limit", o.limit);
  search_cmd->add_flag("--full-scan", full_scan);
  search_cmd->add_option("--out", o.out);

  std::string pairs_path, keep = "none";
  std::size_t k = 10;
  bool enhanced_paths = false;
  auto* suggest = app.add_subcommand("suggest", "seed pairs -> ranked query DSL");
  add_corpus(suggest);
  suggest->add_option("--pairs", pairs_path)->required();
  suggest->add_option("--k", k);
  suggest->add_option("--keep", keep);
  suggest->add_flag("--enhanced", enhanced_paths);
  suggest->add_option("--out", o.out);

  std::string extracted_path;
  auto* extract = app.add_subcommand("extract", "query set -> extraction report");
  add_corpus(extract);
  extract->add_option("--queries", o.queries)->required();
  extract->add_option("--index", o.index);
  extract->add_option("--lists", o.lists);
  extract->add_option("--out", o.out);
  extract->add_option("--extracted", extracted_path);

  std::string lexicon_path;
  auto* classify = app.add_subcommand("classify", "extracted sentences + lexicon -> labels");
  classify->add_option("--extracted", extracted_path)->required();
  classify->add_option("--lexicon", lexicon_path)->required();
  classify->add_option("--out", o.out);

  auto* eval = app.add_subcommand("eval", "evaluation reports");
  eval->require_subcommand(1);
  std::string ratings, level = "high", gold, pred, train, test, kind;
  bool exclude_nr = false, bits = false, accept_secondary = false;
  double epsilon = kDefaultKlEpsilon;
  auto with_ontology = [&](CLI::App* c) { c->add_option("--ontology", o.ontology); };

  auto* iaa = eval->add_subcommand("iaa", "Krippendorff's alpha");
  iaa->add_option("--ratings", ratings)->required();
  iaa->add_option("--level", level);
  iaa->add_flag("--exclude-not-relevant", exclude_nr);
  with_ontology(iaa);

  auto* dist = eval->add_subcommand("dist", "label distributions and KL divergence");
  dist->add_option("--gold", gold)->required();
  dist->add_option("--pred", pred)->required();
  dist->add_option("--epsilon", epsilon);
  dist->add_flag("--bits", bits);

  auto* coverage = eval->add_subcommand("coverage", "document coverage of a query set");
  add_corpus(coverage);
  coverage->add_option("--queries", o.queries)->required();
  coverage->add_option("--lists", o.lists);
  coverage->add_option("--index", o.index);

  auto* contrib = eval->add_subcommand("contrib", "per-query totals and uniques");
  add_corpus(contrib);
  contrib->add_option("--queries", o.queries)->required();
  contrib->add_option("--lists", o.lists);
  contrib->add_option("--index", o.index);

  auto* context = eval->add_subcommand("context", "context-size histogram");
  context->add_option("--ratings", ratings)->required();

  auto* accuracy = eval->add_subcommand("accuracy", "annotators against the majority");
  accuracy->add_option("--ratings", ratings)->required();
  accuracy->add_option("--level", level);
  accuracy->add_flag("--accept-secondary", accept_secondary);
  with_ontology(accuracy);

  auto* baseline = eval->add_subcommand("baseline", "random or majority baseline accuracy");
  baseline->add_option("--train", train)->required();
  baseline->add_option("--test", test)->required();
  baseline->add_option("--kind", kind)->required();
  baseline->add_option("--level", level);
  baseline->add_option("--seed", o.seed);
  with_ontology(baseline);

  std::string name = "default", annotations, parser_url;
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "start the local service");
  add_corpus(serve, false);
  serve->add_option("--name", name);
  serve->add_option("--port", port);
  serve->add_option("--annotations", annotations);
  serve->add_option("--lists", o.lists);
  serve->add_option("--parser", parser_url);
  with_ontology(serve);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << kSynopsis;
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "synq: " << e.what() << "\n" << kSynopsis;
    return 1;
  }

  try {
    if (*ingest) {
      detail::emit(o.out, to_conllu(detail::load_enhanced(o)), out);
    } else if (*index) {
      detail::emit(o.out, serialize_index(build_index(detail::load_enhanced(o))), out);
    } else if (*search_cmd) {
      const auto c = detail::load_enhanced(o);
      const auto qs = detail::load_queries(o);
      std::string text_out;
      if (full_scan) {
        for (const auto& q : qs) text_out += format_matches(search_full_scan(c, q, o.limit));
      } else {
        const auto idx = detail::load_or_build_index(o, c);
        for (const auto& q : qs) text_out += format_matches(search(idx, c, q, o.limit));
      }
      detail::emit(o.out, text_out, out);
    } else if (*suggest) {
      const auto c = detail::load_enhanced(o);
      const auto pairs = parse_seed_pairs(text::read_file(pairs_path));
      if (pairs.empty()) throw Error(ErrorCode::InvalidConfig, "no seed pairs");
      const auto kk = parse_keep_lexical(keep);
      MineOptions mo{enhanced_paths};
      std::string text_out;
      if (kk == KeepLexical::None) {
        text_out = format_suggestions(mine_paths(c, pairs, k, mo), kk, pairs.front());
      } else {
        // Lexical endpoints belong to one pair, so mine each pair separately.
        for (const auto& p : pairs) {
          if (!text_out.empty()) text_out += "---\n";
          text_out += "# pair=" + p.lemma_a + ":" + p.lemma_b + "\n";
          text_out += format_suggestions(mine_paths(c, {p}, k, mo), kk, p);
        }
      }
      detail::emit(o.out, text_out, out);
    } else if (*extract) {
      const auto c = detail::load_enhanced(o);
      const auto qs = detail::load_queries(o);
      const auto idx = detail::load_or_build_index(o, c);
      const auto rep = run_query_set(qs, idx, c);
      if (o.out.empty() && extracted_path.empty()) {
        out << format_report(rep) << "\n" << format_extracted(rep, c);
      } else {
        detail::emit(o.out, format_report(rep), out);
        if (!extracted_path.empty()) text::write_file(extracted_path, format_extracted(rep, c));
      }
    } else if (*classify) {
      const auto lex = parse_lexicon(text::read_file(lexicon_path));
      std::string text_out;
      auto content = text::read_file(extracted_path);
      auto lines = text::lines(content);
      for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto cols = text::split(lines[i], '\t');
        if (cols.size() != 3) {
          throw Error(ErrorCode::MalformedLine, "expected doc_id, sentence_id, text", i + 1);
        }
        text_out += std::string(cols[1]) + "\t" + rule_classifier(cols[2], lex) + "\n";
      }
      detail::emit(o.out, text_out, out);
    } else if (*iaa) {
      const auto onto = detail::load_ontology(o.ontology);
      AlphaOptions ao{parse_level(level), exclude_nr};
      const auto a = krippendorff_alpha(RatingsMatrix::from_records(detail::load_records(ratings)),
                                        onto, ao);
      out << "alpha: " << detail::fixed(a, 4) << "\n";
    } else if (*dist) {
      const auto p = detail::load_distribution(gold);
      const auto q = detail::load_distribution(pred);
      const auto base = bits ? LogBase::Bits : LogBase::Nats;
      const auto unit = bits ? "bits" : "nats";
      out << "kl_gold_pred: " << detail::fixed(kl_divergence(p, q, epsilon, base), 6) << " " << unit
          << "\n";
      out << "kl_pred_gold: " << detail::fixed(kl_divergence(q, p, epsilon, base), 6) << " " << unit
          << "\n";
      out << "epsilon: " << epsilon << "\n";
      out << "label\tgold\tpred\n";
      for (const auto& [label, pv] : p.probabilities) {
        out << label << "\t" << detail::fixed(pv, 4) << "\t" << detail::fixed(q.at(label), 4) << "\n";
      }
      out << "reference: reported " << detail::fixed(published::kKlHigh, 2) << " (high) / "
          << detail::fixed(published::kKlGranular, 2)
          << " (granular); direct summation does not reproduce these in either direction, "
             "the original convention is unknown\n";
    } else if (*coverage || *contrib) {
      const auto c = detail::load_enhanced(o);
      const auto qs = detail::load_queries(o);
      const auto idx = detail::load_or_build_index(o, c);
      out << detail::extraction_summary(run_query_set(qs, idx, c), coverage->parsed(), contrib->parsed());
    } else if (*context) {
      out << "before\tafter\tcount\n";
      for (const auto& [key, n] : context_size_histogram(detail::load_records(ratings))) {
        out << key.first << "\t" << key.second << "\t" << n << "\n";
      }
    } else if (*accuracy) {
      const auto onto = detail::load_ontology(o.ontology);
      const auto records = detail::load_records(ratings);
      AccuracyOptions ao{parse_level(level), accept_secondary, nullptr};
      const auto res = annotator_vs_majority(records, onto, ao);
      for (const auto& [rater, acc] : res.per_annotator) {
        out << rater << "\t" << detail::fixed(acc, 4) << "\n";
      }
      out << "mean: " << detail::fixed(res.mean, 4) << "\n";
      out << "reference: reported mean " << detail::fixed(published::kAnnotatorAccuracyHigh, 2)
          << " (high) / " << detail::fixed(published::kAnnotatorAccuracyGranular, 2)
          << " (granular)\n";
    } else if (*baseline) {
      const auto onto = detail::load_ontology(o.ontology);
      const auto lv = parse_level(level);
      std::vector<std::string> train_labels;
      for (const auto& r : detail::load_records(train)) {
        train_labels.push_back(onto.at_level(r.primary_label, lv));
      }
      std::map<std::string, std::optional<std::string>> gold_map;
      std::vector<std::string> units;
      for (const auto& r : detail::load_records(test)) {
        gold_map[r.sentence_id] = onto.at_level(r.primary_label, lv);
      }
      for (const auto& [u, l] : gold_map) units.push_back(u);
      const auto predicted = baseline_predict(parse_baseline(kind), train_labels, units, o.seed,
                                              onto.domain(lv, true));
      AccuracyOptions ao{lv, false, nullptr};
      const auto res = accuracy_confusion(predicted, gold_map, onto, ao);
      out << "accuracy: " << detail::fixed(res.accuracy, 4) << "\n";
    } else if (*serve) {
      ServiceConfig cfg;
      cfg.lists = detail::load_lists(o.lists);
      cfg.enhancement = detail::load_rules(o.rules);
      cfg.ontology = detail::load_ontology(o.ontology);
      if (!annotations.empty()) cfg.annotation_log = annotations;
      if (!parser_url.empty()) cfg.parser = ParserAdapter{parser_url, 10, true};
      Service service(std::move(cfg));
      if (!o.corpus.empty()) service.add_corpus(name, load_corpus(o.corpus));
      HttpFrontend http(service);
      const auto bound = http.bind("127.0.0.1", port);
      err << "listening on 127.0.0.1:" << bound << "\n";
      http.listen();
    }
  } catch (const Error& e) {
    err << "synq: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "synq: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace synq::cli

#include "rucca_cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>

#include "rucca/checkpoint.hpp"
#include "rucca/corpus.hpp"
#include "rucca/error.hpp"
#include "rucca/evaluator.hpp"
#include "rucca/tuning.hpp"

namespace rucca::cli {

namespace {

const std::filesystem::path& require(const std::filesystem::path& p, const char* key) {
  if (p.empty()) throw ConfigError(std::string("configuration key \"") + key + "\" is required");
  return p;
}

template <typename T, typename LanguageOf>
std::vector<T> keep_languages(std::vector<T> items, const std::vector<std::string>& languages, LanguageOf language_of) {
  if (languages.empty()) return items;
  const std::set<std::string> keep(languages.begin(), languages.end());
  std::erase_if(items, [&](const T& item) { return keep.count(language_of(item)) == 0; });
  return items;
}

std::vector<Passage> load_filtered(const std::filesystem::path& path, const Config& cfg) {
  return keep_languages(load_passages(path), cfg.languages, [](const Passage& p) { return p.language; });
}

LexiconSet load_lexicons(const Config& cfg) {
  LexiconSet set;
  for (const auto& [language, path] : cfg.lexicons) set.insert(load_lexicon(path, language).lexicon);
  return set;
}

DecoderConfig decoder_config(const Config& cfg) {
  DecoderConfig d;
  d.remote_threshold = cfg.remote_threshold;
  d.max_depth = cfg.max_depth;
  d.verb_upos = std::set<std::string>(cfg.verb_upos.begin(), cfg.verb_upos.end());
  if (!cfg.action_nouns.empty()) d.action_nouns = load_lexicon(cfg.action_nouns, "").lexicon;
  d.check();
  return d;
}

std::vector<Sentence> load_sentences(const std::filesystem::path& path, const Config& cfg) {
  if (is_passage_file(path)) {
    std::vector<Sentence> out;
    for (const auto& p : load_filtered(path, cfg)) out.push_back(sentence_of(p));
    return out;
  }
  return keep_languages(load_conll_tokens(path, cfg.default_language), cfg.languages, [&](const Sentence& s) {
    return s.tokens.empty() ? cfg.default_language : s.tokens.front().language;
  });
}

/// Either the gold-backed oracle or a trained model with its word vectors.
class TaggerSession {
 public:
  TaggerSession(const Config& cfg, const std::filesystem::path& gold_fallback) {
    if (cfg.oracle) {
      std::filesystem::path gold = cfg.gold;
      if (gold.empty() && !gold_fallback.empty() && is_passage_file(gold_fallback)) gold = gold_fallback;
      if (gold.empty()) throw ConfigError("--oracle needs gold passages (set \"gold\" or give a passage file)");
      oracle_ = std::make_unique<OracleTagger>(load_filtered(gold, cfg));
      return;
    }
    model_ = std::make_unique<TaggerModel>(load_model(require(cfg.model, "model")));
    embeddings_ = std::make_unique<WordEmbeddingTable>(load_embeddings(require(cfg.embeddings, "embeddings")).table);
    check_embeddings(*model_, *embeddings_);
    lexicons_ = load_lexicons(cfg);
    gru_ = std::make_unique<GruTagger>(model_->params, model_->vocab, *embeddings_, lexicons_);
  }

  const Tagger& tagger() const { return oracle_ ? static_cast<const Tagger&>(*oracle_) : *gru_; }
  const OracleTagger* oracle() const { return oracle_.get(); }

 private:
  std::unique_ptr<OracleTagger> oracle_;
  std::unique_ptr<TaggerModel> model_;
  std::unique_ptr<WordEmbeddingTable> embeddings_;
  LexiconSet lexicons_;
  std::unique_ptr<GruTagger> gru_;
};

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericError*>(&e)) return kNumeric;
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const SchemaError*>(&e)) return kInvalidData;
  return kUsage;
}

void cmd_expand(const Config& cfg, std::ostream& out) {
  const auto passages = load_filtered(require(cfg.train, "train"), cfg);
  const auto& target = require(cfg.expanded, "expanded");

  std::vector<MaskedExample> examples;
  std::vector<SkippedNode> skipped;
  std::size_t non_terminal_count = 0;
  for (const auto& p : passages) {
    non_terminal_count += non_terminals(p).size();
    auto e = expand(p);
    examples.insert(examples.end(), std::make_move_iterator(e.examples.begin()),
                    std::make_move_iterator(e.examples.end()));
    skipped.insert(skipped.end(), e.skipped.begin(), e.skipped.end());
  }
  save_examples(examples, target);

  std::filesystem::path report = target;
  report += ".skipped";
  std::ofstream skip(report);
  if (!skip) throw IoError("cannot write " + report.string());
  for (const auto& s : skipped) skip << s.passage_id << '\t' << to_string(s.node) << '\t' << s.reason << '\n';

  out << "passages " << passages.size() << "\nnon-terminals " << non_terminal_count << "\nexamples "
      << examples.size() << "\nskipped " << skipped.size() << '\n';
}

void cmd_train(const Config& cfg, std::ostream& out) {
  const auto examples = keep_languages(load_examples(require(cfg.expanded, "expanded")), cfg.languages,
                                       [&](const MaskedExample& e) {
                                         return e.tokens.empty() ? cfg.default_language : e.tokens.front().language;
                                       });
  const auto dev = cfg.dev.empty() ? std::vector<Passage>{} : load_filtered(cfg.dev, cfg);
  const auto loaded = load_embeddings(require(cfg.embeddings, "embeddings"));
  if (loaded.rejected > 0) out << "embeddings: skipped " << loaded.rejected << " malformed row(s)\n";
  const auto lexicons = load_lexicons(cfg);
  const auto decoder = decoder_config(cfg);
  const auto& model_path = require(cfg.model, "model");
  cfg.training.check();

  const FeatureVocabularies vocab = fit_vocabularies(examples, cfg.training.embedding_dim);
  std::filesystem::path log_path = cfg.train_log;
  if (log_path.empty()) {
    log_path = model_path;
    log_path += ".log";
  }
  std::ofstream log(log_path);
  if (!log) throw IoError("cannot write " + log_path.string());

  TrainInputs inputs{&examples, &dev, &vocab, &loaded.table, &lexicons};
  const auto result = train(inputs, cfg.training, decoder, [&](const EpochLog& e) {
    char line[128];
    std::snprintf(line, sizeof line, "epoch %zu loss %.6f dev_f1 %.4f\n", e.epoch, e.loss, e.dev_f1);
    log << line;
    out << line;
  });

  save_model(TaggerModel{vocab, result.params, cfg.training, loaded.table.size(), loaded.table.fingerprint()},
             model_path);
  out << "best epoch " << result.best_epoch << "\nmodel " << model_path.string() << '\n';
}

void cmd_parse(const Config& cfg, std::ostream& out) {
  const auto& input = require(cfg.input, "input");
  const auto& target = require(cfg.output, "output");
  const auto sentences = load_sentences(input, cfg);
  const TaggerSession session(cfg, input);
  const auto lexicons = load_lexicons(cfg);
  const auto decoder = decoder_config(cfg);

  auto items = parse_batch(sentences, session.tagger(), lexicons, decoder, cfg.workers);
  std::string failures;
  std::vector<Passage> passages;
  std::string trace;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!items[i].ok()) {
      failures += "\n  " + sentences[i].id + ": " + items[i].error;
      continue;
    }
    if (!cfg.trace.empty()) trace += items[i].result->trace.to_log(sentences[i].id);
    passages.push_back(std::move(items[i].result->passage));
  }
  if (!failures.empty()) throw ValidationError("parsing failed for:" + failures);

  save_passages(passages, target);
  if (!cfg.trace.empty()) {
    std::ofstream t(cfg.trace);
    if (!t) throw IoError("cannot write " + cfg.trace.string());
    t << trace;
  }
  out << "parsed " << passages.size() << " sentence(s) into " << target.string() << '\n';
  if (session.oracle() && session.oracle()->misses() > 0) {
    out << "oracle misses " << session.oracle()->misses() << '\n';
  }
}

void cmd_eval(const Config& cfg, std::ostream& out) {
  const auto predicted = load_filtered(require(cfg.input, "input"), cfg);
  const auto gold = load_filtered(require(cfg.gold, "gold"), cfg);
  if (predicted.size() != gold.size()) {
    throw ValidationError("prediction has " + std::to_string(predicted.size()) + " passages but gold has " +
                          std::to_string(gold.size()));
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i].passage_id != gold[i].passage_id) {
      throw ValidationError("passage " + std::to_string(i + 1) + ": prediction \"" + predicted[i].passage_id +
                            "\" is aligned with gold \"" + gold[i].passage_id + "\"");
    }
  }
  const auto report = score_corpus(predicted, gold);
  out << render_text(report);
  if (!cfg.report_json.empty()) {
    std::ofstream j(cfg.report_json);
    if (!j) throw IoError("cannot write " + cfg.report_json.string());
    j << render_json(report) << '\n';
  }
}

void cmd_tune(const Config& cfg, std::ostream& out) {
  const std::filesystem::path& dev_path = cfg.gold.empty() ? require(cfg.dev, "dev") : cfg.gold;
  const auto dev = load_filtered(dev_path, cfg);
  const TaggerSession session(cfg, dev_path);
  const auto lexicons = load_lexicons(cfg);

  const auto sweep = tune_threshold(dev, session.tagger(), lexicons, decoder_config(cfg), cfg.workers);
  out << render_sweep(sweep);
  char best[64];
  std::snprintf(best, sizeof best, "best remote_threshold %.2f\n", sweep.best_threshold);
  out << best;

  Config updated = cfg;
  updated.remote_threshold = sweep.best_threshold;
  std::filesystem::path target = cfg.tuned_config;
  if (target.empty()) {
    target = cfg.source.empty() ? std::filesystem::path("rucca.tuned.conf") : cfg.source;
    if (!cfg.source.empty()) target += ".tuned";
  }
  save_config(updated, target);
  out << "config " << target.string() << '\n';
}

}  // namespace rucca::cli

#include "rucca/tuning.hpp"

#include <cstdio>

#include "rucca/error.hpp"

namespace rucca {

std::vector<double> threshold_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 19; ++k) grid.push_back(k / 20.0);
  return grid;
}

SweepResult tune_threshold(const std::vector<Passage>& dev, const Tagger& tagger, const LexiconSet& lexicons,
                           const DecoderConfig& base, std::size_t workers) {
  std::vector<Sentence> sentences;
  sentences.reserve(dev.size());
  for (const auto& p : dev) sentences.push_back(sentence_of(p));

  SweepResult sweep;
  double best_f1 = -1.0;
  for (double theta : threshold_grid()) {
    DecoderConfig cfg = base;
    cfg.remote_threshold = theta;
    std::vector<Passage> predicted;
    predicted.reserve(dev.size());
    for (auto& item : parse_batch(sentences, tagger, lexicons, cfg, workers)) {
      if (!item.ok()) throw ValidationError("parse failed during tuning: " + item.error);
      predicted.push_back(std::move(item.result->passage));
    }
    SweepRow row{theta, score_corpus(predicted, dev)};
    const double f1 = row.report.all.labeled.avg.f1();
    if (f1 > best_f1) {
      best_f1 = f1;
      sweep.best_threshold = theta;
    }
    sweep.rows.push_back(std::move(row));
  }
  return sweep;
}

std::string render_sweep(const SweepResult& sweep) {
  std::string out = "theta\trem_f1\tavg_f1\n";
  char line[96];
  for (const auto& row : sweep.rows) {
    std::snprintf(line, sizeof line, "%.2f\t%.4f\t%.4f%s\n", row.threshold, row.report.all.labeled.remote.f1(),
                  row.report.all.labeled.avg.f1(), row.threshold == sweep.best_threshold ? "\t*" : "");
    out += line;
  }
  return out;
}

}  // namespace rucca

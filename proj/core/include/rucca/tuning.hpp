#pragma once

#include <string>
#include <vector>

#include "rucca/evaluator.hpp"
#include "rucca/parser.hpp"

namespace rucca {

/// 0.05, 0.10, ..., 0.95.
std::vector<double> threshold_grid();

struct SweepRow {
  double threshold = 0.0;
  CorpusReport report;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double best_threshold = 0.0;
};

/// Parses `dev` once per grid value and keeps the threshold with the highest
/// Avg labeled F1 (the smaller threshold on ties).
SweepResult tune_threshold(const std::vector<Passage>& dev, const Tagger& tagger, const LexiconSet& lexicons,
                           const DecoderConfig& base, std::size_t workers = 1);

/// One line per threshold: theta, labeled remote F1, labeled Avg F1.
std::string render_sweep(const SweepResult& sweep);

}  // namespace rucca

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "rucca/graph.hpp"

namespace rucca {

/// What an edge is scored on: the child's primary yield, its category and
/// whether it is remote.
struct EdgeSignature {
  std::vector<std::size_t> yield;
  Category category = Category::C;
  bool remote = false;

  friend auto operator<=>(const EdgeSignature&, const EdgeSignature&) = default;
  friend bool operator==(const EdgeSignature&, const EdgeSignature&) = default;
};

/// One signature per edge leaving a non-terminal. Throws ValidationError on invalid input.
std::vector<EdgeSignature> signatures(const Passage& passage);

struct Counts {
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  double precision() const;
  double recall() const;
  /// 2PR/(P+R), 0 when both are 0.
  double f1() const;

  Counts& operator+=(const Counts& o) {
    matched += o.matched;
    predicted += o.predicted;
    gold += o.gold;
    return *this;
  }
  friend bool operator==(const Counts&, const Counts&) = default;
};

/// Avg / Prim / Rem cells; `avg` pools primary and remote edges.
struct CellGroup {
  Counts avg;
  Counts primary;
  Counts remote;

  CellGroup& operator+=(const CellGroup& o) {
    avg += o.avg;
    primary += o.primary;
    remote += o.remote;
    return *this;
  }
  friend bool operator==(const CellGroup&, const CellGroup&) = default;
};

struct EvalReport {
  CellGroup labeled;
  CellGroup unlabeled;
  std::array<Counts, kCategoryCount> per_category{};
  std::size_t sentences = 0;

  EvalReport& operator+=(const EvalReport& o);
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Throws ValidationError when the token sequences differ.
EvalReport score(const Passage& pred, const Passage& gold);

struct CorpusReport {
  EvalReport all;
  EvalReport mono_scene;
  EvalReport multi_scene;
};

/// A sentence is mono-scene iff its gold graph has at most one primary H edge.
bool is_mono_scene(const Passage& gold);

/// Micro-averaged over pairs. Throws ValidationError on length mismatch.
CorpusReport score_corpus(const std::vector<Passage>& predicted, const std::vector<Passage>& gold);

/// Plain-text tables: Labeled/Unlabeled x Avg/Prim/Rem, then per-category F1.
std::string render_text(const CorpusReport& report);
/// Structured record with every count, as a single JSON document.
std::string render_json(const CorpusReport& report);

}  // namespace rucca

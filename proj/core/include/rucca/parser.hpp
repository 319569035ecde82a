#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rucca/bio.hpp"
#include "rucca/corpus.hpp"
#include "rucca/lexicon.hpp"
#include "rucca/tagger.hpp"

namespace rucca {

struct DecoderConfig {
  static constexpr double kDefaultRemoteThreshold = 0.3;

  double remote_threshold = kDefaultRemoteThreshold;
  std::size_t max_depth = 20;
  /// Single- or multi-word action nouns that license a scene like a verb does.
  std::optional<ExpressionLexicon> action_nouns;
  std::set<std::string> verb_upos{"VERB"};

  /// Throws ConfigError when out of range.
  void check() const;
};

/// Tokens whose fallback category is F rather than C.
const std::set<std::string>& function_word_upos();

struct ConstraintResult {
  std::vector<ChildSpan> spans;
  /// One entry per rule application, e.g. "scene-merge H[3,5) into H[0,3)".
  std::vector<std::string> firings;
};

/// Applies, in order: scene merging of H spans lacking a verb or action noun;
/// (scene level only) exactly one S/P child chosen by highest S/P probability;
/// merging of adjacent spans whose shared boundary splits a multiword
/// expression when either side is H or A. `spans` must be disjoint, sorted
/// and primary.
ConstraintResult apply_constraints(const std::vector<ChildSpan>& spans, const std::vector<TokenRow>& tokens,
                                   const TagDistribution& dist, const MweMask& mwe, const DecoderConfig& cfg,
                                   bool at_scene_level);

struct TraceStep {
  std::size_t depth = 0;
  TokenSpan focus;
  std::vector<MaskSymbol> mask;
  /// Primary spans straight out of decoding, before clipping and constraints.
  std::vector<ChildSpan> decoded;
  std::vector<ChildSpan> final_spans;
  std::vector<ChildSpan> remote;
  std::vector<std::string> firings;
  bool tagger_called = true;
};

struct ParseTrace {
  std::vector<TraceStep> steps;
  std::vector<std::string> notes;

  std::size_t tagger_calls() const;
  /// Line-oriented debug rendering.
  std::string to_log(const std::string& sentence_id) const;
};

struct ParseResult {
  Passage passage;
  ParseTrace trace;
};

/// Recursive top-down parse: tag the whole sentence under the ROOT mask,
/// decode and constrain the children, then re-tag every multi-token child
/// with its own mask until single tokens (or max_depth) are reached. Remote
/// spans are attached by yield once the primary tree is complete.
ParseResult parse(const Sentence& sentence, const Tagger& tagger, const LexiconSet& lexicons,
                  const DecoderConfig& cfg);

struct BatchItem {
  std::optional<ParseResult> result;
  std::string error;

  bool ok() const { return result.has_value(); }
};

/// Element-wise parse in input order; a failing sentence does not affect the others.
std::vector<BatchItem> parse_batch(const std::vector<Sentence>& sentences, const Tagger& tagger,
                                   const LexiconSet& lexicons, const DecoderConfig& cfg, std::size_t workers = 1);

}  // namespace rucca

#pragma once

#include <cstdint>
#include <string>
#include <atomic>
#include <map>
#include <tuple>
#include <vector>

#include "rucca/corpus.hpp"
#include "rucca/features.hpp"
#include "rucca/graph.hpp"
#include "rucca/lexicon.hpp"
#include "rucca/tagger.hpp"

namespace rucca::testing {

TokenRow token(std::string form, std::string upos, std::string language = "en");
std::vector<TokenRow> tokens(const std::vector<std::pair<std::string, std::string>>& form_upos,
                             const std::string& language = "en");

/// "Hello": root -> H terminal.
Passage single_token();
/// "She plays guitar and he sings loudly": H(0-3) L H(4-7).
Passage two_scenes_seven();
/// "Singing very loudly now , the girl plays old songs": 6 non-terminals, one remote A.
Passage scenes_with_remote();
/// "She sings and he dances".
Passage two_scenes_five();
/// "Then , she plays guitar .": one H over tokens 2-4.
Passage linked_scene_six();
/// "He gave it up": the P unit {gave, up} is discontiguous.
Passage discontiguous_process();

/// Hand-counted evaluation pairs: 4/5/6 and 2/3/4 matched/predicted/gold (labeled, all edges).
Passage eval_gold_a();
Passage eval_pred_a();
Passage eval_gold_b();
Passage eval_pred_b();

/// Hand fixtures that are BIO-representable and satisfy the decoding constraints.
std::vector<Passage> hand_corpus();

/// Random passages with contiguous yields, no unary units, one verb-bearing
/// S/P per scene, MWEs kept inside a single unit, and remote A edges between
/// scenes. Each is BIO-representable and a fixpoint of the decoder constraints.
std::vector<Passage> random_corpus(std::size_t count, std::uint64_t seed, const std::string& language = "en");

/// Hand fixtures followed by random passages, `total` in all.
std::vector<Passage> fixture_corpus(std::size_t total = 60, std::uint64_t seed = 7);

/// "at least", "as well as", "in front of".
ExpressionLexicon fixture_lexicon(const std::string& language = "en");
LexiconSet fixture_lexicons(const std::vector<std::string>& languages = {"en"});

/// Deterministic random 300-dimensional vectors for every (lowercased) form in the passages.
WordEmbeddingTable toy_embeddings(const std::vector<Passage>& passages, std::uint64_t seed = 1);
void write_embeddings(const WordEmbeddingTable& table, const std::vector<Passage>& passages, const std::string& path);

/// Peaked random distributions, a pure function of (seed, passage id, mask).
class RandomTagger : public Tagger {
 public:
  explicit RandomTagger(std::uint64_t seed, double sharpness = 3.0) : seed_(seed), sharpness_(sharpness) {}
  TagDistribution predict(const MaskedExample& example) const override;

 private:
  std::uint64_t seed_;
  double sharpness_;
};

/// Wraps a tagger and counts calls (thread-safe).
class CountingTagger : public Tagger {
 public:
  explicit CountingTagger(const Tagger& inner) : inner_(inner) {}
  TagDistribution predict(const MaskedExample& example) const override;
  std::size_t calls() const { return calls_.load(); }

 private:
  const Tagger& inner_;
  mutable std::atomic<std::size_t> calls_{0};
};

/// Replays fixed distributions keyed by (focus start, focus end, mask symbol).
class TableTagger : public Tagger {
 public:
  void set(std::size_t start, std::size_t end, MaskSymbol symbol, TagDistribution dist);
  TagDistribution predict(const MaskedExample& example) const override;

 private:
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, TagDistribution> table_;
};

/// Row-normalized distribution putting `p` on each listed label and the rest on O.
TagDistribution distribution(const std::vector<std::vector<std::pair<BioLabel, double>>>& rows);

/// BIO decoder written from the repair table, independent of the library.
std::vector<ChildSpan> reference_decode(const std::vector<BioLabel>& labels);

std::string temp_dir(const std::string& name);
std::string read_file(const std::string& path);

}  // namespace rucca::testing

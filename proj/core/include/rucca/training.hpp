#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "rucca/corpus.hpp"
#include "rucca/features.hpp"
#include "rucca/lexicon.hpp"
#include "rucca/parser.hpp"
#include "rucca/tagger.hpp"

namespace rucca {

struct TrainConfig {
  std::size_t epochs = 50;
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;
  std::uint64_t seed = 13;
  double clip_norm = 5.0;
  std::size_t hidden = 128;
  std::size_t layers = GruTaggerParams::kDefaultLayers;
  std::size_t embedding_dim = FeatureVocabularies::kDefaultDim;
  double aux_weight = 1.0;

  /// Throws ConfigError when out of range.
  void check() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Adam with bias correction; state has the shape of the parameters.
class Adam {
 public:
  Adam(const GruTaggerParams& like, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8);
  void step(GruTaggerParams& params, const GruTaggerParams& gradient);
  std::size_t steps() const { return t_; }

 private:
  GruTaggerParams m_;
  GruTaggerParams v_;
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
};

/// Scales `gradient` in place so its global L2 norm is at most `max_norm`; returns the norm before scaling.
double clip_global_norm(GruTaggerParams& gradient, double max_norm);

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean example loss over the epoch
  double dev_f1 = 0.0;    // Avg labeled F1 of a full parse of the dev set
};

struct TrainResult {
  GruTaggerParams params;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
};

struct TrainInputs {
  const std::vector<MaskedExample>* corpus = nullptr;
  const std::vector<Passage>* dev = nullptr;
  const FeatureVocabularies* vocab = nullptr;
  const WordEmbeddingTable* embeddings = nullptr;
  const LexiconSet* lexicons = nullptr;
};

/// Mini-batch Adam over the corpus; after every epoch the dev set is parsed
/// and scored, and the parameters of the best epoch are returned (later
/// epochs win ties). Throws ConfigError on an empty corpus and NumericError
/// on a non-finite loss.
TrainResult train(const TrainInputs& inputs, const TrainConfig& cfg, const DecoderConfig& decoder,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

/// Fraction of target tokens whose TASK1 argmax equals the gold label.
double task1_accuracy(const GruTaggerParams& params, const std::vector<FeaturizedExample>& inputs,
                      const std::vector<TaggerTargets>& targets);

}  // namespace rucca

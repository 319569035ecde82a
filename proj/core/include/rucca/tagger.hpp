#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <atomic>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "rucca/bio.hpp"
#include "rucca/corpus.hpp"
#include "rucca/features.hpp"
#include "rucca/lexicon.hpp"

namespace rucca {

/// Anything that maps a masked sentence to per-token label distributions.
class Tagger {
 public:
  virtual ~Tagger() = default;
  /// Must be safe to call concurrently.
  virtual TagDistribution predict(const MaskedExample& example) const = 0;
};

/// Emits one-hot distributions reproducing the gold BIO encoding of the focus
/// node. Gold passages are looked up by passage id; the focus node is the gold
/// node whose primary yield and incoming category match the example's mask.
class OracleTagger : public Tagger {
 public:
  explicit OracleTagger(std::vector<Passage> gold);

  /// All-O when the focus cannot be matched to a representable gold node.
  TagDistribution predict(const MaskedExample& example) const override;

  /// Number of predict() calls that fell back to all-O.
  std::size_t misses() const { return misses_.load(); }

 private:
  struct Entry {
    std::vector<BioLabel> labels;
  };
  using Key = std::tuple<std::string, std::size_t, std::size_t, std::size_t>;

  std::map<Key, Entry> entries_;
  mutable std::atomic<std::size_t> misses_{0};
};

/// One-hot gold distribution for `focus`; throws ValidationError when the
/// node's children are not BIO-representable.
TagDistribution oracle_predict(const Passage& gold, NodeId focus);

struct GruDirectionParams {
  Eigen::MatrixXd w_z, w_r, w_n;
  Eigen::MatrixXd u_z, u_r, u_n;
  Eigen::MatrixXd b_z, b_r, b_n;
};

struct HighwayLayerParams {
  GruDirectionParams forward;
  GruDirectionParams backward;
  Eigen::MatrixXd w_gate, b_gate;
};

/// Bidirectional GRU stack with highway connections and two softmax heads.
/// Biases are stored as single-column matrices so every tensor has one type.
struct GruTaggerParams {
  static constexpr std::size_t kDefaultLayers = 4;

  std::size_t hidden = 0;
  std::vector<std::size_t> embedding_dims;
  std::vector<Eigen::MatrixXd> embeddings;  // dim x table size
  Eigen::MatrixXd w_in, b_in;               // 2h x input, 2h x 1
  std::vector<HighwayLayerParams> layers;
  Eigen::MatrixXd w_bio, b_bio;
  Eigen::MatrixXd w_aux, b_aux;

  std::size_t input_dim() const;
  std::vector<Eigen::MatrixXd*> tensors();
  std::vector<const Eigen::MatrixXd*> tensors() const;
  /// Names in the same order as tensors().
  std::vector<std::string> tensor_names() const;
  std::size_t parameter_count() const;
  /// Same shapes, all zeros.
  GruTaggerParams zeros_like() const;
  /// Shape consistency and finiteness; throws NumericError.
  void check() const;

  friend bool operator==(const GruTaggerParams& a, const GruTaggerParams& b);
};

/// Xavier-uniform weights, zero biases (highway gates start at -1), seeded.
GruTaggerParams init_params(const FeatureVocabularies& vocab, std::size_t hidden, std::uint64_t seed,
                            std::size_t layers = GruTaggerParams::kDefaultLayers);

struct TaggerTargets {
  std::vector<std::int32_t> bio;
  std::vector<std::int32_t> aux;
};

/// Throws ConfigError when the example carries no targets.
TaggerTargets make_targets(const MaskedExample& example, const FeatureVocabularies& vocab);

TagDistribution forward(const GruTaggerParams& params, const FeaturizedExample& example);

/// Mean token cross-entropy of TASK1 plus `aux_weight` times that of TASK2,
/// with probabilities clipped to [1e-9, 1 - 1e-9].
double cross_entropy(const TagDistribution& dist, const TaggerTargets& targets, double aux_weight);

double loss(const GruTaggerParams& params, const FeaturizedExample& example, const TaggerTargets& targets,
            double aux_weight);

struct LossGradient {
  double loss = 0.0;
  GruTaggerParams gradient;
};

/// Exact backpropagation of loss() (clipping ignored); word vectors are frozen.
LossGradient gradients(const GruTaggerParams& params, const FeaturizedExample& example, const TaggerTargets& targets,
                       double aux_weight);

/// Non-owning view binding parameters to the feature pipeline.
class GruTagger : public Tagger {
 public:
  GruTagger(const GruTaggerParams& params, const FeatureVocabularies& vocab, const WordEmbeddingTable& embeddings,
            const LexiconSet& lexicons)
      : params_(&params), vocab_(&vocab), embeddings_(&embeddings), lexicons_(&lexicons) {}

  TagDistribution predict(const MaskedExample& example) const override;
  FeaturizedExample featurize(const MaskedExample& example) const;

 private:
  const GruTaggerParams* params_;
  const FeatureVocabularies* vocab_;
  const WordEmbeddingTable* embeddings_;
  const LexiconSet* lexicons_;
};

}  // namespace rucca

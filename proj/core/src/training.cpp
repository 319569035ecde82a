#include "rucca/training.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <utility>

#include "rucca/error.hpp"
#include "rucca/evaluator.hpp"

namespace rucca {

void TrainConfig::check() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  if (hidden < 1) throw ConfigError("hidden must be at least 1");
  if (layers < 1) throw ConfigError("layers must be at least 1");
  if (embedding_dim < 1) throw ConfigError("embedding_dim must be at least 1");
  if (!(aux_weight >= 0.0)) throw ConfigError("aux_weight must be non-negative");
}

Adam::Adam(const GruTaggerParams& like, double learning_rate, double beta1, double beta2, double epsilon)
    : m_(like.zeros_like()), v_(like.zeros_like()), lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

void Adam::step(GruTaggerParams& params, const GruTaggerParams& gradient) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto p = params.tensors();
  auto g = gradient.tensors();
  auto m = m_.tensors();
  auto v = v_.tensors();
  for (std::size_t i = 0; i < p.size(); ++i) {
    *m[i] = beta1_ * *m[i] + (1.0 - beta1_) * *g[i];
    *v[i] = beta2_ * *v[i] + (1.0 - beta2_) * g[i]->cwiseProduct(*g[i]);
    p[i]->array() -= lr_ * (m[i]->array() / c1) / ((v[i]->array() / c2).sqrt() + eps_);
  }
}

double clip_global_norm(GruTaggerParams& gradient, double max_norm) {
  double sq = 0.0;
  for (const auto* t : std::as_const(gradient).tensors()) sq += t->squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto* t : gradient.tensors()) *t *= scale;
  }
  return norm;
}

namespace {

void accumulate(GruTaggerParams& into, const GruTaggerParams& g) {
  auto a = into.tensors();
  auto b = g.tensors();
  for (std::size_t i = 0; i < a.size(); ++i) *a[i] += *b[i];
}

void scale(GruTaggerParams& p, double factor) {
  for (auto* t : p.tensors()) *t *= factor;
}

double dev_score(const GruTaggerParams& params, const TrainInputs& in, const DecoderConfig& decoder) {
  if (in.dev == nullptr || in.dev->empty()) return 0.0;
  GruTagger tagger(params, *in.vocab, *in.embeddings, *in.lexicons);
  std::vector<Passage> predicted;
  predicted.reserve(in.dev->size());
  for (const auto& gold : *in.dev) predicted.push_back(parse(sentence_of(gold), tagger, *in.lexicons, decoder).passage);
  return score_corpus(predicted, *in.dev).all.labeled.avg.f1();
}

}  // namespace

TrainResult train(const TrainInputs& in, const TrainConfig& cfg, const DecoderConfig& decoder,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  cfg.check();
  decoder.check();
  if (in.corpus == nullptr || in.corpus->empty()) throw ConfigError("training corpus is empty");
  if (in.vocab == nullptr || in.embeddings == nullptr || in.lexicons == nullptr) {
    throw ConfigError("training inputs are incomplete");
  }

  std::vector<FeaturizedExample> inputs;
  std::vector<TaggerTargets> targets;
  inputs.reserve(in.corpus->size());
  targets.reserve(in.corpus->size());
  for (const auto& ex : *in.corpus) {
    const ExpressionLexicon* lex = ex.tokens.empty() ? nullptr : in.lexicons->find(ex.tokens.front().language);
    inputs.push_back(featurize(ex, *in.vocab, *in.embeddings, lex));
    targets.push_back(make_targets(ex, *in.vocab));
  }

  std::mt19937_64 rng(cfg.seed);
  GruTaggerParams params = init_params(*in.vocab, cfg.hidden, rng(), cfg.layers);
  Adam adam(params, cfg.learning_rate);

  TrainResult result;
  double best_f1 = -1.0;
  std::vector<std::size_t> order(inputs.size());
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      GruTaggerParams batch = params.zeros_like();
      for (std::size_t k = start; k < end; ++k) {
        const auto lg = gradients(params, inputs[order[k]], targets[order[k]], cfg.aux_weight);
        if (!std::isfinite(lg.loss)) {
          throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(start / cfg.batch_size + 1));
        }
        total += lg.loss;
        accumulate(batch, lg.gradient);
      }
      scale(batch, 1.0 / static_cast<double>(end - start));
      clip_global_norm(batch, cfg.clip_norm);
      adam.step(params, batch);
    }

    EpochLog entry{epoch, total / static_cast<double>(inputs.size()), dev_score(params, in, decoder)};
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
    if (entry.dev_f1 >= best_f1) {
      best_f1 = entry.dev_f1;
      result.best_epoch = epoch;
      result.params = params;
    }
  }
  return result;
}

double task1_accuracy(const GruTaggerParams& params, const std::vector<FeaturizedExample>& inputs,
                      const std::vector<TaggerTargets>& targets) {
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto dist = forward(params, inputs[i]);
    for (Eigen::Index t = 0; t < dist.bio.rows(); ++t) {
      Eigen::Index arg = 0;
      dist.bio.row(t).maxCoeff(&arg);
      correct += (arg == targets[i].bio[static_cast<std::size_t>(t)]) ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace rucca

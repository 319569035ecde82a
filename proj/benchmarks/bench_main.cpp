#include <benchmark/benchmark.h>

#include <random>

#include "rucca/bio.hpp"
#include "rucca/corpus.hpp"
#include "rucca/evaluator.hpp"
#include "rucca/parser.hpp"
#include "rucca/tagger.hpp"

using namespace rucca;

namespace {

// A flat chain of scenes, "she sings and she sings and ...", long enough to be interesting.
Passage chain(std::size_t scenes) {
  std::vector<TokenRow> tokens;
  auto add = [&](const char* form, const char* upos) {
    TokenRow t;
    t.form = form;
    t.upos = upos;
    t.language = "en";
    tokens.push_back(t);
  };
  for (std::size_t s = 0; s < scenes; ++s) {
    if (s > 0) add("and", "CCONJ");
    add("she", "PRON");
    add("sings", "VERB");
  }
  PassageBuilder b("bench", "en", tokens);
  std::size_t pos = 0;
  for (std::size_t s = 0; s < scenes; ++s) {
    if (s > 0) b.add_terminal(b.root(), pos++, Category::L);
    const auto h = b.add_non_terminal(b.root(), Category::H);
    b.add_terminal(h, pos++, Category::A);
    b.add_terminal(h, pos++, Category::P);
  }
  return std::move(b).build();
}

TagDistribution random_distribution(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TagDistribution d;
  d.bio.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(BioLabel::kCount));
  for (Eigen::Index i = 0; i < d.bio.size(); ++i) d.bio.data()[i] = u(rng);
  d.bio = d.bio.array().colwise() / d.bio.rowwise().sum().array();
  d.aux = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), 1);
  return d;
}

void BM_Forward(benchmark::State& state) {
  const auto p = chain(static_cast<std::size_t>(state.range(0)));
  const auto examples = expand(p).examples;
  const auto vocab = fit_vocabularies(examples);
  const auto params = init_params(vocab, 64, 1);
  const auto input = featurize(examples.front(), vocab, WordEmbeddingTable{}, nullptr);
  for (auto _ : state) benchmark::DoNotOptimize(forward(params, input));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.tokens.size()));
}
BENCHMARK(BM_Forward)->Arg(4)->Arg(16);

void BM_DecodeProbs(benchmark::State& state) {
  const auto d = random_distribution(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(decode_probs(d, 0.3));
}
BENCHMARK(BM_DecodeProbs)->Arg(20)->Arg(80);

void BM_OracleParse(benchmark::State& state) {
  const auto p = chain(static_cast<std::size_t>(state.range(0)));
  const OracleTagger oracle({p});
  const LexiconSet lexicons;
  const Sentence sentence = sentence_of(p);
  for (auto _ : state) benchmark::DoNotOptimize(parse(sentence, oracle, lexicons, DecoderConfig{}));
}
BENCHMARK(BM_OracleParse)->Arg(4)->Arg(16);

void BM_ScoreCorpus(benchmark::State& state) {
  const std::vector<Passage> gold(static_cast<std::size_t>(state.range(0)), chain(8));
  for (auto _ : state) benchmark::DoNotOptimize(score_corpus(gold, gold));
}
BENCHMARK(BM_ScoreCorpus)->Arg(100);

}  // namespace

BENCHMARK_MAIN();

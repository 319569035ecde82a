#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "rucca/error.hpp"
#include "rucca/evaluator.hpp"
#include "rucca/parser.hpp"

using namespace rucca;
using namespace rucca::testing;
using C = Category;

namespace {

ChildSpan span(std::size_t s, std::size_t e, C c) { return ChildSpan{s, e, c, false}; }

TagDistribution flat_o(std::size_t n) { return one_hot(std::vector<BioLabel>(n, BioLabel::outside())); }

MweMask no_mwe(std::size_t n) { return MweMask{std::vector<bool>(n, false), {}}; }

std::size_t relation_children(const Passage& p, NodeId node) {
  std::size_t n = 0;
  for (const auto& e : p.edges) {
    if (e.parent == node && !e.remote && (e.category == C::S || e.category == C::P)) ++n;
  }
  return n;
}

}  // namespace

TEST(Constraints, FixpointIsUnchanged) {
  const auto toks = two_scenes_seven().tokens;
  const std::vector<ChildSpan> spans{span(0, 3, C::H), span(3, 4, C::L), span(4, 7, C::H)};
  const auto r = apply_constraints(spans, toks, flat_o(7), no_mwe(7), DecoderConfig{}, false);
  EXPECT_EQ(r.spans, spans);
  EXPECT_TRUE(r.firings.empty());
}

TEST(Constraints, SceneWithoutVerbMergesIntoPrevious) {
  // "She plays guitar and the old song": the second H has no verb.
  const auto toks = tokens({{"She", "PRON"}, {"plays", "VERB"}, {"guitar", "NOUN"}, {"and", "CCONJ"},
                            {"the", "DET"}, {"old", "ADJ"}, {"song", "NOUN"}});
  const std::vector<ChildSpan> spans{span(0, 3, C::H), span(3, 4, C::L), span(4, 7, C::H)};
  const auto r = apply_constraints(spans, toks, flat_o(7), no_mwe(7), DecoderConfig{}, false);
  ASSERT_EQ(r.spans.size(), 1u);
  EXPECT_EQ(r.spans[0], span(0, 7, C::H));
  ASSERT_EQ(r.firings.size(), 1u);
  EXPECT_NE(r.firings[0].find("scene-merge"), std::string::npos);
}

TEST(Constraints, FirstSceneWithoutVerbMergesForward) {
  const auto toks = tokens({{"the", "DET"}, {"song", "NOUN"}, {"she", "PRON"}, {"sings", "VERB"}});
  const std::vector<ChildSpan> spans{span(0, 2, C::H), span(2, 4, C::H)};
  const auto r = apply_constraints(spans, toks, flat_o(4), no_mwe(4), DecoderConfig{}, false);
  ASSERT_EQ(r.spans.size(), 1u);
  EXPECT_EQ(r.spans[0], span(0, 4, C::H));
  EXPECT_NE(r.firings[0].find("forward"), std::string::npos);
}

TEST(Constraints, NoQualifyingSceneLeavesSpans) {
  const auto toks = tokens({{"the", "DET"}, {"song", "NOUN"}, {"a", "DET"}, {"dog", "NOUN"}});
  const std::vector<ChildSpan> spans{span(0, 2, C::H), span(2, 4, C::H)};
  EXPECT_EQ(apply_constraints(spans, toks, flat_o(4), no_mwe(4), DecoderConfig{}, false).spans, spans);
}

TEST(Constraints, ActionNounLicensesScene) {
  const auto toks = tokens({{"She", "PRON"}, {"sings", "VERB"}, {"and", "CCONJ"}, {"the", "DET"}, {"party", "NOUN"}});
  DecoderConfig cfg;
  cfg.action_nouns = ExpressionLexicon("en");
  cfg.action_nouns->add({"party"});
  const std::vector<ChildSpan> spans{span(0, 2, C::H), span(2, 3, C::L), span(3, 5, C::H)};
  EXPECT_EQ(apply_constraints(spans, toks, flat_o(5), no_mwe(5), cfg, false).spans, spans);
  EXPECT_EQ(apply_constraints(spans, toks, flat_o(5), no_mwe(5), DecoderConfig{}, false).spans.size(), 1u);
}

TEST(Constraints, TwoProcessesKeepTheMostProbable) {
  const auto toks = tokens({{"she", "PRON"}, {"sings", "VERB"}, {"and", "CCONJ"}, {"dances", "VERB"}});
  const auto dist = distribution({{{BioLabel::begin(C::A), 0.9}},
                                  {{BioLabel::begin(C::P), 0.6}},
                                  {{BioLabel::begin(C::F), 0.9}},
                                  {{BioLabel::begin(C::P), 0.5}, {BioLabel::begin(C::S), 0.3}}});
  const std::vector<ChildSpan> spans{span(0, 1, C::A), span(1, 2, C::P), span(2, 3, C::F), span(3, 4, C::P)};
  const auto r = apply_constraints(spans, toks, dist, no_mwe(4), DecoderConfig{}, true);
  const std::vector<ChildSpan> expected{span(0, 1, C::A), span(1, 2, C::P), span(2, 3, C::F), span(3, 4, C::C)};
  EXPECT_EQ(r.spans, expected);

  // Brute force: the surviving relation sits on the token with the largest S/P probability.
  std::size_t best = 0;
  double best_p = -1;
  for (Eigen::Index t = 0; t < 4; ++t) {
    for (C c : {C::S, C::P}) {
      for (auto l : {BioLabel::begin(c), BioLabel::inside(c)}) {
        if (dist.bio(t, static_cast<Eigen::Index>(l.index())) > best_p) {
          best_p = dist.bio(t, static_cast<Eigen::Index>(l.index()));
          best = static_cast<std::size_t>(t);
        }
      }
    }
  }
  EXPECT_EQ(r.spans[best].category, C::P);
}

TEST(Constraints, MissingRelationIsCreated) {
  const auto toks = tokens({{"the", "DET"}, {"old", "ADJ"}, {"song", "NOUN"}});
  const auto dist = distribution({{{BioLabel::begin(C::E), 0.8}},
                                  {{BioLabel::begin(C::S), 0.4}, {BioLabel::begin(C::E), 0.5}},
                                  {{BioLabel::begin(C::A), 0.7}}});
  const std::vector<ChildSpan> spans{span(0, 1, C::E), span(1, 2, C::E), span(2, 3, C::A)};
  const auto r = apply_constraints(spans, toks, dist, no_mwe(3), DecoderConfig{}, true);
  EXPECT_EQ(r.spans[1], span(1, 2, C::S));
}

TEST(Constraints, RelationOnlyEnforcedAtSceneLevel) {
  const auto toks = tokens({{"sings", "VERB"}, {"dances", "VERB"}});
  const std::vector<ChildSpan> spans{span(0, 1, C::P), span(1, 2, C::P)};
  const auto dist = flat_o(2);
  EXPECT_EQ(apply_constraints(spans, toks, dist, no_mwe(2), DecoderConfig{}, false).spans, spans);
}

TEST(Constraints, SplitExpressionIsRejoined) {
  const auto toks = tokens({{"she", "PRON"}, {"sat", "VERB"}, {"in", "ADP"}, {"front", "NOUN"}, {"of", "ADP"},
                            {"him", "PRON"}});
  const auto mwe = match(fixture_lexicon(), toks);
  ASSERT_EQ(mwe.spans.size(), 1u);
  const std::vector<ChildSpan> spans{span(0, 1, C::A), span(1, 2, C::P), span(2, 3, C::A), span(3, 6, C::A)};
  const auto r = apply_constraints(spans, toks, flat_o(6), mwe, DecoderConfig{}, false);
  const std::vector<ChildSpan> expected{span(0, 1, C::A), span(1, 2, C::P), span(2, 6, C::A)};
  EXPECT_EQ(r.spans, expected);
}

TEST(Constraints, SplitExpressionLeftCategoryWins) {
  const auto toks = tokens({{"in", "ADP"}, {"front", "NOUN"}, {"of", "ADP"}});
  const auto mwe = match(fixture_lexicon(), toks);
  const std::vector<ChildSpan> spans{span(0, 2, C::D), span(2, 3, C::A)};
  EXPECT_EQ(apply_constraints(spans, toks, flat_o(3), mwe, DecoderConfig{}, false).spans,
            std::vector<ChildSpan>{span(0, 3, C::D)});
}

TEST(Constraints, SplitOutsideSceneOrParticipantIsKept) {
  const auto toks = tokens({{"in", "ADP"}, {"front", "NOUN"}, {"of", "ADP"}});
  const auto mwe = match(fixture_lexicon(), toks);
  const std::vector<ChildSpan> spans{span(0, 1, C::R), span(1, 3, C::C)};
  EXPECT_EQ(apply_constraints(spans, toks, flat_o(3), mwe, DecoderConfig{}, false).spans, spans);
}

TEST(Parse, SingleToken) {
  const auto gold = single_token();
  const OracleTagger oracle({gold});
  const auto r = parse(sentence_of(gold), oracle, LexiconSet{}, DecoderConfig{});
  EXPECT_EQ(r.passage.nodes.size(), 2u);
  ASSERT_EQ(r.trace.steps.size(), 1u);
  EXPECT_EQ(r.trace.steps[0].depth, 1u);
  EXPECT_EQ(score(r.passage, gold).labeled.avg.f1(), 1.0);
}

TEST(Parse, OracleReproducesHandFixtures) {
  for (const auto& gold : hand_corpus()) {
    const OracleTagger oracle({gold});
    const auto r = parse(sentence_of(gold), oracle, fixture_lexicons(), DecoderConfig{});
    const auto report = score(r.passage, gold);
    EXPECT_EQ(report.labeled.avg.f1(), 1.0) << gold.passage_id << "\n" << r.trace.to_log(gold.passage_id);
    EXPECT_EQ(signatures(r.passage), signatures(gold)) << gold.passage_id;
    EXPECT_EQ(oracle.misses(), 0u);
  }
}

TEST(Parse, OracleReproducesRemoteEdge) {
  const auto gold = scenes_with_remote();
  const OracleTagger oracle({gold});
  const auto r = parse(sentence_of(gold), oracle, LexiconSet{}, DecoderConfig{});
  const auto report = score(r.passage, gold);
  EXPECT_EQ(report.labeled.remote.matched, 1u);
  EXPECT_EQ(report.labeled.remote.predicted, 1u);
  EXPECT_EQ(r.trace.tagger_calls(), 6u);
}

TEST(Parse, TraceMasksMatchFocus) {
  const auto gold = scenes_with_remote();
  const OracleTagger oracle({gold});
  const auto r = parse(sentence_of(gold), oracle, LexiconSet{}, DecoderConfig{});
  for (const auto& step : r.trace.steps) {
    for (std::size_t i = 0; i < step.mask.size(); ++i) {
      EXPECT_EQ(!step.mask[i].is_outside(), i >= step.focus.start && i < step.focus.end);
    }
  }
  EXPECT_TRUE(r.trace.steps.front().mask.front().is_root());
}

TEST(Parse, AllOutsideTaggerGivesFlatFallback) {
  const auto toks = tokens({{"the", "DET"}, {"dog", "NOUN"}, {"barks", "VERB"}, {"at", "ADP"}, {"cats", "NOUN"}});
  TableTagger blank;
  const auto r = parse(Sentence{"flat", toks}, blank, LexiconSet{}, DecoderConfig{});
  const auto& p = r.passage;
  EXPECT_TRUE(validate(p).empty());
  ASSERT_EQ(p.edges.size(), 5u);
  // Every token ties at zero S/P probability, so the verb takes the relation slot.
  std::vector<C> cats;
  for (const auto& e : p.edges) cats.push_back(e.category);
  EXPECT_EQ(cats, (std::vector<C>{C::F, C::C, C::P, C::F, C::C}));
  EXPECT_EQ(r.trace.tagger_calls(), 1u);
}

TEST(Parse, MaxDepthStopsRecursion) {
  // A tagger that always proposes one H span over the whole focus but one token.
  class Nested : public Tagger {
   public:
    TagDistribution predict(const MaskedExample& ex) const override {
      std::vector<BioLabel> labels(ex.size(), BioLabel::outside());
      std::size_t lo = ex.size(), hi = 0;
      for (std::size_t i = 0; i < ex.size(); ++i) {
        if (!ex.mask[i].is_outside()) {
          lo = std::min(lo, i);
          hi = i + 1;
        }
      }
      labels[lo] = BioLabel::begin(Category::H);
      for (std::size_t i = lo + 1; i + 1 < hi; ++i) labels[i] = BioLabel::inside(Category::H);
      if (hi - lo > 1) labels[hi - 1] = BioLabel::begin(Category::P);
      return one_hot(labels);
    }
  } nested;
  std::vector<TokenRow> toks;
  for (int i = 0; i < 12; ++i) toks.push_back(token("sings", "VERB"));
  DecoderConfig cfg;
  cfg.max_depth = 4;
  const auto r = parse(Sentence{"deep", toks}, nested, LexiconSet{}, cfg);
  EXPECT_TRUE(validate(r.passage).empty());
  std::size_t max_depth = 0;
  for (const auto& s : r.trace.steps) max_depth = std::max(max_depth, s.depth);
  EXPECT_EQ(max_depth, 4u);
  EXPECT_LT(r.trace.tagger_calls(), r.trace.steps.size());
  for (const auto id : non_terminals(r.passage)) {
    const PassageIndex index(r.passage);
    const auto* parent = index.primary_parent(id);
    if (parent && parent->category == C::H) EXPECT_EQ(relation_children(r.passage, id), 1u);
  }
}

TEST(Parse, EmptySentenceIsRejected) {
  TableTagger blank;
  EXPECT_THROW(parse(Sentence{"e", {}}, blank, LexiconSet{}, DecoderConfig{}), ConfigError);
}

TEST(Parse, WrongLengthDistributionIsNumericError) {
  class Short : public Tagger {
   public:
    TagDistribution predict(const MaskedExample&) const override {
      return one_hot({BioLabel::outside()});
    }
  } bad;
  const auto toks = tokens({{"a", "DET"}, {"b", "NOUN"}});
  EXPECT_THROW(parse(Sentence{"x", toks}, bad, LexiconSet{}, DecoderConfig{}), NumericError);
}

TEST(Parse, OverlappingRemoteIsDroppedAndNoted) {
  const auto gold = two_scenes_five();
  TableTagger t;
  // Root: H(0-2) L H(3-5) plus a remote A over token 0, which lies inside the root focus.
  t.set(0, 5, MaskSymbol::root(),
        distribution({{{BioLabel::begin(C::H), 0.5}, {BioLabel::begin(C::A, true), 0.45}},
                      {{BioLabel::inside(C::H), 1.0}},
                      {{BioLabel::begin(C::L), 1.0}},
                      {{BioLabel::begin(C::H), 1.0}},
                      {{BioLabel::inside(C::H), 1.0}}}));
  const auto r = parse(sentence_of(gold), t, LexiconSet{}, DecoderConfig{});
  EXPECT_TRUE(validate(r.passage).empty());
  ASSERT_FALSE(r.trace.notes.empty());
  EXPECT_NE(r.trace.notes[0].find("overlapping"), std::string::npos);
}

TEST(Parse, UnresolvableRemoteIsDroppedAndNoted) {
  const auto gold = two_scenes_five();
  TableTagger t;
  t.set(0, 5, MaskSymbol::root(), one_hot({BioLabel::begin(C::H), BioLabel::inside(C::H), BioLabel::begin(C::L),
                                           BioLabel::begin(C::H), BioLabel::inside(C::H)}));
  // First scene claims a remote over "and he", which no unit spans.
  t.set(0, 2, MaskSymbol::of(C::H),
        one_hot({BioLabel::begin(C::A), BioLabel::begin(C::P), BioLabel::begin(C::A, true),
                 BioLabel::inside(C::A, true), BioLabel::outside()}));
  t.set(3, 5, MaskSymbol::of(C::H), one_hot({BioLabel::outside(), BioLabel::outside(), BioLabel::outside(),
                                             BioLabel::begin(C::A), BioLabel::begin(C::P)}));
  const auto r = parse(sentence_of(gold), t, LexiconSet{}, DecoderConfig{});
  EXPECT_TRUE(validate(r.passage).empty());
  EXPECT_EQ(std::count_if(r.passage.edges.begin(), r.passage.edges.end(), [](const Edge& e) { return e.remote; }), 0);
  ASSERT_EQ(r.trace.notes.size(), 1u);
  EXPECT_NE(r.trace.notes[0].find("no node with that yield"), std::string::npos);
}

TEST(Parse, UnaryRepeatIsFlattened) {
  // The tagger answers every A focus with a single A over the whole span.
  const auto toks = tokens({{"the", "DET"}, {"dog", "NOUN"}, {"barks", "VERB"}});
  TableTagger t;
  t.set(0, 3, MaskSymbol::root(), one_hot({BioLabel::begin(C::A), BioLabel::inside(C::A), BioLabel::begin(C::P)}));
  t.set(0, 2, MaskSymbol::of(C::A), one_hot({BioLabel::begin(C::A), BioLabel::inside(C::A), BioLabel::outside()}));
  const auto r = parse(Sentence{"u", toks}, t, LexiconSet{}, DecoderConfig{});
  EXPECT_TRUE(validate(r.passage).empty());
  EXPECT_EQ(r.passage.nodes.size(), 5u);  // root, A, three terminals
  EXPECT_EQ(r.trace.steps.size(), 2u);
}

TEST(Parse, OutputIsDeterministicAcrossWorkers) {
  const auto corpus = random_corpus(30, 3);
  std::vector<Sentence> sentences;
  for (const auto& p : corpus) sentences.push_back(sentence_of(p));
  const RandomTagger tagger(9);
  const auto lex = fixture_lexicons();
  const auto one = parse_batch(sentences, tagger, lex, DecoderConfig{}, 1);
  const auto four = parse_batch(sentences, tagger, lex, DecoderConfig{}, 4);
  ASSERT_EQ(one.size(), sentences.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    ASSERT_TRUE(one[i].ok()) << one[i].error;
    ASSERT_TRUE(four[i].ok());
    EXPECT_EQ(one[i].result->passage, four[i].result->passage);
    EXPECT_EQ(one[i].result->passage, parse(sentences[i], tagger, lex, DecoderConfig{}).passage);
    EXPECT_EQ(one[i].result->passage.passage_id, sentences[i].id);
  }
}

TEST(ParseBatch, EmptyAndIsolatedFailures) {
  const RandomTagger tagger(1);
  EXPECT_TRUE(parse_batch({}, tagger, LexiconSet{}, DecoderConfig{}, 3).empty());
  const auto good = random_corpus(2, 4);
  const std::vector<Sentence> mixed{sentence_of(good[0]), Sentence{"empty", {}}, sentence_of(good[1])};
  const auto out = parse_batch(mixed, tagger, LexiconSet{}, DecoderConfig{}, 2);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_TRUE(out[0].ok());
  EXPECT_FALSE(out[1].ok());
  EXPECT_FALSE(out[1].error.empty());
  EXPECT_TRUE(out[2].ok());
}

TEST(DecoderConfig, RangeChecks) {
  DecoderConfig cfg;
  cfg.remote_threshold = 1.5;
  EXPECT_THROW(cfg.check(), ConfigError);
  cfg.remote_threshold = 0.3;
  cfg.max_depth = 0;
  EXPECT_THROW(cfg.check(), ConfigError);
}

TEST(Trace, LogHasOneLinePerStep) {
  const auto gold = two_scenes_seven();
  const OracleTagger oracle({gold});
  const auto r = parse(sentence_of(gold), oracle, LexiconSet{}, DecoderConfig{});
  const auto log = r.trace.to_log("s1");
  EXPECT_EQ(static_cast<std::size_t>(std::count(log.begin(), log.end(), '\n')), r.trace.steps.size());
  EXPECT_NE(log.find("mask=ROOT ROOT"), std::string::npos);
}

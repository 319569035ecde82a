#include "fixtures.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "rucca/text.hpp"

namespace rucca::testing {

namespace {

using C = Category;

std::string deprel_for(const std::string& upos) {
  if (upos == "VERB") return "root";
  if (upos == "NOUN" || upos == "PRON") return "nsubj";
  if (upos == "DET") return "det";
  if (upos == "ADJ") return "amod";
  if (upos == "ADV") return "advmod";
  if (upos == "ADP") return "case";
  if (upos == "AUX") return "aux";
  if (upos == "CCONJ" || upos == "SCONJ") return "cc";
  if (upos == "PUNCT") return "punct";
  return "dep";
}

}  // namespace

TokenRow token(std::string form, std::string upos, std::string language) {
  TokenRow t;
  t.form = std::move(form);
  t.upos = std::move(upos);
  t.deprel = deprel_for(t.upos);
  t.language = std::move(language);
  if (t.upos == "NOUN") t.morph["Number"] = "Sing";
  if (t.upos == "VERB") t.morph["Tense"] = "Pres";
  t.xpos = t.upos == "PUNCT" ? std::optional<std::string>{} : std::optional<std::string>{t.upos.substr(0, 2)};
  return t;
}

std::vector<TokenRow> tokens(const std::vector<std::pair<std::string, std::string>>& form_upos,
                             const std::string& language) {
  std::vector<TokenRow> out;
  for (const auto& [f, u] : form_upos) out.push_back(token(f, u, language));
  std::int32_t verb = -1;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].upos == "VERB" && verb < 0) verb = static_cast<std::int32_t>(i);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (static_cast<std::int32_t>(i) == verb || verb < 0) out[i].head = TokenRow::kRootHead;
    else out[i].head = verb;
  }
  return out;
}

Passage single_token() {
  PassageBuilder b("single", "en", tokens({{"Hello", "INTJ"}}));
  b.add_terminal(b.root(), 0, C::H);
  return std::move(b).build();
}

Passage two_scenes_seven() {
  PassageBuilder b("seven", "en",
                   tokens({{"She", "PRON"}, {"plays", "VERB"}, {"guitar", "NOUN"}, {"and", "CCONJ"},
                           {"he", "PRON"}, {"sings", "VERB"}, {"loudly", "ADV"}}));
  const auto h1 = b.add_non_terminal(b.root(), C::H);
  b.add_terminal(h1, 0, C::A);
  b.add_terminal(h1, 1, C::P);
  b.add_terminal(h1, 2, C::A);
  b.add_terminal(b.root(), 3, C::L);
  const auto h2 = b.add_non_terminal(b.root(), C::H);
  b.add_terminal(h2, 4, C::A);
  b.add_terminal(h2, 5, C::P);
  b.add_terminal(h2, 6, C::D);
  return std::move(b).build();
}

Passage scenes_with_remote() {
  PassageBuilder b("remote", "en",
                   tokens({{"Singing", "VERB"}, {"very", "ADV"}, {"loudly", "ADV"}, {"now", "ADV"}, {",", "PUNCT"},
                           {"the", "DET"}, {"girl", "NOUN"}, {"plays", "VERB"}, {"old", "ADJ"}, {"songs", "NOUN"}}));
  const auto h1 = b.add_non_terminal(b.root(), C::H);
  b.add_terminal(h1, 0, C::P);
  const auto d = b.add_non_terminal(h1, C::D);
  b.add_terminal(d, 1, C::E);
  b.add_terminal(d, 2, C::C);
  b.add_terminal(h1, 3, C::D);
  b.add_terminal(b.root(), 4, C::U);
  const auto h2 = b.add_non_terminal(b.root(), C::H);
  const auto girl = b.add_non_terminal(h2, C::A);
  b.add_terminal(girl, 5, C::E);
  b.add_terminal(girl, 6, C::C);
  b.add_terminal(h2, 7, C::P);
  const auto songs = b.add_non_terminal(h2, C::A);
  b.add_terminal(songs, 8, C::E);
  b.add_terminal(songs, 9, C::C);
  b.add_remote(h1, girl, C::A);
  return std::move(b).build();
}

Passage two_scenes_five() {
  PassageBuilder b("five", "en",
                   tokens({{"She", "PRON"}, {"sings", "VERB"}, {"and", "CCONJ"}, {"he", "PRON"}, {"dances", "VERB"}}));
  const auto h1 = b.add_non_terminal(b.root(), C::H);
  b.add_terminal(h1, 0, C::A);
  b.add_terminal(h1, 1, C::P);
  b.add_terminal(b.root(), 2, C::L);
  const auto h2 = b.add_non_terminal(b.root(), C::H);
  b.add_terminal(h2, 3, C::A);
  b.add_terminal(h2, 4, C::P);
  return std::move(b).build();
}

Passage linked_scene_six() {
  PassageBuilder b("six", "en",
                   tokens({{"Then", "ADV"}, {",", "PUNCT"}, {"she", "PRON"}, {"plays", "VERB"}, {"guitar", "NOUN"},
                           {".", "PUNCT"}}));
  b.add_terminal(b.root(), 0, C::L);
  b.add_terminal(b.root(), 1, C::U);
  const auto h = b.add_non_terminal(b.root(), C::H);
  b.add_terminal(h, 2, C::A);
  b.add_terminal(h, 3, C::P);
  b.add_terminal(h, 4, C::A);
  b.add_terminal(b.root(), 5, C::U);
  return std::move(b).build();
}

Passage discontiguous_process() {
  PassageBuilder b("gave-up", "en", tokens({{"He", "PRON"}, {"gave", "VERB"}, {"it", "PRON"}, {"up", "ADP"}}));
  b.add_terminal(b.root(), 0, C::A);
  const auto p = b.add_non_terminal(b.root(), C::P);
  b.add_terminal(p, 1, C::C);
  b.add_terminal(b.root(), 2, C::A);
  b.add_terminal(p, 3, C::F);
  return std::move(b).build();
}

namespace {

std::vector<TokenRow> eval_tokens_a() {
  return tokens({{"the", "DET"}, {"dog", "NOUN"}, {"barks", "VERB"}, {"loudly", "ADV"}, {".", "PUNCT"}});
}

std::vector<TokenRow> eval_tokens_b() { return tokens({{"the", "DET"}, {"cat", "NOUN"}, {"sleeps", "VERB"}}); }

}  // namespace

Passage eval_gold_a() {
  PassageBuilder b("eval-a", "en", eval_tokens_a());
  const auto a = b.add_non_terminal(b.root(), C::A);
  b.add_terminal(a, 0, C::E);
  b.add_terminal(a, 1, C::C);
  b.add_terminal(b.root(), 2, C::P);
  b.add_terminal(b.root(), 3, C::D);
  b.add_terminal(b.root(), 4, C::U);
  return std::move(b).build();
}

Passage eval_pred_a() {
  PassageBuilder b("eval-a", "en", eval_tokens_a());
  b.add_terminal(b.root(), 0, C::E);
  b.add_terminal(b.root(), 1, C::C);
  b.add_terminal(b.root(), 2, C::P);
  b.add_terminal(b.root(), 3, C::A);
  b.add_terminal(b.root(), 4, C::U);
  return std::move(b).build();
}

Passage eval_gold_b() {
  PassageBuilder b("eval-b", "en", eval_tokens_b());
  const auto a = b.add_non_terminal(b.root(), C::A);
  b.add_terminal(a, 0, C::E);
  b.add_terminal(a, 1, C::C);
  b.add_terminal(b.root(), 2, C::P);
  return std::move(b).build();
}

Passage eval_pred_b() {
  PassageBuilder b("eval-b", "en", eval_tokens_b());
  b.add_terminal(b.root(), 0, C::E);
  b.add_terminal(b.root(), 1, C::D);
  b.add_terminal(b.root(), 2, C::P);
  return std::move(b).build();
}

std::vector<Passage> hand_corpus() {
  return {single_token(), two_scenes_seven(), scenes_with_remote(), two_scenes_five(), linked_scene_six(),
          eval_gold_a(),  eval_gold_b()};
}

// ---------------------------------------------------------------------------
// Random generator

namespace {

struct Unit {
  Category category = C::C;
  std::optional<std::size_t> position;  // terminals
  std::vector<Unit> children;
  bool remote_target = false;  // eligible as the child of a remote A
};

const std::vector<std::string> kNouns{"dog", "cat", "guitar", "song", "house", "river", "teacher", "garden", "book",
                                      "car", "letter", "window"};
const std::vector<std::string> kVerbs{"plays", "sings", "reads", "walks", "writes", "sees", "likes", "opens", "builds"};
const std::vector<std::string> kPronouns{"she", "he", "they", "we"};
const std::vector<std::string> kDeterminers{"the", "a", "this"};
const std::vector<std::string> kAdjectives{"old", "red", "small", "quiet", "new"};
const std::vector<std::string> kAdverbs{"slowly", "often", "now", "soon"};
const std::vector<std::string> kIntensifiers{"very", "rather"};
const std::vector<std::string> kLinkers{"and", "but", "because", "when"};
const std::vector<std::string> kAux{"is", "was"};
const std::vector<std::string> kAdpositions{"to", "with", "near"};

class Generator {
 public:
  Generator(std::uint64_t seed, std::string language) : rng_(seed), language_(std::move(language)) {}

  Passage next(const std::string& id) {
    tokens_.clear();
    Unit root;
    const std::size_t scenes = 1 + pick(3);
    if (scenes == 1 && coin(0.5)) {
      root.children = scene_children();
      if (coin(0.6)) root.children.push_back(word(C::U, ".", "PUNCT"));
    } else {
      for (std::size_t s = 0; s < scenes; ++s) {
        if (s > 0) root.children.push_back(linker());
        Unit h;
        h.category = C::H;
        h.children = scene_children();
        root.children.push_back(std::move(h));
        if (s + 1 < scenes && coin(0.3)) root.children.push_back(word(C::U, ",", "PUNCT"));
      }
      if (coin(0.6) || root.children.size() < 2) root.children.push_back(word(C::U, ".", "PUNCT"));
    }
    return build(id, root);
  }

 private:
  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
  bool coin(double p) { return static_cast<double>(rng_() >> 11) * 0x1.0p-53 < p; }
  const std::string& from(const std::vector<std::string>& words) { return words[pick(words.size())]; }

  Unit word(Category c, const std::string& form, const std::string& upos) {
    tokens_.push_back(token(form, upos, language_));
    Unit u;
    u.category = c;
    u.position = tokens_.size() - 1;
    return u;
  }

  Unit unit(Category c, std::vector<Unit> children) {
    Unit u;
    u.category = c;
    u.children = std::move(children);
    return u;
  }

  Unit participant() {
    Unit u;
    switch (pick(6)) {
      case 0: u = word(C::A, from(kPronouns), "PRON"); break;
      case 1: u = word(C::A, from(kNouns), "NOUN"); break;
      case 2: {
        auto det = word(C::E, from(kDeterminers), "DET");
        u = unit(C::A, {std::move(det), word(C::C, from(kNouns), "NOUN")});
        break;
      }
      case 3: {
        auto det = word(C::E, from(kDeterminers), "DET");
        auto intensifier = word(C::D, from(kIntensifiers), "ADV");
        auto adj = word(C::C, from(kAdjectives), "ADJ");
        auto elaborator = unit(C::E, {std::move(intensifier), std::move(adj)});
        u = unit(C::A, {std::move(det), std::move(elaborator), word(C::C, from(kNouns), "NOUN")});
        break;
      }
      case 4: {
        auto adp = word(C::R, from(kAdpositions), "ADP");
        u = unit(C::A, {std::move(adp), word(C::C, from(kNouns), "NOUN")});
        break;
      }
      default: {
        // The expression stays inside one relator unit.
        auto in = word(C::F, "in", "ADP");
        auto front = word(C::C, "front", "NOUN");
        auto of = word(C::R, "of", "ADP");
        auto relator = unit(C::R, {std::move(in), std::move(front), std::move(of)});
        u = unit(C::A, {std::move(relator), word(C::C, from(kNouns), "NOUN")});
        break;
      }
    }
    u.remote_target = true;
    return u;
  }

  Unit relation() {
    if (coin(0.3)) {
      auto aux = word(C::F, from(kAux), "AUX");
      return unit(C::P, {std::move(aux), word(C::C, from(kVerbs), "VERB")});
    }
    return word(coin(0.2) ? C::S : C::P, from(kVerbs), "VERB");
  }

  Unit adverbial() {
    if (coin(0.25)) {
      auto at = word(C::F, "at", "ADP");
      return unit(C::D, {std::move(at), word(C::C, "least", "ADV")});
    }
    return word(C::D, from(kAdverbs), "ADV");
  }

  std::vector<Unit> scene_children() {
    std::vector<Unit> kids;
    if (coin(0.8)) kids.push_back(participant());
    if (coin(0.2)) kids.push_back(adverbial());
    kids.push_back(relation());
    if (coin(0.6)) kids.push_back(participant());
    if (coin(0.3)) kids.push_back(adverbial());
    if (kids.size() < 2) kids.push_back(participant());
    return kids;
  }

  Unit linker() {
    if (coin(0.2)) {
      auto as1 = word(C::F, "as", "ADV");
      auto well = word(C::C, "well", "ADV");
      auto as2 = word(C::R, "as", "ADP");
      return unit(C::L, {std::move(as1), std::move(well), std::move(as2)});
    }
    const std::string& w = from(kLinkers);
    return word(C::L, w, (w == "and" || w == "but") ? "CCONJ" : "SCONJ");
  }

  struct Built {
    NodeId id;
    const Unit* unit;
  };

  Passage build(const std::string& id, const Unit& root) {
    // Syntactic heads: each token attaches to the scene's first verb.
    std::int32_t verb = -1;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (tokens_[i].upos == "VERB" && verb < 0) verb = static_cast<std::int32_t>(i);
    }
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      tokens_[i].head = (verb < 0 || static_cast<std::int32_t>(i) == verb) ? TokenRow::kRootHead : verb;
    }

    PassageBuilder b(id, language_, tokens_);
    std::vector<std::pair<NodeId, std::vector<NodeId>>> scenes;  // scene -> its participant units
    for (const auto& child : root.children) {
      if (child.category == C::H) {
        const NodeId h = b.add_non_terminal(b.root(), C::H);
        std::vector<NodeId> targets;
        for (const auto& grand : child.children) {
          const NodeId g = add(b, h, grand);
          if (grand.remote_target) targets.push_back(g);
        }
        scenes.emplace_back(h, std::move(targets));
      } else {
        add(b, b.root(), child);
      }
    }
    if (scenes.size() >= 2 && coin(0.6)) {
      const std::size_t from = pick(scenes.size());
      std::size_t to = pick(scenes.size() - 1);
      if (to >= from) ++to;
      if (!scenes[to].second.empty()) {
        b.add_remote(scenes[from].first, scenes[to].second[pick(scenes[to].second.size())], C::A);
      }
    }
    return std::move(b).build();
  }

  NodeId add(PassageBuilder& b, NodeId parent, const Unit& u) {
    if (u.position) return b.add_terminal(parent, *u.position, u.category);
    const NodeId id = b.add_non_terminal(parent, u.category);
    for (const auto& c : u.children) add(b, id, c);
    return id;
  }

  std::mt19937_64 rng_;
  std::string language_;
  std::vector<TokenRow> tokens_;
};

}  // namespace

std::vector<Passage> random_corpus(std::size_t count, std::uint64_t seed, const std::string& language) {
  Generator gen(seed, language);
  std::vector<Passage> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(gen.next("gen-" + language + "-" + std::to_string(seed) + "-" + std::to_string(i)));
  }
  return out;
}

std::vector<Passage> fixture_corpus(std::size_t total, std::uint64_t seed) {
  auto out = hand_corpus();
  auto extra = random_corpus(total > out.size() ? total - out.size() : 0, seed);
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

ExpressionLexicon fixture_lexicon(const std::string& language) {
  ExpressionLexicon lex(language);
  lex.add({"at", "least"});
  lex.add({"as", "well", "as"});
  lex.add({"in", "front", "of"});
  return lex;
}

LexiconSet fixture_lexicons(const std::vector<std::string>& languages) {
  LexiconSet set;
  for (const auto& l : languages) set.insert(fixture_lexicon(l));
  return set;
}

namespace {

std::vector<std::string> vocabulary(const std::vector<Passage>& passages) {
  std::set<std::string> words;
  for (const auto& p : passages) {
    for (const auto& t : p.tokens) words.insert(text::lowercase(t.form));
  }
  return {words.begin(), words.end()};
}

}  // namespace

WordEmbeddingTable toy_embeddings(const std::vector<Passage>& passages, std::uint64_t seed) {
  WordEmbeddingTable table;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (const auto& w : vocabulary(passages)) {
    std::vector<double> v(WordEmbeddingTable::kDim);
    for (auto& x : v) x = u(rng);
    table.add(w, std::move(v));
  }
  return table;
}

void write_embeddings(const WordEmbeddingTable& table, const std::vector<Passage>& passages, const std::string& path) {
  std::ofstream out(path);
  char buf[40];
  for (const auto& w : vocabulary(passages)) {
    const auto* v = table.find(w);
    if (v == nullptr) continue;
    out << w;
    for (double x : *v) {
      std::snprintf(buf, sizeof buf, " %.17g", x);
      out << buf;
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Test taggers

TagDistribution RandomTagger::predict(const MaskedExample& example) const {
  std::uint64_t h = seed_ ^ 0x9e3779b97f4a7c15ULL;
  auto mix = [&h](std::uint64_t v) { h = (h ^ v) * 0x100000001b3ULL; };
  for (char c : example.passage_id) mix(static_cast<unsigned char>(c));
  for (const auto& m : example.mask) mix(m.index() + 1);
  std::mt19937_64 rng(h);
  std::normal_distribution<double> normal(0.0, 1.0);

  const auto n = static_cast<Eigen::Index>(example.size());
  TagDistribution d;
  d.bio.resize(n, static_cast<Eigen::Index>(BioLabel::kCount));
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::RowVectorXd logits(d.bio.cols());
    for (Eigen::Index k = 0; k < logits.size(); ++k) logits(k) = sharpness_ * normal(rng);
    logits = (logits.array() - logits.maxCoeff()).exp().matrix();
    d.bio.row(t) = logits / logits.sum();
  }
  d.aux = Eigen::MatrixXd::Ones(n, 1);
  return d;
}

TagDistribution CountingTagger::predict(const MaskedExample& example) const {
  ++calls_;
  return inner_.predict(example);
}

void TableTagger::set(std::size_t start, std::size_t end, MaskSymbol symbol, TagDistribution dist) {
  table_[{start, end, symbol.index()}] = std::move(dist);
}

TagDistribution TableTagger::predict(const MaskedExample& example) const {
  std::size_t start = example.mask.size();
  std::size_t end = 0;
  MaskSymbol symbol;
  for (std::size_t i = 0; i < example.mask.size(); ++i) {
    if (example.mask[i].is_outside()) continue;
    start = std::min(start, i);
    end = i + 1;
    symbol = example.mask[i];
  }
  const auto it = table_.find({start, end, symbol.index()});
  if (it != table_.end()) return it->second;
  return one_hot(std::vector<BioLabel>(example.size(), BioLabel::outside()));
}

TagDistribution distribution(const std::vector<std::vector<std::pair<BioLabel, double>>>& rows) {
  TagDistribution d;
  const auto n = static_cast<Eigen::Index>(rows.size());
  d.bio = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(BioLabel::kCount));
  for (Eigen::Index t = 0; t < n; ++t) {
    double rest = 1.0;
    for (const auto& [label, p] : rows[static_cast<std::size_t>(t)]) {
      d.bio(t, static_cast<Eigen::Index>(label.index())) += p;
      rest -= p;
    }
    d.bio(t, 0) += rest;
  }
  d.aux = Eigen::MatrixXd::Ones(n, 1);
  return d;
}

std::vector<ChildSpan> reference_decode(const std::vector<BioLabel>& labels) {
  std::vector<ChildSpan> out;
  bool open = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto l = labels[i];
    if (l.kind() == BioLabel::Kind::Outside) {
      open = false;
      continue;
    }
    const bool continues = l.kind() == BioLabel::Kind::Inside && open && out.back().category == l.category() &&
                           out.back().remote == l.remote() && out.back().end == i;
    if (continues) {
      out.back().end = i + 1;
    } else {
      out.push_back(ChildSpan{i, i + 1, l.category(), l.remote()});
      open = true;
    }
  }
  return out;
}

std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("rucca-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace rucca::testing

#include "rucca/features.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "rucca/error.hpp"
#include "rucca/text.hpp"

namespace rucca {

namespace {

constexpr std::array<std::string_view, 5> kCapitalizationNames = {"all-lower", "initial-cap", "all-caps", "mixed",
                                                                  "non-alpha"};
constexpr std::array<std::string_view, 6> kLengthBuckets = {"1", "2", "3", "4-6", "7-10", "11+"};

// Fixed table order; morph tables follow, one per key, sorted by key.
constexpr std::array<std::string_view, 11> kBaseTables = {"upos",    "xpos",    "deprel",  "capitalization",
                                                          "length",  "prefix2", "prefix3", "suffix2",
                                                          "suffix3", "language", "mask"};

std::string morph_table_name(const std::string& key) { return "morph:" + key; }

/// Symbol each base table reads from a token, given the example's mask symbol.
std::string base_symbol(std::size_t table, const TokenRow& t, MaskSymbol mask) {
  switch (table) {
    case 0:
      return t.upos;
    case 1:
      return t.xpos ? *t.xpos : std::string(kAbsent);
    case 2:
      return t.deprel.empty() ? std::string(kAbsent) : t.deprel;
    case 3:
      return std::string(to_string(capitalization_class(t.form)));
    case 4:
      return std::string(length_bucket(t.form));
    case 5:
      return prefix(t.form, 2);
    case 6:
      return prefix(t.form, 3);
    case 7:
      return suffix(t.form, 2);
    case 8:
      return suffix(t.form, 3);
    case 9:
      return t.language;
    case 10:
      return to_string(mask);
    default:
      return std::string(kAbsent);
  }
}

std::string morph_symbol(const TokenRow& t, const std::string& key) {
  const auto it = t.morph.find(key);
  return it == t.morph.end() ? std::string(kAbsent) : it->second;
}

}  // namespace

SymbolTable::SymbolTable() : symbols_{"<pad>", "<oov>"} {
  index_.emplace(symbols_[0], kPad);
  index_.emplace(symbols_[1], kOov);
}

SymbolTable SymbolTable::from_symbols(std::vector<std::string> symbols) {
  std::sort(symbols.begin(), symbols.end());
  symbols.erase(std::unique(symbols.begin(), symbols.end()), symbols.end());
  SymbolTable table;
  for (auto& s : symbols) {
    if (table.index_.count(s)) continue;
    table.index_.emplace(s, static_cast<std::int32_t>(table.symbols_.size()));
    table.symbols_.push_back(std::move(s));
  }
  return table;
}

std::int32_t SymbolTable::lookup(std::string_view symbol) const {
  const auto it = index_.find(std::string(symbol));
  return it == index_.end() ? kOov : it->second;
}

std::string_view to_string(CapitalizationClass c) { return kCapitalizationNames[static_cast<std::size_t>(c)]; }

CapitalizationClass capitalization_class(std::string_view form) {
  const auto cps = text::decode_utf8(form);
  std::size_t letters = 0;
  std::size_t upper = 0;
  bool first_upper = false;
  bool rest_lower = true;
  for (char32_t c : cps) {
    if (!text::is_alpha(c)) continue;
    const bool is_upper = text::to_lower(c) != c;
    if (letters == 0) {
      first_upper = is_upper;
    } else if (is_upper) {
      rest_lower = false;
    }
    upper += is_upper ? 1 : 0;
    ++letters;
  }
  if (letters == 0) return CapitalizationClass::NonAlpha;
  if (upper == 0) return CapitalizationClass::AllLower;
  if (first_upper && rest_lower) return CapitalizationClass::InitialCap;
  if (upper == letters) return CapitalizationClass::AllCaps;
  return CapitalizationClass::Mixed;
}

std::string_view length_bucket(std::string_view form) {
  const auto n = text::decode_utf8(form).size();
  if (n <= 1) return kLengthBuckets[0];
  if (n == 2) return kLengthBuckets[1];
  if (n == 3) return kLengthBuckets[2];
  if (n <= 6) return kLengthBuckets[3];
  if (n <= 10) return kLengthBuckets[4];
  return kLengthBuckets[5];
}

std::string prefix(std::string_view form, std::size_t n) {
  auto cps = text::decode_utf8(text::lowercase(form));
  if (cps.size() < n) return std::string(kShortAffix);
  return text::encode_utf8(std::u32string_view(cps).substr(0, n));
}

std::string suffix(std::string_view form, std::size_t n) {
  auto cps = text::decode_utf8(text::lowercase(form));
  if (cps.size() < n) return std::string(kShortAffix);
  return text::encode_utf8(std::u32string_view(cps).substr(cps.size() - n));
}

std::size_t FeatureVocabularies::table_index(std::string_view name) const {
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (tables[i].name == name) return i;
  }
  throw ConfigError("unknown feature table \"" + std::string(name) + "\"");
}

std::int32_t FeatureVocabularies::aux_index(std::string_view label) const {
  const auto it = std::find(aux_labels.begin(), aux_labels.end(), label);
  if (it == aux_labels.end()) {
    const auto o = std::find(aux_labels.begin(), aux_labels.end(), kAuxOutside);
    return o == aux_labels.end() ? 0 : static_cast<std::int32_t>(o - aux_labels.begin());
  }
  return static_cast<std::int32_t>(it - aux_labels.begin());
}

FeatureVocabularies fit_vocabularies(const std::vector<MaskedExample>& corpus, std::size_t embedding_dim) {
  if (corpus.empty()) throw ConfigError("cannot fit vocabularies on an empty corpus");
  if (embedding_dim == 0) throw ConfigError("embedding dimension must be positive");

  std::vector<std::vector<std::string>> seen(kBaseTables.size());
  std::set<std::string> morph_keys;
  std::set<std::string> aux{std::string(kAuxOutside)};
  for (const auto& ex : corpus) {
    for (std::size_t i = 0; i < ex.tokens.size(); ++i) {
      const auto& t = ex.tokens[i];
      for (std::size_t table = 0; table < kBaseTables.size(); ++table) {
        seen[table].push_back(base_symbol(table, t, ex.mask[i]));
      }
      for (const auto& [k, v] : t.morph) morph_keys.insert(k);
    }
    if (ex.target_aux) aux.insert(ex.target_aux->begin(), ex.target_aux->end());
  }

  // Closed vocabularies are always complete so unseen masks/classes never hit OOV.
  for (auto name : kCapitalizationNames) seen[3].emplace_back(name);
  for (auto name : kLengthBuckets) seen[4].emplace_back(name);
  for (std::size_t m = 0; m < MaskSymbol::kCount; ++m) seen[10].push_back(to_string(MaskSymbol::from_index(m)));

  FeatureVocabularies vocab;
  for (std::size_t table = 0; table < kBaseTables.size(); ++table) {
    vocab.tables.push_back(FeatureTable{std::string(kBaseTables[table]), SymbolTable::from_symbols(seen[table]),
                                        embedding_dim});
  }
  for (const auto& key : morph_keys) {
    std::vector<std::string> values{std::string(kAbsent)};
    for (const auto& ex : corpus) {
      for (const auto& t : ex.tokens) values.push_back(morph_symbol(t, key));
    }
    vocab.tables.push_back(FeatureTable{morph_table_name(key), SymbolTable::from_symbols(values), embedding_dim});
    vocab.morph_keys.push_back(key);
  }
  vocab.aux_labels.assign(aux.begin(), aux.end());
  return vocab;
}

void WordEmbeddingTable::add(std::string word, std::vector<double> values) {
  if (values.size() != kDim) {
    throw ConfigError("embedding for \"" + word + "\" has " + std::to_string(values.size()) + " values, expected " +
                      std::to_string(kDim));
  }
  vectors_.insert_or_assign(std::move(word), std::move(values));
}

const std::vector<double>* WordEmbeddingTable::find(std::string_view word) const {
  auto it = vectors_.find(std::string(word));
  if (it != vectors_.end()) return &it->second;
  it = vectors_.find(text::lowercase(word));
  return it == vectors_.end() ? nullptr : &it->second;
}

std::uint64_t WordEmbeddingTable::fingerprint() const {
  std::vector<const std::pair<const std::string, std::vector<double>>*> rows;
  rows.reserve(vectors_.size());
  for (const auto& row : vectors_) rows.push_back(&row);
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->first < b->first; });
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t byte) {
    h ^= byte;
    h *= 1099511628211ULL;
  };
  for (const auto* row : rows) {
    for (unsigned char c : row->first) mix(c);
    mix(0xFF);
    for (double v : row->second) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      for (int k = 0; k < 8; ++k) mix((bits >> (8 * k)) & 0xFF);
    }
  }
  return h;
}

EmbeddingLoadResult load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings " + path.string());
  EmbeddingLoadResult result;
  std::string line;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string word;
    fields >> word;
    values.clear();
    std::string tok;
    bool ok = true;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(tok, &used));
        if (used != tok.size()) ok = false;
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok || values.size() != WordEmbeddingTable::kDim) {
      ++result.rejected;
      continue;
    }
    result.table.add(std::move(word), values);
  }
  if (result.table.size() == 0) throw ConfigError("no valid embedding rows in " + path.string());
  if (result.rejected > 0) {
    std::cerr << "warning: " << path.string() << ": " << result.rejected << " embedding row(s) rejected\n";
  }
  return result;
}

FeaturizedExample featurize(const MaskedExample& example, const FeatureVocabularies& vocab,
                            const WordEmbeddingTable& embeddings, const ExpressionLexicon* lexicon) {
  const std::size_t n = example.tokens.size();
  FeaturizedExample out;
  out.words = Eigen::MatrixXd::Zero(WordEmbeddingTable::kDim, static_cast<Eigen::Index>(n));
  out.categorical.assign(vocab.tables.size(), std::vector<std::int32_t>(n, SymbolTable::kPad));
  out.mwe.assign(n, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = example.tokens[i];
    if (const auto* v = embeddings.find(t.form)) {
      out.words.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXd>(v->data(), v->size());
    }
    const MaskSymbol mask = i < example.mask.size() ? example.mask[i] : MaskSymbol::outside();
    for (std::size_t table = 0; table < vocab.tables.size(); ++table) {
      std::string symbol;
      if (table < kBaseTables.size()) {
        symbol = base_symbol(table, t, mask);
      } else {
        symbol = morph_symbol(t, vocab.morph_keys[table - kBaseTables.size()]);
      }
      out.categorical[table][i] = vocab.tables[table].symbols.lookup(symbol);
    }
  }
  if (lexicon != nullptr && n > 0) {
    const auto mwe = match(*lexicon, example.tokens);
    for (std::size_t i = 0; i < n; ++i) out.mwe[i] = mwe.flags[i] ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace rucca

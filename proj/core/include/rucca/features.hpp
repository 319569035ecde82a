#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rucca/corpus.hpp"
#include "rucca/lexicon.hpp"

namespace rucca {

/// Sorted symbol table with reserved PAD (0) and OOV (1) entries.
class SymbolTable {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kOov = 1;

  SymbolTable();
  /// Indices are assigned in lexicographic order after the reserved entries.
  static SymbolTable from_symbols(std::vector<std::string> symbols);

  std::int32_t lookup(std::string_view symbol) const;
  const std::string& symbol(std::int32_t index) const { return symbols_.at(static_cast<std::size_t>(index)); }
  std::size_t size() const { return symbols_.size(); }
  const std::vector<std::string>& symbols() const { return symbols_; }

  friend bool operator==(const SymbolTable& a, const SymbolTable& b) { return a.symbols_ == b.symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::int32_t> index_;
};

struct FeatureTable {
  std::string name;
  SymbolTable symbols;
  std::size_t dim = 16;

  friend bool operator==(const FeatureTable&, const FeatureTable&) = default;
};

enum class CapitalizationClass { AllLower, InitialCap, AllCaps, Mixed, NonAlpha };

std::string_view to_string(CapitalizationClass c);
CapitalizationClass capitalization_class(std::string_view form);
/// One of "1", "2", "3", "4-6", "7-10", "11+" (length in code points).
std::string_view length_bucket(std::string_view form);

inline constexpr std::string_view kShortAffix = "<short>";
inline constexpr std::string_view kAbsent = "_";

/// Lowercased prefix of `n` code points, or kShortAffix when the word is shorter.
std::string prefix(std::string_view form, std::size_t n);
std::string suffix(std::string_view form, std::size_t n);

/// Frozen categorical vocabularies plus the TASK2 output label set.
struct FeatureVocabularies {
  static constexpr std::size_t kDefaultDim = 16;

  std::vector<FeatureTable> tables;
  std::vector<std::string> morph_keys;
  std::vector<std::string> aux_labels;

  std::size_t table_index(std::string_view name) const;
  std::size_t mask_table() const { return table_index("mask"); }
  std::int32_t aux_index(std::string_view label) const;

  friend bool operator==(const FeatureVocabularies&, const FeatureVocabularies&) = default;
};

/// Throws ConfigError on an empty corpus.
FeatureVocabularies fit_vocabularies(const std::vector<MaskedExample>& corpus,
                                     std::size_t embedding_dim = FeatureVocabularies::kDefaultDim);

/// Frozen pretrained word vectors; every vector has exactly kDim entries.
class WordEmbeddingTable {
 public:
  static constexpr std::size_t kDim = 300;

  /// Throws ConfigError when the vector has the wrong dimension.
  void add(std::string word, std::vector<double> values);
  /// Exact form first, then its lowercased form; nullptr if absent.
  const std::vector<double>* find(std::string_view word) const;
  std::size_t size() const { return vectors_.size(); }
  /// Order-independent FNV-1a digest of every (word, vector) row.
  std::uint64_t fingerprint() const;

 private:
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

struct EmbeddingLoadResult {
  WordEmbeddingTable table;
  std::size_t rejected = 0;
};

/// Text format "word v1 ... v300" per line; rows of the wrong width are skipped and counted.
EmbeddingLoadResult load_embeddings(const std::filesystem::path& path);

struct FeaturizedExample {
  /// kDim x tokens; OOV words get the zero vector.
  Eigen::MatrixXd words;
  /// [table][token] symbol indices, table order as in FeatureVocabularies::tables.
  std::vector<std::vector<std::int32_t>> categorical;
  std::vector<double> mwe;

  std::size_t size() const { return mwe.size(); }
};

FeaturizedExample featurize(const MaskedExample& example, const FeatureVocabularies& vocab,
                            const WordEmbeddingTable& embeddings, const ExpressionLexicon* lexicon);

}  // namespace rucca

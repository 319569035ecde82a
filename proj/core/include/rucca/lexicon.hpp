#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "rucca/graph.hpp"

namespace rucca {

struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive

  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

/// Per-language list of fixed multiword expressions, stored lowercased.
class ExpressionLexicon {
 public:
  ExpressionLexicon() = default;
  explicit ExpressionLexicon(std::string language) : language_(std::move(language)) {}

  /// Returns false (and stores nothing) for empty or duplicate patterns.
  bool add(const std::vector<std::string>& tokens);

  const std::string& language() const { return language_; }
  const std::set<std::vector<std::string>>& patterns() const { return patterns_; }
  std::size_t size() const { return patterns_.size(); }
  bool empty() const { return patterns_.empty(); }
  std::size_t max_length() const { return max_length_; }

 private:
  std::string language_;
  std::set<std::vector<std::string>> patterns_;
  std::size_t max_length_ = 0;
};

struct LexiconLoadResult {
  ExpressionLexicon lexicon;
  std::size_t duplicates = 0;
  std::size_t empty_lines = 0;
};

/// One expression per line, tokens separated by spaces, '#' starts a comment line.
LexiconLoadResult load_lexicon(const std::filesystem::path& path, const std::string& language);

struct MweMask {
  std::vector<bool> flags;
  std::vector<TokenSpan> spans;
};

/// Greedy leftmost-longest matching over lowercased surface forms.
MweMask match(const ExpressionLexicon& lexicon, const std::vector<TokenRow>& tokens);

/// Lexicons keyed by language code.
class LexiconSet {
 public:
  void insert(ExpressionLexicon lexicon);
  /// nullptr when no lexicon is registered for `language`.
  const ExpressionLexicon* find(const std::string& language) const;
  bool empty() const { return by_language_.empty(); }
  const std::map<std::string, ExpressionLexicon>& all() const { return by_language_; }

  /// Uses the lexicon of the first token's language; all-false when none applies.
  MweMask match(const std::vector<TokenRow>& tokens) const;

 private:
  std::map<std::string, ExpressionLexicon> by_language_;
};

}  // namespace rucca

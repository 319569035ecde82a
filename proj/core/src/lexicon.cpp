#include "rucca/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include "rucca/error.hpp"
#include "rucca/text.hpp"

namespace rucca {

bool ExpressionLexicon::add(const std::vector<std::string>& tokens) {
  std::vector<std::string> pattern;
  for (const auto& t : tokens) {
    if (!t.empty()) pattern.push_back(text::lowercase(t));
  }
  if (pattern.empty()) return false;
  const std::size_t len = pattern.size();
  if (!patterns_.insert(std::move(pattern)).second) return false;
  max_length_ = std::max(max_length_, len);
  return true;
}

LexiconLoadResult load_lexicon(const std::filesystem::path& path, const std::string& language) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon " + path.string());
  LexiconLoadResult result{ExpressionLexicon(language), 0, 0};
  std::string line;
  while (std::getline(in, line)) {
    const auto trimmed = text::trim(line);
    if (trimmed.empty()) {
      ++result.empty_lines;
      continue;
    }
    if (trimmed.front() == '#') continue;
    if (!result.lexicon.add(text::split(trimmed, ' '))) ++result.duplicates;
  }
  if (result.duplicates > 0) {
    std::cerr << "warning: " << path.string() << ": " << result.duplicates << " duplicate expression(s) dropped\n";
  }
  return result;
}

MweMask match(const ExpressionLexicon& lexicon, const std::vector<TokenRow>& tokens) {
  MweMask mask;
  mask.flags.assign(tokens.size(), false);
  if (lexicon.empty()) return mask;

  std::vector<std::string> lowered;
  lowered.reserve(tokens.size());
  for (const auto& t : tokens) lowered.push_back(text::lowercase(t.form));

  std::size_t i = 0;
  std::vector<std::string> probe;
  while (i < lowered.size()) {
    std::size_t best = 0;
    const std::size_t longest = std::min(lexicon.max_length(), lowered.size() - i);
    for (std::size_t len = longest; len >= 1 && best == 0; --len) {
      probe.assign(lowered.begin() + static_cast<std::ptrdiff_t>(i),
                   lowered.begin() + static_cast<std::ptrdiff_t>(i + len));
      if (lexicon.patterns().count(probe)) best = len;
    }
    if (best == 0) {
      ++i;
      continue;
    }
    mask.spans.push_back(TokenSpan{i, i + best});
    for (std::size_t k = i; k < i + best; ++k) mask.flags[k] = true;
    i += best;
  }
  return mask;
}

void LexiconSet::insert(ExpressionLexicon lexicon) {
  auto language = lexicon.language();
  by_language_.insert_or_assign(std::move(language), std::move(lexicon));
}

const ExpressionLexicon* LexiconSet::find(const std::string& language) const {
  const auto it = by_language_.find(language);
  return it == by_language_.end() ? nullptr : &it->second;
}

MweMask LexiconSet::match(const std::vector<TokenRow>& tokens) const {
  const ExpressionLexicon* lex = tokens.empty() ? nullptr : find(tokens.front().language);
  if (lex == nullptr) {
    MweMask mask;
    mask.flags.assign(tokens.size(), false);
    return mask;
  }
  return rucca::match(*lex, tokens);
}

}  // namespace rucca

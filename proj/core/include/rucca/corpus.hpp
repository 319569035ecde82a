#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rucca/bio.hpp"
#include "rucca/graph.hpp"

namespace rucca {

/// Per-token masking symbol: O outside the focus span, the focus arc
/// category (or ROOT) inside it.
class MaskSymbol {
 public:
  static constexpr std::size_t kCount = kCategoryCount + 2;

  constexpr MaskSymbol() = default;
  static constexpr MaskSymbol outside() { return MaskSymbol(kCategoryCount); }
  static constexpr MaskSymbol root() { return MaskSymbol(kCategoryCount + 1); }
  static constexpr MaskSymbol of(Category c) { return MaskSymbol(static_cast<std::uint8_t>(index_of(c))); }
  static MaskSymbol from_index(std::size_t index);

  constexpr std::size_t index() const { return index_; }
  constexpr bool is_outside() const { return index_ == kCategoryCount; }
  constexpr bool is_root() const { return index_ == kCategoryCount + 1; }
  constexpr bool is_category() const { return index_ < kCategoryCount; }
  constexpr Category category() const { return kAllCategories[index_]; }

  friend constexpr bool operator==(MaskSymbol, MaskSymbol) = default;

 private:
  constexpr explicit MaskSymbol(std::uint8_t index) : index_(index) {}
  std::uint8_t index_ = kCategoryCount;
};

std::string to_string(MaskSymbol symbol);
MaskSymbol parse_mask_symbol(std::string_view text);

/// Builds the mask for a focus span: `symbol` inside [start, end), O elsewhere.
std::vector<MaskSymbol> make_mask(std::size_t length, std::size_t start, std::size_t end, MaskSymbol symbol);

inline constexpr std::string_view kAuxOutside = "O";

struct MaskedExample {
  std::string passage_id;
  std::vector<TokenRow> tokens;
  std::vector<MaskSymbol> mask;
  std::optional<std::vector<BioLabel>> target_bio;
  std::optional<std::vector<std::string>> target_aux;
  std::optional<NodeId> focus_node;

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const MaskedExample&, const MaskedExample&) = default;
};

/// Per-token TASK2 labels: explicit aux tags when the passage carries them,
/// otherwise the category of the edge from the root to the root-level unit
/// that contains the token.
std::vector<std::string> aux_labels(const PassageIndex& index);

struct SkippedNode {
  std::string passage_id;
  NodeId node;
  std::string reason;
};

struct Expansion {
  std::vector<MaskedExample> examples;
  std::vector<SkippedNode> skipped;
};

/// One masked training example per non-terminal (pre-order); nodes whose
/// children are not BIO-representable are reported in `skipped` instead.
Expansion expand(const Passage& passage);

/// Passage file: a header line followed by one JSON record per passage.
/// Throws SchemaError / ValidationError naming every bad line.
std::vector<Passage> load_passages(const std::filesystem::path& path);
std::vector<Passage> read_passages(std::istream& in, const std::string& source = "<stream>");
void save_passages(const std::vector<Passage>& passages, const std::filesystem::path& path);
void write_passages(const std::vector<Passage>& passages, std::ostream& out);

/// True if the first line of the file is a passage-file header.
bool is_passage_file(const std::filesystem::path& path);

/// Masked-example corpus file (output of expansion), same line-record layout.
void save_examples(const std::vector<MaskedExample>& examples, const std::filesystem::path& path);
std::vector<MaskedExample> load_examples(const std::filesystem::path& path);

struct Sentence {
  std::string id;
  std::vector<TokenRow> tokens;
};

inline Sentence sentence_of(const Passage& passage) { return Sentence{passage.passage_id, passage.tokens}; }

/// CoNLL-like token file: ID FORM UPOS XPOS FEATS HEAD DEPREL, tab separated,
/// blank line between sentences. "# sent_id = X" and "# language = xx"
/// comments set the sentence id and language.
std::vector<Sentence> load_conll_tokens(const std::filesystem::path& path, const std::string& default_language);
std::vector<Sentence> read_conll_tokens(std::istream& in, const std::string& default_language,
                                        const std::string& source = "<stream>");
void write_conll_tokens(const std::vector<Sentence>& sentences, std::ostream& out);

}  // namespace rucca

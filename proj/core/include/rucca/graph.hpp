#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rucca {

/// The thirteen UCCA edge categories, in the order used by every report.
enum class Category : std::uint8_t { D, C, N, E, F, G, L, H, A, P, U, R, S };

inline constexpr std::size_t kCategoryCount = 13;

inline constexpr std::array<Category, kCategoryCount> kAllCategories = {
    Category::D, Category::C, Category::N, Category::E, Category::F,
    Category::G, Category::L, Category::H, Category::A, Category::P,
    Category::U, Category::R, Category::S};

std::string_view to_string(Category c);
std::optional<Category> try_parse_category(std::string_view symbol);
/// Throws SchemaError for anything outside the closed vocabulary.
Category parse_category(std::string_view symbol);

constexpr std::size_t index_of(Category c) { return static_cast<std::size_t>(c); }

struct NodeId {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

/// Rendered as "n<value>" in diagnostics.
std::string to_string(NodeId id);

/// One token and the annotations the feature extractor consumes.
struct TokenRow {
  static constexpr std::int32_t kRootHead = -1;

  std::string form;
  std::string upos;
  std::optional<std::string> xpos;
  std::map<std::string, std::string> morph;
  /// 0-based token index, kRootHead for the syntactic root, nullopt when unknown.
  std::optional<std::int32_t> head;
  std::string deprel;
  std::string language;

  friend bool operator==(const TokenRow&, const TokenRow&) = default;
};

struct Node {
  NodeId id;
  /// Set for terminals only.
  std::optional<std::size_t> terminal;

  bool is_terminal() const { return terminal.has_value(); }

  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  NodeId parent;
  NodeId child;
  Category category = Category::C;
  bool remote = false;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Passage {
  std::string passage_id;
  std::string language;
  std::vector<TokenRow> tokens;
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  NodeId root;
  /// Externally supplied per-token auxiliary (simplified-tree) tags; empty when absent.
  std::vector<std::string> aux_tags;

  friend bool operator==(const Passage&, const Passage&) = default;
};

/// Returns one human-readable description per broken invariant; empty iff valid.
std::vector<std::string> validate(const Passage& passage);

/// Names every non-terminal whose primary yield is not a single interval.
std::vector<std::string> check_contiguous_yields(const Passage& passage);

/// Sorted terminal positions reachable from `node` along primary edges.
/// Throws ConfigError for an unknown node.
std::vector<std::size_t> primary_yield(const Passage& passage, NodeId node);

/// Non-terminals in pre-order over the primary tree, siblings ordered by
/// leftmost yield position.
std::vector<NodeId> non_terminals(const Passage& passage);

/// Adjacency and yield tables for a (valid) passage, computed once.
class PassageIndex {
 public:
  explicit PassageIndex(const Passage& passage);

  const Passage& passage() const { return *passage_; }
  bool contains(NodeId id) const { return slot_.count(id.value) > 0; }
  const Node& node(NodeId id) const;

  /// Primary children sorted by leftmost yield position.
  const std::vector<const Edge*>& primary_children(NodeId id) const;
  const std::vector<const Edge*>& remote_children(NodeId id) const;
  /// Incoming primary edge; nullptr for the root.
  const Edge* primary_parent(NodeId id) const;
  const std::vector<std::size_t>& yield(NodeId id) const;
  std::size_t depth(NodeId id) const;

 private:
  std::size_t slot(NodeId id) const;

  const Passage* passage_;
  std::unordered_map<std::uint32_t, std::size_t> slot_;
  std::vector<std::vector<const Edge*>> primary_children_;
  std::vector<std::vector<const Edge*>> remote_children_;
  std::vector<const Edge*> primary_parent_;
  std::vector<std::vector<std::size_t>> yield_;
  std::vector<std::size_t> depth_;
};

/// Small helper to assemble passages by hand (tests, fixtures, decoder output).
class PassageBuilder {
 public:
  PassageBuilder(std::string passage_id, std::string language, std::vector<TokenRow> tokens);

  NodeId root() const { return root_; }
  /// Creates a terminal for token `position` under `parent`.
  NodeId add_terminal(NodeId parent, std::size_t position, Category category);
  NodeId add_non_terminal(NodeId parent, Category category);
  void add_remote(NodeId parent, NodeId child, Category category);

  const Passage& peek() const { return passage_; }
  Passage build() &&;

 private:
  NodeId fresh();

  Passage passage_;
  NodeId root_;
  std::uint32_t next_ = 0;
};

}  // namespace rucca

template <>
struct std::hash<rucca::NodeId> {
  std::size_t operator()(rucca::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};

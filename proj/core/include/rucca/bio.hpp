#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rucca/graph.hpp"

namespace rucca {

/// One TASK1 label: O, B-X, I-X, B-REM-X or I-REM-X for a category X.
///
/// Index layout: 0 is O; primary labels occupy [1, 27) as B/I pairs in
/// category order; remote labels occupy [27, 53) in the same layout.
class BioLabel {
 public:
  enum class Kind : std::uint8_t { Outside, Begin, Inside };

  static constexpr std::size_t kCount = 1 + 2 * kCategoryCount + 2 * kCategoryCount;
  static constexpr std::size_t kPrimaryEnd = 1 + 2 * kCategoryCount;

  constexpr BioLabel() = default;
  static constexpr BioLabel outside() { return BioLabel(0); }
  static constexpr BioLabel begin(Category c, bool remote = false) {
    return BioLabel(static_cast<std::uint8_t>((remote ? kPrimaryEnd : 1) + 2 * index_of(c)));
  }
  static constexpr BioLabel inside(Category c, bool remote = false) {
    return BioLabel(static_cast<std::uint8_t>((remote ? kPrimaryEnd : 1) + 2 * index_of(c) + 1));
  }
  static BioLabel from_index(std::size_t index);

  constexpr std::size_t index() const { return index_; }
  constexpr Kind kind() const {
    if (index_ == 0) return Kind::Outside;
    return ((index_ - 1) % 2 == 0) ? Kind::Begin : Kind::Inside;
  }
  constexpr bool remote() const { return index_ >= kPrimaryEnd; }
  /// Meaningless for O.
  constexpr Category category() const {
    const std::size_t offset = remote() ? index_ - kPrimaryEnd : index_ - 1;
    return kAllCategories[offset / 2];
  }

  friend constexpr bool operator==(BioLabel, BioLabel) = default;

 private:
  constexpr explicit BioLabel(std::uint8_t index) : index_(index) {}
  std::uint8_t index_ = 0;
};

std::string to_string(BioLabel label);
/// Throws SchemaError on anything but "O", "B-X", "I-X", "B-REM-X", "I-REM-X".
BioLabel parse_bio_label(std::string_view text);

struct ChildSpan {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
  Category category = Category::C;
  bool remote = false;

  std::size_t length() const { return end - start; }
  friend bool operator==(const ChildSpan&, const ChildSpan&) = default;
};

std::string to_string(const ChildSpan& span);

/// Per-token probabilities: `bio` is tokens x 53, `aux` is tokens x |aux vocabulary|.
struct TagDistribution {
  Eigen::MatrixXd bio;
  Eigen::MatrixXd aux;

  std::size_t size() const { return static_cast<std::size_t>(bio.rows()); }
};

/// Throws NumericError if a row is negative, non-finite or does not sum to 1 (1e-6).
void check_distribution(const TagDistribution& dist);

/// One-hot distribution over the given label sequence (aux head: a single certain column).
TagDistribution one_hot(const std::vector<BioLabel>& labels);

/// Result of encoding a node's children; `labels` is empty when not representable.
struct Encoding {
  std::vector<BioLabel> labels;
  std::string failure;

  bool representable() const { return failure.empty(); }
};

/// Labels every token of the sentence for the children of `node`.
Encoding encode(const PassageIndex& index, NodeId node);
Encoding encode(const Passage& passage, NodeId node);

/// The primary and remote children of `node` as spans, in leftmost order.
/// Requires contiguous yields (use after encode() succeeded).
std::vector<ChildSpan> gold_child_spans(const PassageIndex& index, NodeId node);

/// Total decoding with deterministic repairs of malformed sequences.
std::vector<ChildSpan> decode_labels(const std::vector<BioLabel>& labels);

struct DecodedSpans {
  std::vector<ChildSpan> primary;
  std::vector<ChildSpan> remote;
};

/// Primary pass by argmax over O + primary labels; remote pass keeps a token's
/// best remote label only when its probability is strictly above `remote_threshold`.
DecodedSpans decode_probs(const TagDistribution& dist, double remote_threshold);

}  // namespace rucca

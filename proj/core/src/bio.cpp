#include "rucca/bio.hpp"

#include <algorithm>
#include <cmath>

#include "rucca/error.hpp"

namespace rucca {

BioLabel BioLabel::from_index(std::size_t index) {
  if (index >= kCount) throw SchemaError("BIO label index out of range: " + std::to_string(index));
  return BioLabel(static_cast<std::uint8_t>(index));
}

std::string to_string(BioLabel label) {
  switch (label.kind()) {
    case BioLabel::Kind::Outside:
      return "O";
    case BioLabel::Kind::Begin:
      return std::string(label.remote() ? "B-REM-" : "B-") + std::string(to_string(label.category()));
    case BioLabel::Kind::Inside:
      return std::string(label.remote() ? "I-REM-" : "I-") + std::string(to_string(label.category()));
  }
  return "O";
}

BioLabel parse_bio_label(std::string_view text) {
  if (text == "O") return BioLabel::outside();
  if (text.size() >= 3 && (text[0] == 'B' || text[0] == 'I') && text[1] == '-') {
    const bool begin = text[0] == 'B';
    std::string_view rest = text.substr(2);
    bool remote = false;
    if (rest.size() > 4 && rest.substr(0, 4) == "REM-") {
      remote = true;
      rest = rest.substr(4);
    }
    if (auto c = try_parse_category(rest)) {
      return begin ? BioLabel::begin(*c, remote) : BioLabel::inside(*c, remote);
    }
  }
  throw SchemaError("unknown BIO label \"" + std::string(text) + "\"");
}

std::string to_string(const ChildSpan& span) {
  return std::string(span.remote ? "REM-" : "") + std::string(to_string(span.category)) + "[" +
         std::to_string(span.start) + "," + std::to_string(span.end) + ")";
}

void check_distribution(const TagDistribution& dist) {
  if (static_cast<std::size_t>(dist.bio.cols()) != BioLabel::kCount) {
    throw NumericError("TASK1 distribution must have " + std::to_string(BioLabel::kCount) + " columns");
  }
  if (dist.aux.rows() != dist.bio.rows()) throw NumericError("TASK1/TASK2 length mismatch");
  auto check = [](const Eigen::MatrixXd& m, const char* head) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      double sum = 0.0;
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double v = m(r, c);
        if (!std::isfinite(v) || v < 0.0) {
          throw NumericError(std::string(head) + " row " + std::to_string(r) + " has an invalid probability");
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-6) {
        throw NumericError(std::string(head) + " row " + std::to_string(r) + " does not sum to 1");
      }
    }
  };
  check(dist.bio, "TASK1");
  check(dist.aux, "TASK2");
}

TagDistribution one_hot(const std::vector<BioLabel>& labels) {
  TagDistribution dist;
  const auto n = static_cast<Eigen::Index>(labels.size());
  dist.bio = Eigen::MatrixXd::Zero(n, BioLabel::kCount);
  for (Eigen::Index t = 0; t < n; ++t) dist.bio(t, static_cast<Eigen::Index>(labels[t].index())) = 1.0;
  dist.aux = Eigen::MatrixXd::Ones(n, 1);
  return dist;
}

std::vector<ChildSpan> gold_child_spans(const PassageIndex& index, NodeId node) {
  std::vector<ChildSpan> spans;
  auto add = [&](const Edge* e) {
    const auto& y = index.yield(e->child);
    if (!y.empty()) spans.push_back(ChildSpan{y.front(), y.back() + 1, e->category, e->remote});
  };
  for (const Edge* e : index.primary_children(node)) add(e);
  for (const Edge* e : index.remote_children(node)) add(e);
  std::stable_sort(spans.begin(), spans.end(), [](const ChildSpan& a, const ChildSpan& b) { return a.start < b.start; });
  return spans;
}

Encoding encode(const PassageIndex& index, NodeId node) {
  const Passage& passage = index.passage();
  if (index.node(node).is_terminal()) throw ConfigError("cannot encode children of terminal " + to_string(node));

  Encoding out;
  std::vector<BioLabel> labels(passage.tokens.size(), BioLabel::outside());
  std::vector<char> taken(passage.tokens.size(), 0);

  auto place = [&](const Edge* e) -> bool {
    const auto& y = index.yield(e->child);
    if (y.empty()) {
      out.failure = "empty child yield: node " + to_string(e->child);
      return false;
    }
    if (y.back() - y.front() + 1 != y.size()) {
      out.failure = "discontiguous child yield: node " + to_string(e->child);
      return false;
    }
    for (std::size_t i = y.front(); i <= y.back(); ++i) {
      if (taken[i]) {
        out.failure = "overlapping children at token " + std::to_string(i);
        return false;
      }
      taken[i] = 1;
      labels[i] = (i == y.front()) ? BioLabel::begin(e->category, e->remote) : BioLabel::inside(e->category, e->remote);
    }
    return true;
  };

  for (const Edge* e : index.primary_children(node)) {
    if (!place(e)) return out;
  }
  for (const Edge* e : index.remote_children(node)) {
    if (!place(e)) return out;
  }

  auto expected = gold_child_spans(index, node);
  auto decoded = decode_labels(labels);
  if (decoded != expected) {
    out.failure = "labeling does not round-trip";
    return out;
  }
  out.labels = std::move(labels);
  return out;
}

Encoding encode(const Passage& passage, NodeId node) {
  const PassageIndex index(passage);
  return encode(index, node);
}

std::vector<ChildSpan> decode_labels(const std::vector<BioLabel>& labels) {
  std::vector<ChildSpan> spans;
  std::optional<ChildSpan> open;
  auto close = [&] {
    if (open) spans.push_back(*open);
    open.reset();
  };
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const BioLabel label = labels[i];
    switch (label.kind()) {
      case BioLabel::Kind::Outside:
        close();
        break;
      case BioLabel::Kind::Begin:
        close();
        open = ChildSpan{i, i + 1, label.category(), label.remote()};
        break;
      case BioLabel::Kind::Inside:
        if (open && open->category == label.category() && open->remote == label.remote()) {
          open->end = i + 1;
        } else {
          close();
          open = ChildSpan{i, i + 1, label.category(), label.remote()};
        }
        break;
    }
  }
  close();
  return spans;
}

DecodedSpans decode_probs(const TagDistribution& dist, double remote_threshold) {
  if (!(remote_threshold >= 0.0 && remote_threshold <= 1.0)) {
    throw ConfigError("remote threshold must lie in [0, 1]");
  }
  check_distribution(dist);
  const auto n = dist.bio.rows();
  std::vector<BioLabel> primary(static_cast<std::size_t>(n));
  std::vector<BioLabel> remote(static_cast<std::size_t>(n), BioLabel::outside());
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < static_cast<Eigen::Index>(BioLabel::kPrimaryEnd); ++c) {
      if (dist.bio(t, c) > dist.bio(t, best)) best = c;
    }
    primary[t] = BioLabel::from_index(static_cast<std::size_t>(best));

    Eigen::Index best_remote = BioLabel::kPrimaryEnd;
    for (Eigen::Index c = best_remote + 1; c < static_cast<Eigen::Index>(BioLabel::kCount); ++c) {
      if (dist.bio(t, c) > dist.bio(t, best_remote)) best_remote = c;
    }
    if (dist.bio(t, best_remote) > remote_threshold) {
      remote[t] = BioLabel::from_index(static_cast<std::size_t>(best_remote));
    }
  }
  return DecodedSpans{decode_labels(primary), decode_labels(remote)};
}

}  // namespace rucca

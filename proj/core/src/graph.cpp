#include "rucca/graph.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_set>

#include "rucca/error.hpp"

namespace rucca {

namespace {

constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "D", "C", "N", "E", "F", "G", "L", "H", "A", "P", "U", "R", "S"};

}  // namespace

std::string_view to_string(Category c) { return kCategoryNames[index_of(c)]; }

std::optional<Category> try_parse_category(std::string_view symbol) {
  for (std::size_t i = 0; i < kCategoryCount; ++i) {
    if (kCategoryNames[i] == symbol) return kAllCategories[i];
  }
  return std::nullopt;
}

Category parse_category(std::string_view symbol) {
  if (auto c = try_parse_category(symbol)) return *c;
  throw SchemaError("unknown category \"" + std::string(symbol) + "\"");
}

std::string to_string(NodeId id) { return "n" + std::to_string(id.value); }

std::vector<std::string> validate(const Passage& passage) {
  std::vector<std::string> violations;
  const std::size_t n_tokens = passage.tokens.size();

  std::unordered_map<std::uint32_t, const Node*> by_id;
  for (const Node& node : passage.nodes) {
    if (!by_id.emplace(node.id.value, &node).second) {
      violations.push_back("duplicate node id: node " + to_string(node.id));
    }
  }

  for (std::size_t i = 0; i < n_tokens; ++i) {
    const auto& head = passage.tokens[i].head;
    if (head && *head != TokenRow::kRootHead && (*head < 0 || static_cast<std::size_t>(*head) >= n_tokens)) {
      violations.push_back("token head out of range: token " + std::to_string(i));
    }
  }

  const auto root_it = by_id.find(passage.root.value);
  if (root_it == by_id.end()) {
    violations.push_back("missing root: node " + to_string(passage.root));
  } else if (root_it->second->is_terminal()) {
    violations.push_back("root is a terminal: node " + to_string(passage.root));
  }

  std::vector<std::size_t> coverage(n_tokens, 0);
  for (const Node& node : passage.nodes) {
    if (!node.terminal) continue;
    if (*node.terminal >= n_tokens) {
      violations.push_back("terminal position out of range: node " + to_string(node.id));
    } else {
      ++coverage[*node.terminal];
    }
  }
  for (std::size_t i = 0; i < n_tokens; ++i) {
    if (coverage[i] == 0) violations.push_back("token not covered by a terminal: token " + std::to_string(i));
    if (coverage[i] > 1) violations.push_back("token covered by multiple terminals: token " + std::to_string(i));
  }

  std::unordered_map<std::uint32_t, std::size_t> primary_in;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> primary_out;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> all_out;
  std::vector<const Edge*> remotes;
  for (const Edge& e : passage.edges) {
    const auto p = by_id.find(e.parent.value);
    const auto c = by_id.find(e.child.value);
    if (p == by_id.end() || c == by_id.end()) {
      violations.push_back("edge references unknown node: edge " + to_string(e.parent) + "->" + to_string(e.child));
      continue;
    }
    if (e.parent == e.child) {
      violations.push_back("self-loop: node " + to_string(e.parent));
      continue;
    }
    if (p->second->is_terminal()) {
      violations.push_back("terminal has children: node " + to_string(e.parent));
    }
    all_out[e.parent.value].push_back(e.child.value);
    if (e.remote) {
      remotes.push_back(&e);
    } else {
      ++primary_in[e.child.value];
      primary_out[e.parent.value].push_back(e.child.value);
    }
  }

  for (const Node& node : passage.nodes) {
    const std::size_t in = primary_in.count(node.id.value) ? primary_in[node.id.value] : 0;
    if (node.id == passage.root) {
      if (in > 0) violations.push_back("root has a primary parent: node " + to_string(node.id));
    } else if (in == 0) {
      violations.push_back("no primary parent: node " + to_string(node.id));
    } else if (in > 1) {
      violations.push_back("multiple primary parents: node " + to_string(node.id));
    }
    if (!node.is_terminal() && node.id != passage.root && primary_out.count(node.id.value) == 0) {
      violations.push_back("non-terminal without children: node " + to_string(node.id));
    }
  }

  for (const Edge* e : remotes) {
    if (e->child == passage.root || primary_in.count(e->child.value) == 0) {
      violations.push_back("remote edge into node without primary parent: node " + to_string(e->child));
    }
  }

  if (root_it != by_id.end()) {
    // Reachability over primary edges; with one parent per node this also
    // rules out primary cycles.
    std::unordered_set<std::uint32_t> seen{passage.root.value};
    std::vector<std::uint32_t> stack{passage.root.value};
    while (!stack.empty()) {
      const auto cur = stack.back();
      stack.pop_back();
      for (auto child : primary_out[cur]) {
        if (seen.insert(child).second) stack.push_back(child);
      }
    }
    for (const Node& node : passage.nodes) {
      if (!seen.count(node.id.value)) {
        violations.push_back("unreachable from root over primary edges: node " + to_string(node.id));
      }
    }
  }

  // Whole-graph acyclicity (primary + remote), iterative three-colour DFS.
  {
    std::unordered_map<std::uint32_t, int> colour;
    bool cycle = false;
    for (const Node& start : passage.nodes) {
      if (cycle || colour[start.id.value] != 0) continue;
      std::vector<std::pair<std::uint32_t, std::size_t>> stack{{start.id.value, 0}};
      colour[start.id.value] = 1;
      while (!stack.empty() && !cycle) {
        auto& [cur, next] = stack.back();
        const auto& out = all_out[cur];
        if (next < out.size()) {
          const auto child = out[next++];
          int& c = colour[child];
          if (c == 1) {
            cycle = true;
          } else if (c == 0) {
            c = 1;
            stack.emplace_back(child, 0);
          }
        } else {
          colour[cur] = 2;
          stack.pop_back();
        }
      }
    }
    if (cycle) violations.push_back("graph contains a cycle");
  }

  return violations;
}

PassageIndex::PassageIndex(const Passage& passage) : passage_(&passage) {
  const std::size_t n = passage.nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!slot_.emplace(passage.nodes[i].id.value, i).second) {
      throw ValidationError("duplicate node id: node " + to_string(passage.nodes[i].id));
    }
  }
  if (!contains(passage.root)) throw ValidationError("missing root: node " + to_string(passage.root));

  primary_children_.resize(n);
  remote_children_.resize(n);
  primary_parent_.assign(n, nullptr);
  yield_.resize(n);
  depth_.assign(n, 0);

  for (const Edge& e : passage.edges) {
    if (!contains(e.parent) || !contains(e.child)) {
      throw ValidationError("edge references unknown node: edge " + to_string(e.parent) + "->" + to_string(e.child));
    }
    if (e.remote) {
      remote_children_[slot(e.parent)].push_back(&e);
    } else {
      primary_children_[slot(e.parent)].push_back(&e);
      if (primary_parent_[slot(e.child)] != nullptr) {
        throw ValidationError("multiple primary parents: node " + to_string(e.child));
      }
      primary_parent_[slot(e.child)] = &e;
    }
  }

  // Post-order over the primary tree to collect yields.
  std::vector<char> state(n, 0);
  std::vector<std::size_t> stack{slot(passage.root)};
  while (!stack.empty()) {
    const std::size_t cur = stack.back();
    if (state[cur] == 0) {
      state[cur] = 1;
      for (const Edge* e : primary_children_[cur]) {
        const std::size_t c = slot(e->child);
        if (state[c] != 0) throw ValidationError("primary cycle through node " + to_string(e->child));
        depth_[c] = depth_[cur] + 1;
        stack.push_back(c);
      }
    } else {
      stack.pop_back();
      if (state[cur] == 2) continue;
      state[cur] = 2;
      auto& y = yield_[cur];
      if (const auto& t = passage.nodes[cur].terminal) y.push_back(*t);
      for (const Edge* e : primary_children_[cur]) {
        const auto& cy = yield_[slot(e->child)];
        y.insert(y.end(), cy.begin(), cy.end());
      }
      std::sort(y.begin(), y.end());
      y.erase(std::unique(y.begin(), y.end()), y.end());
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (state[i] != 2) throw ValidationError("unreachable from root over primary edges: node " + to_string(passage.nodes[i].id));
  }

  auto leftmost = [this](const Edge* e) {
    const auto& y = yield_[slot(e->child)];
    return y.empty() ? std::size_t(-1) : y.front();
  };
  for (auto& children : primary_children_) {
    std::stable_sort(children.begin(), children.end(),
                     [&](const Edge* a, const Edge* b) { return leftmost(a) < leftmost(b); });
  }
  for (auto& children : remote_children_) {
    std::stable_sort(children.begin(), children.end(),
                     [&](const Edge* a, const Edge* b) { return leftmost(a) < leftmost(b); });
  }
}

std::size_t PassageIndex::slot(NodeId id) const {
  const auto it = slot_.find(id.value);
  if (it == slot_.end()) throw ConfigError("unknown node: " + to_string(id));
  return it->second;
}

const Node& PassageIndex::node(NodeId id) const { return passage_->nodes[slot(id)]; }

const std::vector<const Edge*>& PassageIndex::primary_children(NodeId id) const {
  return primary_children_[slot(id)];
}

const std::vector<const Edge*>& PassageIndex::remote_children(NodeId id) const {
  return remote_children_[slot(id)];
}

const Edge* PassageIndex::primary_parent(NodeId id) const { return primary_parent_[slot(id)]; }

const std::vector<std::size_t>& PassageIndex::yield(NodeId id) const { return yield_[slot(id)]; }

std::size_t PassageIndex::depth(NodeId id) const { return depth_[slot(id)]; }

std::vector<std::size_t> primary_yield(const Passage& passage, NodeId node) {
  const PassageIndex index(passage);
  return index.yield(node);
}

std::vector<std::string> check_contiguous_yields(const Passage& passage) {
  const PassageIndex index(passage);
  std::vector<std::string> out;
  for (const Node& node : passage.nodes) {
    const auto& y = index.yield(node.id);
    if (!y.empty() && y.back() - y.front() + 1 != y.size()) {
      out.push_back("discontiguous yield: node " + to_string(node.id));
    }
  }
  return out;
}

std::vector<NodeId> non_terminals(const Passage& passage) {
  const PassageIndex index(passage);
  std::vector<NodeId> order;
  std::vector<NodeId> stack{passage.root};
  while (!stack.empty()) {
    const NodeId cur = stack.back();
    stack.pop_back();
    if (index.node(cur).is_terminal()) continue;
    order.push_back(cur);
    const auto& children = index.primary_children(cur);
    for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back((*it)->child);
  }
  return order;
}

PassageBuilder::PassageBuilder(std::string passage_id, std::string language, std::vector<TokenRow> tokens) {
  passage_.passage_id = std::move(passage_id);
  passage_.language = std::move(language);
  passage_.tokens = std::move(tokens);
  root_ = fresh();
  passage_.nodes.push_back(Node{root_, std::nullopt});
  passage_.root = root_;
}

NodeId PassageBuilder::fresh() { return NodeId{next_++}; }

NodeId PassageBuilder::add_terminal(NodeId parent, std::size_t position, Category category) {
  const NodeId id = fresh();
  passage_.nodes.push_back(Node{id, position});
  passage_.edges.push_back(Edge{parent, id, category, false});
  return id;
}

NodeId PassageBuilder::add_non_terminal(NodeId parent, Category category) {
  const NodeId id = fresh();
  passage_.nodes.push_back(Node{id, std::nullopt});
  passage_.edges.push_back(Edge{parent, id, category, false});
  return id;
}

void PassageBuilder::add_remote(NodeId parent, NodeId child, Category category) {
  passage_.edges.push_back(Edge{parent, child, category, true});
}

Passage PassageBuilder::build() && { return std::move(passage_); }

}  // namespace rucca

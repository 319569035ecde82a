#include "rucca/parser.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "rucca/error.hpp"

namespace rucca {

namespace {

bool is_scene_relation(Category c) { return c == Category::S || c == Category::P; }
bool is_scene_or_participant(Category c) { return c == Category::H || c == Category::A; }

std::string span_list(const std::vector<ChildSpan>& spans) {
  std::string out;
  for (const auto& s : spans) out += (out.empty() ? "" : " ") + to_string(s);
  return out.empty() ? "-" : out;
}

/// Merges spans[from..to] (inclusive) into one span with `category`.
void merge_range(std::vector<ChildSpan>& spans, std::size_t from, std::size_t to, Category category) {
  ChildSpan merged{spans[from].start, spans[to].end, category, false};
  spans.erase(spans.begin() + static_cast<std::ptrdiff_t>(from), spans.begin() + static_cast<std::ptrdiff_t>(to) + 1);
  spans.insert(spans.begin() + static_cast<std::ptrdiff_t>(from), merged);
}

void merge_scenes(std::vector<ChildSpan>& spans, const std::vector<TokenRow>& tokens, const DecoderConfig& cfg,
                  std::vector<std::string>& firings) {
  std::vector<bool> licensed(tokens.size(), false);
  for (std::size_t i = 0; i < tokens.size(); ++i) licensed[i] = cfg.verb_upos.count(tokens[i].upos) > 0;
  if (cfg.action_nouns && !tokens.empty()) {
    const auto hits = match(*cfg.action_nouns, tokens);
    for (std::size_t i = 0; i < tokens.size(); ++i) licensed[i] = licensed[i] || hits.flags[i];
  }
  auto qualifies = [&](const ChildSpan& s) {
    if (s.category != Category::H) return false;
    for (std::size_t i = s.start; i < s.end && i < tokens.size(); ++i) {
      if (licensed[i]) return true;
    }
    return false;
  };
  if (std::none_of(spans.begin(), spans.end(), qualifies)) return;

  while (true) {
    std::size_t bad = spans.size();
    for (std::size_t i = 0; i < spans.size(); ++i) {
      if (spans[i].category == Category::H && !qualifies(spans[i])) {
        bad = i;
        break;
      }
    }
    if (bad == spans.size()) return;
    std::size_t target = spans.size();
    for (std::size_t j = bad; j-- > 0;) {
      if (qualifies(spans[j])) {
        target = j;
        break;
      }
    }
    const std::string before = to_string(spans[bad]);
    if (target < spans.size()) {
      firings.push_back("scene-merge " + before + " into " + to_string(spans[target]));
      merge_range(spans, target, bad, Category::H);
      continue;
    }
    for (std::size_t j = bad + 1; j < spans.size(); ++j) {
      if (qualifies(spans[j])) {
        target = j;
        break;
      }
    }
    firings.push_back("scene-merge-forward " + before + " into " + to_string(spans[target]));
    merge_range(spans, bad, target, Category::H);
  }
}

void force_single_relation(std::vector<ChildSpan>& spans, const std::vector<TokenRow>& tokens,
                           const TagDistribution& dist, const DecoderConfig& cfg, std::vector<std::string>& firings) {
  if (spans.empty()) return;
  const std::size_t relations = static_cast<std::size_t>(
      std::count_if(spans.begin(), spans.end(), [](const ChildSpan& s) { return is_scene_relation(s.category); }));
  if (relations == 1) return;

  const std::size_t lo = spans.front().start;
  const std::size_t hi = spans.back().end;
  auto prob = [&](std::size_t t, Category c) {
    const auto row = static_cast<Eigen::Index>(t);
    return std::max(dist.bio(row, static_cast<Eigen::Index>(BioLabel::begin(c).index())),
                    dist.bio(row, static_cast<Eigen::Index>(BioLabel::inside(c).index())));
  };
  // Exact ties (an all-O tagger gives them everywhere) go to a verb, then to the leftmost token.
  std::size_t best = lo;
  double best_p = -1.0;
  bool best_verb = false;
  Category best_c = Category::P;
  for (std::size_t t = lo; t < hi && t < dist.size(); ++t) {
    const double p = prob(t, Category::P);
    const double s = prob(t, Category::S);
    const double m = std::max(p, s);
    const bool verb = cfg.verb_upos.count(tokens[t].upos) > 0;
    if (m > best_p || (m == best_p && verb && !best_verb)) {
      best_p = m;
      best_verb = verb;
      best = t;
      best_c = s > p ? Category::S : Category::P;
    }
  }

  bool placed = false;
  for (auto& span : spans) {
    if (best >= span.start && best < span.end) {
      span.category = best_c;
      placed = true;
    } else if (is_scene_relation(span.category)) {
      span.category = Category::C;
    }
  }
  if (!placed) {
    spans.push_back(ChildSpan{best, best + 1, best_c, false});
    std::sort(spans.begin(), spans.end(), [](const ChildSpan& a, const ChildSpan& b) { return a.start < b.start; });
  }
  firings.push_back("single-relation " + std::to_string(relations) + " S/P -> " + std::string(to_string(best_c)) +
                    " at token " + std::to_string(best));
}

void keep_expressions_whole(std::vector<ChildSpan>& spans, const MweMask& mwe, std::vector<std::string>& firings) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < spans.size() && !changed; ++i) {
      const ChildSpan& left = spans[i];
      const ChildSpan& right = spans[i + 1];
      if (left.end != right.start) continue;
      if (!is_scene_or_participant(left.category) && !is_scene_or_participant(right.category)) continue;
      const std::size_t boundary = left.end;
      for (const auto& m : mwe.spans) {
        if (m.start < boundary && boundary < m.end) {
          // The relation of a scene survives a merge; otherwise the left span wins.
          Category category = left.category;
          if (is_scene_relation(right.category) && !is_scene_relation(left.category)) category = right.category;
          firings.push_back("expression-merge " + to_string(left) + " + " + to_string(right));
          merge_range(spans, i, i + 1, category);
          changed = true;
          break;
        }
      }
    }
  }
}

Category fallback_category(const TokenRow& token) {
  return function_word_upos().count(token.upos) ? Category::F : Category::C;
}

std::vector<ChildSpan> clip_to(const std::vector<ChildSpan>& spans, std::size_t lo, std::size_t hi) {
  std::vector<ChildSpan> out;
  for (auto s : spans) {
    s.start = std::max(s.start, lo);
    s.end = std::min(s.end, hi);
    if (s.start < s.end) out.push_back(s);
  }
  return out;
}

/// Fills tokens of [lo, hi) not covered by any span with single-token fallback spans.
std::vector<ChildSpan> fill_gaps(const std::vector<ChildSpan>& spans, std::size_t lo, std::size_t hi,
                                 const std::vector<TokenRow>& tokens) {
  std::vector<ChildSpan> out;
  std::size_t cursor = lo;
  for (const auto& s : spans) {
    for (; cursor < s.start; ++cursor) out.push_back(ChildSpan{cursor, cursor + 1, fallback_category(tokens[cursor])});
    out.push_back(s);
    cursor = s.end;
  }
  for (; cursor < hi; ++cursor) out.push_back(ChildSpan{cursor, cursor + 1, fallback_category(tokens[cursor])});
  return out;
}

/// Flat scene without a tagger call: the first licensed token (else the first
/// content token, else the first token) becomes the P.
std::vector<ChildSpan> flat_scene(std::size_t lo, std::size_t hi, const std::vector<TokenRow>& tokens,
                                  const DecoderConfig& cfg) {
  auto spans = fill_gaps({}, lo, hi, tokens);
  std::size_t pick = lo;
  bool found = false;
  for (std::size_t t = lo; t < hi && !found; ++t) {
    if (cfg.verb_upos.count(tokens[t].upos)) {
      pick = t;
      found = true;
    }
  }
  for (std::size_t t = lo; t < hi && !found; ++t) {
    if (!function_word_upos().count(tokens[t].upos)) {
      pick = t;
      found = true;
    }
  }
  spans[pick - lo].category = Category::P;
  return spans;
}

class RecursiveParse {
 public:
  RecursiveParse(const Sentence& sentence, const Tagger& tagger, const LexiconSet& lexicons, const DecoderConfig& cfg)
      : sentence_(sentence),
        tagger_(tagger),
        cfg_(cfg),
        mwe_(lexicons.match(sentence.tokens)),
        builder_(sentence.id, sentence.tokens.front().language, sentence.tokens) {}

  ParseResult run() {
    const std::size_t n = sentence_.tokens.size();
    expand(builder_.root(), 0, n, MaskSymbol::root(), 1);
    resolve_remotes();
    Passage passage = std::move(builder_).build();
    auto violations = validate(passage);
    if (violations.empty()) {
      const auto gaps = check_contiguous_yields(passage);
      violations.insert(violations.end(), gaps.begin(), gaps.end());
    }
    if (!violations.empty()) throw ValidationError("parser produced an invalid graph: " + violations.front());
    return ParseResult{std::move(passage), std::move(trace_)};
  }

 private:
  struct RemoteRequest {
    NodeId from;
    ChildSpan span;
  };

  void expand(NodeId node, std::size_t lo, std::size_t hi, MaskSymbol symbol, std::size_t depth) {
    const auto& tokens = sentence_.tokens;
    const std::size_t n = tokens.size();
    TraceStep step;
    step.depth = depth;
    step.focus = TokenSpan{lo, hi};
    step.mask = make_mask(n, lo, hi, symbol);
    const bool scene = symbol.is_category() && symbol.category() == Category::H;

    std::vector<ChildSpan> children;
    if (depth >= cfg_.max_depth && !symbol.is_root()) {
      step.tagger_called = false;
      children = scene ? flat_scene(lo, hi, tokens, cfg_) : fill_gaps({}, lo, hi, tokens);
      step.firings.push_back("max-depth flat node");
    } else {
      MaskedExample example;
      example.passage_id = sentence_.id;
      example.tokens = tokens;
      example.mask = step.mask;
      const TagDistribution dist = tagger_.predict(example);
      if (dist.size() != n) throw NumericError("tagger returned a distribution of the wrong length");
      const DecodedSpans decoded = decode_probs(dist, cfg_.remote_threshold);
      step.decoded = decoded.primary;

      auto primary = clip_to(decoded.primary, lo, hi);
      const bool root_scene = symbol.is_root() && std::none_of(primary.begin(), primary.end(), [](const ChildSpan& s) {
                                return s.category == Category::H;
                              });
      const bool scene_level = scene || root_scene;
      auto filled = fill_gaps(primary, lo, hi, tokens);
      if (filled.size() != primary.size()) {
        step.firings.push_back("fallback " + std::to_string(filled.size() - primary.size()) + " uncovered token(s)");
      }
      auto constrained = apply_constraints(filled, tokens, dist, mwe_, cfg_, scene_level);
      step.firings.insert(step.firings.end(), constrained.firings.begin(), constrained.firings.end());
      children = std::move(constrained.spans);

      // A lone child identical to the focus (span and mask) would be re-tagged
      // with the same input forever.
      if (children.size() == 1 && children.front().start == lo && children.front().end == hi &&
          (hi - lo > 1) && MaskSymbol::of(children.front().category) == symbol) {
        step.firings.push_back("unary repeat flattened");
        auto flat = apply_constraints(fill_gaps({}, lo, hi, tokens), tokens, dist, mwe_, cfg_, scene_level);
        children = std::move(flat.spans);
      }

      for (const auto& r : decoded.remote) {
        if (r.end <= lo || r.start >= hi) {
          step.remote.push_back(r);
          remotes_.push_back(RemoteRequest{node, r});
        } else {
          trace_.notes.push_back("dropped remote " + to_string(r) + " overlapping focus [" + std::to_string(lo) + "," +
                                 std::to_string(hi) + ")");
        }
      }
    }
    step.final_spans = children;
    trace_.steps.push_back(std::move(step));

    for (const auto& child : children) {
      if (child.length() == 1) {
        builder_.add_terminal(node, child.start, child.category);
      } else {
        const NodeId id = builder_.add_non_terminal(node, child.category);
        expand(id, child.start, child.end, MaskSymbol::of(child.category), depth + 1);
      }
    }
  }

  void resolve_remotes() {
    for (const auto& request : remotes_) {
      const Passage& current = builder_.peek();
      const PassageIndex index(current);
      std::optional<NodeId> target;
      std::size_t candidates = 0;
      for (const Node& node : current.nodes) {
        if (node.id == current.root) continue;
        const auto& y = index.yield(node.id);
        if (y.empty() || y.front() != request.span.start || y.back() + 1 != request.span.end ||
            y.size() != request.span.length()) {
          continue;
        }
        ++candidates;
        if (!target || index.depth(node.id) > index.depth(*target)) target = node.id;
      }
      const std::string what = "remote " + to_string(request.span) + " from " + to_string(request.from);
      if (!target) {
        trace_.notes.push_back("dropped " + what + ": no node with that yield");
        continue;
      }
      if (candidates > 1) trace_.notes.push_back(what + ": " + std::to_string(candidates) + " nodes share the yield, deepest chosen");
      if (creates_cycle(current, request.from, *target)) {
        trace_.notes.push_back("dropped " + what + ": would create a cycle");
        continue;
      }
      const bool duplicate = std::any_of(current.edges.begin(), current.edges.end(), [&](const Edge& e) {
        return e.parent == request.from && e.child == *target;
      });
      if (duplicate) {
        trace_.notes.push_back("dropped " + what + ": duplicate edge");
        continue;
      }
      builder_.add_remote(request.from, *target, request.span.category);
    }
  }

  /// True if `from` is reachable from `to`, so an edge from -> to would close a cycle.
  static bool creates_cycle(const Passage& passage, NodeId from, NodeId to) {
    std::unordered_set<std::uint32_t> seen{to.value};
    std::vector<NodeId> stack{to};
    while (!stack.empty()) {
      const NodeId cur = stack.back();
      stack.pop_back();
      if (cur == from) return true;
      for (const Edge& e : passage.edges) {
        if (e.parent == cur && seen.insert(e.child.value).second) stack.push_back(e.child);
      }
    }
    return false;
  }

  const Sentence& sentence_;
  const Tagger& tagger_;
  const DecoderConfig& cfg_;
  MweMask mwe_;
  PassageBuilder builder_;
  ParseTrace trace_;
  std::vector<RemoteRequest> remotes_;
};

}  // namespace

void DecoderConfig::check() const {
  if (!(remote_threshold >= 0.0 && remote_threshold <= 1.0)) throw ConfigError("remote_threshold must lie in [0, 1]");
  if (max_depth < 1) throw ConfigError("max_depth must be at least 1");
}

const std::set<std::string>& function_word_upos() {
  static const std::set<std::string> kSet{"ADP", "DET", "AUX", "CCONJ", "SCONJ", "PART"};
  return kSet;
}

ConstraintResult apply_constraints(const std::vector<ChildSpan>& spans, const std::vector<TokenRow>& tokens,
                                   const TagDistribution& dist, const MweMask& mwe, const DecoderConfig& cfg,
                                   bool at_scene_level) {
  ConstraintResult out;
  out.spans = spans;
  std::sort(out.spans.begin(), out.spans.end(), [](const ChildSpan& a, const ChildSpan& b) { return a.start < b.start; });
  merge_scenes(out.spans, tokens, cfg, out.firings);
  if (at_scene_level) force_single_relation(out.spans, tokens, dist, cfg, out.firings);
  keep_expressions_whole(out.spans, mwe, out.firings);
  return out;
}

std::size_t ParseTrace::tagger_calls() const {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](const TraceStep& s) { return s.tagger_called; }));
}

std::string ParseTrace::to_log(const std::string& sentence_id) const {
  std::ostringstream os;
  for (const auto& s : steps) {
    os << sentence_id << "\tdepth=" << s.depth << "\tfocus=[" << s.focus.start << "," << s.focus.end << ")\tmask=";
    for (std::size_t i = 0; i < s.mask.size(); ++i) os << (i ? " " : "") << to_string(s.mask[i]);
    os << "\tdecoded=" << span_list(s.decoded) << "\tfinal=" << span_list(s.final_spans)
       << "\tremote=" << span_list(s.remote) << "\tfirings=";
    if (s.firings.empty()) os << "-";
    for (std::size_t i = 0; i < s.firings.size(); ++i) os << (i ? "; " : "") << s.firings[i];
    os << '\n';
  }
  for (const auto& note : notes) os << sentence_id << "\tnote\t" << note << '\n';
  return os.str();
}

ParseResult parse(const Sentence& sentence, const Tagger& tagger, const LexiconSet& lexicons,
                  const DecoderConfig& cfg) {
  cfg.check();
  if (sentence.tokens.empty()) throw ConfigError("cannot parse an empty sentence");
  RecursiveParse job(sentence, tagger, lexicons, cfg);
  return job.run();
}

std::vector<BatchItem> parse_batch(const std::vector<Sentence>& sentences, const Tagger& tagger,
                                   const LexiconSet& lexicons, const DecoderConfig& cfg, std::size_t workers) {
  std::vector<BatchItem> out(sentences.size());
  auto work = [&](std::size_t i) {
    try {
      out[i].result = parse(sentences[i], tagger, lexicons, cfg);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, sentences.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < sentences.size(); ++i) work(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < sentences.size(); i = next++) work(i);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace rucca

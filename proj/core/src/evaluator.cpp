#include "rucca/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

#include "rucca/error.hpp"

namespace rucca {

double Counts::precision() const {
  return predicted == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(predicted);
}

double Counts::recall() const { return gold == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(gold); }

double Counts::f1() const {
  const double p = precision();
  const double r = recall();
  return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

EvalReport& EvalReport::operator+=(const EvalReport& o) {
  labeled += o.labeled;
  unlabeled += o.unlabeled;
  for (std::size_t c = 0; c < kCategoryCount; ++c) per_category[c] += o.per_category[c];
  sentences += o.sentences;
  return *this;
}

std::vector<EdgeSignature> signatures(const Passage& passage) {
  const auto violations = validate(passage);
  if (!violations.empty()) {
    throw ValidationError("cannot score invalid passage " + passage.passage_id + ": " + violations.front());
  }
  const PassageIndex index(passage);
  std::vector<EdgeSignature> out;
  out.reserve(passage.edges.size());
  for (const Edge& e : passage.edges) {
    if (index.node(e.parent).is_terminal()) continue;
    out.push_back(EdgeSignature{index.yield(e.child), e.category, e.remote});
  }
  return out;
}

namespace {

/// Size of the multiset intersection of two sorted ranges.
std::size_t intersection_size(const std::vector<EdgeSignature>& a, const std::vector<EdgeSignature>& b) {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

std::vector<EdgeSignature> select(const std::vector<EdgeSignature>& all, bool remote, bool labeled) {
  std::vector<EdgeSignature> out;
  for (const auto& s : all) {
    if (s.remote != remote) continue;
    out.push_back(s);
    if (!labeled) out.back().category = Category::C;
  }
  std::sort(out.begin(), out.end());
  return out;
}

Counts count(const std::vector<EdgeSignature>& pred, const std::vector<EdgeSignature>& gold) {
  return Counts{intersection_size(pred, gold), pred.size(), gold.size()};
}

CellGroup cells(const std::vector<EdgeSignature>& pred, const std::vector<EdgeSignature>& gold, bool labeled) {
  CellGroup g;
  g.primary = count(select(pred, false, labeled), select(gold, false, labeled));
  g.remote = count(select(pred, true, labeled), select(gold, true, labeled));
  g.avg = g.primary;
  g.avg += g.remote;
  return g;
}

nlohmann::ordered_json counts_json(const Counts& c) {
  nlohmann::ordered_json j;
  j["matched"] = c.matched;
  j["predicted"] = c.predicted;
  j["gold"] = c.gold;
  j["precision"] = c.precision();
  j["recall"] = c.recall();
  j["f1"] = c.f1();
  return j;
}

nlohmann::ordered_json report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["sentences"] = r.sentences;
  for (const auto& [name, group] : {std::pair{"labeled", &r.labeled}, std::pair{"unlabeled", &r.unlabeled}}) {
    nlohmann::ordered_json g;
    g["avg"] = counts_json(group->avg);
    g["primary"] = counts_json(group->primary);
    g["remote"] = counts_json(group->remote);
    j[name] = std::move(g);
  }
  nlohmann::ordered_json cats;
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    cats[std::string(to_string(kAllCategories[c]))] = counts_json(r.per_category[c]);
  }
  j["per_category"] = std::move(cats);
  return j;
}

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void render_report(std::ostringstream& os, const std::string& title, const EvalReport& r) {
  char line[256];
  os << title << " (" << r.sentences << " sentence" << (r.sentences == 1 ? "" : "s") << ")\n";
  std::snprintf(line, sizeof line, "%-6s| %-26s| %-26s\n", "", "Labeled", "Unlabeled");
  os << line;
  std::snprintf(line, sizeof line, "%-6s| %8s %8s %8s | %8s %8s %8s\n", "", "Avg", "Prim", "Rem", "Avg", "Prim", "Rem");
  os << line;
  auto row = [&](const char* name, double (Counts::*metric)() const) {
    std::snprintf(line, sizeof line, "%-6s| %8s %8s %8s | %8s %8s %8s\n", name,
                  fixed((r.labeled.avg.*metric)()).c_str(), fixed((r.labeled.primary.*metric)()).c_str(),
                  fixed((r.labeled.remote.*metric)()).c_str(), fixed((r.unlabeled.avg.*metric)()).c_str(),
                  fixed((r.unlabeled.primary.*metric)()).c_str(), fixed((r.unlabeled.remote.*metric)()).c_str());
    os << line;
  };
  row("P", &Counts::precision);
  row("R", &Counts::recall);
  row("F1", &Counts::f1);
  os << "Per-category F1 (labeled, primary + remote)\n";
  for (Category c : kAllCategories) {
    std::snprintf(line, sizeof line, "%7s", std::string(to_string(c)).c_str());
    os << line;
  }
  os << '\n';
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    std::snprintf(line, sizeof line, "%7s", fixed(r.per_category[c].f1(), 3).c_str());
    os << line;
  }
  os << "\n";
}

}  // namespace

EvalReport score(const Passage& pred, const Passage& gold) {
  if (pred.tokens.size() != gold.tokens.size()) {
    throw ValidationError("token mismatch between prediction and gold for " + gold.passage_id);
  }
  for (std::size_t i = 0; i < pred.tokens.size(); ++i) {
    if (pred.tokens[i].form != gold.tokens[i].form) {
      throw ValidationError("token mismatch between prediction and gold for " + gold.passage_id + " at token " +
                            std::to_string(i));
    }
  }
  const auto ps = signatures(pred);
  const auto gs = signatures(gold);
  EvalReport r;
  r.sentences = 1;
  r.labeled = cells(ps, gs, true);
  r.unlabeled = cells(ps, gs, false);
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    std::vector<EdgeSignature> pc;
    std::vector<EdgeSignature> gc;
    for (const auto& s : ps) {
      if (s.category == kAllCategories[c]) pc.push_back(s);
    }
    for (const auto& s : gs) {
      if (s.category == kAllCategories[c]) gc.push_back(s);
    }
    std::sort(pc.begin(), pc.end());
    std::sort(gc.begin(), gc.end());
    r.per_category[c] = count(pc, gc);
  }
  return r;
}

bool is_mono_scene(const Passage& gold) {
  std::size_t scenes = 0;
  for (const Edge& e : gold.edges) {
    if (!e.remote && e.category == Category::H) ++scenes;
  }
  return scenes <= 1;
}

CorpusReport score_corpus(const std::vector<Passage>& predicted, const std::vector<Passage>& gold) {
  if (predicted.size() != gold.size()) {
    throw ValidationError("prediction/gold count mismatch: " + std::to_string(predicted.size()) + " vs " +
                          std::to_string(gold.size()));
  }
  CorpusReport out;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const EvalReport r = score(predicted[i], gold[i]);
    out.all += r;
    (is_mono_scene(gold[i]) ? out.mono_scene : out.multi_scene) += r;
  }
  return out;
}

std::string render_text(const CorpusReport& report) {
  std::ostringstream os;
  os << "# Avg = micro-average over primary and remote edges pooled\n";
  render_report(os, "All", report.all);
  os << '\n';
  render_report(os, "Mono-scene", report.mono_scene);
  os << '\n';
  render_report(os, "Multi-scene", report.multi_scene);
  return os.str();
}

std::string render_json(const CorpusReport& report) {
  nlohmann::ordered_json j;
  j["avg_definition"] = "micro";
  j["all"] = report_json(report.all);
  j["mono_scene"] = report_json(report.mono_scene);
  j["multi_scene"] = report_json(report.multi_scene);
  return j.dump(2) + "\n";
}

}  // namespace rucca

#include "rucca/corpus.hpp"

#include <fstream>
#include <initializer_list>
#include <nlohmann/json.hpp>
#include <sstream>

#include "rucca/error.hpp"
#include "rucca/text.hpp"

namespace rucca {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kPassageFormat = "rucca-passages";
constexpr std::string_view kExampleFormat = "rucca-masked-examples";
constexpr int kFormatVersion = 1;

Json header(std::string_view format) {
  Json h;
  h["format"] = format;
  h["version"] = kFormatVersion;
  return h;
}

void expect_keys(const Json& obj, std::initializer_list<std::string_view> required,
                 std::initializer_list<std::string_view> optional_tail, const std::string& what) {
  if (!obj.is_object()) throw SchemaError(what + " must be an object");
  auto it = obj.begin();
  for (auto key : required) {
    if (it == obj.end()) throw SchemaError(what + ": missing field \"" + std::string(key) + "\"");
    if (it.key() != key) {
      if (obj.contains(std::string(key))) {
        throw SchemaError(what + ": field \"" + std::string(key) + "\" out of order");
      }
      throw SchemaError(what + ": missing field \"" + std::string(key) + "\"");
    }
    ++it;
  }
  for (auto key : optional_tail) {
    if (it != obj.end() && it.key() == key) ++it;
  }
  if (it != obj.end()) throw SchemaError(what + ": unknown field \"" + it.key() + "\"");
}

const std::string& as_string(const Json& j, const std::string& what) {
  if (!j.is_string()) throw SchemaError(what + " must be a string");
  return j.get_ref<const std::string&>();
}

std::int64_t as_int(const Json& j, const std::string& what) {
  if (!j.is_number_integer()) throw SchemaError(what + " must be an integer");
  return j.get<std::int64_t>();
}

Json token_to_json(const TokenRow& t) {
  Json j;
  j["form"] = t.form;
  j["upos"] = t.upos;
  j["xpos"] = t.xpos ? Json(*t.xpos) : Json(nullptr);
  Json morph = Json::object();
  for (const auto& [k, v] : t.morph) morph[k] = v;
  j["morph"] = std::move(morph);
  if (!t.head) {
    j["head"] = nullptr;
  } else if (*t.head == TokenRow::kRootHead) {
    j["head"] = "root";
  } else {
    j["head"] = *t.head;
  }
  j["deprel"] = t.deprel;
  j["language"] = t.language;
  return j;
}

TokenRow token_from_json(const Json& j) {
  expect_keys(j, {"form", "upos", "xpos", "morph", "head", "deprel", "language"}, {}, "token");
  TokenRow t;
  t.form = as_string(j["form"], "token.form");
  t.upos = as_string(j["upos"], "token.upos");
  if (!j["xpos"].is_null()) t.xpos = as_string(j["xpos"], "token.xpos");
  if (!j["morph"].is_object()) throw SchemaError("token.morph must be an object");
  for (const auto& [k, v] : j["morph"].items()) t.morph[k] = as_string(v, "token.morph value");
  const Json& head = j["head"];
  if (head.is_string()) {
    if (head.get<std::string>() != "root") throw SchemaError("token.head must be an index, \"root\" or null");
    t.head = TokenRow::kRootHead;
  } else if (!head.is_null()) {
    const auto h = as_int(head, "token.head");
    if (h < 0) throw SchemaError("token.head must be non-negative");
    t.head = static_cast<std::int32_t>(h);
  }
  t.deprel = as_string(j["deprel"], "token.deprel");
  t.language = as_string(j["language"], "token.language");
  return t;
}

Json passage_to_json(const Passage& p) {
  Json j;
  j["passage_id"] = p.passage_id;
  j["language"] = p.language;
  Json tokens = Json::array();
  for (const auto& t : p.tokens) tokens.push_back(token_to_json(t));
  j["tokens"] = std::move(tokens);
  Json nodes = Json::array();
  for (const auto& n : p.nodes) {
    Json node;
    node["id"] = n.id.value;
    node["terminal"] = n.terminal ? Json(*n.terminal) : Json(nullptr);
    nodes.push_back(std::move(node));
  }
  j["nodes"] = std::move(nodes);
  Json edges = Json::array();
  for (const auto& e : p.edges) {
    Json edge;
    edge["parent"] = e.parent.value;
    edge["child"] = e.child.value;
    edge["category"] = to_string(e.category);
    edge["remote"] = e.remote;
    edges.push_back(std::move(edge));
  }
  j["edges"] = std::move(edges);
  j["root"] = p.root.value;
  if (!p.aux_tags.empty()) j["aux"] = p.aux_tags;
  return j;
}

NodeId node_id_from_json(const Json& j, const std::string& what) {
  const auto v = as_int(j, what);
  if (v < 0 || v > static_cast<std::int64_t>(UINT32_MAX)) throw SchemaError(what + " out of range");
  return NodeId{static_cast<std::uint32_t>(v)};
}

Passage passage_from_json(const Json& j) {
  expect_keys(j, {"passage_id", "language", "tokens", "nodes", "edges", "root"}, {"aux"}, "passage");
  Passage p;
  p.passage_id = as_string(j["passage_id"], "passage_id");
  p.language = as_string(j["language"], "language");
  if (!j["tokens"].is_array()) throw SchemaError("tokens must be an array");
  for (const auto& t : j["tokens"]) p.tokens.push_back(token_from_json(t));
  if (!j["nodes"].is_array()) throw SchemaError("nodes must be an array");
  for (const auto& n : j["nodes"]) {
    expect_keys(n, {"id", "terminal"}, {}, "node");
    Node node{node_id_from_json(n["id"], "node.id"), std::nullopt};
    if (!n["terminal"].is_null()) {
      const auto pos = as_int(n["terminal"], "node.terminal");
      if (pos < 0) throw SchemaError("node.terminal must be non-negative");
      node.terminal = static_cast<std::size_t>(pos);
    }
    p.nodes.push_back(node);
  }
  if (!j["edges"].is_array()) throw SchemaError("edges must be an array");
  for (const auto& e : j["edges"]) {
    expect_keys(e, {"parent", "child", "category", "remote"}, {}, "edge");
    Edge edge;
    edge.parent = node_id_from_json(e["parent"], "edge.parent");
    edge.child = node_id_from_json(e["child"], "edge.child");
    edge.category = parse_category(as_string(e["category"], "edge.category"));
    if (!e["remote"].is_boolean()) throw SchemaError("edge.remote must be a boolean");
    edge.remote = e["remote"].get<bool>();
    p.edges.push_back(edge);
  }
  p.root = node_id_from_json(j["root"], "root");
  if (j.contains("aux")) {
    if (!j["aux"].is_array()) throw SchemaError("aux must be an array");
    for (const auto& a : j["aux"]) p.aux_tags.push_back(as_string(a, "aux tag"));
    if (p.aux_tags.size() != p.tokens.size()) throw SchemaError("aux must have one tag per token");
  }
  return p;
}

Json example_to_json(const MaskedExample& ex) {
  Json j;
  j["passage_id"] = ex.passage_id;
  j["focus"] = ex.focus_node ? Json(ex.focus_node->value) : Json(nullptr);
  Json tokens = Json::array();
  for (const auto& t : ex.tokens) tokens.push_back(token_to_json(t));
  j["tokens"] = std::move(tokens);
  Json mask = Json::array();
  for (auto m : ex.mask) mask.push_back(to_string(m));
  j["mask"] = std::move(mask);
  if (ex.target_bio) {
    Json bio = Json::array();
    for (auto l : *ex.target_bio) bio.push_back(to_string(l));
    j["target_bio"] = std::move(bio);
  } else {
    j["target_bio"] = nullptr;
  }
  j["target_aux"] = ex.target_aux ? Json(*ex.target_aux) : Json(nullptr);
  return j;
}

MaskedExample example_from_json(const Json& j) {
  expect_keys(j, {"passage_id", "focus", "tokens", "mask", "target_bio", "target_aux"}, {}, "example");
  MaskedExample ex;
  ex.passage_id = as_string(j["passage_id"], "passage_id");
  if (!j["focus"].is_null()) ex.focus_node = node_id_from_json(j["focus"], "focus");
  if (!j["tokens"].is_array() || !j["mask"].is_array()) throw SchemaError("tokens and mask must be arrays");
  for (const auto& t : j["tokens"]) ex.tokens.push_back(token_from_json(t));
  for (const auto& m : j["mask"]) ex.mask.push_back(parse_mask_symbol(as_string(m, "mask symbol")));
  if (!j["target_bio"].is_null()) {
    std::vector<BioLabel> labels;
    for (const auto& l : j["target_bio"]) labels.push_back(parse_bio_label(as_string(l, "BIO label")));
    ex.target_bio = std::move(labels);
  }
  if (!j["target_aux"].is_null()) {
    std::vector<std::string> aux;
    for (const auto& a : j["target_aux"]) aux.push_back(as_string(a, "aux label"));
    ex.target_aux = std::move(aux);
  }
  const auto n = ex.tokens.size();
  if (ex.mask.size() != n || (ex.target_bio && ex.target_bio->size() != n) ||
      (ex.target_aux && ex.target_aux->size() != n)) {
    throw SchemaError("example sequences differ in length");
  }
  return ex;
}

void check_header(const std::string& line, std::string_view format, const std::string& source) {
  Json h;
  try {
    h = Json::parse(line);
  } catch (const Json::parse_error&) {
    throw SchemaError(source + ": line 1: missing or malformed header");
  }
  if (!h.is_object() || !h.contains("format") || h["format"] != format) {
    throw SchemaError(source + ": line 1: expected a " + std::string(format) + " header");
  }
  if (!h.contains("version") || h["version"] != kFormatVersion) {
    throw SchemaError(source + ": line 1: unsupported format version");
  }
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

MaskSymbol MaskSymbol::from_index(std::size_t index) {
  if (index >= kCount) throw SchemaError("mask symbol index out of range");
  return MaskSymbol(static_cast<std::uint8_t>(index));
}

std::string to_string(MaskSymbol symbol) {
  if (symbol.is_outside()) return "O";
  if (symbol.is_root()) return "ROOT";
  return std::string(to_string(symbol.category()));
}

MaskSymbol parse_mask_symbol(std::string_view text) {
  if (text == "O") return MaskSymbol::outside();
  if (text == "ROOT") return MaskSymbol::root();
  if (auto c = try_parse_category(text)) return MaskSymbol::of(*c);
  throw SchemaError("unknown mask symbol \"" + std::string(text) + "\"");
}

std::vector<MaskSymbol> make_mask(std::size_t length, std::size_t start, std::size_t end, MaskSymbol symbol) {
  std::vector<MaskSymbol> mask(length, MaskSymbol::outside());
  for (std::size_t i = start; i < end && i < length; ++i) mask[i] = symbol;
  return mask;
}

std::vector<std::string> aux_labels(const PassageIndex& index) {
  const Passage& p = index.passage();
  if (!p.aux_tags.empty()) return p.aux_tags;
  std::vector<std::string> labels(p.tokens.size(), std::string(kAuxOutside));
  for (const Node& node : p.nodes) {
    if (!node.terminal || *node.terminal >= labels.size()) continue;
    NodeId cur = node.id;
    const Edge* up = index.primary_parent(cur);
    while (up != nullptr && up->parent != p.root) {
      cur = up->parent;
      up = index.primary_parent(cur);
    }
    if (up != nullptr) labels[*node.terminal] = std::string(to_string(up->category));
  }
  return labels;
}

Expansion expand(const Passage& passage) {
  const PassageIndex index(passage);
  const auto aux = aux_labels(index);
  const std::size_t n = passage.tokens.size();
  Expansion out;
  for (NodeId node : non_terminals(passage)) {
    Encoding enc = encode(index, node);
    if (!enc.representable()) {
      out.skipped.push_back(SkippedNode{passage.passage_id, node, enc.failure});
      continue;
    }
    const auto& y = index.yield(node);
    const Edge* parent = index.primary_parent(node);
    const MaskSymbol symbol = parent ? MaskSymbol::of(parent->category) : MaskSymbol::root();
    MaskedExample ex;
    ex.passage_id = passage.passage_id;
    ex.tokens = passage.tokens;
    ex.mask.assign(n, MaskSymbol::outside());
    for (std::size_t pos : y) ex.mask[pos] = symbol;
    ex.target_bio = std::move(enc.labels);
    ex.target_aux = aux;
    ex.focus_node = node;
    out.examples.push_back(std::move(ex));
  }
  return out;
}

std::vector<Passage> read_passages(std::istream& in, const std::string& source) {
  std::vector<Passage> passages;
  std::vector<std::string> problems;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      check_header(line, kPassageFormat, source);
      continue;
    }
    if (text::trim(line).empty()) continue;
    const std::string where = source + ": line " + std::to_string(line_no);
    Passage p;
    try {
      p = passage_from_json(Json::parse(line));
    } catch (const Json::parse_error& e) {
      problems.push_back(where + ": malformed record: " + e.what());
      continue;
    } catch (const SchemaError& e) {
      problems.push_back(where + ": " + e.what());
      continue;
    }
    const auto violations = validate(p);
    if (!violations.empty()) {
      std::string msg = where + ": passage " + p.passage_id + " invalid:";
      for (const auto& v : violations) msg += " [" + v + "]";
      problems.push_back(msg);
      continue;
    }
    passages.push_back(std::move(p));
  }
  if (!problems.empty()) {
    std::string msg;
    bool schema = false;
    for (const auto& p : problems) {
      msg += p + "\n";
      schema = schema || p.find(" invalid:") == std::string::npos;
    }
    if (schema) throw SchemaError(msg);
    throw ValidationError(msg);
  }
  return passages;
}

std::vector<Passage> load_passages(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_passages(in, path.string());
}

void write_passages(const std::vector<Passage>& passages, std::ostream& out) {
  out << header(kPassageFormat).dump() << '\n';
  for (const auto& p : passages) out << passage_to_json(p).dump() << '\n';
}

void save_passages(const std::vector<Passage>& passages, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_passages(passages, out);
  if (!out) throw IoError("failed writing " + path.string());
}

bool is_passage_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  if (!in || !std::getline(in, line)) return false;
  try {
    const auto h = Json::parse(line);
    return h.is_object() && h.contains("format") && h["format"] == kPassageFormat;
  } catch (const Json::parse_error&) {
    return false;
  }
}

void save_examples(const std::vector<MaskedExample>& examples, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << header(kExampleFormat).dump() << '\n';
  for (const auto& ex : examples) out << example_to_json(ex).dump() << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<MaskedExample> load_examples(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<MaskedExample> examples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      check_header(line, kExampleFormat, path.string());
      continue;
    }
    if (text::trim(line).empty()) continue;
    try {
      examples.push_back(example_from_json(Json::parse(line)));
    } catch (const Json::parse_error& e) {
      throw SchemaError(path.string() + ": line " + std::to_string(line_no) + ": malformed record: " + e.what());
    } catch (const SchemaError& e) {
      throw SchemaError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return examples;
}

std::vector<Sentence> read_conll_tokens(std::istream& in, const std::string& default_language,
                                        const std::string& source) {
  std::vector<Sentence> sentences;
  Sentence cur;
  std::string language = default_language;
  std::vector<std::int64_t> raw_heads;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (cur.tokens.empty()) return;
    for (std::size_t i = 0; i < cur.tokens.size(); ++i) {
      const auto h = raw_heads[i];
      if (h == -1) continue;
      if (h == 0) {
        cur.tokens[i].head = TokenRow::kRootHead;
      } else if (static_cast<std::size_t>(h) > cur.tokens.size()) {
        throw SchemaError(source + ": sentence " + cur.id + ": head out of range at token " + std::to_string(i + 1));
      } else {
        cur.tokens[i].head = static_cast<std::int32_t>(h - 1);
      }
    }
    if (cur.id.empty()) cur.id = "s" + std::to_string(sentences.size() + 1);
    sentences.push_back(std::move(cur));
    cur = Sentence{};
    raw_heads.clear();
    language = default_language;
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = text::trim(line);
    if (trimmed.empty()) {
      flush();
      continue;
    }
    if (trimmed.front() == '#') {
      const auto eq = trimmed.find('=');
      if (eq != std::string_view::npos) {
        const auto key = text::trim(trimmed.substr(1, eq - 1));
        const auto value = std::string(text::trim(trimmed.substr(eq + 1)));
        if (key == "sent_id") cur.id = value;
        if (key == "language") language = value;
      }
      continue;
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto cols = text::split(line, '\t');
    const std::string where = source + ": line " + std::to_string(line_no);
    if (cols.size() < 7) throw SchemaError(where + ": expected 7 tab-separated columns");
    if (cols[0] != std::to_string(cur.tokens.size() + 1)) throw SchemaError(where + ": token ids must be 1..n");
    TokenRow t;
    t.form = cols[1];
    t.upos = cols[2];
    if (cols[3] != "_") t.xpos = cols[3];
    if (cols[4] != "_") {
      for (const auto& kv : text::split(cols[4], '|')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw SchemaError(where + ": malformed FEATS entry \"" + kv + "\"");
        t.morph[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
    }
    if (cols[5] == "_") {
      raw_heads.push_back(-1);
    } else {
      try {
        std::size_t used = 0;
        const long h = std::stol(cols[5], &used);
        if (used != cols[5].size() || h < 0) throw std::invalid_argument("head");
        raw_heads.push_back(h);
      } catch (const std::exception&) {
        throw SchemaError(where + ": malformed HEAD \"" + cols[5] + "\"");
      }
    }
    t.deprel = cols[6] == "_" ? std::string() : cols[6];
    t.language = language;
    cur.tokens.push_back(std::move(t));
  }
  flush();
  return sentences;
}

std::vector<Sentence> load_conll_tokens(const std::filesystem::path& path, const std::string& default_language) {
  auto in = open_in(path);
  return read_conll_tokens(in, default_language, path.string());
}

void write_conll_tokens(const std::vector<Sentence>& sentences, std::ostream& out) {
  for (const auto& s : sentences) {
    out << "# sent_id = " << s.id << '\n';
    if (!s.tokens.empty()) out << "# language = " << s.tokens.front().language << '\n';
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const auto& t = s.tokens[i];
      std::string feats;
      for (const auto& [k, v] : t.morph) feats += (feats.empty() ? "" : "|") + k + "=" + v;
      std::string head = "_";
      if (t.head) head = *t.head == TokenRow::kRootHead ? "0" : std::to_string(*t.head + 1);
      out << (i + 1) << '\t' << t.form << '\t' << t.upos << '\t' << (t.xpos ? *t.xpos : "_") << '\t'
          << (feats.empty() ? "_" : feats) << '\t' << head << '\t' << (t.deprel.empty() ? "_" : t.deprel) << '\n';
    }
    out << '\n';
  }
}

}  // namespace rucca

#include "rucca_cli/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "rucca/error.hpp"
#include "rucca/text.hpp"

extern char** environ;

namespace rucca::cli {

namespace {

std::filesystem::path resolve(const std::string& value, const std::filesystem::path& base) {
  if (value.empty()) return {};
  std::filesystem::path p(value);
  if (p.is_relative() && !base.empty()) p = base / p;
  return std::filesystem::absolute(p).lexically_normal();
}

std::size_t to_size(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size() || v < 0) throw std::invalid_argument(value);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a non-negative integer, got \"" + value + "\"");
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got \"" + value + "\"");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  const std::string v = text::lowercase(value);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got \"" + value + "\"");
}

std::vector<std::string> to_list(const std::string& value) {
  std::vector<std::string> out;
  for (const auto& part : text::split(value, ',')) {
    const std::string item(text::trim(part));
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest representation that reads back identically.
  for (int precision = 1; precision <= 17; ++precision) {
    char shorter[64];
    std::snprintf(shorter, sizeof shorter, "%.*g", precision, v);
    if (std::stod(shorter) == v) return shorter;
  }
  return buf;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "train",         "dev",        "test",          "embeddings",    "model",       "expanded",
      "input",         "gold",       "output",        "trace",         "train_log",   "report_json",
      "action_nouns",  "tuned_config", "languages",  "language",      "workers",       "oracle",      "seed",
      "epochs",        "learning_rate", "batch_size", "clip_norm",     "hidden",      "layers",
      "embedding_dim", "aux_weight", "remote_threshold", "max_depth",  "verb_upos"};
  return keys;
}

void set_value(Config& cfg, const std::string& key, const std::string& value, const std::filesystem::path& base) {
  static const std::map<std::string, std::filesystem::path Config::*> paths{
      {"train", &Config::train},   {"dev", &Config::dev},
      {"test", &Config::test},     {"embeddings", &Config::embeddings},
      {"model", &Config::model},   {"expanded", &Config::expanded},
      {"input", &Config::input},   {"gold", &Config::gold},
      {"output", &Config::output}, {"trace", &Config::trace},
      {"train_log", &Config::train_log}, {"report_json", &Config::report_json},
      {"action_nouns", &Config::action_nouns}, {"tuned_config", &Config::tuned_config}};
  if (const auto it = paths.find(key); it != paths.end()) {
    cfg.*(it->second) = resolve(value, base);
    return;
  }
  if (key.rfind("lexicon.", 0) == 0 && key.size() > 8) {
    cfg.lexicons[key.substr(8)] = resolve(value, base);
    return;
  }
  TrainConfig& t = cfg.training;
  if (key == "languages") cfg.languages = to_list(value);
  else if (key == "language") cfg.default_language = value;
  else if (key == "workers") cfg.workers = to_size(key, value);
  else if (key == "oracle") cfg.oracle = to_bool(key, value);
  else if (key == "seed") t.seed = to_size(key, value);
  else if (key == "epochs") t.epochs = to_size(key, value);
  else if (key == "learning_rate") t.learning_rate = to_double(key, value);
  else if (key == "batch_size") t.batch_size = to_size(key, value);
  else if (key == "clip_norm") t.clip_norm = to_double(key, value);
  else if (key == "hidden") t.hidden = to_size(key, value);
  else if (key == "layers") t.layers = to_size(key, value);
  else if (key == "embedding_dim") t.embedding_dim = to_size(key, value);
  else if (key == "aux_weight") t.aux_weight = to_double(key, value);
  else if (key == "remote_threshold") cfg.remote_threshold = to_double(key, value);
  else if (key == "max_depth") cfg.max_depth = to_size(key, value);
  else if (key == "verb_upos") cfg.verb_upos = to_list(value);
  else throw ConfigError("unknown configuration key \"" + key + "\"");
}

void read_config(Config& cfg, std::istream& in, const std::filesystem::path& base, const std::string& source) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string trimmed(text::trim(line));
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(number) + ": expected key = value");
    }
    try {
      set_value(cfg, std::string(text::trim(trimmed.substr(0, eq))), std::string(text::trim(trimmed.substr(eq + 1))), base);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void apply_environment(Config& cfg, char** envp) {
  if (envp == nullptr) return;
  for (char** e = envp; *e != nullptr; ++e) {
    const std::string entry(*e);
    if (entry.rfind(kEnvPrefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    // RUCCA_LEARNING_RATE -> learning_rate, RUCCA_LEXICON_FR -> lexicon.fr
    std::string key = text::lowercase(entry.substr(kEnvPrefix.size(), eq - kEnvPrefix.size()));
    if (key.rfind("lexicon_", 0) == 0) key[7] = '.';
    set_value(cfg, key, entry.substr(eq + 1), std::filesystem::current_path());
  }
}

Config load_config(const std::optional<std::filesystem::path>& path) {
  Config cfg;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot read configuration " + path->string());
    read_config(cfg, in, path->parent_path(), path->string());
    cfg.source = *path;
  }
  apply_environment(cfg, environ);
  return cfg;
}

std::string render_config(const Config& cfg) {
  const TrainConfig& t = cfg.training;
  std::ostringstream os;
  auto path = [&](const char* key, const std::filesystem::path& p) {
    if (!p.empty()) os << key << " = " << p.string() << '\n';
  };
  path("train", cfg.train);
  path("dev", cfg.dev);
  path("test", cfg.test);
  path("embeddings", cfg.embeddings);
  path("model", cfg.model);
  path("expanded", cfg.expanded);
  path("input", cfg.input);
  path("gold", cfg.gold);
  path("output", cfg.output);
  path("trace", cfg.trace);
  path("train_log", cfg.train_log);
  path("report_json", cfg.report_json);
  path("action_nouns", cfg.action_nouns);
  path("tuned_config", cfg.tuned_config);
  for (const auto& [lang, p] : cfg.lexicons) os << "lexicon." << lang << " = " << p.string() << '\n';
  if (!cfg.languages.empty()) os << "languages = " << join(cfg.languages) << '\n';
  os << "language = " << cfg.default_language << '\n'
     << "workers = " << cfg.workers << '\n'
     << "oracle = " << (cfg.oracle ? "true" : "false") << '\n'
     << "seed = " << t.seed << '\n'
     << "epochs = " << t.epochs << '\n'
     << "learning_rate = " << number(t.learning_rate) << '\n'
     << "batch_size = " << t.batch_size << '\n'
     << "clip_norm = " << number(t.clip_norm) << '\n'
     << "hidden = " << t.hidden << '\n'
     << "layers = " << t.layers << '\n'
     << "embedding_dim = " << t.embedding_dim << '\n'
     << "aux_weight = " << number(t.aux_weight) << '\n'
     << "remote_threshold = " << number(cfg.remote_threshold) << '\n'
     << "max_depth = " << cfg.max_depth << '\n'
     << "verb_upos = " << join(cfg.verb_upos) << '\n';
  return os.str();
}

void save_config(const Config& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << render_config(cfg);
}

}  // namespace rucca::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rucca/parser.hpp"
#include "rucca/training.hpp"

namespace rucca::cli {

inline constexpr std::string_view kEnvPrefix = "RUCCA_";

/// Flat key=value configuration shared by every command.
struct Config {
  std::filesystem::path train;
  std::filesystem::path dev;
  std::filesystem::path test;
  std::filesystem::path embeddings;
  std::filesystem::path model;
  std::filesystem::path expanded;
  std::filesystem::path input;
  std::filesystem::path gold;
  std::filesystem::path output;
  std::filesystem::path trace;
  std::filesystem::path train_log;
  std::filesystem::path report_json;
  std::filesystem::path action_nouns;
  /// Where tune writes the updated configuration.
  std::filesystem::path tuned_config;
  std::map<std::string, std::filesystem::path> lexicons;  // language -> file
  std::vector<std::string> languages;                     // empty: keep every language
  std::string default_language = "en";
  std::size_t workers = 1;
  bool oracle = false;
  /// Where the file values came from; relative paths in the file resolve against it.
  std::filesystem::path source;

  TrainConfig training;
  double remote_threshold = DecoderConfig::kDefaultRemoteThreshold;
  std::size_t max_depth = 20;
  std::vector<std::string> verb_upos{"VERB"};
};

/// Keys in the order they are written back out.
const std::vector<std::string>& config_keys();

/// Applies one key=value pair; `base` resolves relative paths. Throws ConfigError.
void set_value(Config& cfg, const std::string& key, const std::string& value,
               const std::filesystem::path& base = {});

/// File first (if given), then RUCCA_* environment variables.
Config load_config(const std::optional<std::filesystem::path>& path);
/// Parses "key = value" lines; '#' starts a comment line.
void read_config(Config& cfg, std::istream& in, const std::filesystem::path& base, const std::string& source);
void apply_environment(Config& cfg, char** envp);

std::string render_config(const Config& cfg);
void save_config(const Config& cfg, const std::filesystem::path& path);

}  // namespace rucca::cli

#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "rucca/error.hpp"
#include "rucca_cli/commands.hpp"

using namespace rucca::cli;

int main(int argc, char** argv) {
  CLI::App app{"Recursive UCCA parser: expand, train, parse, eval, tune"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> trace, output, model;
  std::vector<std::string> overrides;
  bool oracle = false;

  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--seed", seed, "random seed (default 13)");
  app.add_option("--workers", workers, "parallel parse workers");
  app.add_flag("--oracle", oracle, "use gold graphs instead of a trained model");
  app.add_option("--trace", trace, "write a per-step parse trace here");
  app.add_option("-o,--output", output, "output file");
  app.add_option("--model", model, "model checkpoint");
  app.add_option("--set", overrides, "extra key=value overrides (repeatable)");

  auto* expand = app.add_subcommand("expand", "write the masked-example training corpus");
  auto* train = app.add_subcommand("train", "train the tagger and keep the best dev epoch");
  auto* parse = app.add_subcommand("parse", "parse a token file (CoNLL-like or passages)");
  auto* eval = app.add_subcommand("eval", "score predicted passages against gold");
  auto* tune = app.add_subcommand("tune", "sweep the remote threshold on dev");

  std::optional<std::string> parse_input, eval_pred, eval_gold, tune_dev, report_json;
  parse->add_option("input", parse_input, "token or passage file");
  eval->add_option("predicted", eval_pred, "predicted passages");
  eval->add_option("gold", eval_gold, "gold passages");
  eval->add_option("--json", report_json, "also write the structured report here");
  tune->add_option("dev", tune_dev, "gold dev passages");
  for (auto* sub : {expand, train, parse, eval, tune}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    Config cfg = load_config(config_path ? std::optional<std::filesystem::path>(*config_path) : std::nullopt);
    const auto cwd = std::filesystem::current_path();
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw rucca::ConfigError("--set expects key=value, got \"" + kv + "\"");
      set_value(cfg, kv.substr(0, eq), kv.substr(eq + 1), cwd);
    }
    if (seed) cfg.training.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (oracle) cfg.oracle = true;
    if (trace) set_value(cfg, "trace", *trace, cwd);
    if (output) set_value(cfg, "output", *output, cwd);
    if (model) set_value(cfg, "model", *model, cwd);
    if (parse_input) set_value(cfg, "input", *parse_input, cwd);
    if (eval_pred) set_value(cfg, "input", *eval_pred, cwd);
    if (eval_gold) set_value(cfg, "gold", *eval_gold, cwd);
    if (tune_dev) set_value(cfg, "gold", *tune_dev, cwd);
    if (report_json) set_value(cfg, "report_json", *report_json, cwd);

    if (*expand) cmd_expand(cfg, std::cout);
    else if (*train) cmd_train(cfg, std::cout);
    else if (*parse) cmd_parse(cfg, std::cout);
    else if (*eval) cmd_eval(cfg, std::cout);
    else if (*tune) cmd_tune(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "rucca: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kOk;
}

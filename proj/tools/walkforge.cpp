// walkforge: command-line front end for the forecasting pipeline.

#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "walkforge/config.hpp"
#include "walkforge/error.hpp"
#include "walkforge/stages.hpp"

namespace {

using walkforge::RunConfig;

int exit_code(walkforge::ErrorCategory category) {
  switch (category) {
    case walkforge::ErrorCategory::Config: return 2;
    case walkforge::ErrorCategory::Data: return 3;
    case walkforge::ErrorCategory::Numeric: return 4;
  }
  return 1;
}

struct Stage {
  const char* name;
  const char* help;
  std::function<void(const RunConfig&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Walk-forward next-day close forecasting"};
  app.require_subcommand(1);

  const auto print_report = [](const std::string& text) { std::cout << text; };
  const std::vector<Stage> stages = {
      {"synth", "write a synthetic raw CSV", walkforge::stages::run_synth},
      {"featurize", "clean the raw CSV and build the feature cache", walkforge::stages::run_featurize},
      {"select", "rank features with a random forest and keep the top k", walkforge::stages::run_select},
      {"plan", "write the walk-forward batch plan", walkforge::stages::run_plan},
      {"train", "fit every model on every batch", walkforge::stages::run_train},
      {"evaluate", "score every model on every batch", walkforge::stages::run_evaluate},
      {"report", "aggregate metrics into report.json and report.txt",
       [&](const RunConfig& c) { print_report(walkforge::stages::run_report(c)); }},
      {"pipeline", "run every stage in order",
       [&](const RunConfig& c) { print_report(walkforge::stages::run_pipeline(c)); }},
  };

  std::map<std::string, std::string> values;
  std::string config_file;
  std::vector<CLI::App*> subs;
  for (const auto& stage : stages) {
    auto* sub = app.add_subcommand(stage.name, stage.help);
    sub->add_option("--config", config_file, "key=value settings file");
    for (const auto& key : walkforge::config_keys()) {
      std::string flag = "--" + key.name;
      for (auto& ch : flag) {
        if (ch == '_') ch = '-';
      }
      sub->add_option_function<std::string>(
          flag, [&values, name = key.name](const std::string& v) { values[name] = v; }, key.help);
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig config;
    if (!config_file.empty()) walkforge::apply_config_file(config, config_file);
    for (const auto& [key, value] : values) walkforge::apply_setting(config, key, value);
    if (!config.seed) {
      if (const char* env = std::getenv("WALKFORGE_SEED"); env && *env) {
        walkforge::apply_setting(config, "seed", env);
      }
    }
    walkforge::validate(config);
    for (std::size_t i = 0; i < stages.size(); ++i) {
      if (subs[i]->parsed()) stages[i].run(config);
    }
  } catch (const walkforge::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#include <algorithm>

#include "cli_util.hpp"
#include "helpers.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("unknown flag is a config error and writes nothing") {
  const auto dir = cli::scratch("cli_unknown");
  CHECK(cli::run(dir, "pipeline --workdir out --synthetic 700 --seed 1 --no-such-flag 3") == 2);
  CHECK_FALSE(fs::exists(dir / "out"));
  CHECK(cli::run(dir, "frobnicate") == 2);
  CHECK(cli::run(dir, "select --workdir out --k") == 2);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("seed is required and may come from the environment") {
  const auto dir = cli::scratch("cli_seed");
  CHECK(cli::run(dir, "synth --workdir a --synthetic 30") == 2);
  CHECK_FALSE(fs::exists(dir / "a"));
  CHECK(cli::run(dir, "synth --workdir b --synthetic 30", "WALKFORGE_SEED=4") == 0);
  CHECK(cli::run(dir, "synth --workdir c --synthetic 30 --seed 4") == 0);
  CHECK(cli::slurp(dir / "b" / "raw.csv") == cli::slurp(dir / "c" / "raw.csv"));
  CHECK(line_count(cli::slurp(dir / "c" / "raw.csv")) == 1 + 30 + 179);
}

TEST_CASE("bad values and bad data map to exit codes") {
  const auto dir = cli::scratch("cli_codes");
  CHECK(cli::run(dir, "synth --workdir w --synthetic 10 --seed 1 --k zero") == 2);
  CHECK(cli::run(dir, "synth --workdir w --synthetic 10 --seed 1 --lookback 900") == 2);
  {
    std::ofstream csv(dir / "short.csv");
    csv << "date,close\n2020-01-01,1\n";
  }
  CHECK(cli::run(dir, "featurize --workdir w --input short.csv") == 3);
  CHECK(cli::run(dir, "select --workdir empty --seed 1") == 3);
  {
    std::ofstream cfg(dir / "bad.cfg");
    cfg << "colour = blue\n";
  }
  CHECK(cli::run(dir, "plan --workdir w --config bad.cfg") == 2);
}

TEST_CASE("stages chain and match the pipeline") {
  const auto dir = cli::scratch("cli_stages");
  const std::string common = " --workdir out --seed 3 --h1 3 --h2 4 --epochs 2 --train-len 200 --test-len 50 --stride 50";
  const auto staged = dir / "staged";
  const auto piped = dir / "piped";
  REQUIRE(cli::run(staged, "synth --synthetic 350" + common) == 0);
  for (const char* stage : {"featurize", "select", "plan", "train", "evaluate", "report"}) {
    REQUIRE(cli::run(staged, std::string(stage) + " --synthetic 350" + common) == 0);
  }
  REQUIRE(cli::run(piped, "pipeline --synthetic 350" + common) == 0);

  for (const char* file : {"raw.csv", "features.wffm", "importance.csv", "selected.csv", "plan.json",
                           "metrics.json", "predictions.csv", "report.json", "report.txt",
                           "models/proposed_b0.wfnn", "models/svr_b2.wfnn", "models/scaler_b1.json"}) {
    CAPTURE(file);
    CHECK(fs::exists(piped / "out" / file));
    CHECK(cli::slurp(staged / "out" / file) == cli::slurp(piped / "out" / file));
  }

  const auto importance = cli::slurp(piped / "out" / "importance.csv");
  CHECK(line_count(importance) == 852);
  const auto selected = cli::slurp(piped / "out" / "selected.csv");
  CHECK(line_count(selected) == 11);
  CHECK(importance.substr(0, selected.size()) == selected);

  const auto plan = nlohmann::json::parse(cli::slurp(piped / "out" / "plan.json"));
  CHECK(plan["batches"].size() == 3);

  // Rerunning a stage leaves identical artifacts.
  const auto before = cli::slurp(piped / "out" / "models" / "lstm_b1.wfnn");
  REQUIRE(cli::run(piped, "train" + common) == 0);
  CHECK(cli::slurp(piped / "out" / "models" / "lstm_b1.wfnn") == before);
}

TEST_CASE("select keeps the top k") {
  const auto dir = cli::scratch("cli_select");
  REQUIRE(cli::run(dir, "synth --workdir w --synthetic 200 --seed 2") == 0);
  REQUIRE(cli::run(dir, "featurize --workdir w") == 0);
  REQUIRE(cli::run(dir, "select --workdir w --seed 2 --k 10 --forest-trees 20") == 0);
  const auto selected = cli::slurp(dir / "w" / "selected.csv");
  CHECK(selected.rfind("feature,importance\n", 0) == 0);
  CHECK(line_count(selected) == 11);
  CHECK(cli::run(dir, "select --workdir w --seed 2 --k 900") == 2);
}

TEST_CASE("proposed-only desk pipeline has six test batches") {
  const auto dir = cli::scratch("cli_proposed");
  REQUIRE(cli::run(dir, "pipeline --synthetic 1100 --seed 7 --model proposed --h1 16 --h2 32 --svg chart.svg") == 0);
  const auto report = nlohmann::json::parse(cli::slurp(dir / "walkforge_out" / "report.json"));
  std::size_t test_batches = 0;
  for (const auto& r : report["runs"]) {
    if (r["model"] == "proposed" && r["split"] == "test") ++test_batches;
  }
  CHECK(test_batches == 6);
  CHECK(report["plan"]["batches"].size() == 6);
  CHECK(report["reference"]["source"] == "published");
  CHECK(report["aggregates"]["mean"].contains("proposed"));
  CHECK(report["aggregates"]["median"].contains("persistence"));
  CHECK(report["config"]["model"] == "proposed");
  CHECK(cli::slurp(dir / "chart.svg").rfind("<svg", 0) == 0);
  const auto text = cli::slurp(dir / "cli_stdout.txt");
  CHECK(text.rfind("# effective config", 0) == 0);
  CHECK(text.find("Median of Metrics") != std::string::npos);
}

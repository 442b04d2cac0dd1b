#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "walkforge/config.hpp"

using namespace walkforge;

TEST_CASE("defaults") {
  const RunConfig c;
  CHECK(c.k == 10);
  CHECK(c.windows == std::vector<std::size_t>{7, 30, 90});
  CHECK(c.train_len == 500);
  CHECK(c.test_len == 100);
  CHECK(c.stride == 100);
  CHECK(c.hidden1 == 800);
  CHECK(c.hidden2 == 1000);
  CHECK(c.models == std::vector<std::string>{"lr", "svr", "lstm", "proposed"});
  CHECK_NOTHROW(validate(c));
  CHECK_ERRC(c.require_seed(), Errc::InvalidConfig);
}

TEST_CASE("settings are parsed and checked") {
  RunConfig c;
  apply_setting(c, "h1", "16");
  apply_setting(c, "windows", "5,10");
  apply_setting(c, "model", "proposed");
  apply_setting(c, "lr", "0.01");
  apply_setting(c, "fill", "reject");
  apply_setting(c, "seed", "7");
  CHECK(c.hidden1 == 16);
  CHECK(c.windows == std::vector<std::size_t>{5, 10});
  CHECK(c.models == std::vector<std::string>{"proposed"});
  CHECK(c.train.adam.learning_rate == 0.01);
  CHECK(c.clean.fill == ingest::FillMode::Reject);
  CHECK(c.require_seed() == 7);
  apply_setting(c, "model", "all");
  CHECK(c.models.size() == 4);

  CHECK_ERRC(apply_setting(c, "no_such_key", "1"), Errc::UnknownKey);
  CHECK_ERRC(apply_setting(c, "k", "ten"), Errc::InvalidConfig);
  CHECK_ERRC(apply_setting(c, "k", "-3"), Errc::InvalidConfig);
  CHECK_ERRC(apply_setting(c, "model", "arima"), Errc::InvalidConfig);
  CHECK_ERRC(apply_setting(c, "fill", "zero"), Errc::InvalidConfig);
  CHECK_ERRC(apply_setting(c, "dropout", "x"), Errc::InvalidConfig);
}

TEST_CASE("cross-field validation") {
  RunConfig c;
  c.lookback = 600;
  CHECK_ERRC(validate(c), Errc::InvalidConfig);
  c = RunConfig{};
  c.train.dropout_rate = 1.0;
  CHECK_ERRC(validate(c), Errc::InvalidConfig);
  c = RunConfig{};
  c.windows = {1};
  CHECK_ERRC(validate(c), Errc::InvalidConfig);
}

TEST_CASE("config file") {
  const auto path = std::filesystem::temp_directory_path() / "walkforge_config_test.cfg";
  {
    std::ofstream out(path);
    out << "# comment\n\nk = 5\n  epochs=3  \nsvr_c = 10\n";
  }
  RunConfig c;
  apply_config_file(c, path);
  CHECK(c.k == 5);
  CHECK(c.train.epochs == 3);
  CHECK(c.svr.c == 10.0);
  {
    std::ofstream out(path);
    out << "k 5\n";
  }
  CHECK_ERRC(apply_config_file(c, path), Errc::InvalidConfig);
  {
    std::ofstream out(path);
    out << "bogus = 1\n";
  }
  CHECK_ERRC(apply_config_file(c, path), Errc::UnknownKey);
  std::filesystem::remove(path);
  CHECK_ERRC(apply_config_file(c, path), Errc::InvalidConfig);
}

TEST_CASE("effective config round trips") {
  RunConfig c;
  apply_setting(c, "seed", "11");
  apply_setting(c, "h2", "64");
  apply_setting(c, "svr_epsilon", "0.05");
  apply_setting(c, "synth_drift", "0.00012345678901234");
  const auto first = effective_config(c);
  CHECK(first.size() == config_keys().size());
  RunConfig d;
  for (const auto& [k, v] : first) apply_setting(d, k, v);
  CHECK(effective_config(d) == first);
  for (std::size_t i = 0; i < first.size(); ++i) CHECK(first[i].first == config_keys()[i].name);
}

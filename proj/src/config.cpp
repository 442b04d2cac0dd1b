#include "walkforge/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "walkforge/error.hpp"

namespace walkforge {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

Error bad_value(std::string_view key, std::string_view value) {
  return Error(Errc::InvalidConfig, "bad value '" + std::string(value) + "' for " + std::string(key));
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) throw bad_value(key, value);
  return out;
}

double to_double(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty() || !std::isfinite(out)) {
    throw bad_value(key, value);
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw bad_value(key, value);
}

std::vector<std::string> to_list(std::string_view value) {
  std::vector<std::string> out;
  std::stringstream ss{std::string(value)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, std::string>) out += items[i];
    else out += std::to_string(items[i]);
  }
  return out;
}

struct KeyHandler {
  ConfigKey key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<KeyHandler>& handlers() {
  using R = RunConfig;
  using SV = std::string_view;
  static const std::vector<KeyHandler> table = {
      {{"workdir", "directory for every stage artifact"},
       [](R& c, SV v) { c.workdir = trim(v); }, [](const R& c) { return c.workdir.string(); }},
      {{"input", "raw CSV to featurize (default: <workdir>/raw.csv)"},
       [](R& c, SV v) { c.input = trim(v); }, [](const R& c) { return c.input.string(); }},
      {{"synthetic", "generate this many usable rows of synthetic data first"},
       [](R& c, SV v) { c.synthetic = to_u64("synthetic", v); },
       [](const R& c) { return std::to_string(c.synthetic); }},
      {{"synth_initial_price", "synthetic starting price"},
       [](R& c, SV v) { c.synth.initial_price = to_double("synth_initial_price", v); },
       [](const R& c) { return fmt_double(c.synth.initial_price); }},
      {{"synth_drift", "synthetic daily log drift"},
       [](R& c, SV v) { c.synth.drift = to_double("synth_drift", v); },
       [](const R& c) { return fmt_double(c.synth.drift); }},
      {{"synth_volatility", "synthetic daily volatility"},
       [](R& c, SV v) { c.synth.volatility = to_double("synth_volatility", v); },
       [](const R& c) { return fmt_double(c.synth.volatility); }},
      {{"synth_aux_correlation", "loading of auxiliary columns on close"},
       [](R& c, SV v) { c.synth.aux_correlation = to_double("synth_aux_correlation", v); },
       [](const R& c) { return fmt_double(c.synth.aux_correlation); }},
      {{"synth_aux_noise", "auxiliary noise scale (fraction of initial price)"},
       [](R& c, SV v) { c.synth.aux_noise = to_double("synth_aux_noise", v); },
       [](const R& c) { return fmt_double(c.synth.aux_noise); }},
      {{"fill", "missing-value policy: ffill or reject"},
       [](R& c, SV v) {
         const auto s = trim(v);
         if (s == "ffill") c.clean.fill = ingest::FillMode::ForwardFill;
         else if (s == "reject") c.clean.fill = ingest::FillMode::Reject;
         else throw bad_value("fill", v);
       },
       [](const R& c) { return std::string(c.clean.fill == ingest::FillMode::Reject ? "reject" : "ffill"); }},
      {{"fill_cap", "longest run of forward-filled days"},
       [](R& c, SV v) { c.clean.max_consecutive_fill = to_u64("fill_cap", v); },
       [](const R& c) { return std::to_string(c.clean.max_consecutive_fill); }},
      {{"windows", "indicator windows, comma separated"},
       [](R& c, SV v) {
         c.windows.clear();
         for (const auto& w : to_list(v)) c.windows.push_back(to_u64("windows", w));
       },
       [](const R& c) { return join(c.windows); }},
      {{"k", "number of features kept after forest ranking"},
       [](R& c, SV v) { c.k = to_u64("k", v); }, [](const R& c) { return std::to_string(c.k); }},
      {{"forest_trees", "trees in the ranking forest"},
       [](R& c, SV v) { c.forest.n_trees = to_u64("forest_trees", v); },
       [](const R& c) { return std::to_string(c.forest.n_trees); }},
      {{"forest_max_depth", "tree depth cap, 0 for unlimited"},
       [](R& c, SV v) { c.forest.max_depth = to_u64("forest_max_depth", v); },
       [](const R& c) { return std::to_string(c.forest.max_depth); }},
      {{"forest_min_leaf", "minimum samples per leaf"},
       [](R& c, SV v) { c.forest.min_samples_leaf = to_u64("forest_min_leaf", v); },
       [](const R& c) { return std::to_string(c.forest.min_samples_leaf); }},
      {{"forest_mtry", "features tried per split, 0 for ceil(p/3)"},
       [](R& c, SV v) { c.forest.mtry = to_u64("forest_mtry", v); },
       [](const R& c) { return std::to_string(c.forest.mtry); }},
      {{"train_len", "rows per training batch"},
       [](R& c, SV v) { c.train_len = to_u64("train_len", v); },
       [](const R& c) { return std::to_string(c.train_len); }},
      {{"test_len", "rows per test batch"},
       [](R& c, SV v) { c.test_len = to_u64("test_len", v); },
       [](const R& c) { return std::to_string(c.test_len); }},
      {{"stride", "offset between consecutive batches"},
       [](R& c, SV v) { c.stride = to_u64("stride", v); },
       [](const R& c) { return std::to_string(c.stride); }},
      {{"lookback", "time steps per model input window"},
       [](R& c, SV v) { c.lookback = to_u64("lookback", v); },
       [](const R& c) { return std::to_string(c.lookback); }},
      {{"h1", "hidden units of the first recurrent layer"},
       [](R& c, SV v) { c.hidden1 = to_u64("h1", v); },
       [](const R& c) { return std::to_string(c.hidden1); }},
      {{"h2", "hidden units of the second recurrent layer"},
       [](R& c, SV v) { c.hidden2 = to_u64("h2", v); },
       [](const R& c) { return std::to_string(c.hidden2); }},
      {{"epochs", "training epochs"},
       [](R& c, SV v) { c.train.epochs = to_u64("epochs", v); },
       [](const R& c) { return std::to_string(c.train.epochs); }},
      {{"batch_size", "mini-batch size"},
       [](R& c, SV v) { c.train.batch_size = to_u64("batch_size", v); },
       [](const R& c) { return std::to_string(c.train.batch_size); }},
      {{"lr", "Adam learning rate"},
       [](R& c, SV v) { c.train.adam.learning_rate = to_double("lr", v); },
       [](const R& c) { return fmt_double(c.train.adam.learning_rate); }},
      {{"beta1", "Adam first-moment decay"},
       [](R& c, SV v) { c.train.adam.beta1 = to_double("beta1", v); },
       [](const R& c) { return fmt_double(c.train.adam.beta1); }},
      {{"beta2", "Adam second-moment decay"},
       [](R& c, SV v) { c.train.adam.beta2 = to_double("beta2", v); },
       [](const R& c) { return fmt_double(c.train.adam.beta2); }},
      {{"adam_eps", "Adam epsilon"},
       [](R& c, SV v) { c.train.adam.epsilon = to_double("adam_eps", v); },
       [](const R& c) { return fmt_double(c.train.adam.epsilon); }},
      {{"clip", "global gradient-norm clip, 0 disables"},
       [](R& c, SV v) { c.train.adam.clip_norm = to_double("clip", v); },
       [](const R& c) { return fmt_double(c.train.adam.clip_norm); }},
      {{"dropout", "dropout rate after each recurrent layer"},
       [](R& c, SV v) { c.train.dropout_rate = to_double("dropout", v); },
       [](const R& c) { return fmt_double(c.train.dropout_rate); }},
      {{"svr_c", "SVR box constraint"},
       [](R& c, SV v) { c.svr.c = to_double("svr_c", v); },
       [](const R& c) { return fmt_double(c.svr.c); }},
      {{"svr_epsilon", "SVR tube half-width (scaled units)"},
       [](R& c, SV v) { c.svr.epsilon = to_double("svr_epsilon", v); },
       [](const R& c) { return fmt_double(c.svr.epsilon); }},
      {{"svr_gamma", "RBF width, 0 for 1/(lookback*k)"},
       [](R& c, SV v) { c.svr.gamma = to_double("svr_gamma", v); },
       [](const R& c) { return fmt_double(c.svr.gamma); }},
      {{"svr_tol", "SMO stopping tolerance"},
       [](R& c, SV v) { c.svr.tol = to_double("svr_tol", v); },
       [](const R& c) { return fmt_double(c.svr.tol); }},
      {{"svr_max_iter", "SMO iteration cap"},
       [](R& c, SV v) { c.svr.max_iter = to_u64("svr_max_iter", v); },
       [](const R& c) { return std::to_string(c.svr.max_iter); }},
      {{"ridge", "diagonal jitter of the linear baseline"},
       [](R& c, SV v) { c.ridge = to_double("ridge", v); },
       [](const R& c) { return fmt_double(c.ridge); }},
      {{"model", "models to train: all or a comma list of lr,svr,lstm,proposed"},
       [](R& c, SV v) {
         const auto items = to_list(v);
         if (items.size() == 1 && items[0] == "all") {
           c.models = {"lr", "svr", "lstm", "proposed"};
           return;
         }
         if (items.empty()) throw bad_value("model", v);
         for (const auto& m : items) {
           if (m != "lr" && m != "svr" && m != "lstm" && m != "proposed") throw bad_value("model", v);
         }
         c.models = items;
       },
       [](const R& c) { return join(c.models); }},
      {{"seed", "seed for every stochastic stage (fallback: WALKFORGE_SEED)"},
       [](R& c, SV v) { c.seed = to_u64("seed", v); },
       [](const R& c) { return c.seed ? std::to_string(*c.seed) : std::string("unset"); }},
      {{"svg", "optional SVG chart of test predictions written by report"},
       [](R& c, SV v) { c.svg = trim(v); }, [](const R& c) { return c.svg.string(); }},
      {{"mape_percent", "render MAPE as percent in the text table"},
       [](R& c, SV v) { c.mape_percent = to_bool("mape_percent", v); },
       [](const R& c) { return std::string(c.mape_percent ? "true" : "false"); }},
  };
  return table;
}

}  // namespace

std::uint64_t RunConfig::require_seed() const {
  if (!seed) throw Error(Errc::InvalidConfig, "no seed: pass --seed or set WALKFORGE_SEED");
  return *seed;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& h : handlers()) out.push_back(h.key);
    return out;
  }();
  return keys;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  for (const auto& h : handlers()) {
    if (h.key.name == key) {
      h.set(config, value);
      return;
    }
  }
  throw Error(Errc::UnknownKey, std::string(key));
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidConfig, "cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::InvalidConfig, path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    apply_setting(config, trim(std::string_view(text).substr(0, eq)),
                  trim(std::string_view(text).substr(eq + 1)));
  }
}

void validate(const RunConfig& c) {
  const auto fail = [](const std::string& what) { throw Error(Errc::InvalidConfig, what); };
  if (c.windows.empty()) fail("windows must not be empty");
  for (const auto w : c.windows) {
    if (w < 2) fail("every window must be >= 2");
  }
  if (c.k < 1) fail("k must be >= 1");
  if (c.forest.n_trees < 1 || c.forest.min_samples_leaf < 1) fail("forest_trees and forest_min_leaf must be >= 1");
  if (c.train_len < 1 || c.test_len < 1 || c.stride < 1) fail("train_len, test_len, stride must be >= 1");
  if (c.lookback < 1) fail("lookback must be >= 1");
  if (c.train_len < c.lookback + 1) fail("train_len must exceed lookback");
  if (c.hidden1 < 1 || c.hidden2 < 1) fail("h1 and h2 must be >= 1");
  if (c.train.epochs < 1 || c.train.batch_size < 1) fail("epochs and batch_size must be >= 1");
  const auto& a = c.train.adam;
  if (!(a.learning_rate > 0)) fail("lr must be positive");
  if (!(a.beta1 > 0 && a.beta1 < 1 && a.beta2 > 0 && a.beta2 < 1)) fail("beta1/beta2 must lie in (0,1)");
  if (!(a.epsilon > 0)) fail("adam_eps must be positive");
  if (a.clip_norm < 0) fail("clip must be >= 0");
  if (!(c.train.dropout_rate >= 0 && c.train.dropout_rate < 1)) fail("dropout must lie in [0,1)");
  if (!(c.svr.c > 0 && c.svr.epsilon > 0 && c.svr.tol > 0) || c.svr.gamma < 0) {
    fail("svr_c, svr_epsilon, svr_tol must be positive and svr_gamma >= 0");
  }
  if (c.svr.max_iter < 1) fail("svr_max_iter must be >= 1");
  if (c.ridge < 0) fail("ridge must be >= 0");
  if (!(c.synth.volatility > 0)) fail("synth_volatility must be positive");
  if (!(c.synth.initial_price > 0) || !(c.synth.aux_noise > 0) || c.synth.aux_correlation < 0) {
    fail("synth_initial_price and synth_aux_noise must be positive");
  }
}

std::vector<std::pair<std::string, std::string>> effective_config(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& h : handlers()) out.emplace_back(h.key.name, h.get(config));
  return out;
}

}  // namespace walkforge

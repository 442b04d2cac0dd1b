#include "walkforge/stages.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "walkforge/baselines.hpp"
#include "walkforge/error.hpp"
#include "walkforge/evalreport.hpp"
#include "walkforge/forest.hpp"
#include "walkforge/ingest.hpp"
#include "walkforge/nets.hpp"

namespace walkforge::stages {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::BadArtifact, "missing artifact " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::BadArtifact, "cannot write " + path.string());
  out << text;
}

std::ofstream open_binary(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::BadArtifact, "cannot write " + path.string());
  return out;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::BadArtifact, "missing artifact " + path.string());
  return in;
}

std::uint64_t model_seed(std::uint64_t seed, const std::string& model, std::size_t batch) {
  return nets::mix_seed(nets::mix_seed(seed, static_cast<std::uint64_t>(evalreport::model_rank(model))),
                        batch);
}

Matrix flatten(const splitter::SampleSet& samples) {
  const std::size_t width = samples.lookback * samples.n_features;
  Matrix out(samples.size(), width);
  std::copy(samples.inputs.begin(), samples.inputs.end(), out.flat().begin());
  return out;
}

splitter::WalkForwardPlan load_plan(const Artifacts& art) {
  return splitter::plan_from_json(read_text(art.plan));
}

double svr_gamma(const RunConfig& config, std::size_t k) {
  return config.svr.gamma > 0 ? config.svr.gamma
                              : 1.0 / static_cast<double>(config.lookback * k);
}

// Absolute-row batch: the plan is expressed in usable-row coordinates.
splitter::Batch absolute(const splitter::Batch& b, std::size_t offset) {
  return {{b.train.begin + offset, b.train.end + offset}, {b.test.begin + offset, b.test.end + offset}};
}

std::vector<double> predict_scaled(const std::string& model, const fs::path& file,
                                   const splitter::SampleSet& samples) {
  auto in = open_input(file);
  if (model == "lr") {
    const auto m = baselines::load_linear(in);
    std::vector<double> out;
    for (std::size_t i = 0; i < samples.size(); ++i) out.push_back(baselines::predict_linear(m, samples.sample(i)));
    return out;
  }
  if (model == "svr") {
    const auto m = baselines::load_svr(in);
    std::vector<double> out;
    for (std::size_t i = 0; i < samples.size(); ++i) out.push_back(baselines::predict_svr(m, samples.sample(i)));
    return out;
  }
  return nets::predict_all(nets::load(in), samples);
}

}  // namespace

Artifacts::Artifacts(const fs::path& workdir)
    : root(workdir),
      raw_csv(workdir / "raw.csv"),
      features(workdir / "features.wffm"),
      importance(workdir / "importance.csv"),
      selected(workdir / "selected.csv"),
      plan(workdir / "plan.json"),
      models(workdir / "models"),
      metrics(workdir / "metrics.json"),
      predictions(workdir / "predictions.csv"),
      report_json(workdir / "report.json"),
      report_txt(workdir / "report.txt") {}

fs::path Artifacts::model_file(const std::string& model, std::size_t batch) const {
  return models / (model + "_b" + std::to_string(batch) + ".wfnn");
}

fs::path Artifacts::loss_file(const std::string& model, std::size_t batch) const {
  return models / (model + "_b" + std::to_string(batch) + "_loss.csv");
}

fs::path Artifacts::scaler_file(std::size_t batch) const {
  return models / ("scaler_b" + std::to_string(batch) + ".json");
}

BatchData prepare_batch(const indicators::FeatureMatrix& fm, const std::vector<std::string>& selected,
                        const splitter::Batch& batch, std::size_t lookback) {
  std::vector<std::size_t> cols;
  std::vector<std::string> names = selected;
  for (const auto& name : selected) cols.push_back(fm.column_index(name));
  const std::size_t close_col = fm.column_index("close");
  cols.push_back(close_col);
  names.emplace_back("close");

  const std::size_t n = fm.rows();
  if (batch.test.end > n) throw Error(Errc::TooShort, "batch exceeds feature rows");
  Matrix sub(n, cols.size());
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < cols.size(); ++j) sub(t, j) = fm.values(t, cols[j]);
  }

  BatchData data;
  data.scaler = scaling::fit(sub, batch.train, names);
  const Matrix scaled = scaling::transform(sub, data.scaler);
  const std::size_t k = selected.size();
  Matrix features(n, k);
  std::vector<double> close_scaled(n);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) features(t, j) = scaled(t, j);
    close_scaled[t] = scaled(t, k);
  }
  data.train = splitter::make_windows(features, close_scaled, batch.train, lookback);
  data.test = splitter::make_target_windows(features, close_scaled, batch.test, lookback);
  for (const auto t : data.train.rows) data.train_actual.push_back(fm.values(t + 1, close_col));
  for (const auto t : data.test.rows) data.test_actual.push_back(fm.values(t + 1, close_col));
  return data;
}

std::vector<std::string> read_selected(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::vector<std::string> names;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    names.push_back(line.substr(0, line.find(',')));
  }
  if (names.empty()) throw Error(Errc::BadArtifact, "no selected features in " + path.string());
  return names;
}

void run_synth(const RunConfig& config) {
  if (config.synthetic == 0) throw Error(Errc::InvalidConfig, "synth needs --synthetic N");
  const std::uint64_t seed = config.require_seed();
  const Artifacts art(config.workdir);
  fs::create_directories(art.root);
  const std::size_t rows = config.synthetic + indicators::warmup_rows(config.windows);
  const auto series = ingest::synthesize(rows, seed, config.synth);
  ingest::write_csv(series, art.raw_csv);
}

void run_featurize(const RunConfig& config) {
  const Artifacts art(config.workdir);
  fs::create_directories(art.root);
  const fs::path input = config.input.empty() ? art.raw_csv : config.input;
  const auto raw = ingest::clean(ingest::load_csv(input), config.clean);
  const auto fm = indicators::expand_features(raw, config.windows);
  indicators::save_cache(fm, art.features);
}

void run_select(const RunConfig& config) {
  const Artifacts art(config.workdir);
  const auto fm = indicators::load_cache(art.features);
  if (config.k > fm.cols()) {
    throw Error(Errc::KTooLarge, "k=" + std::to_string(config.k) + " exceeds " + std::to_string(fm.cols()));
  }
  const std::size_t u = fm.usable_from;
  const std::size_t n = fm.rows();
  if (n < u + 3) throw Error(Errc::SeriesTooShort, "too few usable rows for feature ranking");

  // Dataset-level ranking: scale every usable row, predict next-day close.
  Matrix usable(n - u, fm.cols());
  for (std::size_t t = u; t < n; ++t) {
    std::copy(fm.values.row(t).begin(), fm.values.row(t).end(), usable.row(t - u).begin());
  }
  const auto scaler = scaling::fit(usable, {0, usable.rows()}, fm.names);
  const Matrix scaled = scaling::transform(usable, scaler);
  const std::size_t close_col = fm.column_index("close");
  Matrix x(scaled.rows() - 1, scaled.cols());
  std::vector<double> y(scaled.rows() - 1);
  for (std::size_t r = 0; r + 1 < scaled.rows(); ++r) {
    std::copy(scaled.row(r).begin(), scaled.row(r).end(), x.row(r).begin());
    y[r] = scaled(r + 1, close_col);
  }

  auto forest_config = config.forest;
  forest_config.seed = config.require_seed();
  const auto forest = forest::fit_forest(x, y, forest_config);
  const auto ranking = forest::importances(forest);

  std::ofstream all(art.importance, std::ios::binary);
  if (!all) throw Error(Errc::BadArtifact, "cannot write " + art.importance.string());
  forest::write_importance_csv(ranking, fm.names, all);
  std::ofstream top(art.selected, std::ios::binary);
  if (!top) throw Error(Errc::BadArtifact, "cannot write " + art.selected.string());
  forest::write_importance_csv(ranking, fm.names, top, config.k);
}

void run_plan(const RunConfig& config) {
  const Artifacts art(config.workdir);
  const auto fm = indicators::load_cache(art.features);
  const auto plan = splitter::make_batches(fm.rows() - fm.usable_from, config.train_len,
                                           config.test_len, config.stride);
  write_text(art.plan, splitter::plan_to_json(plan) + "\n");
}

void run_train(const RunConfig& config) {
  const Artifacts art(config.workdir);
  const std::uint64_t seed = config.require_seed();
  const auto fm = indicators::load_cache(art.features);
  const auto selected = read_selected(art.selected);
  const auto plan = load_plan(art);
  fs::create_directories(art.models);

  for (std::size_t b = 0; b < plan.batches.size(); ++b) {
    const auto data = prepare_batch(fm, selected, absolute(plan.batches[b], fm.usable_from), config.lookback);
    write_text(art.scaler_file(b), scaling::to_json(data.scaler) + "\n");
    for (const auto& model : config.models) {
      const std::uint64_t mseed = model_seed(seed, model, b);
      auto out = open_binary(art.model_file(model, b));
      if (model == "lr") {
        baselines::save(baselines::fit_linear(flatten(data.train), data.train.targets, config.ridge), out);
      } else if (model == "svr") {
        auto params = config.svr;
        params.gamma = svr_gamma(config, selected.size());
        params.seed = mseed;
        const auto svr = baselines::fit_svr(flatten(data.train), data.train.targets, params);
        if (!svr.converged) {
          std::fprintf(stderr, "warning: SVR batch %zu stopped at %zu iterations (violation %.3g)\n", b,
                       svr.iterations, svr.max_violation);
        }
        baselines::save(svr, out);
      } else {
        const nets::NetworkShape shape{selected.size(), config.hidden1, config.hidden2,
                                       model == "proposed"};
        auto net = nets::Network::initialized(shape, config.train.dropout_rate, mseed);
        auto train_config = config.train;
        train_config.seed = mseed;
        const auto history = nets::train(net, data.train, train_config);
        nets::save(net, out);
        std::ofstream loss(art.loss_file(model, b), std::ios::binary);
        nets::write_loss_csv(history, loss);
      }
    }
  }
}

void run_evaluate(const RunConfig& config) {
  const Artifacts art(config.workdir);
  const auto fm = indicators::load_cache(art.features);
  const auto selected = read_selected(art.selected);
  const auto plan = load_plan(art);
  const std::size_t close_col = fm.column_index("close");
  const std::vector<double> close_usd = fm.values.column(close_col);
  const std::size_t close_scaled_col = selected.size();

  std::vector<evalreport::BatchMetrics> runs;
  std::ofstream preds_out(art.predictions, std::ios::binary);
  if (!preds_out) throw Error(Errc::BadArtifact, "cannot write " + art.predictions.string());
  preds_out << "model,batch,split,row,date,actual,predicted\n";
  char buf[160];

  for (std::size_t b = 0; b < plan.batches.size(); ++b) {
    const auto batch = absolute(plan.batches[b], fm.usable_from);
    const auto data = prepare_batch(fm, selected, batch, config.lookback);
    for (const auto& model : config.models) {
      for (const auto split : {evalreport::Split::Train, evalreport::Split::Test}) {
        const bool is_train = split == evalreport::Split::Train;
        const auto& samples = is_train ? data.train : data.test;
        const auto& actual = is_train ? data.train_actual : data.test_actual;
        const auto scaled = predict_scaled(model, art.model_file(model, b), samples);
        std::vector<double> usd(scaled.size());
        for (std::size_t i = 0; i < scaled.size(); ++i) {
          usd[i] = std::max(0.0, scaling::inverse_value(scaled[i], data.scaler, close_scaled_col));
          const std::size_t row = samples.rows[i] + 1;
          std::snprintf(buf, sizeof buf, ",%zu,%s,%zu,%s,%.17g,%.17g\n", b,
                        std::string(evalreport::split_name(split)).c_str(), row,
                        ingest::format_date(fm.dates[row]).c_str(), actual[i], usd[i]);
          preds_out << model << buf;
        }
        runs.push_back({model, b, split, evalreport::metrics(usd, actual)});
      }
    }
    const std::size_t first_train_t = batch.train.begin + config.lookback - 1;
    runs.push_back(evalreport::persistence_baseline(close_usd, {first_train_t, batch.train.end}, b,
                                                    evalreport::Split::Train));
    runs.push_back(evalreport::persistence_baseline(close_usd, {batch.test.begin - 1, batch.test.end}, b,
                                                    evalreport::Split::Test));
  }

  nlohmann::ordered_json j;
  j["runs"] = evalreport::runs_to_json(runs);
  write_text(art.metrics, j.dump(2) + "\n");
}

std::string run_report(const RunConfig& config) {
  const Artifacts art(config.workdir);
  const auto metrics = nlohmann::json::parse(read_text(art.metrics), nullptr, false);
  if (metrics.is_discarded()) throw Error(Errc::BadArtifact, "unreadable " + art.metrics.string());
  const auto report = evalreport::aggregate(evalreport::runs_from_json(metrics.at("runs")));
  const auto plan = nlohmann::json::parse(read_text(art.plan));

  nlohmann::ordered_json cfg;
  std::ostringstream text;
  text << "# effective config\n";
  for (const auto& [key, value] : effective_config(config)) {
    cfg[key] = value;
    text << key << " = " << value << '\n';
  }
  text << '\n' << evalreport::render_table(report, config.mape_percent);

  nlohmann::ordered_json j;
  j["config"] = cfg;
  j["plan"] = plan;
  j["runs"] = evalreport::runs_to_json(report.runs);
  j["aggregates"] = evalreport::aggregates_to_json(report);
  j["reference"] = evalreport::reference_json();
  write_text(art.report_json, j.dump(2) + "\n");
  write_text(art.report_txt, text.str());

  if (!config.svg.empty()) {
    std::istringstream in(read_text(art.predictions));
    std::string line;
    std::getline(in, line);
    std::map<std::size_t, double> actual;
    std::map<std::string, std::vector<evalreport::SeriesPoint>> predicted;
    while (std::getline(in, line)) {
      std::vector<std::string> f;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) f.push_back(cell);
      if (f.size() != 7 || f[2] != "test") continue;
      const std::size_t row = std::stoul(f[3]);
      actual[row] = std::stod(f[5]);
      predicted[f[0]].push_back({row, std::stod(f[6])});
    }
    std::vector<evalreport::SeriesPoint> actual_points;
    for (const auto& [row, v] : actual) actual_points.push_back({row, v});
    evalreport::write_svg_chart(config.svg, actual_points, predicted);
  }
  return text.str();
}

std::string run_pipeline(const RunConfig& config) {
  RunConfig effective = config;
  if (config.synthetic > 0) {
    run_synth(config);
    effective.input.clear();
  }
  run_featurize(effective);
  run_select(effective);
  run_plan(effective);
  run_train(effective);
  run_evaluate(effective);
  return run_report(effective);
}

}  // namespace walkforge::stages

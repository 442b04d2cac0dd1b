#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "walkforge/config.hpp"
#include "walkforge/indicators.hpp"
#include "walkforge/scaling.hpp"
#include "walkforge/splitter.hpp"

namespace walkforge::stages {

/// File layout of one run directory.
struct Artifacts {
  explicit Artifacts(const std::filesystem::path& workdir);

  std::filesystem::path root;
  std::filesystem::path raw_csv;
  std::filesystem::path features;
  std::filesystem::path importance;
  std::filesystem::path selected;
  std::filesystem::path plan;
  std::filesystem::path models;
  std::filesystem::path metrics;
  std::filesystem::path predictions;
  std::filesystem::path report_json;
  std::filesystem::path report_txt;

  std::filesystem::path model_file(const std::string& model, std::size_t batch) const;
  std::filesystem::path loss_file(const std::string& model, std::size_t batch) const;
  std::filesystem::path scaler_file(std::size_t batch) const;
};

/// Scaled samples of one walk-forward batch. The scaler covers the selected
/// features followed by the close column; all indices are absolute rows of
/// the feature matrix.
struct BatchData {
  scaling::ScalerParams scaler;
  splitter::SampleSet train;
  splitter::SampleSet test;
  std::vector<double> train_actual;  // USD close at each train target row
  std::vector<double> test_actual;
};

BatchData prepare_batch(const indicators::FeatureMatrix& fm, const std::vector<std::string>& selected,
                        const splitter::Batch& batch, std::size_t lookback);

std::vector<std::string> read_selected(const std::filesystem::path& path);

void run_synth(const RunConfig& config);
void run_featurize(const RunConfig& config);
void run_select(const RunConfig& config);
void run_plan(const RunConfig& config);
void run_train(const RunConfig& config);
void run_evaluate(const RunConfig& config);
/// Writes report.json and report.txt; returns the text report.
std::string run_report(const RunConfig& config);
std::string run_pipeline(const RunConfig& config);

}  // namespace walkforge::stages

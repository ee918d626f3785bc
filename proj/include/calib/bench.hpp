#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "calib/calibrators.hpp"
#include "calib/ece.hpp"
#include "calib/simplex.hpp"
#include "calib/synthetic.hpp"

namespace calib::bench {

// Shared configuration for the experiment drivers and the CLI. Every field
// that affects an output file is echoed into that file's provenance header,
// so a result can be reproduced from the file alone.
struct BenchConfig {
  // Data source: an ingested prediction file, or the synthetic model when
  // beta parameters are set.
  std::string input_path;
  std::optional<double> beta0;
  std::optional<double> beta1;

  std::string output_path;

  // Replication control. When `seeds` is empty, replication k uses
  // base_seed + k.
  std::vector<std::uint64_t> seeds;
  std::size_t replications = 200;
  std::uint64_t base_seed = 1;

  std::vector<std::size_t> n_values;  // strictly increasing
  std::vector<std::string> methods{"ts", "ets", "irm", "irova", "irova-ts"};
  std::vector<std::string> estimators{"kde", "hist-eq15", "hist-dd"};
  int d = 1;

  std::size_t n = 1000;            // synth export size
  std::size_t n_eval = 2000;       // learning-curve evaluation set size
  std::size_t mc_samples = 1000000;  // ground-truth Monte Carlo size
  std::size_t bins = 15;           // equal-width histogram bins
  double bandwidth = 0.0;          // 0 = rule of thumb
  std::size_t grid_points = 2048;
  double eps = 1e-8;               // strictness slope for irm

  bool has_synthetic() const { return beta0.has_value() && beta1.has_value(); }
  synthetic::SyntheticClassifier classifier() const;
  std::vector<std::uint64_t> replication_seeds() const;
};

// The per-estimator aggregate of an estimator benchmark.
struct EstimatorBenchRow {
  std::string estimator;
  int d = 1;
  std::size_t n_e = 0;
  std::string detail;
  double mae = 0.0;     // mean |estimate - ground truth| over replications
  double stderr_mae = 0.0;
  double mean_estimate = 0.0;
};

struct EstimatorBenchResult {
  EceEstimate ground_truth;
  std::vector<EstimatorBenchRow> rows;
};

// Samples n_e points per replication from the synthetic model, estimates
// ECE^d on the class-0 reduction with every requested estimator, and
// aggregates absolute errors against the Monte Carlo ground truth.
EstimatorBenchResult estimator_bench(const BenchConfig& cfg);
std::string run_estimator_bench(const BenchConfig& cfg);  // CSV with provenance header

struct LearningCurveRow {
  std::string method;
  std::size_t n_c = 0;
  std::uint64_t seed = 0;
  std::string metric;  // ece1_kde | gain | gain_lower_bound | accuracy
  double value = 0.0;
};

// Fixed evaluation set, fresh calibration set of each size per replication;
// reports post-calibration top-label ECE^1 (KDE), calibration gain, and
// top-1 accuracy per (method, n_c, seed), plus uncalibrated reference rows.
std::vector<LearningCurveRow> learning_curve(const BenchConfig& cfg);
std::string run_learning_curve(const BenchConfig& cfg);  // CSV with provenance header

// Method-name dispatch used by the CLI and the learning curve.
CalibrationMap fit_by_name(const std::string& method, const LabeledDataset& data,
                           double eps = 1e-8);

// Predictions transformed, labels kept.
LabeledDataset apply_to_dataset(const CalibrationMap& map, const LabeledDataset& data);

// Top-1 accuracy of a dataset's predictions against its labels.
double top1_accuracy(const LabeledDataset& data);

}  // namespace calib::bench

#include "calib/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "calib/io.hpp"
#include "calib/rng.hpp"

namespace calib::bench {

namespace {

// Seed salts keep the evaluation set, the ground truth, and the replication
// streams statistically independent of one another for any base seed.
constexpr std::uint64_t kGroundTruthSalt = 0x67726f756e646d63ULL;
constexpr std::uint64_t kEvalSetSalt = 0x6576616c73657431ULL;

void check_n_values(const std::vector<std::size_t>& n_values) {
  if (n_values.empty()) {
    throw ConfigError("n-values must be nonempty");
  }
  for (std::size_t i = 1; i < n_values.size(); ++i) {
    if (n_values[i] <= n_values[i - 1]) {
      throw ConfigError("n-values must be strictly increasing");
    }
  }
}

std::string u64_list(const std::vector<std::uint64_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(v[i]);
  }
  return s;
}

// Effective configuration echoed into every output file.
std::string provenance(const BenchConfig& cfg, const std::string& experiment) {
  std::string h;
  h += "# experiment=" + experiment + "\n";
  if (!cfg.input_path.empty()) h += "# input=" + cfg.input_path + "\n";
  if (cfg.has_synthetic()) {
    h += "# beta0=" + io::format_full(*cfg.beta0) + "\n";
    h += "# beta1=" + io::format_full(*cfg.beta1) + "\n";
  }
  h += "# d=" + std::to_string(cfg.d) + "\n";
  h += "# base_seed=" + std::to_string(cfg.base_seed) + "\n";
  h += "# replications=" + std::to_string(cfg.replications) + "\n";
  if (!cfg.seeds.empty()) h += "# seeds=" + u64_list(cfg.seeds) + "\n";
  if (!cfg.n_values.empty()) {
    h += "# n_values=";
    for (std::size_t i = 0; i < cfg.n_values.size(); ++i) {
      if (i) h += ' ';
      h += std::to_string(cfg.n_values[i]);
    }
    h += "\n";
  }
  h += "# bins=" + std::to_string(cfg.bins) + "\n";
  h += "# bandwidth=" + (cfg.bandwidth > 0 ? io::format_full(cfg.bandwidth)
                                           : std::string("auto")) + "\n";
  h += "# grid_points=" + std::to_string(cfg.grid_points) + "\n";
  h += "# eps=" + io::format_full(cfg.eps) + "\n";
  return h;
}

// KDE top-label ECE^1, with an exact degenerate-limit fallback: when every
// confidence is identical the prediction distribution is a point mass and
// the ECE is |confidence - outcome rate| (the bandwidth rule is undefined
// there).
double ece1_kde_or_pointmass(const BinaryReducedDataset& reduced, const BenchConfig& cfg) {
  const auto [mn, mx] =
      std::minmax_element(reduced.confidences.begin(), reduced.confidences.end());
  if (*mn == *mx) {
    const double rate =
        std::accumulate(reduced.outcomes.begin(), reduced.outcomes.end(), 0.0) /
        static_cast<double>(reduced.size());
    return std::abs(*mn - rate);
  }
  KdeConfig kde_cfg{cfg.bandwidth, cfg.grid_points};
  return kde_ece(reduced, 1, kde_cfg).value;
}

}  // namespace

synthetic::SyntheticClassifier BenchConfig::classifier() const {
  if (!has_synthetic()) {
    throw ConfigError("synthetic model parameters (beta0, beta1) are required");
  }
  return synthetic::SyntheticClassifier{*beta0, *beta1};
}

std::vector<std::uint64_t> BenchConfig::replication_seeds() const {
  if (!seeds.empty()) return seeds;
  if (replications == 0) {
    throw ConfigError("need at least one replication");
  }
  std::vector<std::uint64_t> out(replications);
  for (std::size_t k = 0; k < replications; ++k) out[k] = base_seed + k;
  return out;
}

CalibrationMap fit_by_name(const std::string& method, const LabeledDataset& data,
                           double eps) {
  if (method == "ts") return fit_temperature(data).map;
  if (method == "ets") return fit_ets(data).map;
  if (method == "irm") return fit_irm(data, eps);
  if (method == "irova") return fit_irova(data);
  if (method == "irova-ts") return fit_composed(data);
  throw ConfigError("unknown method '" + method +
                    "' (expected ts, ets, irm, irova or irova-ts)");
}

LabeledDataset apply_to_dataset(const CalibrationMap& map, const LabeledDataset& data) {
  std::vector<ProbVector> transformed;
  transformed.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    transformed.push_back(apply_map(map, data.prediction(i)));
  }
  return LabeledDataset(std::move(transformed), data.labels());
}

double top1_accuracy(const LabeledDataset& data) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (argmax_class(data.prediction(i)) == data.label(i).class_index) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------
// Estimator benchmark
// ---------------------------------------------------------------------------

EstimatorBenchResult estimator_bench(const BenchConfig& cfg) {
  const synthetic::SyntheticClassifier clf = cfg.classifier();
  check_n_values(cfg.n_values);
  if (cfg.d != 1 && cfg.d != 2) {
    throw ConfigError("d must be 1 or 2");
  }
  const std::set<std::string> allowed{"kde", "hist-eq15", "hist-dd"};
  if (cfg.estimators.empty()) {
    throw ConfigError("need at least one estimator");
  }
  for (const auto& e : cfg.estimators) {
    if (!allowed.count(e)) {
      throw ConfigError("unknown estimator '" + e +
                        "' (expected kde, hist-eq15 or hist-dd)");
    }
  }

  EstimatorBenchResult result;
  result.ground_truth =
      synthetic::ground_truth(clf, cfg.d, cfg.mc_samples, cfg.base_seed ^ kGroundTruthSalt);
  const double gt = result.ground_truth.value;

  const std::vector<std::uint64_t> seeds = cfg.replication_seeds();
  const KdeConfig kde_cfg{cfg.bandwidth, cfg.grid_points};

  for (std::size_t n_e : cfg.n_values) {
    std::vector<std::vector<double>> errors(cfg.estimators.size());
    std::vector<std::vector<double>> estimates(cfg.estimators.size());
    for (std::uint64_t seed : seeds) {
      const synthetic::SyntheticDataset ds = synthetic::sample(n_e, clf, seed);
      const BinaryReducedDataset reduced = classwise_reduce(ds.data, 0);
      for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
        double est = 0.0;
        if (cfg.estimators[e] == "kde") {
          est = kde_ece(reduced, cfg.d, kde_cfg).value;
        } else if (cfg.estimators[e] == "hist-eq15") {
          est = histogram_ece(reduced, cfg.d, HistogramScheme::equal_width(cfg.bins)).value;
        } else {
          est = histogram_ece(reduced, cfg.d, HistogramScheme::equal_frequency()).value;
        }
        estimates[e].push_back(est);
        errors[e].push_back(std::abs(est - gt));
      }
    }
    for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
      const auto& errs = errors[e];
      const double R = static_cast<double>(errs.size());
      const double mae = std::accumulate(errs.begin(), errs.end(), 0.0) / R;
      double var = 0.0;
      for (double v : errs) var += (v - mae) * (v - mae);
      var = errs.size() > 1 ? var / (R - 1.0) : 0.0;

      EstimatorBenchRow row;
      row.estimator = cfg.estimators[e];
      row.d = cfg.d;
      row.n_e = n_e;
      if (cfg.estimators[e] == "kde") {
        row.detail = cfg.bandwidth > 0 ? "h=" + io::format_est(cfg.bandwidth)
                                       : std::string("h=rot");
      } else if (cfg.estimators[e] == "hist-eq15") {
        row.detail = "b=" + std::to_string(cfg.bins);
      } else {
        row.detail = "b=sturges";
      }
      row.mae = mae;
      row.stderr_mae = std::sqrt(var / R);
      row.mean_estimate =
          std::accumulate(estimates[e].begin(), estimates[e].end(), 0.0) / R;
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

std::string run_estimator_bench(const BenchConfig& cfg) {
  const EstimatorBenchResult res = estimator_bench(cfg);
  std::string out = provenance(cfg, "estimator-bench");
  out += "# estimators=";
  for (std::size_t i = 0; i < cfg.estimators.size(); ++i) {
    if (i) out += ' ';
    out += cfg.estimators[i];
  }
  out += "\n# mc_samples=" + std::to_string(cfg.mc_samples) + "\n";
  out += "# ground_truth=" + io::format_est(res.ground_truth.value) + "\n";
  out += "# ground_truth_stderr=" + io::format_est(res.ground_truth.stderr_value) + "\n";
  out += "estimator,d,n_e,detail,mae,stderr,mean_estimate\n";
  for (const auto& row : res.rows) {
    out += row.estimator;
    out += ',' + std::to_string(row.d);
    out += ',' + std::to_string(row.n_e);
    out += ',' + row.detail;
    out += ',' + io::format_est(row.mae);
    out += ',' + io::format_est(row.stderr_mae);
    out += ',' + io::format_est(row.mean_estimate);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Learning curve
// ---------------------------------------------------------------------------

std::vector<LearningCurveRow> learning_curve(const BenchConfig& cfg) {
  check_n_values(cfg.n_values);
  if (cfg.methods.empty()) {
    throw ConfigError("need at least one method");
  }
  const std::set<std::string> known{"ts", "ets", "irm", "irova", "irova-ts"};
  for (const auto& m : cfg.methods) {
    if (!known.count(m)) {
      throw ConfigError("unknown method '" + m +
                        "' (expected ts, ets, irm, irova or irova-ts)");
    }
  }

  const bool from_file = !cfg.input_path.empty();
  std::optional<LabeledDataset> file_data;
  std::vector<std::size_t> pool;  // file rows not reserved for evaluation
  std::optional<LabeledDataset> eval_set;

  if (from_file) {
    file_data = io::read_prediction_csv(cfg.input_path);
    if (cfg.n_eval + cfg.n_values.back() > file_data->size()) {
      throw ConfigError("input has " + std::to_string(file_data->size()) +
                        " rows; need n_eval + max(n_values) = " +
                        std::to_string(cfg.n_eval + cfg.n_values.back()));
    }
    // One seeded shuffle fixes the evaluation rows for every replication.
    std::vector<std::size_t> idx(file_data->size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(cfg.base_seed ^ kEvalSetSalt);
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::swap(idx[i - 1], idx[rng.next_u64() % i]);
    }
    std::vector<ProbVector> zs;
    std::vector<OneHotLabel> ys;
    for (std::size_t i = 0; i < cfg.n_eval; ++i) {
      zs.push_back(file_data->prediction(idx[i]));
      ys.push_back(file_data->label(idx[i]));
    }
    eval_set.emplace(std::move(zs), std::move(ys));
    pool.assign(idx.begin() + static_cast<std::ptrdiff_t>(cfg.n_eval), idx.end());
  } else {
    const synthetic::SyntheticClassifier clf = cfg.classifier();
    eval_set.emplace(synthetic::sample(cfg.n_eval, clf, cfg.base_seed ^ kEvalSetSalt).data);
  }

  const BinaryReducedDataset eval_top = top_label_reduce(*eval_set);
  const double uncal_ece = ece1_kde_or_pointmass(eval_top, cfg);
  const double uncal_acc = top1_accuracy(*eval_set);

  std::vector<LearningCurveRow> rows;
  const std::vector<std::uint64_t> seeds = cfg.replication_seeds();
  for (std::size_t n_c : cfg.n_values) {
    for (std::uint64_t seed : seeds) {
      std::optional<LabeledDataset> calib_set;
      if (from_file) {
        // Draw n_c calibration rows from the non-evaluation pool.
        std::vector<std::size_t> draw = pool;
        Rng rng(seed);
        for (std::size_t i = draw.size(); i > 1; --i) {
          std::swap(draw[i - 1], draw[rng.next_u64() % i]);
        }
        std::vector<ProbVector> zs;
        std::vector<OneHotLabel> ys;
        for (std::size_t i = 0; i < n_c; ++i) {
          zs.push_back(file_data->prediction(draw[i]));
          ys.push_back(file_data->label(draw[i]));
        }
        calib_set.emplace(std::move(zs), std::move(ys));
      } else {
        calib_set.emplace(synthetic::sample(n_c, cfg.classifier(), seed).data);
      }

      rows.push_back({"uncalibrated", n_c, seed, "ece1_kde", uncal_ece});
      rows.push_back({"uncalibrated", n_c, seed, "accuracy", uncal_acc});

      for (const auto& method : cfg.methods) {
        const CalibrationMap map = fit_by_name(method, *calib_set, cfg.eps);
        const LabeledDataset calibrated = apply_to_dataset(map, *eval_set);
        const double ece = ece1_kde_or_pointmass(top_label_reduce(calibrated), cfg);
        const double gain = calibration_gain(*eval_set, map);
        const double acc = top1_accuracy(calibrated);
        const bool lower_bound = method == "irova" || method == "irova-ts";
        rows.push_back({method, n_c, seed, "ece1_kde", ece});
        rows.push_back({method, n_c, seed, lower_bound ? "gain_lower_bound" : "gain", gain});
        rows.push_back({method, n_c, seed, "accuracy", acc});
      }
    }
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const LearningCurveRow& a, const LearningCurveRow& b) {
                     if (a.method != b.method) return a.method < b.method;
                     if (a.n_c != b.n_c) return a.n_c < b.n_c;
                     return a.seed < b.seed;
                   });
  return rows;
}

std::string run_learning_curve(const BenchConfig& cfg) {
  const std::vector<LearningCurveRow> rows = learning_curve(cfg);
  std::string out = provenance(cfg, "learning-curve");
  out += "# methods=";
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    if (i) out += ' ';
    out += cfg.methods[i];
  }
  out += "\n# n_eval=" + std::to_string(cfg.n_eval) + "\n";
  out += "method,n_c,seed,metric,value\n";
  for (const auto& row : rows) {
    out += row.method;
    out += ',' + std::to_string(row.n_c);
    out += ',' + std::to_string(row.seed);
    out += ',' + row.metric;
    out += ',' + io::format_est(row.value);
    out += '\n';
  }
  return out;
}

}  // namespace calib::bench

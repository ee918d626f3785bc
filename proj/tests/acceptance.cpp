// Acceptance suite: end-to-end checks of the estimator benchmark orderings,
// the synthetic ground truth, the calibrator guarantees, and the CLI's
// reproducibility. Each criterion prints one PASS/FAIL line; the exit code is
// the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "calib/bench.hpp"
#include "calib/calibrators.hpp"
#include "calib/ece.hpp"
#include "calib/io.hpp"
#include "calib/rng.hpp"
#include "calib/simplex.hpp"
#include "calib/synthetic.hpp"
#include "oracles.hpp"

using namespace calib;
using calib::bench::BenchConfig;
using calib::bench::EstimatorBenchResult;

namespace {

int g_failures = 0;

void report(int criterion, bool passed, const std::string& note) {
  std::printf("[%s] criterion %2d: %s\n", passed ? "PASS" : "FAIL", criterion,
              note.c_str());
  std::fflush(stdout);
  if (!passed) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.5g", v);
  return buf;
}

struct BenchTable {
  // n_e -> estimator -> (mae, stderr)
  std::map<std::size_t, std::map<std::string, std::pair<double, double>>> cells;
  double mean_kde_estimate_at(std::size_t n) const;
  std::map<std::size_t, double> mean_estimate;
  double elapsed_seconds = 0.0;
};

BenchTable run_bench(double beta0, double beta1, const std::vector<std::string>& estimators) {
  BenchConfig cfg;
  cfg.beta0 = beta0;
  cfg.beta1 = beta1;
  cfg.estimators = estimators;
  cfg.n_values = {64, 128, 256, 512, 1024};
  cfg.replications = 200;
  cfg.base_seed = 1;
  cfg.d = 1;

  const auto start = std::chrono::steady_clock::now();
  const EstimatorBenchResult res = calib::bench::estimator_bench(cfg);
  const auto stop = std::chrono::steady_clock::now();

  BenchTable table;
  table.elapsed_seconds = std::chrono::duration<double>(stop - start).count();
  for (const auto& row : res.rows) {
    table.cells[row.n_e][row.estimator] = {row.mae, row.stderr_mae};
    if (row.estimator == "kde") table.mean_estimate[row.n_e] = row.mean_estimate;
  }
  return table;
}

// ---------------------------------------------------------------------------

void criterion_1_and_2() {
  const BenchTable case1 = run_bench(0.5, -1.5, {"kde", "hist-eq15", "hist-dd"});

  // 1: KDE strictly better than the 15-bin equal-width histogram at small
  // n_e, and not worse by more than 2 combined standard errors at 1024.
  bool ok = true;
  std::string note;
  for (std::size_t n : {std::size_t{64}, std::size_t{128}}) {
    const auto [kde, kde_se] = case1.cells.at(n).at("kde");
    const auto [h15, h15_se] = case1.cells.at(n).at("hist-eq15");
    ok = ok && kde < h15;
    note += "n=" + std::to_string(n) + ": kde=" + fmt(kde) + " hist15=" + fmt(h15) + "  ";
  }
  {
    const auto [kde, kde_se] = case1.cells.at(1024).at("kde");
    const auto [h15, h15_se] = case1.cells.at(1024).at("hist-eq15");
    const double slack = 2.0 * std::sqrt(kde_se * kde_se + h15_se * h15_se);
    ok = ok && kde <= h15 + slack;
    note += "n=1024: kde=" + fmt(kde) + " hist15=" + fmt(h15) + "+2se=" + fmt(h15 + slack);
  }
  const bool in_time = case1.elapsed_seconds < 180.0;
  ok = ok && in_time;
  note += "  runtime=" + fmt(case1.elapsed_seconds) + "s";
  report(1, ok, "KDE vs equal-width histogram ordering -- " + note);

  // 2: KDE mean absolute error non-increasing in n_e on both cases, at most
  // one inversion and only within one combined standard error.
  const BenchTable case2 = run_bench(0.2, -1.9, {"kde"});
  bool trend_ok = true;
  std::string trend_note;
  const std::vector<std::pair<std::string, const BenchTable*>> tables = {
      {"case1", &case1}, {"case2", &case2}};
  for (const auto& [name, table] : tables) {
    int inversions = 0;
    bool within = true;
    double prev_mae = 0.0, prev_se = 0.0;
    bool first = true;
    std::string maes;
    for (const auto& [n, cell] : table->cells) {
      const auto [mae, se] = cell.at("kde");
      maes += fmt(mae) + " ";
      if (!first && mae > prev_mae) {
        ++inversions;
        const double combined = std::sqrt(se * se + prev_se * prev_se);
        within = within && (mae - prev_mae) <= combined;
      }
      prev_mae = mae;
      prev_se = se;
      first = false;
    }
    trend_ok = trend_ok && inversions <= 1 && within;
    trend_note += name + ": [" + maes + "] inversions=" + std::to_string(inversions) + "  ";
  }
  report(2, trend_ok, "KDE error non-increasing in n_e -- " + trend_note);
}

void criterion_3() {
  const synthetic::SyntheticClassifier calibrated{0.0, -2.0};
  const EceEstimate gt = synthetic::ground_truth(calibrated, 1, 1000000, 424242);
  const bool gt_zero = std::abs(gt.value) <= 3.0 * gt.stderr_value + 1e-12;

  // Estimate quality at the data-rich end, averaged over the same 200
  // replication seeds as the benchmark protocol.
  BenchConfig cfg;
  cfg.beta0 = 0.0;
  cfg.beta1 = -2.0;
  cfg.estimators = {"kde"};
  cfg.n_values = {1024};
  cfg.replications = 200;
  cfg.base_seed = 1;
  const EstimatorBenchResult res = calib::bench::estimator_bench(cfg);
  const double mean_estimate = res.rows.at(0).mean_estimate;
  const bool est_small = mean_estimate < 0.03;

  report(3, gt_zero && est_small,
         "perfect calibration: mc ground truth = " + fmt(gt.value) + " (se " +
             fmt(gt.stderr_value) + "), mean kde estimate at n=1024 = " +
             fmt(mean_estimate) + " < 0.03");
}

void criterion_4() {
  Rng rng(777);
  std::size_t probes = 0;
  std::size_t violations_ts = 0, violations_ets = 0, violations_irm = 0;
  for (int ds_trial = 0; ds_trial < 150; ++ds_trial) {
    const std::size_t L = 2 + ds_trial % 4;
    const std::size_t n = 20 + ds_trial % 30;
    const LabeledDataset data = oracles::random_calibrated_dataset(rng, n, L);
    const CalibrationMap ts = fit_temperature(data).map;
    const CalibrationMap ets = fit_ets(data).map;
    const CalibrationMap irm = fit_irm(data, 1e-8);

    std::vector<ProbVector> targets;
    for (std::size_t i = 0; i < data.size(); ++i) targets.push_back(data.prediction(i));
    for (int extra = 0; extra < 50; ++extra) {
      targets.push_back(oracles::random_prob_vector(rng, L));
    }
    for (const ProbVector& z : targets) {
      ++probes;
      const std::size_t want = argmax_class(z);
      if (argmax_class(apply_map(ts, z)) != want) ++violations_ts;
      if (argmax_class(apply_map(ets, z)) != want) ++violations_ets;
      if (argmax_class(apply_map(irm, z)) != want) ++violations_irm;
    }
  }

  // A one-vs-all fit that flips the argmax: the calibration set says class 0
  // never wins at z_0 = 0.55 while class 1 always wins at z_1 = 0.45.
  const LabeledDataset adversarial(
      {ProbVector({0.55, 0.45}), ProbVector({0.55, 0.45}), ProbVector({0.55, 0.45})},
      {OneHotLabel{1}, OneHotLabel{1}, OneHotLabel{1}});
  const IrovaMap irova = fit_irova(adversarial);
  const ProbVector flipped = apply_irova(ProbVector({0.55, 0.45}), irova);
  const bool irova_flips = argmax_class(flipped) == 1;

  const bool ok = probes >= 10000 && violations_ts == 0 && violations_ets == 0 &&
                  violations_irm == 0 && irova_flips;
  report(4, ok,
         "argmax preserved on " + std::to_string(probes) +
             " probes (ts/ets/irm violations " + std::to_string(violations_ts) + "/" +
             std::to_string(violations_ets) + "/" + std::to_string(violations_irm) +
             "), irova flips constructed instance: " + (irova_flips ? "yes" : "no"));
}

void criterion_5() {
  int mismatches = 0;
  for (int mask = 0; mask < 256; ++mask) {
    std::vector<double> values(8);
    for (int i = 0; i < 8; ++i) values[i] = (mask >> i) & 1 ? 1.0 : 0.0;
    const std::vector<double> mine = pava(values);
    const std::vector<double> truth = oracles::brute_force_isotonic(values);
    for (int i = 0; i < 8; ++i) {
      if (std::abs(mine[i] - truth[i]) > 1e-12) {
        ++mismatches;
        break;
      }
    }
  }
  report(5, mismatches == 0,
         "pava equals brute-force isotonic least squares on all 256 binary "
         "sequences (mismatches " + std::to_string(mismatches) + ")");
}

void criterion_6() {
  Rng rng(555);
  bool dominance = true, grid_close = true;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double beta0 = -1.0 + 2.0 * rng.uniform01();
    const double beta1 = -3.0 + 2.5 * rng.uniform01();  // in [-3, -0.5]
    const synthetic::SyntheticClassifier clf{beta0, beta1};
    const std::size_t n = 30 + static_cast<std::size_t>(trial);
    const LabeledDataset data = synthetic::sample(n, clf, 2000 + trial).data;

    const EtsFit fit = fit_ets(data);
    dominance = dominance && fit.sq_loss <= fit.ts_sq_loss + 1e-9;

    std::vector<std::array<double, 3>> rows;
    std::vector<double> targets;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const ProbVector scaled = apply_temperature(data.prediction(i), fit.map.t);
      for (std::size_t l = 0; l < 2; ++l) {
        rows.push_back({scaled[l], data.prediction(i)[l], 0.5});
        targets.push_back(data.label(i).class_index == l ? 1.0 : 0.0);
      }
    }
    const auto oracle = oracles::simplex_grid_oracle(rows, targets);
    grid_close = grid_close && fit.sq_loss <= oracle.objective + 1e-9 &&
                 oracle.objective - fit.sq_loss <= 1e-3;
    worst_gap = std::max(worst_gap, oracle.objective - fit.sq_loss);
  }
  report(6, dominance && grid_close,
         "ets loss <= ts loss + 1e-9 on 50 sets; grid-oracle objective gap <= 1e-3 "
         "(worst " + fmt(worst_gap) + ")");
}

void criterion_7() {
  const synthetic::SyntheticClassifier case1{0.5, -1.5};
  const LabeledDataset calib_set = synthetic::sample(5000, case1, 1001).data;
  const LabeledDataset eval_set = synthetic::sample(100000, case1, 1002).data;

  const CalibrationMap maps[] = {CalibrationMap{fit_temperature(calib_set).map},
                                 CalibrationMap{fit_irm(calib_set, 1e-8)}};
  bool ok = true;
  std::string note;
  for (const CalibrationMap& map : maps) {
    // Per-sample difference between the squared-loss reduction (the sample
    // gain) and the closed-form calibration-error reduction.
    double mean = 0.0, m2 = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < eval_set.size(); ++i) {
      const ProbVector& z = eval_set.prediction(i);
      const ProbVector t = apply_map(map, z);
      const double y0 = eval_set.label(i).class_index == 0 ? 1.0 : 0.0;
      const double z1 = std::min(std::max(z[0], 1e-12), 1.0 - 1e-12);
      const double p1 = synthetic::canonical_pi(z1, case1);
      const double t1 = t[0];

      const double loss_red = 2.0 * ((z1 - y0) * (z1 - y0) - (t1 - y0) * (t1 - y0));
      const double ece_red = 2.0 * ((z1 - p1) * (z1 - p1) - (t1 - p1) * (t1 - p1));
      const double d = loss_red - ece_red;
      ++count;
      const double delta = d - mean;
      mean += delta / static_cast<double>(count);
      m2 += delta * (d - mean);
    }
    const double se = std::sqrt(m2 / static_cast<double>(count - 1) /
                                static_cast<double>(count));
    const bool match = std::abs(mean) <= 3.0 * se;
    ok = ok && match;
    note += map_kind(map) + ": gap=" + fmt(mean) + " (3se " + fmt(3.0 * se) + ")  ";
  }
  report(7, ok, "calibration gain equals the squared-loss reduction -- " + note);
}

void criterion_8() {
  const synthetic::SyntheticClassifier case1{0.5, -1.5};
  Rng rng(1003);
  double mean = 0.0, m2 = 0.0;
  const std::size_t n = 1000000;
  for (std::size_t i = 0; i < n; ++i) {
    const bool class0 = rng.bernoulli(0.5);
    const double x = rng.normal(class0 ? -1.0 : 1.0, 1.0);
    const double z1raw = synthetic::predict(x, case1)[0];
    const double z1 = std::min(std::max(z1raw, 1e-12), 1.0 - 1e-12);
    const double p1 = synthetic::canonical_pi(z1, case1);
    const double y0 = class0 ? 1.0 : 0.0;
    // ||z-pi||^2 - ||z-y||^2 + ||pi-y||^2, all L=2 norms.
    const double d = 2.0 * ((z1 - p1) * (z1 - p1) - (z1 - y0) * (z1 - y0) +
                            (p1 - y0) * (p1 - y0));
    const double delta = d - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (d - mean);
  }
  const double se = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  report(8, std::abs(mean) <= 3.0 * se,
         "refinement decomposition residual = " + fmt(mean) + " (3se " + fmt(3.0 * se) +
             ") at n=1e6");
}

void criterion_9() {
  bool ok = true;
  std::string note;
  const std::vector<std::pair<std::string, synthetic::SyntheticClassifier>> cases = {
      {"case1", {0.5, -1.5}}, {"case2", {0.2, -1.9}}};
  std::uint64_t seed = 1004;
  for (const auto& [name, clf] : cases) {
    Rng rng(seed++);
    double sum_abs = 0.0, sum_sq = 0.0, m2 = 0.0, mean_abs = 0.0;
    const std::size_t n = 1000000;
    for (std::size_t i = 0; i < n; ++i) {
      const double z1 = synthetic::sample_z1(rng, clf);
      const double e = std::abs(z1 - synthetic::canonical_pi(z1, clf));
      sum_abs += e;
      sum_sq += e * e;
      const double delta = e - mean_abs;
      mean_abs += delta / static_cast<double>(i + 1);
      m2 += delta * (e - mean_abs);
    }
    const double ece1 = 2.0 * sum_abs / static_cast<double>(n);
    const double ece2 = 2.0 * sum_sq / static_cast<double>(n);
    const double se1 = 2.0 * std::sqrt(m2 / static_cast<double>(n - 1) /
                                       static_cast<double>(n));
    const bool lower = std::sqrt(ece2) <= ece1 + 3.0 * se1;
    const bool upper = ece1 <= std::sqrt(2.0 * ece2) + 3.0 * se1;
    ok = ok && lower && upper;
    note += name + ": sqrt(ece2)=" + fmt(std::sqrt(ece2)) + " <= ece1=" + fmt(ece1) +
            " <= sqrt(2*ece2)=" + fmt(std::sqrt(2.0 * ece2)) + "  ";
  }
  report(9, ok, "norm-order sandwich -- " + note);
}

void criterion_10() {
  bool kernel_ok = true;
  for (double h : {0.03, 0.1, 0.5, 1.0, 2.0}) {
    const double mass = oracles::trapezoid(
        [&](double u) { return triweight(u, h); }, -h, h, 200001);
    kernel_ok = kernel_ok && std::abs(mass - 1.0) <= 1e-6;
  }

  const double h_rot = bandwidth_rot_from_sigma(0.1, 1000);
  const bool rot_ok = std::abs(h_rot - 0.0266257) <= 1e-6;

  bool density_ok = true;
  Rng rng(888);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 10 + rng.next_u64() % 490;
    std::vector<double> samples(n);
    for (auto& s : samples) {
      const double u = rng.uniform01();
      switch (trial % 4) {
        case 0: s = u; break;                       // uniform
        case 1: s = u * u; break;                   // piled near 0
        case 2: s = 1.0 - u * u * u; break;         // piled near 1
        default: s = 0.5 + 0.45 * (u - 0.5); break; // interior
      }
    }
    samples[0] = 0.25;  // guarantee spread
    samples[n - 1] = 0.75;
    const double h = bandwidth_rot(samples);
    const double mass = oracles::trapezoid(
        [&](double q) { return kde_density(q, samples, h); }, 0.0, 1.0, 8193);
    worst = std::max(worst, std::abs(mass - 1.0));
    density_ok = density_ok && std::abs(mass - 1.0) <= 1e-3;
  }

  report(10, kernel_ok && rot_ok && density_ok,
         "kernel mass = 1 within 1e-6; rot bandwidth = " + fmt(h_rot) +
             "; mirrored density mass within 1e-3 over 20 sets (worst dev " +
             fmt(worst) + ")");
}

void criterion_11() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path("acceptance_cli_tmp");
  fs::create_directories(dir);
  const std::string bin = CALBENCH_PATH;

  const auto run = [&](const std::string& args) {
    const std::string cmd = bin + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  const auto same = [&](const fs::path& a, const fs::path& b) {
    return io::read_text_file(a.string()) == io::read_text_file(b.string());
  };
  const auto out = [&](const std::string& name) { return (dir / name).string(); };

  bool ok = true;

  ok = ok && run("synth --beta0 0.5 --beta1 -1.5 --n 200 --seed 9 --output " + out("s1.csv"));
  ok = ok && run("synth --beta0 0.5 --beta1 -1.5 --n 200 --seed 9 --output " + out("s2.csv"));
  ok = ok && run("synth --beta0 0.5 --beta1 -1.5 --n 200 --seed 10 --output " + out("s3.csv"));
  ok = ok && same(out("s1.csv"), out("s2.csv"));
  ok = ok && !same(out("s1.csv"), out("s3.csv"));

  ok = ok && run("calibrate --input " + out("s1.csv") + " --method irova-ts --output " +
                 out("m1.json"));
  ok = ok && run("calibrate --input " + out("s1.csv") + " --method irova-ts --output " +
                 out("m2.json"));
  ok = ok && same(out("m1.json"), out("m2.json"));

  ok = ok && run("evaluate --input " + out("s1.csv") + " --map " + out("m1.json") +
                 " --output " + out("e1.csv"));
  ok = ok && run("evaluate --input " + out("s1.csv") + " --map " + out("m1.json") +
                 " --output " + out("e2.csv"));
  ok = ok && same(out("e1.csv"), out("e2.csv"));

  const std::string bench_args =
      " --beta0 0.5 --beta1 -1.5 --n-values 64,128 --replications 5 --mc-samples 10000 "
      "--seed 3 --output ";
  ok = ok && run("bench-estimators" + bench_args + out("b1.csv"));
  ok = ok && run("bench-estimators" + bench_args + out("b2.csv"));
  ok = ok && same(out("b1.csv"), out("b2.csv"));

  const std::string curve_args =
      " --beta0 0.5 --beta1 -1.5 --n-values 64 --replications 2 --n-eval 128 --seed 4 "
      "--output ";
  ok = ok && run("learning-curve" + curve_args + out("l1.csv"));
  ok = ok && run("learning-curve" + curve_args + out("l2.csv"));
  ok = ok && same(out("l1.csv"), out("l2.csv"));

  report(11, ok, "identical configs reproduce every output file byte for byte");
}

}  // namespace

int main() {
  std::printf("acceptance suite\n================\n");
  criterion_1_and_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  std::printf("================\n%d criterion(s) failed\n", g_failures);
  return g_failures;
}

// calbench: synthetic benchmark and calibration tool.
//
// Subcommands:
//   synth            export a synthetic prediction file
//   calibrate        fit a calibration map on a prediction file
//   evaluate         estimate calibration error of a prediction file
//   bench-estimators estimator accuracy benchmark against Monte Carlo truth
//   learning-curve   calibration-method comparison across calibration sizes
//
// Exit codes: 0 success, 2 configuration error, 3 ingest error,
// 4 numeric/degenerate error.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "calib/bench.hpp"
#include "calib/calibrators.hpp"
#include "calib/ece.hpp"
#include "calib/io.hpp"
#include "calib/simplex.hpp"
#include "calib/synthetic.hpp"

namespace {

using calib::bench::BenchConfig;

struct CliOptions {
  BenchConfig cfg;
  std::string config_path;
  std::string method = "ts";
  std::string map_path;
  std::size_t classwise = static_cast<std::size_t>(-1);  // -1 = top-label
  double beta0 = 0.0;
  double beta1 = 0.0;
  bool beta0_set = false;
  bool beta1_set = false;
};

// Values from --config fill in options the command line left untouched.
void apply_config_file(CLI::App* sub, CliOptions& opt) {
  if (opt.config_path.empty()) return;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(calib::io::read_text_file(opt.config_path));
  } catch (const nlohmann::json::exception& e) {
    throw calib::ConfigError(std::string("invalid config JSON: ") + e.what());
  }
  const auto unset = [&](const std::string& flag) {
    const CLI::Option* o = sub->get_option_no_throw(flag);
    return o != nullptr && o->count() == 0;
  };
  const auto assign = [&](const char* key, const std::string& flag, auto& target) {
    if (j.contains(key) && unset(flag)) {
      j.at(key).get_to(target);
    }
  };
  assign("input", "--input", opt.cfg.input_path);
  assign("output", "--output", opt.cfg.output_path);
  assign("method", "--method", opt.method);
  assign("estimators", "--estimator", opt.cfg.estimators);
  assign("methods", "--method", opt.cfg.methods);
  assign("d", "--d", opt.cfg.d);
  assign("n", "--n", opt.cfg.n);
  assign("n_values", "--n-values", opt.cfg.n_values);
  assign("seeds", "--seeds", opt.cfg.seeds);
  assign("seed", "--seed", opt.cfg.base_seed);
  assign("replications", "--replications", opt.cfg.replications);
  assign("bins", "--bins", opt.cfg.bins);
  assign("bandwidth", "--bandwidth", opt.cfg.bandwidth);
  assign("grid_points", "--grid-points", opt.cfg.grid_points);
  assign("eps", "--eps", opt.cfg.eps);
  assign("n_eval", "--n-eval", opt.cfg.n_eval);
  assign("mc_samples", "--mc-samples", opt.cfg.mc_samples);
  if (j.contains("beta0") && unset("--beta0")) {
    opt.beta0 = j.at("beta0").get<double>();
    opt.beta0_set = true;
  }
  if (j.contains("beta1") && unset("--beta1")) {
    opt.beta1 = j.at("beta1").get<double>();
    opt.beta1_set = true;
  }
}

void finalize_betas(CliOptions& opt) {
  if (opt.beta0_set) opt.cfg.beta0 = opt.beta0;
  if (opt.beta1_set) opt.cfg.beta1 = opt.beta1;
}

void require_output(const CliOptions& opt) {
  if (opt.cfg.output_path.empty()) {
    throw calib::ConfigError("--output is required");
  }
}

int cmd_synth(CliOptions& opt) {
  require_output(opt);
  const auto clf = opt.cfg.classifier();
  const auto ds = calib::synthetic::sample(opt.cfg.n, clf, opt.cfg.base_seed);
  calib::io::write_prediction_csv(opt.cfg.output_path, ds.data);
  std::cout << "wrote " << ds.data.size() << " rows to " << opt.cfg.output_path << "\n";
  return 0;
}

int cmd_calibrate(CliOptions& opt) {
  if (opt.cfg.input_path.empty()) {
    throw calib::ConfigError("--input is required");
  }
  require_output(opt);
  const calib::LabeledDataset data = calib::io::read_prediction_csv(opt.cfg.input_path);
  const calib::CalibrationMap map = calib::bench::fit_by_name(opt.method, data, opt.cfg.eps);
  calib::io::save_map(opt.cfg.output_path, map);
  const double before = calib::total_squared_loss(data);
  const double after = calib::total_squared_loss(data, map);
  std::cout << "method=" << opt.method << "\n"
            << "training squared loss before=" << calib::io::format_est(before) << "\n"
            << "training squared loss after=" << calib::io::format_est(after) << "\n"
            << "map written to " << opt.cfg.output_path << "\n";
  return 0;
}

int cmd_evaluate(CliOptions& opt) {
  if (opt.cfg.input_path.empty()) {
    throw calib::ConfigError("--input is required");
  }
  require_output(opt);
  calib::LabeledDataset data = calib::io::read_prediction_csv(opt.cfg.input_path);

  std::string out;
  out += "# experiment=evaluate\n";
  out += "# input=" + opt.cfg.input_path + "\n";

  std::string map_note;
  double gain = 0.0, acc_delta = 0.0;
  bool have_map = false, lower_bound = false;
  if (!opt.map_path.empty()) {
    const calib::CalibrationMap map = calib::io::load_map(opt.map_path);
    const auto check_classes = [&](std::size_t got) {
      if (got != data.num_classes()) {
        throw calib::DimensionError("map has " + std::to_string(got) +
                                    " classes but file has " +
                                    std::to_string(data.num_classes()));
      }
    };
    if (const auto* irova = std::get_if<calib::IrovaMap>(&map)) {
      check_classes(irova->num_classes());
    } else if (const auto* comp = std::get_if<calib::ComposedMap>(&map)) {
      check_classes(comp->outer.num_classes());
    }
    gain = calib::calibration_gain(data, map);
    const double acc_before = calib::bench::top1_accuracy(data);
    const calib::LabeledDataset calibrated = calib::bench::apply_to_dataset(map, data);
    acc_delta = calib::bench::top1_accuracy(calibrated) - acc_before;
    map_note = calib::map_kind(map);
    lower_bound = map_note == "irova" || map_note == "irova-ts";
    data = calibrated;
    have_map = true;
    out += "# map=" + opt.map_path + "\n";
    out += "# map_kind=" + map_note + "\n";
  }

  calib::BinaryReducedDataset reduced;
  if (opt.classwise == static_cast<std::size_t>(-1)) {
    reduced = calib::top_label_reduce(data);
    out += "# reduction=top-label\n";
  } else {
    reduced = calib::classwise_reduce(data, opt.classwise);
    out += "# reduction=class-wise:" + std::to_string(opt.classwise) + "\n";
  }

  out += calib::io::ece_csv_header() + "\n";
  const calib::KdeConfig kde_cfg{opt.cfg.bandwidth, opt.cfg.grid_points};
  for (const std::string& name : opt.cfg.estimators) {
    for (int d : {1, 2}) {
      calib::EceEstimate est;
      if (name == "kde") {
        est = calib::kde_ece(reduced, d, kde_cfg);
      } else if (name == "hist-eq15") {
        est = calib::histogram_ece(reduced, d,
                                   calib::HistogramScheme::equal_width(opt.cfg.bins));
      } else if (name == "hist-dd") {
        est = calib::histogram_ece(reduced, d, calib::HistogramScheme::equal_frequency());
      } else {
        throw calib::ConfigError("unknown estimator '" + name +
                                 "' (expected kde, hist-eq15 or hist-dd)");
      }
      out += calib::io::ece_csv_row(est) + "\n";
    }
  }
  if (have_map) {
    // Gain is exact for accuracy-preserving maps and a lower bound otherwise.
    out += "calibration-gain,2," + std::to_string(data.size()) + ',' + map_note +
           (lower_bound ? "+lower-bound" : "") + ',' + calib::io::format_est(gain) + ",\n";
    out += "accuracy-delta,1," + std::to_string(data.size()) + ',' + map_note + ',' +
           calib::io::format_est(acc_delta) + ",\n";
  }
  calib::io::write_text_file(opt.cfg.output_path, out);
  std::cout << out;
  return 0;
}

int cmd_bench_estimators(CliOptions& opt) {
  require_output(opt);
  if (opt.cfg.n_values.empty()) opt.cfg.n_values = {64, 128, 256, 512, 1024};
  const std::string csv = calib::bench::run_estimator_bench(opt.cfg);
  calib::io::write_text_file(opt.cfg.output_path, csv);
  std::cout << "wrote " << opt.cfg.output_path << "\n";
  return 0;
}

int cmd_learning_curve(CliOptions& opt) {
  require_output(opt);
  if (opt.cfg.n_values.empty()) opt.cfg.n_values = {128, 256, 512, 1024, 2048};
  const std::string csv = calib::bench::run_learning_curve(opt.cfg);
  calib::io::write_text_file(opt.cfg.output_path, csv);
  std::cout << "wrote " << opt.cfg.output_path << "\n";
  return 0;
}

void add_common_flags(CLI::App* sub, CliOptions& opt) {
  sub->add_option("--config", opt.config_path, "JSON config file (flags override)");
  sub->add_option("--input", opt.cfg.input_path, "input prediction CSV");
  sub->add_option("--output", opt.cfg.output_path, "output file");
  sub->add_option("--seed", opt.cfg.base_seed, "base seed");
  sub->add_option("--seeds", opt.cfg.seeds, "explicit replication seeds")
      ->delimiter(',');
  sub->add_option("--d", opt.cfg.d, "norm order (1 or 2)");
  sub->add_option("--beta0", opt.beta0, "synthetic classifier intercept")
      ->each([&](const std::string&) { opt.beta0_set = true; });
  sub->add_option("--beta1", opt.beta1, "synthetic classifier slope")
      ->each([&](const std::string&) { opt.beta1_set = true; });
  sub->add_option("--bins", opt.cfg.bins, "equal-width histogram bins");
  sub->add_option("--bandwidth", opt.cfg.bandwidth, "KDE bandwidth (0 = rule of thumb)");
  sub->add_option("--grid-points", opt.cfg.grid_points, "integration grid points");
  sub->add_option("--eps", opt.cfg.eps, "strictness slope for irm");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probability calibration benchmark"};
  app.require_subcommand(1);
  CliOptions opt;

  CLI::App* synth = app.add_subcommand("synth", "export a synthetic prediction file");
  add_common_flags(synth, opt);
  synth->add_option("--n", opt.cfg.n, "number of samples");

  CLI::App* calibrate = app.add_subcommand("calibrate", "fit a calibration map");
  add_common_flags(calibrate, opt);
  calibrate->add_option("--method", opt.method, "ts|ets|irm|irova|irova-ts");

  CLI::App* evaluate = app.add_subcommand("evaluate", "estimate calibration error");
  add_common_flags(evaluate, opt);
  evaluate->add_option("--estimator", opt.cfg.estimators, "kde|hist-eq15|hist-dd")
      ->delimiter(',');
  evaluate->add_option("--map", opt.map_path, "fitted map JSON to apply first");
  evaluate->add_option("--classwise", opt.classwise,
                       "evaluate the class-l reduction instead of top-label");

  CLI::App* bench = app.add_subcommand("bench-estimators", "estimator benchmark");
  add_common_flags(bench, opt);
  bench->add_option("--estimator", opt.cfg.estimators, "kde|hist-eq15|hist-dd")
      ->delimiter(',');
  bench->add_option("--n-values", opt.cfg.n_values, "evaluation sizes")->delimiter(',');
  bench->add_option("--replications", opt.cfg.replications, "replications per size");
  bench->add_option("--mc-samples", opt.cfg.mc_samples, "ground-truth Monte Carlo size");

  CLI::App* curve = app.add_subcommand("learning-curve", "calibration learning curves");
  add_common_flags(curve, opt);
  curve->add_option("--method", opt.cfg.methods, "methods to compare")->delimiter(',');
  curve->add_option("--n-values", opt.cfg.n_values, "calibration sizes")->delimiter(',');
  curve->add_option("--replications", opt.cfg.replications, "replications per size");
  curve->add_option("--n-eval", opt.cfg.n_eval, "evaluation set size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    apply_config_file(sub, opt);
    finalize_betas(opt);
    if (sub == synth) return cmd_synth(opt);
    if (sub == calibrate) return cmd_calibrate(opt);
    if (sub == evaluate) return cmd_evaluate(opt);
    if (sub == bench) return cmd_bench_estimators(opt);
    return cmd_learning_curve(opt);
  } catch (const calib::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const calib::IngestError& e) {
    std::cerr << "ingest error: " << e.what() << "\n";
    return 3;
  } catch (const calib::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

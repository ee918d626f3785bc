#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "calib/isotonic.hpp"
#include "calib/simplex.hpp"

namespace calib {

// ---------------------------------------------------------------------------
// Map types
// ---------------------------------------------------------------------------

// Temperature scaling on the probability simplex: T(z;t) = z^{1/t} / sum z_l^{1/t}.
struct TemperatureMap {
  double t = 1.0;

  bool operator==(const TemperatureMap&) const = default;
};

// Three-component ensemble: w1 * T(z;t) + w2 * z + w3 * (1/L).
// w lies on the 2-simplex.
struct EtsMap {
  double t = 1.0;
  std::array<double, 3> w{1.0, 0.0, 0.0};

  bool operator==(const EtsMap&) const = default;
};

// One-vs-all isotonic calibration: one step function per class, outputs
// renormalized. Deliberately without strictness repair; this baseline is not
// accuracy-preserving.
struct IrovaMap {
  std::vector<IsotonicFn> per_class;

  std::size_t num_classes() const { return per_class.size(); }
  bool operator==(const IrovaMap&) const = default;
};

// Temperature scaling followed by one-vs-all isotonic calibration.
struct ComposedMap {
  TemperatureMap inner;
  IrovaMap outer;

  bool operator==(const ComposedMap&) const = default;
};

// Any fitted calibration map. IsotonicFn stands for the multi-class
// data-ensemble isotonic map (applied through the shared-g construction).
using CalibrationMap = std::variant<TemperatureMap, EtsMap, IsotonicFn, IrovaMap, ComposedMap>;

// "ts", "ets", "irm", "irova" or "irova-ts".
std::string map_kind(const CalibrationMap& map);

// ---------------------------------------------------------------------------
// Application
// ---------------------------------------------------------------------------

ProbVector apply_temperature(const ProbVector& z, double t);
ProbVector apply_ets(const ProbVector& z, const EtsMap& map);
ProbVector apply_irm(const ProbVector& z, const IsotonicFn& g);
// Per-class step values renormalized; an all-zero response falls back to the
// uniform vector.
ProbVector apply_irova(const ProbVector& z, const IrovaMap& map);
ProbVector apply_composed(const ProbVector& z, const ComposedMap& map);
ProbVector apply_map(const CalibrationMap& map, const ProbVector& z);

// ---------------------------------------------------------------------------
// Fitting (squared-error loss throughout)
// ---------------------------------------------------------------------------

struct TemperatureFit {
  TemperatureMap map;
  double sq_loss = 0.0;     // total squared error at the fitted t
  bool degenerate = false;  // loss did not depend on t; t = 1 returned
};

// 1-D minimization of sum_i ||T(z_i;t) - y_i||^2 over t in [0.01, 100],
// coarse log-grid scan followed by golden-section refinement.
TemperatureFit fit_temperature(const LabeledDataset& data);

struct SimplexLsFit {
  std::array<double, 3> w{};
  double objective = 0.0;
  bool non_unique = false;
};

// Exact minimizer of sum_r (rows[r] . w - targets[r])^2 over the probability
// 2-simplex. Convex QP in three variables: the equality-constrained interior
// solution and every edge/vertex restriction are enumerated and the best
// feasible candidate returned.
SimplexLsFit simplex_ls(std::span<const std::array<double, 3>> rows,
                        std::span<const double> targets);

struct EtsFit {
  EtsMap map;
  double sq_loss = 0.0;     // total squared error of the ensemble
  double ts_sq_loss = 0.0;  // total squared error of plain TS at the same t
  bool degenerate = false;
  bool non_unique = false;
};

// Two-stage fit: t from fit_temperature, then the ensemble weights from
// simplex_ls with components (T(z;t), z, 1/L). Since w = (1,0,0) is feasible
// the ensemble loss never exceeds the TS loss.
EtsFit fit_ets(const LabeledDataset& data);

// Data-ensemble isotonic fit: pools all n*L scalar (z_l, y_l) pairs, runs
// isotonic regression, and repairs strictness with slope eps > 0.
IsotonicFn fit_irm(const LabeledDataset& data, double eps = 1e-8);

// One-vs-all: class l fitted on the n pairs (z_l, y_l). No strictness repair.
IrovaMap fit_irova(const LabeledDataset& data);

// Temperature stage fitted first, one-vs-all stage fitted on the
// temperature-scaled predictions.
ComposedMap fit_composed(const LabeledDataset& data);

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

// sum_i ||z_i - y_i||_2^2 of the raw predictions.
double total_squared_loss(const LabeledDataset& data);
// sum_i ||T(z_i) - y_i||_2^2 of the calibrated predictions.
double total_squared_loss(const LabeledDataset& data, const CalibrationMap& map);

}  // namespace calib

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "calib/calibrators.hpp"
#include "calib/rng.hpp"
#include "calib/simplex.hpp"

namespace calib {

enum class EstimatorKind {
  histogram_equal_width,
  histogram_data_dependent,
  kde,
  ground_truth_mc,
};

std::string estimator_kind_name(EstimatorKind kind);

// One calibration-error estimate with the metadata needed to reproduce it.
struct EceEstimate {
  double value = 0.0;
  int d = 1;  // norm order, 1 or 2
  EstimatorKind kind = EstimatorKind::kde;
  std::size_t n_e = 0;
  std::string detail;          // "b=15", "h=0.0266...", "n_mc=1000000"
  double stderr_value = -1.0;  // < 0 when not applicable
};

// ---------------------------------------------------------------------------
// Histogram estimator
// ---------------------------------------------------------------------------

struct HistogramScheme {
  enum class Mode { equal_width, equal_frequency };

  Mode mode = Mode::equal_width;
  // For equal_frequency, 0 means "derive from Sturges' rule ceil(1 + log2 n)".
  std::size_t bins = 15;

  static HistogramScheme equal_width(std::size_t b) { return {Mode::equal_width, b}; }
  static HistogramScheme equal_frequency(std::size_t b = 0) {
    return {Mode::equal_frequency, b};
  }
};

// Bin boundaries on [0,1], strictly increasing. Equal-frequency edges come
// from sample quantiles (duplicates collapse, so fewer bins may result).
std::vector<double> resolve_edges(const HistogramScheme& scheme,
                                  std::span<const double> confidences);

// A value on an interior bin edge belongs to the lower bin; 0 belongs to the
// first bin.
std::size_t bin_index(double value, std::span<const double> edges);

// Binned estimate: sum_i (#B_i / n) |mean_conf(B_i) - mean_outcome(B_i)|^d.
// Empty bins contribute zero.
EceEstimate histogram_ece(const BinaryReducedDataset& data, int d,
                          const HistogramScheme& scheme);

// ---------------------------------------------------------------------------
// KDE estimator (triweight kernel, mirror-image boundary correction)
// ---------------------------------------------------------------------------

struct KdeConfig {
  double bandwidth = 0.0;  // 0 = rule of thumb from the samples
  std::size_t grid_points = 2048;
};

// K_h(u) = (35 / (32 h)) (1 - (u/h)^2)^3 for |u| <= h, else 0. Integrates to
// one for every h.
double triweight(double u, double h);

// Rule of thumb h = 1.06 * sigma_hat * n^(-1/5) with the (n-1)-denominator
// sample standard deviation.
double bandwidth_rot(std::span<const double> samples);
double bandwidth_rot_from_sigma(double sigma, std::size_t n);

// Density estimate on [0,1] with kernel images reflected at both ends:
// p(q) = (1/(n h)) sum_i [K((q-z_i)/h) + K((q+z_i)/h) + K((q-(2-z_i))/h)].
double kde_density(double query, std::span<const double> samples, double h);
double kde_density(double query, std::span<const double> samples, const KdeConfig& cfg);

// Kernel-regression estimate of the calibration probability at the query,
// with the same mirrored kernel sums in numerator and denominator. Where no
// kernel mass reaches the query the query value itself is returned, so the
// ECE integrand vanishes there along with the density.
double kde_pi(double query, const BinaryReducedDataset& data, double h);
double kde_pi(double query, const BinaryReducedDataset& data, const KdeConfig& cfg);

// Trapezoidal integral of |q - pi(q)|^d p(q) over a uniform grid on [0,1].
EceEstimate kde_ece(const BinaryReducedDataset& data, int d, const KdeConfig& cfg = {});

// ---------------------------------------------------------------------------
// Calibration gain and Monte Carlo ground truth
// ---------------------------------------------------------------------------

// Mean over the dataset of ||z - y||_2^2 - ||T(z) - y||_2^2. For
// accuracy-preserving maps this equals the reduction in squared calibration
// error; for other maps it is a lower bound on it.
double calibration_gain(const LabeledDataset& data, const CalibrationMap& map);

// Monte Carlo mean of |z1 - pi(z1)|^d over draws from `z1_sampler`, with the
// standard error of the mean. Deterministic given the seed.
EceEstimate ground_truth_ece_binary(const std::function<double(double)>& pi_fn,
                                    const std::function<double(Rng&)>& z1_sampler, int d,
                                    std::size_t n_mc, std::uint64_t seed);

}  // namespace calib

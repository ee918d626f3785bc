#include "calib/ece.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace calib {

namespace {

constexpr double kTriweightPeak = 35.0 / 32.0;

void check_norm_order(int d) {
  if (d != 1 && d != 2) {
    throw DomainError("norm order must be 1 or 2");
  }
}

double pow_d(double v, int d) { return d == 1 ? v : v * v; }

std::string format_value(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

double resolve_bandwidth(const KdeConfig& cfg, std::span<const double> samples) {
  if (cfg.bandwidth != 0.0) {
    if (!(cfg.bandwidth > 0.0)) {
      throw InvalidBandwidth("bandwidth must be positive");
    }
    return cfg.bandwidth;
  }
  return bandwidth_rot(samples);
}

// Unit triweight kernel, argument already scaled by the bandwidth.
double unit_triweight(double x) {
  if (std::abs(x) > 1.0) return 0.0;
  const double s = 1.0 - x * x;
  return kTriweightPeak * s * s * s;
}

// Kernel sum at `q` for one sample together with its reflections at 0 and 1.
double mirrored_kernel(double q, double z, double h) {
  return unit_triweight((q - z) / h) + unit_triweight((q + z) / h) +
         unit_triweight((q - (2.0 - z)) / h);
}

}  // namespace

std::string estimator_kind_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::histogram_equal_width: return "histogram-equal-width";
    case EstimatorKind::histogram_data_dependent: return "histogram-data-dependent";
    case EstimatorKind::kde: return "kde";
    case EstimatorKind::ground_truth_mc: return "ground-truth-mc";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Histogram estimator
// ---------------------------------------------------------------------------

std::vector<double> resolve_edges(const HistogramScheme& scheme,
                                  std::span<const double> confidences) {
  std::size_t b = scheme.bins;
  if (scheme.mode == HistogramScheme::Mode::equal_frequency && b == 0) {
    // Sturges' rule.
    b = static_cast<std::size_t>(
        std::ceil(1.0 + std::log2(static_cast<double>(confidences.size()))));
  }
  if (b < 1) {
    throw ConfigError("histogram needs at least one bin");
  }

  std::vector<double> edges;
  if (scheme.mode == HistogramScheme::Mode::equal_width) {
    edges.resize(b + 1);
    for (std::size_t i = 0; i <= b; ++i) {
      edges[i] = static_cast<double>(i) / static_cast<double>(b);
    }
  } else {
    if (confidences.empty()) {
      throw EmptyData("equal-frequency binning needs samples");
    }
    std::vector<double> sorted(confidences.begin(), confidences.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    edges.push_back(0.0);
    for (std::size_t k = 1; k < b; ++k) {
      const std::size_t pos = std::min(n - 1, k * n / b);
      edges.push_back(sorted[pos]);
    }
    edges.push_back(1.0);
    // Coinciding quantiles collapse; strictly increasing edges remain.
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    if (edges.front() != 0.0) edges.insert(edges.begin(), 0.0);
    if (edges.back() != 1.0) edges.push_back(1.0);
  }
  return edges;
}

std::size_t bin_index(double value, std::span<const double> edges) {
  auto it = std::lower_bound(edges.begin(), edges.end(), value);
  std::ptrdiff_t idx = (it - edges.begin()) - 1;  // edge values land in the lower bin
  idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(edges.size()) - 2);
  return static_cast<std::size_t>(idx);
}

EceEstimate histogram_ece(const BinaryReducedDataset& data, int d,
                          const HistogramScheme& scheme) {
  check_norm_order(d);
  if (data.size() == 0) {
    throw EmptyData("histogram estimator needs at least one sample");
  }
  const std::vector<double> edges = resolve_edges(scheme, data.confidences);
  const std::size_t b = edges.size() - 1;

  std::vector<double> conf_sum(b, 0.0), out_sum(b, 0.0);
  std::vector<std::size_t> count(b, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t bi = bin_index(data.confidences[i], edges);
    conf_sum[bi] += data.confidences[i];
    out_sum[bi] += data.outcomes[i];
    ++count[bi];
  }

  const double n = static_cast<double>(data.size());
  double ece = 0.0;
  for (std::size_t bi = 0; bi < b; ++bi) {
    if (count[bi] == 0) continue;
    const double c = static_cast<double>(count[bi]);
    const double gap = std::abs(conf_sum[bi] / c - out_sum[bi] / c);
    ece += (c / n) * pow_d(gap, d);
  }

  EceEstimate est;
  est.value = ece;
  est.d = d;
  est.kind = scheme.mode == HistogramScheme::Mode::equal_width
                 ? EstimatorKind::histogram_equal_width
                 : EstimatorKind::histogram_data_dependent;
  est.n_e = data.size();
  est.detail = "b=" + std::to_string(b);
  return est;
}

// ---------------------------------------------------------------------------
// KDE estimator
// ---------------------------------------------------------------------------

double triweight(double u, double h) {
  if (!(h > 0.0)) {
    throw InvalidBandwidth("bandwidth must be positive");
  }
  return unit_triweight(u / h) / h;
}

double bandwidth_rot_from_sigma(double sigma, std::size_t n) {
  if (n < 2) {
    throw EmptyData("bandwidth rule of thumb needs at least 2 samples");
  }
  if (!(sigma > 0.0)) {
    throw InvalidBandwidth("bandwidth rule of thumb needs positive sample spread");
  }
  return 1.06 * sigma * std::pow(static_cast<double>(n), -0.2);
}

double bandwidth_rot(std::span<const double> samples) {
  if (samples.size() < 2) {
    throw EmptyData("bandwidth rule of thumb needs at least 2 samples");
  }
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  if (*mn == *mx) {
    throw InvalidBandwidth("bandwidth rule of thumb needs positive sample spread");
  }
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sigma = std::sqrt(ss / static_cast<double>(samples.size() - 1));
  return bandwidth_rot_from_sigma(sigma, samples.size());
}

double kde_density(double query, std::span<const double> samples, double h) {
  if (!(h > 0.0)) {
    throw InvalidBandwidth("bandwidth must be positive");
  }
  if (samples.empty()) {
    throw EmptyData("density estimate needs at least one sample");
  }
  double sum = 0.0;
  for (double z : samples) sum += mirrored_kernel(query, z, h);
  return sum / (static_cast<double>(samples.size()) * h);
}

double kde_density(double query, std::span<const double> samples, const KdeConfig& cfg) {
  return kde_density(query, samples, resolve_bandwidth(cfg, samples));
}

double kde_pi(double query, const BinaryReducedDataset& data, double h) {
  if (!(h > 0.0)) {
    throw InvalidBandwidth("bandwidth must be positive");
  }
  double denom = 0.0, numer = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double k = mirrored_kernel(query, data.confidences[i], h);
    denom += k;
    numer += k * data.outcomes[i];
  }
  if (denom <= 0.0) {
    return query;
  }
  return numer / denom;
}

double kde_pi(double query, const BinaryReducedDataset& data, const KdeConfig& cfg) {
  return kde_pi(query, data, resolve_bandwidth(cfg, data.confidences));
}

EceEstimate kde_ece(const BinaryReducedDataset& data, int d, const KdeConfig& cfg) {
  check_norm_order(d);
  if (data.size() < 2) {
    throw EmptyData("kde estimator needs at least 2 samples");
  }
  if (cfg.grid_points < 64) {
    throw ConfigError("integration grid needs at least 64 points");
  }
  const double h = resolve_bandwidth(cfg, data.confidences);

  // Accumulate the mirrored kernel sums S(q) and outcome-weighted sums N(q)
  // on the uniform grid, one scatter pass per sample over the grid indices
  // its (compactly supported) kernel touches.
  const std::size_t g = cfg.grid_points;
  const double step = 1.0 / static_cast<double>(g - 1);
  std::vector<double> denom(g, 0.0), numer(g, 0.0);
  const auto scatter = [&](double center, double y) {
    const double lo = center - h, hi = center + h;
    if (hi < 0.0 || lo > 1.0) return;
    const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(lo / step)));
    const auto last = static_cast<std::size_t>(
        std::min(static_cast<double>(g - 1), std::floor(hi / step)));
    for (std::size_t j = first; j <= last; ++j) {
      const double k = unit_triweight((static_cast<double>(j) * step - center) / h);
      denom[j] += k;
      numer[j] += k * y;
    }
  };
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double z = data.confidences[i];
    const double y = data.outcomes[i];
    scatter(z, y);
    scatter(-z, y);        // reflection at 0
    scatter(2.0 - z, y);   // reflection at 1
  }

  const double n = static_cast<double>(data.size());
  std::vector<double> integrand(g);
  for (std::size_t j = 0; j < g; ++j) {
    const double q = static_cast<double>(j) * step;
    const double density = denom[j] / (n * h);
    const double pi_hat = denom[j] > 0.0 ? numer[j] / denom[j] : q;
    integrand[j] = pow_d(std::abs(q - pi_hat), d) * density;
  }
  double integral = 0.0;
  for (std::size_t j = 0; j + 1 < g; ++j) {
    integral += 0.5 * step * (integrand[j] + integrand[j + 1]);
  }

  EceEstimate est;
  est.value = integral;
  est.d = d;
  est.kind = EstimatorKind::kde;
  est.n_e = data.size();
  est.detail = "h=" + format_value(h);
  return est;
}

// ---------------------------------------------------------------------------
// Calibration gain and Monte Carlo ground truth
// ---------------------------------------------------------------------------

double calibration_gain(const LabeledDataset& data, const CalibrationMap& map) {
  const double before = total_squared_loss(data);
  const double after = total_squared_loss(data, map);
  return (before - after) / static_cast<double>(data.size());
}

EceEstimate ground_truth_ece_binary(const std::function<double(double)>& pi_fn,
                                    const std::function<double(Rng&)>& z1_sampler, int d,
                                    std::size_t n_mc, std::uint64_t seed) {
  check_norm_order(d);
  if (n_mc < 10000) {
    throw ConfigError("ground-truth Monte Carlo needs at least 1e4 samples");
  }
  Rng rng(seed);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n_mc; ++i) {
    const double z1 = z1_sampler(rng);
    const double v = pow_d(std::abs(z1 - pi_fn(z1)), d);
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double variance = m2 / static_cast<double>(n_mc - 1);

  EceEstimate est;
  est.value = mean;
  est.d = d;
  est.kind = EstimatorKind::ground_truth_mc;
  est.n_e = n_mc;
  est.detail = "n_mc=" + std::to_string(n_mc);
  est.stderr_value = std::sqrt(variance / static_cast<double>(n_mc));
  return est;
}

}  // namespace calib

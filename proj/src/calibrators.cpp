#include "calib/calibrators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace calib {

namespace {

constexpr double kTempMin = 0.01;
constexpr double kTempMax = 100.0;

double squared_distance(const ProbVector& z, const OneHotLabel& y) {
  double s = 0.0;
  for (std::size_t l = 0; l < z.num_classes(); ++l) {
    const double d = z[l] - (l == y.class_index ? 1.0 : 0.0);
    s += d * d;
  }
  return s;
}

double temperature_loss(const LabeledDataset& data, double t) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    loss += squared_distance(apply_temperature(data.prediction(i), t), data.label(i));
  }
  return loss;
}

// Golden-section minimization on [lo, hi]; assumes a single basin inside the
// bracket (the bracket comes from a coarse scan).
template <typename F>
double golden_section(F&& f, double lo, double hi, double tol) {
  constexpr double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

// Gaussian elimination with partial pivoting for the tiny KKT systems.
// Returns false when the matrix is numerically singular.
bool solve_linear(std::vector<std::vector<double>> m, std::vector<double>& rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (std::abs(m[pivot][col]) < 1e-12) return false;
    std::swap(m[col], m[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = m[r][col] / m[col][col];
      for (std::size_t c = col; c < n; ++c) m[r][c] -= factor * m[col][c];
      rhs[r] -= factor * rhs[col];
    }
  }
  for (std::size_t i = 0; i < n; ++i) rhs[i] /= m[i][i];
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Application
// ---------------------------------------------------------------------------

ProbVector apply_temperature(const ProbVector& z, double t) {
  if (!(t > 0.0)) {
    throw DomainError("temperature must be positive");
  }
  const double inv_t = 1.0 / t;
  std::vector<double> powered(z.num_classes());
  for (std::size_t l = 0; l < z.num_classes(); ++l) {
    powered[l] = std::pow(z[l], inv_t);
  }
  return normalize(powered);
}

ProbVector apply_ets(const ProbVector& z, const EtsMap& map) {
  const ProbVector ts = apply_temperature(z, map.t);
  const double uniform = 1.0 / static_cast<double>(z.num_classes());
  std::vector<double> out(z.num_classes());
  for (std::size_t l = 0; l < z.num_classes(); ++l) {
    out[l] = map.w[0] * ts[l] + map.w[1] * z[l] + map.w[2] * uniform;
  }
  return normalize(out);
}

ProbVector apply_irm(const ProbVector& z, const IsotonicFn& g) {
  return apply_accuracy_preserving([&](double a) { return g(a); }, z);
}

ProbVector apply_irova(const ProbVector& z, const IrovaMap& map) {
  if (map.num_classes() != z.num_classes()) {
    throw DimensionError("one-vs-all map has a different number of classes than z");
  }
  std::vector<double> out(z.num_classes());
  double sum = 0.0;
  for (std::size_t l = 0; l < z.num_classes(); ++l) {
    out[l] = map.per_class[l](z[l]);
    sum += out[l];
  }
  if (sum <= 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(z.num_classes()));
    return ProbVector(std::move(out));
  }
  return normalize(out);
}

ProbVector apply_composed(const ProbVector& z, const ComposedMap& map) {
  return apply_irova(apply_temperature(z, map.inner.t), map.outer);
}

ProbVector apply_map(const CalibrationMap& map, const ProbVector& z) {
  return std::visit(
      [&](const auto& m) -> ProbVector {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TemperatureMap>) {
          return apply_temperature(z, m.t);
        } else if constexpr (std::is_same_v<T, EtsMap>) {
          return apply_ets(z, m);
        } else if constexpr (std::is_same_v<T, IsotonicFn>) {
          return apply_irm(z, m);
        } else if constexpr (std::is_same_v<T, IrovaMap>) {
          return apply_irova(z, m);
        } else {
          return apply_composed(z, m);
        }
      },
      map);
}

std::string map_kind(const CalibrationMap& map) {
  switch (map.index()) {
    case 0: return "ts";
    case 1: return "ets";
    case 2: return "irm";
    case 3: return "irova";
    default: return "irova-ts";
  }
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

TemperatureFit fit_temperature(const LabeledDataset& data) {
  if (data.size() < 2) {
    throw EmptyData("temperature fit needs at least 2 samples");
  }

  bool all_same = true;
  for (std::size_t i = 1; i < data.size() && all_same; ++i) {
    all_same = data.prediction(i) == data.prediction(0) &&
               data.label(i).class_index == data.label(0).class_index;
  }
  if (all_same) {
    return {TemperatureMap{1.0}, temperature_loss(data, 1.0), true};
  }

  const double log_lo = std::log(kTempMin);
  const double log_hi = std::log(kTempMax);
  const auto loss_at_log_t = [&](double u) { return temperature_loss(data, std::exp(u)); };

  // Coarse scan locates the basin; golden section refines inside it.
  constexpr int kScanPoints = 257;
  int best = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  double min_loss = best_loss, max_loss = -best_loss;
  std::vector<double> scan(kScanPoints);
  for (int k = 0; k < kScanPoints; ++k) {
    const double u = log_lo + (log_hi - log_lo) * k / (kScanPoints - 1);
    scan[k] = loss_at_log_t(u);
    min_loss = std::min(min_loss, scan[k]);
    max_loss = std::max(max_loss, scan[k]);
    if (scan[k] < best_loss) {
      best_loss = scan[k];
      best = k;
    }
  }
  if (max_loss - min_loss <= 1e-12 * (1.0 + std::abs(min_loss))) {
    return {TemperatureMap{1.0}, temperature_loss(data, 1.0), true};
  }

  const double step = (log_hi - log_lo) / (kScanPoints - 1);
  const double lo = log_lo + step * std::max(best - 1, 0);
  const double hi = log_lo + step * std::min(best + 1, kScanPoints - 1);
  const double u = golden_section(loss_at_log_t, lo, hi, 1e-10);
  const double t = std::exp(u);
  return {TemperatureMap{t}, temperature_loss(data, t), false};
}

SimplexLsFit simplex_ls(std::span<const std::array<double, 3>> rows,
                        std::span<const double> targets) {
  if (rows.empty()) {
    throw EmptyData("simplex least squares needs at least one row");
  }
  if (rows.size() != targets.size()) {
    throw DimensionError("simplex least squares: rows and targets differ in length");
  }

  // Normal-equation form: objective(w) = w'Qw - 2 c'w + const.
  double q[3][3] = {};
  double c[3] = {};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int i = 0; i < 3; ++i) {
      c[i] += rows[r][i] * targets[r];
      for (int j = 0; j < 3; ++j) q[i][j] += rows[r][i] * rows[r][j];
    }
  }
  const auto objective = [&](const std::array<double, 3>& w) {
    double v = 0.0;
    for (int i = 0; i < 3; ++i) {
      v -= 2.0 * c[i] * w[i];
      for (int j = 0; j < 3; ++j) v += w[i] * q[i][j] * w[j];
    }
    for (std::size_t r = 0; r < rows.size(); ++r) v += targets[r] * targets[r];
    return v;
  };

  std::vector<std::array<double, 3>> candidates;
  bool non_unique = false;

  // Interior: minimize subject to 1'w = 1 only (KKT system in (w, lambda)).
  {
    std::vector<std::vector<double>> kkt(4, std::vector<double>(4, 0.0));
    std::vector<double> rhs(4, 0.0);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) kkt[i][j] = 2.0 * q[i][j];
      kkt[i][3] = 1.0;
      kkt[3][i] = 1.0;
      rhs[i] = 2.0 * c[i];
    }
    rhs[3] = 1.0;
    if (solve_linear(kkt, rhs)) {
      if (rhs[0] >= 0.0 && rhs[1] >= 0.0 && rhs[2] >= 0.0) {
        candidates.push_back({rhs[0], rhs[1], rhs[2]});
      }
    } else {
      non_unique = true;  // rank-deficient; boundary enumeration still covers it
    }
  }

  // Edges: w_k = 0, w_i = s, w_j = 1 - s with the 1-D quadratic solved in
  // closed form and clamped to [0, 1]. Vertices are the clamp endpoints.
  for (int k = 0; k < 3; ++k) {
    const int i = (k + 1) % 3;
    const int j = (k + 2) % 3;
    // q(s) = s^2 (Qii - 2Qij + Qjj) - 2 s (c_i - c_j - Qij + Qjj) + ...
    const double curv = q[i][i] - 2.0 * q[i][j] + q[j][j];
    double s;
    if (curv > 1e-14) {
      s = std::clamp((c[i] - c[j] + q[j][j] - q[i][j]) / curv, 0.0, 1.0);
    } else {
      s = 0.0;  // flat edge: every point ties, take the vertex
      non_unique = true;
    }
    std::array<double, 3> w{0.0, 0.0, 0.0};
    w[i] = s;
    w[j] = 1.0 - s;
    candidates.push_back(w);
    w[i] = 1.0;
    w[j] = 0.0;
    candidates.push_back(w);
    w[i] = 0.0;
    w[j] = 1.0;
    candidates.push_back(w);
  }

  SimplexLsFit fit;
  fit.objective = std::numeric_limits<double>::infinity();
  for (const auto& w : candidates) {
    const double v = objective(w);
    if (v < fit.objective) {
      fit.objective = v;
      fit.w = w;
    }
  }
  fit.non_unique = non_unique;
  return fit;
}

EtsFit fit_ets(const LabeledDataset& data) {
  if (data.size() < 3) {
    throw EmptyData("ensemble temperature fit needs at least 3 samples");
  }
  const TemperatureFit ts = fit_temperature(data);

  const std::size_t L = data.num_classes();
  const double uniform = 1.0 / static_cast<double>(L);
  std::vector<std::array<double, 3>> rows;
  std::vector<double> targets;
  rows.reserve(data.size() * L);
  targets.reserve(data.size() * L);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const ProbVector scaled = apply_temperature(data.prediction(i), ts.map.t);
    for (std::size_t l = 0; l < L; ++l) {
      rows.push_back({scaled[l], data.prediction(i)[l], uniform});
      targets.push_back(l == data.label(i).class_index ? 1.0 : 0.0);
    }
  }

  const SimplexLsFit ls = simplex_ls(rows, targets);
  EtsFit fit;
  fit.map = EtsMap{ts.map.t, ls.w};
  fit.sq_loss = ls.objective;
  fit.ts_sq_loss = ts.sq_loss;
  fit.degenerate = ts.degenerate;
  fit.non_unique = ls.non_unique;
  return fit;
}

IsotonicFn fit_irm(const LabeledDataset& data, double eps) {
  if (!(eps > 0.0)) {
    throw DomainError("strictness slope must be positive");
  }
  const std::size_t L = data.num_classes();
  std::vector<double> keys, values;
  keys.reserve(data.size() * L);
  values.reserve(data.size() * L);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t l = 0; l < L; ++l) {
      keys.push_back(data.prediction(i)[l]);
      values.push_back(data.label(i).class_index == l ? 1.0 : 0.0);
    }
  }
  return IsotonicFn::fit(keys, values, eps);
}

IrovaMap fit_irova(const LabeledDataset& data) {
  const std::size_t L = data.num_classes();
  IrovaMap map;
  map.per_class.reserve(L);
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double> keys, values;
    keys.reserve(data.size());
    values.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      keys.push_back(data.prediction(i)[l]);
      values.push_back(data.label(i).class_index == l ? 1.0 : 0.0);
    }
    map.per_class.push_back(IsotonicFn::fit(keys, values, 0.0));
  }
  return map;
}

ComposedMap fit_composed(const LabeledDataset& data) {
  if (data.size() < 3) {
    throw EmptyData("composed fit needs at least 3 samples");
  }
  const TemperatureFit ts = fit_temperature(data);
  std::vector<ProbVector> scaled;
  scaled.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    scaled.push_back(apply_temperature(data.prediction(i), ts.map.t));
  }
  const LabeledDataset transformed(std::move(scaled), data.labels());
  return ComposedMap{ts.map, fit_irova(transformed)};
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

double total_squared_loss(const LabeledDataset& data) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    loss += squared_distance(data.prediction(i), data.label(i));
  }
  return loss;
}

double total_squared_loss(const LabeledDataset& data, const CalibrationMap& map) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    loss += squared_distance(apply_map(map, data.prediction(i)), data.label(i));
  }
  return loss;
}

}  // namespace calib

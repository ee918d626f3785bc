#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "calib/ece.hpp"
#include "calib/simplex.hpp"

namespace calib::synthetic {

// Binary benchmark with a known data distribution: class 0 has features
// drawn from Normal(-1, 1), class 1 from Normal(+1, 1), equal priors. The
// classifier is a logistic curve in the feature, so the true calibration
// probability of its output has a closed form and every estimator can be
// checked against exact ground truth.
struct SyntheticClassifier {
  double beta0 = 0.0;
  double beta1 = -2.0;  // must be nonzero
};

// z = (sigma(beta0 + beta1 x), 1 - sigma(beta0 + beta1 x)).
ProbVector predict(double x, const SyntheticClassifier& clf);

// True P(class 0 | X = x) = 1 / (1 + exp(2x)) under the generative model.
double posterior(double x);

// True P(class 0 | z1) for the classifier's output z1 in (0, 1):
//   pi1(z1) = 1 / (1 + exp(-2 (beta0 + log(1/z1 - 1)) / beta1)).
// With beta0 = 0, beta1 = -2 this is the identity: the classifier equals the
// posterior and is perfectly calibrated.
double canonical_pi(double z1, const SyntheticClassifier& clf);

struct SyntheticDataset {
  LabeledDataset data;
  std::vector<double> features;
};

// n labeled draws from the generative model, predictions attached.
// Bitwise deterministic given the seed.
SyntheticDataset sample(std::size_t n, const SyntheticClassifier& clf, std::uint64_t seed);

// Draw of z1 alone (label discarded); used by the Monte Carlo ground truth.
// Clamped into [1e-12, 1 - 1e-12] so the closed form stays finite.
double sample_z1(Rng& rng, const SyntheticClassifier& clf);

// Monte Carlo estimate of E |z1 - pi1(z1)|^d with its standard error.
EceEstimate ground_truth(const SyntheticClassifier& clf, int d, std::size_t n_mc,
                         std::uint64_t seed);

}  // namespace calib::synthetic

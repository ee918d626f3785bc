#include "calib/synthetic.hpp"

#include <cmath>

namespace calib::synthetic {

namespace {

constexpr double kZ1Clamp = 1e-12;

void check_classifier(const SyntheticClassifier& clf) {
  if (clf.beta1 == 0.0 || !std::isfinite(clf.beta0) || !std::isfinite(clf.beta1)) {
    throw DomainError("synthetic classifier needs finite beta0 and nonzero beta1");
  }
}

double logistic(double a) { return 1.0 / (1.0 + std::exp(-a)); }

}  // namespace

ProbVector predict(double x, const SyntheticClassifier& clf) {
  check_classifier(clf);
  const double z1 = logistic(clf.beta0 + clf.beta1 * x);
  return ProbVector({z1, 1.0 - z1});
}

double posterior(double x) { return 1.0 / (1.0 + std::exp(2.0 * x)); }

double canonical_pi(double z1, const SyntheticClassifier& clf) {
  check_classifier(clf);
  if (!(z1 > 0.0 && z1 < 1.0)) {
    throw DomainError("canonical calibration function is defined on (0, 1)");
  }
  return logistic(2.0 * (clf.beta0 + std::log(1.0 / z1 - 1.0)) / clf.beta1);
}

SyntheticDataset sample(std::size_t n, const SyntheticClassifier& clf, std::uint64_t seed) {
  check_classifier(clf);
  if (n < 1) {
    throw EmptyData("synthetic sample needs n >= 1");
  }
  Rng rng(seed);
  std::vector<ProbVector> predictions;
  std::vector<OneHotLabel> labels;
  std::vector<double> features;
  predictions.reserve(n);
  labels.reserve(n);
  features.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool class0 = rng.bernoulli(0.5);
    const double x = rng.normal(class0 ? -1.0 : 1.0, 1.0);
    features.push_back(x);
    predictions.push_back(predict(x, clf));
    labels.push_back(OneHotLabel{class0 ? std::size_t{0} : std::size_t{1}});
  }
  return {LabeledDataset(std::move(predictions), std::move(labels)), std::move(features)};
}

double sample_z1(Rng& rng, const SyntheticClassifier& clf) {
  const bool class0 = rng.bernoulli(0.5);
  const double x = rng.normal(class0 ? -1.0 : 1.0, 1.0);
  const double z1 = logistic(clf.beta0 + clf.beta1 * x);
  return std::min(std::max(z1, kZ1Clamp), 1.0 - kZ1Clamp);
}

EceEstimate ground_truth(const SyntheticClassifier& clf, int d, std::size_t n_mc,
                         std::uint64_t seed) {
  check_classifier(clf);
  return ground_truth_ece_binary([&](double z1) { return canonical_pi(z1, clf); },
                                 [&](Rng& rng) { return sample_z1(rng, clf); }, d, n_mc,
                                 seed);
}

}  // namespace calib::synthetic

#include "calib/simplex.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace calib {

namespace {

void check_entries(std::span<const double> probs) {
  for (double p : probs) {
    if (!std::isfinite(p)) {
      throw DomainError("probability entry is not finite");
    }
    // Entries may exceed 1 by at most the sum tolerance before renormalization.
    if (p < 0.0 || p > 1.0 + ProbVector::kSumTolerance) {
      throw DomainError("probability entry " + std::to_string(p) + " outside [0, 1]");
    }
  }
}

}  // namespace

ProbVector::ProbVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) {
    throw DomainError("probability vector needs at least 2 classes");
  }
  check_entries(probs_);
  double sum = 0.0;
  for (double p : probs_) sum += p;
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw DomainError("probability vector sums to " + std::to_string(sum) +
                      ", beyond tolerance " + std::to_string(kSumTolerance));
  }
  if (sum != 1.0) {
    for (double& p : probs_) p /= sum;
  }
}

std::vector<double> OneHotLabel::expand(std::size_t num_classes) const {
  if (class_index >= num_classes) {
    throw InvalidClass("label class " + std::to_string(class_index) + " >= L = " +
                       std::to_string(num_classes));
  }
  std::vector<double> v(num_classes, 0.0);
  v[class_index] = 1.0;
  return v;
}

LabeledDataset::LabeledDataset(std::vector<ProbVector> predictions,
                               std::vector<OneHotLabel> labels)
  : predictions_(std::move(predictions)), labels_(std::move(labels)) {
  if (predictions_.empty()) {
    throw EmptyData("dataset needs at least one sample");
  }
  if (predictions_.size() != labels_.size()) {
    throw DimensionError("got " + std::to_string(predictions_.size()) + " predictions but " +
                         std::to_string(labels_.size()) + " labels");
  }
  const std::size_t L = predictions_.front().num_classes();
  for (const auto& z : predictions_) {
    if (z.num_classes() != L) {
      throw DimensionError("predictions disagree on the number of classes");
    }
  }
  for (const auto& y : labels_) {
    if (y.class_index >= L) {
      throw InvalidClass("label class " + std::to_string(y.class_index) + " >= L = " +
                         std::to_string(L));
    }
  }
}

ProbVector normalize(std::span<const double> raw) {
  if (raw.size() < 2) {
    throw DomainError("need at least 2 entries to normalize");
  }
  double sum = 0.0;
  for (double v : raw) {
    if (!std::isfinite(v) || v < 0.0) {
      throw DegenerateVector("normalize requires finite nonnegative entries");
    }
    sum += v;
  }
  if (sum <= 0.0) {
    throw DegenerateVector("cannot normalize an all-zero vector");
  }
  std::vector<double> out(raw.begin(), raw.end());
  // A sum within a few ulps of 1 is already normalized; skipping the division
  // makes normalize an exact projection (idempotent bit for bit).
  const double ulps = 16.0 * std::numeric_limits<double>::epsilon() *
                      static_cast<double>(raw.size());
  if (std::abs(sum - 1.0) > ulps) {
    for (double& v : out) v /= sum;
  }
  return ProbVector(std::move(out), ProbVector::AlreadyNormalized{});
}

std::size_t argmax_class(const ProbVector& z) {
  std::size_t best = 0;
  for (std::size_t l = 1; l < z.num_classes(); ++l) {
    if (z[l] > z[best]) best = l;  // ties break to the smallest index
  }
  return best;
}

BinaryReducedDataset top_label_reduce(const LabeledDataset& data) {
  BinaryReducedDataset out;
  out.kind = ReductionKind::top_label;
  out.confidences.reserve(data.size());
  out.outcomes.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t k = argmax_class(data.prediction(i));
    out.confidences.push_back(data.prediction(i)[k]);
    out.outcomes.push_back(k == data.label(i).class_index ? 1 : 0);
  }
  return out;
}

BinaryReducedDataset classwise_reduce(const LabeledDataset& data, std::size_t l) {
  if (l >= data.num_classes()) {
    throw InvalidClass("class " + std::to_string(l) + " >= L = " +
                       std::to_string(data.num_classes()));
  }
  BinaryReducedDataset out;
  out.kind = ReductionKind::class_wise;
  out.class_index = l;
  out.confidences.reserve(data.size());
  out.outcomes.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.confidences.push_back(data.prediction(i)[l]);
    out.outcomes.push_back(data.label(i).class_index == l ? 1 : 0);
  }
  return out;
}

}  // namespace calib

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "calib/errors.hpp"

namespace calib {

// A point on the L-class probability simplex. Immutable after construction.
//
// Construction validates: L >= 2, entries in [0,1] and, when the entry sum
// drifts from 1 by no more than kSumTolerance (float round-off in external
// files), the vector is renormalized silently. Larger drift is rejected as
// corrupt data.
class ProbVector {
public:
  static constexpr double kSumTolerance = 1e-6;

  explicit ProbVector(std::vector<double> probs);

  std::size_t num_classes() const { return probs_.size(); }
  double operator[](std::size_t l) const { return probs_[l]; }
  const std::vector<double>& probs() const { return probs_; }

  bool operator==(const ProbVector& other) const = default;

private:
  struct AlreadyNormalized {};
  ProbVector(std::vector<double> probs, AlreadyNormalized) : probs_(std::move(probs)) {}

  std::vector<double> probs_;

  friend ProbVector normalize(std::span<const double> raw);
};

// One-hot label stored as its class index.
struct OneHotLabel {
  std::size_t class_index = 0;

  // Expands to the L-dimensional 0/1 vector.
  std::vector<double> expand(std::size_t num_classes) const;

  bool operator==(const OneHotLabel&) const = default;
};

// Paired predictions and labels; the calibration or evaluation set.
// All predictions share one L and every label index is < L.
class LabeledDataset {
public:
  LabeledDataset(std::vector<ProbVector> predictions, std::vector<OneHotLabel> labels);

  std::size_t size() const { return predictions_.size(); }
  std::size_t num_classes() const { return predictions_.front().num_classes(); }
  const std::vector<ProbVector>& predictions() const { return predictions_; }
  const std::vector<OneHotLabel>& labels() const { return labels_; }
  const ProbVector& prediction(std::size_t i) const { return predictions_[i]; }
  const OneHotLabel& label(std::size_t i) const { return labels_[i]; }

private:
  std::vector<ProbVector> predictions_;
  std::vector<OneHotLabel> labels_;
};

enum class ReductionKind { top_label, class_wise };

// 1-D reduction of a multi-class dataset: (confidence, binary outcome) pairs.
struct BinaryReducedDataset {
  std::vector<double> confidences;
  std::vector<int> outcomes;  // each 0 or 1
  ReductionKind kind = ReductionKind::top_label;
  std::size_t class_index = 0;  // meaningful for class_wise only

  std::size_t size() const { return confidences.size(); }
};

// raw / sum(raw). Rejects negative entries and all-zero input.
ProbVector normalize(std::span<const double> raw);

// Smallest index attaining the maximum entry.
std::size_t argmax_class(const ProbVector& z);

// T(z) = (g(z_1),...,g(z_L)) / sum_l g(z_l) for a nonnegative strictly
// increasing scalar g. Preserves the full ordering of the entries of z,
// hence the top-k classes for every k.
template <typename G>
ProbVector apply_accuracy_preserving(G&& g, const ProbVector& z) {
  std::vector<double> out(z.num_classes());
  for (std::size_t l = 0; l < z.num_classes(); ++l) {
    out[l] = g(z[l]);
  }
  return normalize(out);
}

// Per sample: confidence = max entry, outcome = 1 iff the argmax class
// matches the label. Outcome average equals top-1 accuracy exactly.
BinaryReducedDataset top_label_reduce(const LabeledDataset& data);

// Per sample: confidence = z_l, outcome = y_l.
BinaryReducedDataset classwise_reduce(const LabeledDataset& data, std::size_t l);

}  // namespace calib

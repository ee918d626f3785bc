#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "calib/rng.hpp"
#include "calib/simplex.hpp"
#include "oracles.hpp"

using namespace calib;

namespace {

std::vector<std::size_t> sort_permutation(const ProbVector& z) {
  std::vector<std::size_t> idx(z.num_classes());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return z[a] < z[b]; });
  return idx;
}

}  // namespace

TEST_CASE("normalize basics") {
  const ProbVector a = normalize(std::vector<double>{1.0, 1.0});
  CHECK(a[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(a[1] == doctest::Approx(0.5).epsilon(1e-15));

  const ProbVector b = normalize(std::vector<double>{0.2, 0.3, 0.5});
  CHECK(b[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(b[2] == doctest::Approx(0.5).epsilon(1e-15));

  const ProbVector c = normalize(std::vector<double>{2.0, 6.0});
  CHECK(c[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(c[1] == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("normalize rejects degenerate input") {
  CHECK_THROWS_AS(normalize(std::vector<double>{0.0, 0.0}), DegenerateVector);
  CHECK_THROWS_AS(normalize(std::vector<double>{1.0, -0.5}), DegenerateVector);
  CHECK_THROWS_AS(normalize(std::vector<double>{1.0}), DomainError);
}

TEST_CASE("normalize is exactly idempotent") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> raw(2 + trial % 5);
    for (auto& v : raw) v = rng.uniform01() * 10.0;
    const ProbVector once = normalize(raw);
    const ProbVector twice = normalize(once.probs());
    CHECK(once == twice);
  }
}

TEST_CASE("ProbVector validation and silent renormalization") {
  CHECK_THROWS_AS(ProbVector({0.5, 0.3}), DomainError);      // sums to 0.8
  CHECK_THROWS_AS(ProbVector({0.7}), DomainError);           // L < 2
  CHECK_THROWS_AS(ProbVector({1.2, -0.2}), DomainError);     // outside [0,1]

  const ProbVector v({0.5 + 4e-7, 0.5});  // off by < 1e-6: accepted, renormalized
  CHECK(v[0] + v[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("apply_accuracy_preserving hand values") {
  const ProbVector id = apply_accuracy_preserving([](double a) { return a; },
                                                  ProbVector({0.7, 0.3}));
  CHECK(id[0] == doctest::Approx(0.7).epsilon(1e-15));

  const ProbVector sq = apply_accuracy_preserving([](double a) { return a * a; },
                                                  ProbVector({0.8, 0.2}));
  CHECK(sq[0] == doctest::Approx(0.64 / 0.68).epsilon(1e-14));
  CHECK(sq[1] == doctest::Approx(0.04 / 0.68).epsilon(1e-14));

  const ProbVector sh = apply_accuracy_preserving([](double a) { return a + 1.0; },
                                                  ProbVector({0.9, 0.1}));
  CHECK(sh[0] == doctest::Approx(1.9 / 3.0).epsilon(1e-14));
  CHECK(sh[1] == doctest::Approx(1.1 / 3.0).epsilon(1e-14));
  CHECK(argmax_class(sh) == 0);

  CHECK_THROWS_AS(apply_accuracy_preserving([](double) { return 0.0; },
                                            ProbVector({0.5, 0.5})),
                  DegenerateVector);
}

TEST_CASE("accuracy-preserving maps preserve the full ordering") {
  Rng rng(23);
  const std::vector<std::function<double(double)>> gs = {
      [](double a) { return a; },
      [](double a) { return a * a + 1e-6; },
      [](double a) { return std::sqrt(a + 1e-12); },
      [](double a) { return std::exp(2.0 * a); },
      [](double a) { return a + 0.25; },
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t L = 2 + trial % 6;
    const ProbVector z = oracles::random_prob_vector(rng, L);
    const auto& g = gs[trial % gs.size()];
    const ProbVector t = apply_accuracy_preserving(g, z);
    CHECK(sort_permutation(z) == sort_permutation(t));
  }
}

TEST_CASE("accuracy-preserving maps are injective (randomized search)") {
  Rng rng(29);
  const auto g = [](double a) { return a * a + 0.1; };
  for (int trial = 0; trial < 2000; ++trial) {
    const ProbVector z1 = oracles::random_prob_vector(rng, 3);
    const ProbVector z2 = oracles::random_prob_vector(rng, 3);
    if (z1 == z2) continue;
    CHECK(apply_accuracy_preserving(g, z1) != apply_accuracy_preserving(g, z2));
  }
}

TEST_CASE("argmax_class with deterministic tie-break") {
  CHECK(argmax_class(ProbVector({0.2, 0.5, 0.3})) == 1);
  CHECK(argmax_class(ProbVector({0.5, 0.5})) == 0);
  CHECK(argmax_class(ProbVector({1.0 / 3, 1.0 / 3, 1.0 / 3})) == 0);
}

TEST_CASE("top_label_reduce") {
  const LabeledDataset data({ProbVector({0.9, 0.1}), ProbVector({0.9, 0.1})},
                            {OneHotLabel{0}, OneHotLabel{1}});
  const BinaryReducedDataset r = top_label_reduce(data);
  CHECK(r.confidences[0] == doctest::Approx(0.9));
  CHECK(r.outcomes[0] == 1);
  CHECK(r.outcomes[1] == 0);

  const LabeledDataset data3({ProbVector({0.3, 0.3, 0.4})}, {OneHotLabel{2}});
  const BinaryReducedDataset r3 = top_label_reduce(data3);
  CHECK(r3.confidences[0] == doctest::Approx(0.4));
  CHECK(r3.outcomes[0] == 1);
}

TEST_CASE("top_label_reduce outcome mean equals top-1 accuracy exactly") {
  Rng rng(31);
  const LabeledDataset data = oracles::random_calibrated_dataset(rng, 500, 4);
  const BinaryReducedDataset r = top_label_reduce(data);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (argmax_class(data.prediction(i)) == data.label(i).class_index) ++correct;
  }
  const double mean =
      std::accumulate(r.outcomes.begin(), r.outcomes.end(), 0.0) / r.outcomes.size();
  CHECK(mean == static_cast<double>(correct) / data.size());
}

TEST_CASE("classwise_reduce") {
  const LabeledDataset data({ProbVector({0.9, 0.1})}, {OneHotLabel{0}});
  const BinaryReducedDataset r0 = classwise_reduce(data, 0);
  CHECK(r0.confidences[0] == doctest::Approx(0.9));
  CHECK(r0.outcomes[0] == 1);
  const BinaryReducedDataset r1 = classwise_reduce(data, 1);
  CHECK(r1.confidences[0] == doctest::Approx(0.1));
  CHECK(r1.outcomes[0] == 0);

  const LabeledDataset data3({ProbVector({0.25, 0.25, 0.5})}, {OneHotLabel{1}});
  const BinaryReducedDataset r = classwise_reduce(data3, 1);
  CHECK(r.confidences[0] == doctest::Approx(0.25));
  CHECK(r.outcomes[0] == 1);

  CHECK_THROWS_AS(classwise_reduce(data, 2), InvalidClass);
}

TEST_CASE("dataset validation") {
  CHECK_THROWS_AS(LabeledDataset({}, {}), EmptyData);
  CHECK_THROWS_AS(LabeledDataset({ProbVector({0.5, 0.5})}, {}), DimensionError);
  CHECK_THROWS_AS(LabeledDataset({ProbVector({0.5, 0.5})}, {OneHotLabel{2}}), InvalidClass);
  CHECK_THROWS_AS(
      LabeledDataset({ProbVector({0.5, 0.5}), ProbVector({0.2, 0.3, 0.5})},
                     {OneHotLabel{0}, OneHotLabel{1}}),
      DimensionError);
}

TEST_CASE("one-hot expansion") {
  const OneHotLabel y{2};
  const std::vector<double> v = y.expand(4);
  CHECK(v == std::vector<double>{0, 0, 1, 0});
  CHECK_THROWS_AS(y.expand(2), InvalidClass);
}

#include "calib/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace calib {

std::vector<double> pava(std::span<const double> values, std::span<const double> weights) {
  if (values.empty()) {
    throw EmptyData("pava requires at least one value");
  }
  if (!weights.empty() && weights.size() != values.size()) {
    throw DimensionError("pava weights must match values in length");
  }

  // Blocks kept on a stack; merging violating neighbors preserves the
  // weighted mean, which is the pooled least-squares level.
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (!(w > 0.0)) {
      throw DomainError("pava weights must be positive");
    }
    blocks.push_back({values[i], w, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block hi = blocks.back();
      blocks.pop_back();
      Block& lo = blocks.back();
      lo.mean = (lo.mean * lo.weight + hi.mean * hi.weight) / (lo.weight + hi.weight);
      lo.weight += hi.weight;
      lo.count += hi.count;
    }
  }

  std::vector<double> fitted;
  fitted.reserve(values.size());
  for (const Block& b : blocks) {
    fitted.insert(fitted.end(), b.count, b.mean);
  }
  return fitted;
}

IsotonicFn::IsotonicFn(std::vector<double> breakpoints, std::vector<double> levels,
                       double eps)
  : breakpoints_(std::move(breakpoints)), levels_(std::move(levels)), eps_(eps) {
  if (breakpoints_.empty() || breakpoints_.size() != levels_.size()) {
    throw DimensionError("isotonic function needs matching nonempty breakpoints and levels");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      throw DomainError("isotonic breakpoints must be strictly increasing");
    }
    if (levels_[i] < levels_[i - 1]) {
      throw DomainError("isotonic levels must be nondecreasing");
    }
  }
  if (eps_ < 0.0 || !std::isfinite(eps_)) {
    throw DomainError("strictness slope must be nonnegative");
  }
}

IsotonicFn IsotonicFn::fit(std::span<const double> keys, std::span<const double> values,
                           double eps) {
  if (keys.empty()) {
    throw EmptyData("isotonic fit requires at least one pair");
  }
  if (keys.size() != values.size()) {
    throw DimensionError("isotonic fit: keys and values differ in length");
  }

  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

  // Pool exact key ties to their mean, tracking multiplicity as weight.
  std::vector<double> uniq_keys, pooled_values, pooled_weights;
  uniq_keys.reserve(keys.size());
  for (std::size_t r = 0; r < order.size();) {
    const double k = keys[order[r]];
    double sum = 0.0;
    std::size_t cnt = 0;
    while (r < order.size() && keys[order[r]] == k) {
      sum += values[order[r]];
      ++cnt;
      ++r;
    }
    uniq_keys.push_back(k);
    pooled_values.push_back(sum / static_cast<double>(cnt));
    pooled_weights.push_back(static_cast<double>(cnt));
  }

  std::vector<double> levels = pava(pooled_values, pooled_weights);
  return IsotonicFn(std::move(uniq_keys), std::move(levels), eps);
}

double IsotonicFn::step_value(double a) const {
  // Index of the last breakpoint <= a; clamped to the support ends.
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), a);
  if (it == breakpoints_.begin()) {
    return levels_.front();
  }
  return levels_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

}  // namespace calib

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace calib {

// Seeded random source with hand-rolled uniform and normal draws.
// std::mt19937_64 output is specified bit-exactly by the standard, while the
// std distribution adaptors are implementation-defined; generating variates
// from the raw 64-bit stream keeps every sampled dataset reproducible across
// compilers and standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on (0,1): 53 random mantissa bits, offset half an ulp so the
  // endpoints are never hit (log/logit of draws stays finite).
  double uniform01() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1p-53;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Box-Muller; the spare variate is cached to keep one normal per call.
  double normal(double mean = 0.0, double stddev = 1.0) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + stddev * spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * kPi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mean + stddev * r * std::cos(theta);
  }

private:
  static constexpr double kPi = 3.14159265358979323846;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace calib

#pragma once

#include <complex>
#include <random>

#include <gtest/gtest.h>

#include <elliptop/elliptic_fn.hpp>

namespace testing_util {

using elliptop::cplx;

inline const cplx tau0{0.3, 1.1};

inline elliptop::EllipticParams params(cplx tau = tau0) {
  elliptop::EllipticParams p;
  p.tau = tau;
  return p;
}

// points x + y tau with x, y in [lo, hi]
struct Sampler {
  std::mt19937_64 rng;
  cplx tau;
  explicit Sampler(std::uint64_t seed, cplx t = tau0) : rng(seed), tau(t) {}
  cplx point(double lo = 0.05, double hi = 0.45) {
    std::uniform_real_distribution<double> u(lo, hi);
    const double x = u(rng), y = u(rng);
    return x + y * tau;
  }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
};

// |a - b| relative to max(1, |b|)
inline double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace testing_util

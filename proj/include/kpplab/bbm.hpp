// bbm.hpp - event-driven Monte Carlo of binary branching Brownian motion:
// exponential(1) branch clocks per particle, Gaussian increments between
// events. The tail law of the running maximum solves a KPP equation, which
// is the cross-check against the PDE solver.
//
// diffusion is the generator coefficient D in D d^2/dx^2: the standard BBM
// (Brownian particles) has D = 1/2 and front speed sqrt(2); D = 1 gives the
// speed-2 normalization. The derivative martingale uses the form matching
// the configured D:  Z_t = sum_k (c t - X_k) e^{lambda (X_k - c t)} with
// c = 2 sqrt(D), lambda = c / (2D).
//
// Determinism: replicate r draws from its own SplitMix64 stream seeded by
// mix(seed, r); replicates are farmed to threads in index order and results
// land in per-replicate slots, so outputs are independent of thread count.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "kpplab/common.hpp"

namespace kpplab {

struct BBMConfig {
  double branch_rate = 1.0;
  double diffusion = 0.5;        // D in D d^2/dx^2
  double t_end = 8.0;
  int replicates = 10000;
  std::uint64_t seed = 1;
  std::vector<double> checkpoints;  // defaults to {t_end} when empty
  std::size_t particle_cap = 4u << 20;  // hard cap on live particles per replicate
  int threads = 0;                      // 0 = hardware concurrency
};

struct BBMEnsemble {
  std::vector<double> checkpoints;
  int replicates = 0;
  double diffusion = 0.5;
  // flattened [checkpoint][replicate]
  std::vector<std::vector<double>> max_at;
  std::vector<std::vector<std::uint64_t>> count_at;
  std::vector<std::vector<double>> z_at;

  int checkpoint_index(double t) const;
};

BBMEnsemble simulate(const BBMConfig& config);

struct TailCdf {
  std::vector<double> x;
  std::vector<double> prob;      // empirical P(M_t > x)
  std::vector<double> ci_half;   // binomial 95% half-width per x
};

TailCdf max_cdf(const BBMEnsemble& ens, double t, const std::vector<double>& x_grid);

// Per-replicate derivative-martingale values at checkpoint t.
const std::vector<double>& derivative_martingale(const BBMEnsemble& ens, double t);

struct MedianFit {
  double c = 0.0;          // median(M_t) = speed*t - c log t + a
  double intercept = 0.0;
  double stderr_c = 0.0;   // bootstrap standard error
  std::vector<double> medians;
};

// Fits the median drift with speed = 2 sqrt(D); bootstrap over replicates.
MedianFit median_shift_fit(const BBMEnsemble& ens, const std::vector<double>& checkpoints,
                           int bootstrap = 200, std::uint64_t bootstrap_seed = 12345);

// SplitMix64: the per-replicate generator stream.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t s) : state(s) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() {  // in (0,1)
    return (next() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }
  double exponential() { return -std::log(uniform()); }
  double gaussian();  // Marsaglia polar
};

}  // namespace kpplab

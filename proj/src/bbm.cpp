#include "kpplab/bbm.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "kpplab/fit.hpp"

namespace kpplab {

double SplitMix64::gaussian() {
  // Marsaglia polar; the spare deviate is discarded to keep the stream
  // layout independent of consumption patterns.
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

int BBMEnsemble::checkpoint_index(double t) const {
  for (std::size_t i = 0; i < checkpoints.size(); ++i)
    if (std::fabs(checkpoints[i] - t) < 1e-9) return static_cast<int>(i);
  throw ConfigError("BBMEnsemble: t is not among the stored checkpoints");
}

namespace {

struct Particle {
  double x;
  double t;
  double t_branch;
};

// One replicate: depth-first over the branching tree, stepping each particle
// through the checkpoints that fall inside its lifetime segment.
void run_replicate(const BBMConfig& cfg, std::uint64_t stream_seed,
                   const std::vector<double>& cps,
                   double speed, double lambda,
                   std::vector<double>& max_out, std::vector<std::uint64_t>& cnt_out,
                   std::vector<double>& z_out) {
  SplitMix64 rng(stream_seed);
  const double sigma2 = 2.0 * cfg.diffusion;  // increment variance per unit time
  const std::size_t ncp = cps.size();

  for (std::size_t c = 0; c < ncp; ++c) {
    max_out[c] = -std::numeric_limits<double>::infinity();
    cnt_out[c] = 0;
    z_out[c] = 0.0;
  }

  // a checkpoint at t = 0 sees the single root particle at the origin
  for (std::size_t c = 0; c < ncp; ++c) {
    if (cps[c] == 0.0) {
      max_out[c] = 0.0;
      cnt_out[c] = 1;
      z_out[c] = 0.0;
    }
  }

  std::vector<Particle> stack;
  stack.push_back({0.0, 0.0, rng.exponential() / cfg.branch_rate});

  while (!stack.empty()) {
    Particle part = stack.back();
    stack.pop_back();

    for (;;) {
      const double t_next = part.t + part.t_branch;
      // visit checkpoints inside (part.t, min(t_next, t_end)]
      for (std::size_t c = 0; c < ncp; ++c) {
        const double tc = cps[c];
        if (tc <= part.t || tc > std::min(t_next, cfg.t_end) + 1e-15) continue;
        const double dt = tc - part.t;
        if (dt > 0.0) part.x += rng.gaussian() * std::sqrt(sigma2 * dt);
        part.t = tc;
        max_out[c] = std::max(max_out[c], part.x);
        cnt_out[c] += 1;
        z_out[c] += (speed * tc - part.x) * std::exp(lambda * (part.x - speed * tc));
      }
      if (t_next >= cfg.t_end) break;

      // branch: advance to the event, push one child, continue with the other
      const double dt = t_next - part.t;
      if (dt > 0.0) part.x += rng.gaussian() * std::sqrt(sigma2 * dt);
      part.t = t_next;
      stack.push_back({part.x, part.t, rng.exponential() / cfg.branch_rate});
      part.t_branch = rng.exponential() / cfg.branch_rate;
      if (stack.size() + 1 > cfg.particle_cap)
        throw NumericError("bbm: particle cap exceeded");
    }
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t replicate) {
  SplitMix64 m(seed ^ (0x9e3779b97f4a7c15ull * (replicate + 1)));
  return m.next();
}

}  // namespace

BBMEnsemble simulate(const BBMConfig& config) {
  if (config.replicates < 1) throw ConfigError("bbm: replicates must be >= 1");
  if (!(config.branch_rate > 0.0)) throw ConfigError("bbm: branch_rate must be positive");
  if (std::exp(config.t_end * config.branch_rate) > 1e6)
    throw ConfigError("bbm: expected particle count e^{t_end} exceeds 1e6 per replicate");

  BBMEnsemble ens;
  ens.checkpoints = config.checkpoints.empty()
                        ? std::vector<double>{config.t_end}
                        : config.checkpoints;
  std::sort(ens.checkpoints.begin(), ens.checkpoints.end());
  ens.replicates = config.replicates;
  ens.diffusion = config.diffusion;
  const std::size_t ncp = ens.checkpoints.size();
  ens.max_at.assign(ncp, std::vector<double>(config.replicates));
  ens.count_at.assign(ncp, std::vector<std::uint64_t>(config.replicates));
  ens.z_at.assign(ncp, std::vector<double>(config.replicates));

  const double speed = 2.0 * std::sqrt(config.diffusion);
  const double lambda = speed / (2.0 * config.diffusion);

  int nthreads = config.threads > 0 ? config.threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
  if (nthreads < 1) nthreads = 1;
  nthreads = std::min(nthreads, config.replicates);

  auto worker = [&](int first, int last) {
    std::vector<double> mx(ncp), zz(ncp);
    std::vector<std::uint64_t> ct(ncp);
    for (int r = first; r < last; ++r) {
      run_replicate(config, mix_seed(config.seed, r), ens.checkpoints, speed, lambda,
                    mx, ct, zz);
      for (std::size_t c = 0; c < ncp; ++c) {
        ens.max_at[c][r] = mx[c];
        ens.count_at[c][r] = ct[c];
        ens.z_at[c][r] = zz[c];
      }
    }
  };

  if (nthreads == 1) {
    worker(0, config.replicates);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (config.replicates + nthreads - 1) / nthreads;
    for (int k = 0; k < nthreads; ++k) {
      const int first = k * chunk;
      const int last = std::min(config.replicates, first + chunk);
      if (first >= last) break;
      pool.emplace_back(worker, first, last);
    }
    for (auto& th : pool) th.join();
  }
  return ens;
}

TailCdf max_cdf(const BBMEnsemble& ens, double t, const std::vector<double>& x_grid) {
  const int c = ens.checkpoint_index(t);
  const auto& mx = ens.max_at[c];
  const double n = static_cast<double>(mx.size());
  TailCdf out;
  out.x = x_grid;
  out.prob.resize(x_grid.size());
  out.ci_half.resize(x_grid.size());
  std::vector<double> sorted = mx;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x_grid[i]);
    const double p = static_cast<double>(sorted.end() - it) / n;
    out.prob[i] = p;
    out.ci_half[i] = 1.96 * std::sqrt(std::max(p * (1.0 - p), 1e-12) / n);
  }
  return out;
}

const std::vector<double>& derivative_martingale(const BBMEnsemble& ens, double t) {
  return ens.z_at[ens.checkpoint_index(t)];
}

MedianFit median_shift_fit(const BBMEnsemble& ens, const std::vector<double>& checkpoints,
                           int bootstrap, std::uint64_t bootstrap_seed) {
  if (checkpoints.size() < 4)
    throw ConfigError("median_shift_fit: needs >= 4 checkpoints");
  const double speed = 2.0 * std::sqrt(ens.diffusion);

  auto fit_c = [&](const std::vector<std::vector<double>>& samples) {
    std::vector<double> y, lt, ones;
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
      const double med = median_of(samples[i]);
      y.push_back(med - speed * checkpoints[i]);
      lt.push_back(std::log(checkpoints[i]));
      ones.push_back(1.0);
    }
    auto fit = least_squares({lt, ones}, y);
    return std::pair<double, double>{-fit.coef[0], fit.coef[1]};
  };

  std::vector<std::vector<double>> base;
  for (double t : checkpoints) base.push_back(ens.max_at[ens.checkpoint_index(t)]);

  MedianFit mf;
  auto [c, a] = fit_c(base);
  mf.c = c;
  mf.intercept = a;
  for (const auto& s : base) {
    auto copy = s;
    mf.medians.push_back(median_of(std::move(copy)));
  }

  if (bootstrap > 1) {
    SplitMix64 rng(bootstrap_seed);
    const std::size_t n = base[0].size();
    std::vector<std::vector<double>> resampled(base.size(), std::vector<double>(n));
    double sum = 0.0, sumsq = 0.0;
    for (int bidx = 0; bidx < bootstrap; ++bidx) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t pick = static_cast<std::size_t>(rng.next() % n);
        for (std::size_t ci = 0; ci < base.size(); ++ci)
          resampled[ci][i] = base[ci][pick];
      }
      const double cb = fit_c(resampled).first;
      sum += cb;
      sumsq += cb * cb;
    }
    const double mean = sum / bootstrap;
    mf.stderr_c = std::sqrt(std::max(0.0, sumsq / bootstrap - mean * mean));
  }
  return mf;
}

}  // namespace kpplab

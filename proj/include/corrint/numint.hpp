#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <numbers>
#include <random>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "corrint/analytic.hpp"
#include "corrint/errors.hpp"
#include "corrint/log_scaled.hpp"
#include "corrint/mobility.hpp"
#include "corrint/model.hpp"

namespace corrint {

/// Monte Carlo result. The estimated quantity is mean * exp(log_scale).
struct Estimate {
  double mean = 0.0;
  double std_err = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  double log_scale = 0.0;
  bool converged = true;

  LogScaled as_log_scaled() const { return LogScaled::from_double(mean) * LogScaled::from_log(log_scale); }
};

struct ToleranceFailure : Error {
  ToleranceFailure(const std::string& what, Estimate partial) : Error(what), partial(partial) {}
  Estimate partial;
};

struct IntegralBudget {
  std::size_t n_samples = 4'000'000;  // hard cap
  std::size_t batch_size = 20'000;
  std::uint64_t seed = 20240601;
  double target_rel_se = 0.01;
  double abs_se_floor = 0.0;
  std::size_t min_samples = 100'000;
  unsigned workers = 1;
  /// Return the partial estimate (flagged) instead of throwing when the cap is hit.
  bool allow_unconverged = false;

  void validate() const {
    if (batch_size == 0 || n_samples < batch_size) {
      throw PreconditionError("budget needs n_samples >= batch_size > 0");
    }
  }
};

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed of the stream with index `counter` under a root seed.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t counter) {
  return splitmix64(splitmix64(root) ^ splitmix64(counter + 0x632BE59BD9B4E019ull));
}

// ---------------------------------------------------------------------------
// Batch engine

template <std::size_t K>
struct MultiEstimate {
  std::array<double, K> mean{};
  std::array<std::array<double, K>, K> comoment{};  // sum of centered cross products
  std::size_t n = 0;
  bool converged = false;

  double cov(std::size_t i, std::size_t j) const { return n > 1 ? comoment[i][j] / double(n - 1) : 0.0; }
  /// Covariance of the sample means.
  double mean_cov(std::size_t i, std::size_t j) const { return n > 0 ? cov(i, j) / double(n) : 0.0; }
  double std_err(std::size_t i) const { return std::sqrt(std::max(0.0, mean_cov(i, i))); }

  void push(const std::array<double, K>& x) {
    ++n;
    std::array<double, K> d{};
    for (std::size_t i = 0; i < K; ++i) {
      d[i] = x[i] - mean[i];
      mean[i] += d[i] / double(n);
    }
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = 0; j < K; ++j) comoment[i][j] += d[i] * (x[j] - mean[j]);
  }

  void merge(const MultiEstimate& o) {
    if (o.n == 0) return;
    if (n == 0) {
      const bool c = converged;
      *this = o;
      converged = c;
      return;
    }
    const double na = double(n), nb = double(o.n), nt = na + nb;
    std::array<double, K> d{};
    for (std::size_t i = 0; i < K; ++i) d[i] = o.mean[i] - mean[i];
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = 0; j < K; ++j) comoment[i][j] += o.comoment[i][j] + d[i] * d[j] * na * nb / nt;
    for (std::size_t i = 0; i < K; ++i) mean[i] += d[i] * nb / nt;
    n += o.n;
  }
};

/// Runs independently seeded batches of `sample(rng)` in batch order until
/// `done(running)` holds after at least min_samples, or the cap is reached.
/// Batches may be computed concurrently; the reduction is always sequential
/// in batch index, so the result depends only on (seed, budget).
template <std::size_t K, class Sampler, class Done>
MultiEstimate<K> mc_run(const Sampler& sample, const IntegralBudget& budget, const Done& done) {
  budget.validate();
  const std::size_t n_batches = budget.n_samples / budget.batch_size;
  auto run_batch = [&](std::size_t b) {
    Rng rng(derive_seed(budget.seed, b));
    MultiEstimate<K> e;
    for (std::size_t i = 0; i < budget.batch_size; ++i) {
      const std::array<double, K> x = sample(rng);
      for (double v : x) {
        if (!std::isfinite(v)) throw NonFiniteSample("non-finite Monte Carlo sample");
      }
      e.push(x);
    }
    return e;
  };
  const unsigned workers = std::max(1u, budget.workers);
  MultiEstimate<K> total;
  std::size_t b = 0;
  while (b < n_batches) {
    const std::size_t wave = std::min<std::size_t>(workers, n_batches - b);
    std::vector<MultiEstimate<K>> parts(wave);
    if (wave == 1) {
      parts[0] = run_batch(b);
    } else {
      std::vector<std::future<MultiEstimate<K>>> fut;
      for (std::size_t w = 0; w < wave; ++w) fut.push_back(std::async(std::launch::async, run_batch, b + w));
      for (std::size_t w = 0; w < wave; ++w) parts[w] = fut[w].get();
    }
    for (std::size_t w = 0; w < wave; ++w) {
      total.merge(parts[w]);
      ++b;
      if (total.n >= budget.min_samples && done(total)) {
        total.converged = true;
        return total;
      }
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Proposal densities on R^n (points stored in Vec2; second slot unused for n = 1)

inline double vnorm(const Vec2& x, int n) { return n == 1 ? std::fabs(x[0]) : std::hypot(x[0], x[1]); }
inline Vec2 vsub(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 vadd(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }

template <class R>
Vec2 random_direction(int n, R& rng) {
  if (n == 1) return {std::uniform_int_distribution<int>(0, 1)(rng) ? 1.0 : -1.0, 0.0};
  const double th = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  return {std::cos(th), std::sin(th)};
}

/// Density proportional to 1 / l(|x - c|)^k, sampled exactly through a
/// beta-prime radius: (r^alpha / eps0) ~ BetaPrime(n/alpha, k - n/alpha).
struct PathLossPower {
  int n;
  double alpha, eps0;
  int k;
  double norm;  // integral of 1/l^k over R^n

  PathLossPower(const NetworkParams& np, int k) : n(np.n), alpha(np.alpha), eps0(np.eps0), k(k) {
    const double a = n / alpha, b = k - n / alpha;
    if (!(b > 0)) throw PreconditionError("path-loss power proposal is not normalizable");
    norm = np.unit_sphere_area() * std::pow(eps0, a - k) * boost::math::beta(a, b) / alpha;
  }

  template <class R>
  Vec2 sample(R& rng, const Vec2& c) const {
    std::gamma_distribution<double> g1(n / alpha, 1.0), g2(k - n / alpha, 1.0);
    const double t = g1(rng) / g2(rng);
    const double r = std::pow(eps0 * t, 1.0 / alpha);
    const Vec2 d = random_direction(n, rng);
    return {c[0] + r * d[0], c[1] + r * d[1]};
  }

  double density(const Vec2& x, const Vec2& c) const {
    return 1.0 / (norm * std::pow(eps0 + std::pow(vnorm(vsub(x, c), n), alpha), k));
  }
};

/// Radially exponential density rate^n exp(-rate |x - c|) / (n V_n (n-1)!).
struct ExpRadial {
  int n;
  double rate;

  template <class R>
  Vec2 sample(R& rng, const Vec2& c) const {
    const double r = std::gamma_distribution<double>(n, 1.0 / rate)(rng);
    const Vec2 d = random_direction(n, rng);
    return {c[0] + r * d[0], c[1] + r * d[1]};
  }

  double density(const Vec2& x, const Vec2& c) const {
    const double area = n == 1 ? 2.0 : 2.0 * std::numbers::pi;
    return std::pow(rate, n) / area * std::exp(-rate * vnorm(vsub(x, c), n));
  }
};

/// Type-erased proposal for the generic single-kernel entry point.
struct Proposal {
  std::function<Vec2(Rng&)> sample;
  std::function<double(const Vec2&)> density;

  static Proposal uniform_box(int n, double half_width) {
    const double vol = std::pow(2.0 * half_width, n);
    return {[=](Rng& r) {
              std::uniform_real_distribution<double> u(-half_width, half_width);
              const double a = u(r);
              return Vec2{a, n == 2 ? u(r) : 0.0};
            },
            [=](const Vec2& x) {
              const bool in = std::fabs(x[0]) <= half_width && (n == 1 || std::fabs(x[1]) <= half_width);
              return in ? 1.0 / vol : 0.0;
            }};
  }

  static Proposal path_loss_power(const NetworkParams& np, int k) {
    const PathLossPower q(np, k);
    return {[q](Rng& r) { return q.sample(r, {0.0, 0.0}); }, [q](const Vec2& x) { return q.density(x, {0.0, 0.0}); }};
  }

  static Proposal exp_radial(int n, double rate) {
    const ExpRadial q{n, rate};
    return {[q](Rng& r) { return q.sample(r, {0.0, 0.0}); }, [q](const Vec2& x) { return q.density(x, {0.0, 0.0}); }};
  }
};

/// Importance-sampled integral of a nonnegative kernel over R^n.
inline Estimate mc_integral(const std::function<double(const Vec2&)>& kernel, const Proposal& q,
                            const IntegralBudget& budget) {
  auto sample = [&](Rng& rng) {
    const Vec2 x = q.sample(rng);
    const double d = q.density(x);
    return std::array<double, 1>{d > 0 ? kernel(x) / d : 0.0};
  };
  auto done = [&](const MultiEstimate<1>& e) {
    return e.std_err(0) <= std::max(budget.target_rel_se * std::fabs(e.mean[0]), budget.abs_se_floor);
  };
  const auto e = mc_run<1>(sample, budget, done);
  Estimate out{e.mean[0], e.std_err(0), e.n, budget.seed, 0.0, e.converged};
  if (!e.converged && !budget.allow_unconverged) throw ToleranceFailure("sample cap reached before target SE", out);
  return out;
}

// ---------------------------------------------------------------------------
// Exact correlation integrals
//
// With s = sigma^2 and c = exp(-delta/d0), write U(r) for the integral of
// 1/(l(|x|) l(|x - r e1|)). After subtracting the product of means,
//   A(delta) = int du expm1(s c exp(-|u|/d0)) U(|u - o_delta|),
//   B(tau)   = int dv psi_tau(v) exp(s exp(-|v|/d0)) U(|v|),
// so that Var = l^2 p^2 A(0) + l p e^s gamma, the spatial covariance is
// l^2 p^2 A(delta) + l p e^{s c} U(delta), and the temporal covariance is
// l^2 p^2 A(0) + l p^2 B(tau). Everything below is sampled in the e^{-s}
// scaled form, with one joint draw (u, x) per sample.

namespace detail {

/// exp(-s) * expm1(t) without forming exp(s) or losing the small-t digits.
inline double scaled_expm1(double t, double s) {
  if (t > 30.0) return std::exp(t - s);
  return std::exp(-s) * std::expm1(t);
}

struct PairIntegrand {
  const NetworkParams& np;
  double l(const Vec2& x) const { return path_loss(vnorm(x, np.n), np); }
};

/// Mixture over the correlated coordinate: exponential radii at the three
/// scales that the kernel exp(s c e^{-r/d0}) - 1 can exhibit.
struct SpikeProposal {
  std::array<ExpRadial, 3> comp;
  std::array<double, 3> w;

  SpikeProposal(int n, double s, double c, double d0)
      : comp{ExpRadial{n, s / d0}, ExpRadial{n, std::max(s * c, 1.0) / d0}, ExpRadial{n, 1.0 / d0}}, w{0.35, 0.35, 0.3} {}

  template <class R>
  Vec2 sample(R& rng) const {
    const double a = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const std::size_t i = a < w[0] ? 0 : (a < w[0] + w[1] ? 1 : 2);
    return comp[i].sample(rng, {0.0, 0.0});
  }
  double density(const Vec2& u) const {
    double d = 0.0;
    for (std::size_t i = 0; i < 3; ++i) d += w[i] * comp[i].density(u, {0.0, 0.0});
    return d;
  }
};

/// Mixture over the position coordinate: 1/l^2 bumps at every center where
/// some integrand has a pole-like peak, plus a 1/l tail component.
struct PositionProposal {
  PathLossPower sq, lin;
  PositionProposal(const NetworkParams& np) : sq(np, 2), lin(np, 1) {}

  template <class R, std::size_t M>
  Vec2 sample(R& rng, const std::array<Vec2, M>& centers) const {
    const double tail = 0.2;
    const double a = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (a < tail) return lin.sample(rng, {0.0, 0.0});
    const std::size_t i = std::min<std::size_t>(M - 1, std::size_t((a - tail) / (1.0 - tail) * M));
    return sq.sample(rng, centers[i]);
  }
  template <std::size_t M>
  double density(const Vec2& x, const std::array<Vec2, M>& centers) const {
    const double tail = 0.2;
    double d = tail * lin.density(x, {0.0, 0.0});
    for (const auto& c : centers) d += (1.0 - tail) / M * sq.density(x, c);
    return d;
  }
};

inline double ratio_se(double N, double D, double vN, double vD, double cND) {
  const double v = vN / (D * D) + N * N * vD / std::pow(D, 4) - 2.0 * N * cND / std::pow(D, 3);
  return std::sqrt(std::max(0.0, v));
}

inline bool bracket_converged(double mean, double se, const IntegralBudget& b) {
  return se <= std::max(b.target_rel_se * std::fabs(mean), b.abs_se_floor);
}

}  // namespace detail

/// e^{-s} A(0) by Monte Carlo.
inline Estimate pair_excess_num(const NetworkParams& np, const ShadowingParams& sh, const IntegralBudget& budget) {
  np.validate();
  sh.validate();
  const double s = sh.sigma2(), d0 = sh.d0();
  const detail::SpikeProposal qu(np.n, s, 1.0, d0);
  const detail::PositionProposal qx(np);
  const detail::PairIntegrand L{np};
  auto sample = [&](Rng& rng) {
    const Vec2 u = qu.sample(rng);
    const std::array<Vec2, 2> centers{Vec2{0.0, 0.0}, Vec2{-u[0], -u[1]}};
    const Vec2 x = qx.sample(rng, centers);
    const double k = detail::scaled_expm1(s * std::exp(-vnorm(u, np.n) / d0), s);
    return std::array<double, 1>{k / qu.density(u) / (L.l(x) * L.l(vadd(x, u)) * qx.density(x, centers))};
  };
  auto done = [&](const MultiEstimate<1>& e) { return detail::bracket_converged(e.mean[0], e.std_err(0), budget); };
  const auto e = mc_run<1>(sample, budget, done);
  Estimate out{e.mean[0], e.std_err(0), e.n, budget.seed, 0.0, e.converged};
  if (!e.converged && !budget.allow_unconverged) throw ToleranceFailure("sample cap reached before target SE", out);
  return out;
}

/// Var[I] from the exact integrals; mean is Var / e^{sigma^2} with log_scale = sigma^2.
inline Estimate variance_num(const NetworkParams& np, const ShadowingParams& sh, const IntegralBudget& budget) {
  if (np.degenerate()) return Estimate{0.0, 0.0, 0, budget.seed, 0.0, true};
  const double lp = np.lambda * np.p;
  Estimate a = pair_excess_num(np, sh, budget);
  a.mean = lp * lp * a.mean + lp * gamma_n(np);
  a.std_err *= lp * lp;
  a.log_scale = sh.sigma2();
  return a;
}

/// E[I^2] from the exact integrals, as variance_num plus the squared mean.
inline Estimate second_moment_num(const NetworkParams& np, const ShadowingParams& sh, const IntegralBudget& budget) {
  Estimate v = variance_num(np, sh, budget);
  if (np.degenerate()) return v;
  const double m = mean_interference(np);
  v.mean += std::exp(2.0 * std::log(m) - sh.sigma2());
  return v;
}

/// Spatial correlation coefficient at receiver separation delta.
inline Estimate spatial_corr_num(const NetworkParams& np, const ShadowingParams& sh, double delta,
                                 const IntegralBudget& budget) {
  np.validate();
  sh.validate();
  if (!(delta >= 0)) throw DomainError("negative receiver separation");
  if (np.degenerate()) throw DegenerateSample("correlation undefined without transmitters");
  const int n = np.n;
  const double s = sh.sigma2(), d0 = sh.d0(), c = std::exp(-delta / d0), lp = np.lambda * np.p;
  const double gam = gamma_n(np), single = std::exp(s * (c - 1.0));
  const Vec2 od{delta, 0.0};
  const detail::SpikeProposal qu(n, s, c, d0);
  const detail::PositionProposal qx(np);
  const detail::PairIntegrand L{np};
  // Components: e^{-s} A(delta), e^{-s} A(0), U(delta).
  auto sample = [&](Rng& rng) {
    const Vec2 u = qu.sample(rng);
    const Vec2 mu{-u[0], -u[1]}, w = vsub(od, u);
    const std::array<Vec2, 4> centers{Vec2{0.0, 0.0}, mu, w, od};
    const Vec2 x = qx.sample(rng, centers);
    const double qx_d = qx.density(x, centers), qu_d = qu.density(u), lx = L.l(x);
    const double ru = std::exp(-vnorm(u, n) / d0);
    const double kd = detail::scaled_expm1(s * c * ru, s), k0 = detail::scaled_expm1(s * ru, s);
    return std::array<double, 3>{kd / qu_d / (lx * L.l(vsub(x, w)) * qx_d),
                                 k0 / qu_d / (lx * L.l(vsub(x, mu)) * qx_d),
                                 1.0 / (lx * L.l(vsub(x, od)) * qx_d)};
  };
  auto brackets = [&](const MultiEstimate<3>& e, double& N, double& D, double& vN, double& vD, double& cND) {
    N = lp * e.mean[0] + single * e.mean[2];
    D = lp * e.mean[1] + gam;
    vN = lp * lp * e.mean_cov(0, 0) + single * single * e.mean_cov(2, 2) + 2.0 * lp * single * e.mean_cov(0, 2);
    vD = lp * lp * e.mean_cov(1, 1);
    cND = lp * lp * e.mean_cov(0, 1) + lp * single * e.mean_cov(2, 1);
  };
  auto done = [&](const MultiEstimate<3>& e) {
    double N, D, vN, vD, cND;
    brackets(e, N, D, vN, vD, cND);
    return detail::bracket_converged(N, std::sqrt(vN), budget) && detail::bracket_converged(D, std::sqrt(vD), budget);
  };
  const auto e = mc_run<3>(sample, budget, done);
  double N, D, vN, vD, cND;
  brackets(e, N, D, vN, vD, cND);
  Estimate out{N / D, detail::ratio_se(N, D, vN, vD, cND), e.n, budget.seed, 0.0, e.converged};
  if (!e.converged && !budget.allow_unconverged) throw ToleranceFailure("sample cap reached before target SE", out);
  return out;
}

/// Temporal correlation coefficient at lag tau under the given mobility.
inline Estimate temporal_corr_num(const NetworkParams& np, const ShadowingParams& sh, const TemporalQuery& q,
                                  const IntegralBudget& budget) {
  np.validate();
  sh.validate();
  validate(q.mobility);
  if (q.tau < 1) throw DomainError("tau must be at least 1");
  if (np.degenerate()) throw DegenerateSample("correlation undefined without transmitters");
  const int n = np.n;
  const double s = sh.sigma2(), d0 = sh.d0(), lp = np.lambda * np.p, p = np.p;
  const double gam = gamma_n(np);
  const bool still = is_static(q.mobility);
  const detail::SpikeProposal qu(n, s, 1.0, d0);
  const ExpRadial qv_spike{n, s / d0};
  const detail::PositionProposal qx(np);
  const detail::PairIntegrand L{np};
  // Components: e^{-s} A(0), e^{-s} B(tau).
  auto sample = [&](Rng& rng) {
    const Vec2 u = qu.sample(rng);
    const std::array<Vec2, 2> cu{Vec2{0.0, 0.0}, Vec2{-u[0], -u[1]}};
    const Vec2 x = qx.sample(rng, cu);
    const double k0 = detail::scaled_expm1(s * std::exp(-vnorm(u, n) / d0), s);
    const double a = k0 / qu.density(u) / (L.l(x) * L.l(vadd(x, u)) * qx.density(x, cu));
    if (still) return std::array<double, 2>{a, 0.0};
    const bool from_motion = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.5;
    const Vec2 v = from_motion ? sample_displacement(q.mobility, q.tau, n, rng) : qv_spike.sample(rng, {0.0, 0.0});
    const double rv = vnorm(v, n);
    const double psi = mobility_density(q.mobility, q.tau, rv, n);
    const double qv = 0.5 * psi + 0.5 * qv_spike.density(v, {0.0, 0.0});
    const std::array<Vec2, 2> cv{Vec2{0.0, 0.0}, Vec2{-v[0], -v[1]}};
    const Vec2 y = qx.sample(rng, cv);
    const double kv = std::exp(s * (std::exp(-rv / d0) - 1.0));
    const double b = psi > 0 ? kv * psi / qv / (L.l(y) * L.l(vadd(y, v)) * qx.density(y, cv)) : 0.0;
    return std::array<double, 2>{a, b};
  };
  auto brackets = [&](const MultiEstimate<2>& e, double& N, double& D, double& vN, double& vD, double& cND) {
    const double b = still ? gam : e.mean[1];
    N = lp * e.mean[0] + p * b;
    D = lp * e.mean[0] + gam;
    const double vb = still ? 0.0 : e.mean_cov(1, 1), cab = still ? 0.0 : e.mean_cov(0, 1);
    vN = lp * lp * e.mean_cov(0, 0) + p * p * vb + 2.0 * lp * p * cab;
    vD = lp * lp * e.mean_cov(0, 0);
    cND = lp * lp * e.mean_cov(0, 0) + lp * p * cab;
  };
  auto done = [&](const MultiEstimate<2>& e) {
    double N, D, vN, vD, cND;
    brackets(e, N, D, vN, vD, cND);
    return detail::bracket_converged(N, std::sqrt(vN), budget) && detail::bracket_converged(D, std::sqrt(vD), budget);
  };
  const auto e = mc_run<2>(sample, budget, done);
  double N, D, vN, vD, cND;
  brackets(e, N, D, vN, vD, cND);
  Estimate out{N / D, detail::ratio_se(N, D, vN, vD, cND), e.n, budget.seed, 0.0, e.converged};
  if (!e.converged && !budget.allow_unconverged) throw ToleranceFailure("sample cap reached before target SE", out);
  return out;
}

}  // namespace corrint

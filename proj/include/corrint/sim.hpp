#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "corrint/analytic.hpp"
#include "corrint/errors.hpp"
#include "corrint/mobility.hpp"
#include "corrint/model.hpp"
#include "corrint/numint.hpp"

namespace corrint {

constexpr std::size_t kMaxKernelDim = 4000;

struct Window {
  double half_width = 0.5;
  /// Analytic bound on the fraction of the mean interference lost outside the window.
  double tail_fraction = 0.0;
  bool guard_limited = false;

  void validate() const {
    if (!(half_width > 0)) throw PreconditionError("window half-width must be positive");
  }
  double volume(int n) const { return std::pow(2.0 * half_width, n); }
};

/// Minimal counter-seeded generator (SplitMix64). Used for the many short
/// per-cell and per-node streams, where seeding a Mersenne Twister per
/// stream would dominate the cost.
class StreamRng {
 public:
  using result_type = std::uint64_t;
  explicit StreamRng(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// A node with the key from which all of its random attributes derive.
struct Node {
  Vec2 x;
  std::uint64_t key;
};

struct Snapshot {
  std::vector<Vec2> positions;
  Eigen::MatrixXd marks;  // positions x receivers, strictly positive
  std::vector<std::uint8_t> mac;
};

namespace sim_detail {

constexpr double kCell = 0.05;  // PPP grid cell side (km)

enum Stream : std::uint64_t { kGauss = 1, kMacA = 2, kMacB = 3, kMove = 4 };

inline std::uint64_t cell_seed(std::uint64_t root, long i, long j) {
  return derive_seed(derive_seed(root, static_cast<std::uint64_t>(i) * 2654435761ull), static_cast<std::uint64_t>(j));
}

inline double chebyshev(const Vec2& x, int n) { return n == 1 ? std::fabs(x[0]) : std::max(std::fabs(x[0]), std::fabs(x[1])); }

inline double dist(const Vec2& a, const Vec2& b, int n) { return vnorm(vsub(a, b), n); }

inline double wrap(double v, double W) {
  const double L = 2.0 * W;
  double r = std::fmod(v + W, L);
  if (r < 0) r += L;
  return r - W;
}

}  // namespace sim_detail

/// Homogeneous PPP on [-W, W]^n. Points are generated per fixed grid cell
/// from a per-cell stream and returned sorted by Chebyshev norm, so the
/// points of a smaller window are exactly a prefix of those of a larger one.
inline std::vector<Node> sample_ppp_nodes(const Window& w, double lambda, int n, std::uint64_t seed) {
  w.validate();
  if (!(lambda >= 0)) throw PreconditionError("intensity must be nonnegative");
  std::vector<Node> pts;
  if (lambda == 0.0) return pts;
  using sim_detail::kCell;
  const long K = static_cast<long>(std::ceil(w.half_width / kCell));
  const double mean = lambda * std::pow(kCell, n);
  for (long i = -K; i < K; ++i) {
    for (long j = (n == 2 ? -K : 0); j < (n == 2 ? K : 1); ++j) {
      StreamRng rng(sim_detail::cell_seed(seed, i, j));
      const int count = std::poisson_distribution<int>(mean)(rng);
      std::uniform_real_distribution<double> u(0.0, kCell);
      for (int c = 0; c < count; ++c) {
        Vec2 x{i * kCell + u(rng), n == 2 ? j * kCell + u(rng) : 0.0};
        const std::uint64_t key = rng();
        if (sim_detail::chebyshev(x, n) <= w.half_width) pts.push_back({x, key});
      }
    }
  }
  std::sort(pts.begin(), pts.end(), [n](const Node& a, const Node& b) {
    return sim_detail::chebyshev(a.x, n) < sim_detail::chebyshev(b.x, n);
  });
  return pts;
}

inline std::vector<Vec2> sample_ppp(const Window& w, double lambda, int n, std::uint64_t seed) {
  std::vector<Vec2> out;
  for (const auto& p : sample_ppp_nodes(w, lambda, n, seed)) out.push_back(p.x);
  return out;
}

/// Positions after `steps` slots, wrapped toroidally into the window.
inline std::vector<Node> advance_mobility(const std::vector<Node>& pts, const MobilityModel& m, int steps, int n,
                                          const Window& w) {
  if (steps < 1) throw PreconditionError("steps must be at least 1");
  validate(m);
  if (is_static(m)) return pts;
  std::vector<Node> out = pts;
  for (auto& p : out) {
    StreamRng rng(derive_seed(p.key, sim_detail::kMove));
    const Vec2 d = sample_displacement(m, steps, n, rng);
    p.x[0] = sim_detail::wrap(p.x[0] + d[0], w.half_width);
    if (n == 2) p.x[1] = sim_detail::wrap(p.x[1] + d[1], w.half_width);
  }
  return out;
}

inline std::vector<Vec2> advance_mobility(const std::vector<Vec2>& pts, const MobilityModel& m, int steps, int n,
                                          const Window& w, std::uint64_t seed) {
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < pts.size(); ++i) nodes.push_back({pts[i], derive_seed(seed, i)});
  std::vector<Vec2> out;
  for (const auto& p : advance_mobility(nodes, m, steps, n, w)) out.push_back(p.x);
  return out;
}

/// Lower Cholesky factor of the exponential position kernel, with escalating
/// diagonal jitter.
inline Eigen::MatrixXd position_factor(const std::vector<Vec2>& x, int n, const ShadowingParams& sh) {
  const std::size_t m = x.size();
  const double d0 = sh.d0();
  Eigen::MatrixXd K(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    K(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) K(i, j) = K(j, i) = std::exp(-sim_detail::dist(x[i], x[j], n) / d0);
  }
  for (double jitter = 1e-10 * (1.0 + sh.sigma2()); jitter <= 1e-6 * (1.0 + sh.sigma2()) * 1.0001; jitter *= 10.0) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(Kj);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  double best = std::numeric_limits<double>::infinity();
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double d = sim_detail::dist(x[i], x[j], n);
      if (d < best) best = d, bi = i, bj = j;
    }
  std::ostringstream os;
  os << "shadowing kernel is numerically singular; closest positions #" << bj << " and #" << bi << " at distance "
     << best;
  throw SingularKernel(os.str());
}

inline void check_guard(std::size_t positions, std::size_t receivers) {
  if (positions * receivers > kMaxKernelDim) {
    throw MatrixTooLarge("joint shadowing kernel exceeds " + std::to_string(kMaxKernelDim) +
                         " entries per side; shrink the window or the intensity");
  }
}

/// Log-shadowing field for the given nodes at receivers o and o + delta e1.
/// Returns standard-normal field values Z (positions x receivers); the
/// per-node Gaussian innovations come from each node's own stream.
inline Eigen::MatrixXd shadowing_field(const std::vector<Node>& nodes, int n, int receivers, double delta,
                                       const ShadowingParams& sh, const Eigen::MatrixXd* factor = nullptr) {
  if (receivers != 1 && receivers != 2) throw PreconditionError("one or two receivers are supported");
  check_guard(nodes.size(), receivers);
  const std::size_t m = nodes.size();
  Eigen::MatrixXd G(m, receivers);
  for (std::size_t i = 0; i < m; ++i) {
    StreamRng rng(derive_seed(nodes[i].key, sim_detail::kGauss));
    std::normal_distribution<double> z;
    for (int r = 0; r < receivers; ++r) G(i, r) = z(rng);
  }
  if (m == 0) return G;
  Eigen::MatrixXd L;
  if (!factor) {
    std::vector<Vec2> x;
    for (const auto& p : nodes) x.push_back(p.x);
    L = position_factor(x, n, sh);
    factor = &L;
  }
  Eigen::MatrixXd Z = (*factor) * G;
  if (receivers == 2) {
    const double c = cross_receiver_corr(delta, 0.0, sh);
    Z.col(1) = c * Z.col(0) + std::sqrt(std::max(0.0, 1.0 - c * c)) * Z.col(1);
  }
  return Z;
}

/// Marks h = exp(-sigma^2/2 + sigma Z) for arbitrary positions and one or two
/// receivers at (0, 0) and the second receiver's location.
inline Eigen::MatrixXd sample_shadowing(const std::vector<Vec2>& positions, const std::vector<Vec2>& receivers, int n,
                                        const ShadowingParams& sh, std::uint64_t seed) {
  sh.validate();
  if (receivers.empty() || receivers.size() > 2) throw PreconditionError("one or two receivers are supported");
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < positions.size(); ++i) nodes.push_back({positions[i], derive_seed(seed, i)});
  const double delta = receivers.size() == 2 ? sim_detail::dist(receivers[0], receivers[1], n) : 0.0;
  const Eigen::MatrixXd Z = shadowing_field(nodes, n, static_cast<int>(receivers.size()), delta, sh);
  return (sh.sigma * Z.array() - 0.5 * sh.sigma2()).exp().matrix();
}

inline double interference(const Snapshot& snap, std::size_t receiver_col, const Vec2& receiver, const NetworkParams& np) {
  if (snap.mac.size() != snap.positions.size()) throw PreconditionError("one MAC indicator per node required");
  double s = 0.0;
  for (std::size_t i = 0; i < snap.positions.size(); ++i) {
    if (!snap.mac[i]) continue;
    s += snap.marks(i, receiver_col) / path_loss(sim_detail::dist(snap.positions[i], receiver, np.n), np);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Correlation estimators

/// Sample Pearson coefficient with delete-one jackknife standard error.
inline Estimate pearson_jackknife(const std::vector<double>& X, const std::vector<double>& Y, std::uint64_t seed) {
  const std::size_t N = X.size();
  if (N < 2 || Y.size() != N) throw PreconditionError("need at least two paired replications");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < N; ++i) mx += X[i], my += Y[i];
  mx /= N;
  my /= N;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const double a = X[i] - mx, b = Y[i] - my;
    sx += a, sy += b, sxx += a * a, syy += b * b, sxy += a * b;
  }
  auto corr = [](double n, double sx, double sy, double sxx, double syy, double sxy) {
    const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
    return (sxy - sx * sy / n) / std::sqrt(vx * vy);
  };
  if (!(sxx > 0) || !(syy > 0)) throw DegenerateSample("interference has zero sample variance");
  const double r = sxy / std::sqrt(sxx * syy);
  std::vector<double> loo(N);
  double mean_loo = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const double a = X[i] - mx, b = Y[i] - my;
    loo[i] = corr(N - 1.0, sx - a, sy - b, sxx - a * a, syy - b * b, sxy - a * b);
    mean_loo += loo[i];
  }
  mean_loo /= N;
  double ss = 0;
  for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
  Estimate e;
  e.mean = r;
  e.std_err = std::sqrt((N - 1.0) / N * ss);
  e.n_samples = N;
  e.seed = seed;
  return e;
}

struct SimOptions {
  /// Temporal estimator: reuse the slot-t MAC draw at slot t + tau.
  bool share_mac = false;
};

/// Largest window that keeps the joint kernel under the guard with a 5-sigma
/// margin on the Poisson count, capped at the radius suggested by the
/// correlation distance and the interference tail.
inline Window default_window(const NetworkParams& np, const ShadowingParams& sh, int kernel_copies = 2) {
  np.validate();
  const int n = np.n;
  const double z1 = PathLossPower(np, 1).norm;
  const double tail_r =
      std::pow(np.unit_sphere_area() / ((np.alpha - n) * z1 * 1e-3), 1.0 / (np.alpha - n));
  Window w;
  w.half_width = std::max(10.0 * sh.d_cor, tail_r);
  const double cap = double(kMaxKernelDim) / kernel_copies;
  // mean + 5 sqrt(mean) <= cap
  const double root = (-5.0 + std::sqrt(25.0 + 4.0 * cap)) / 2.0;
  const double max_mean = root * root;
  if (np.lambda * w.volume(n) > max_mean) {
    w.half_width = 0.5 * std::pow(max_mean / np.lambda, 1.0 / n);
    w.guard_limited = true;
  }
  w.tail_fraction = np.unit_sphere_area() * std::pow(w.half_width, n - np.alpha) / ((np.alpha - n) * z1);
  return w;
}

/// Spatial replications: one PPP draw, one joint field and one MAC draw per
/// replication, evaluated for every (sigma, delta) pair; the Cholesky factor
/// is shared because it depends only on positions and d_cor.
struct SpatialPoint {
  double sigma;
  double delta;
};

inline std::vector<Estimate> estimate_spatial_corr_grid(const NetworkParams& np, double d_cor,
                                                        const std::vector<SpatialPoint>& grid, const Window& w,
                                                        std::size_t reps, std::uint64_t seed) {
  np.validate();
  w.validate();
  if (reps < 2) throw PreconditionError("need at least two replications");
  const int n = np.n;
  const std::size_t G = grid.size();
  std::vector<std::vector<double>> X(G, std::vector<double>(reps)), Y(G, std::vector<double>(reps));
  const ShadowingParams base{1.0, d_cor};
  for (std::size_t r = 0; r < reps; ++r) {
    const auto nodes = sample_ppp_nodes(w, np.lambda, n, derive_seed(seed, r));
    check_guard(nodes.size(), 2);
    const std::size_t m = nodes.size();
    std::vector<Vec2> x;
    for (const auto& p : nodes) x.push_back(p.x);
    const Eigen::MatrixXd L = m ? position_factor(x, n, base) : Eigen::MatrixXd();
    std::vector<std::uint8_t> mac(m);
    for (std::size_t i = 0; i < m; ++i) {
      StreamRng rng(derive_seed(nodes[i].key, sim_detail::kMacA));
      mac[i] = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < np.p;
    }
    // Field innovations are shared by every grid point of this replication.
    Eigen::MatrixXd Gz(m, 2);
    for (std::size_t i = 0; i < m; ++i) {
      StreamRng rng(derive_seed(nodes[i].key, sim_detail::kGauss));
      std::normal_distribution<double> z;
      Gz(i, 0) = z(rng);
      Gz(i, 1) = z(rng);
    }
    const Eigen::MatrixXd LG = m ? Eigen::MatrixXd(L * Gz) : Eigen::MatrixXd(0, 2);
    for (std::size_t g = 0; g < G; ++g) {
      const ShadowingParams sh{grid[g].sigma, d_cor};
      const double c = cross_receiver_corr(grid[g].delta, 0.0, sh), sc = std::sqrt(std::max(0.0, 1.0 - c * c));
      const Vec2 od{grid[g].delta, 0.0};
      double i0 = 0, i1 = 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (!mac[i]) continue;
        const double z0 = LG(i, 0), z1 = c * LG(i, 0) + sc * LG(i, 1);
        i0 += std::exp(sh.sigma * z0 - 0.5 * sh.sigma2()) / path_loss(vnorm(x[i], n), np);
        i1 += std::exp(sh.sigma * z1 - 0.5 * sh.sigma2()) / path_loss(sim_detail::dist(x[i], od, n), np);
      }
      X[g][r] = i0;
      Y[g][r] = i1;
    }
  }
  std::vector<Estimate> out;
  for (std::size_t g = 0; g < G; ++g) out.push_back(pearson_jackknife(X[g], Y[g], seed));
  return out;
}

inline Estimate estimate_spatial_corr(const NetworkParams& np, const ShadowingParams& sh, double delta,
                                      const Window& w, std::size_t reps, std::uint64_t seed) {
  sh.validate();
  if (!(delta >= 0)) throw DomainError("negative receiver separation");
  return estimate_spatial_corr_grid(np, sh.d_cor, {{sh.sigma, delta}}, w, reps, seed).front();
}

/// Temporal replications at one receiver. The field is drawn once over the
/// union of slot-t and slot-(t+tau) positions; sigma values share it.
inline std::vector<Estimate> estimate_temporal_corr_sigmas(const NetworkParams& np, double d_cor,
                                                           const std::vector<double>& sigmas,
                                                           const TemporalQuery& q, const Window& w, std::size_t reps,
                                                           std::uint64_t seed, SimOptions opt = {}) {
  np.validate();
  w.validate();
  validate(q.mobility);
  if (reps < 2) throw PreconditionError("need at least two replications");
  if (q.tau < 1) throw DomainError("tau must be at least 1");
  const int n = np.n;
  const bool still = is_static(q.mobility);
  const std::size_t S = sigmas.size();
  std::vector<std::vector<double>> X(S, std::vector<double>(reps)), Y(S, std::vector<double>(reps));
  const ShadowingParams base{1.0, d_cor};
  for (std::size_t r = 0; r < reps; ++r) {
    const auto now = sample_ppp_nodes(w, np.lambda, n, derive_seed(seed, r));
    const std::size_t m = now.size();
    const auto later = advance_mobility(now, q.mobility, q.tau, n, w);
    // Interleave (x_i(t), x_i(t+tau)) so the node order is preserved.
    std::vector<Node> uni;
    if (still) {
      uni = now;
    } else {
      for (std::size_t i = 0; i < m; ++i) {
        uni.push_back(now[i]);
        uni.push_back({later[i].x, derive_seed(now[i].key, 0x7A11ull)});
      }
    }
    check_guard(uni.size(), 1);
    const Eigen::MatrixXd Z = shadowing_field(uni, n, 1, 0.0, base);
    std::vector<std::uint8_t> ma(m), mb(m);
    for (std::size_t i = 0; i < m; ++i) {
      StreamRng ra(derive_seed(now[i].key, sim_detail::kMacA)), rb(derive_seed(now[i].key, sim_detail::kMacB));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      ma[i] = u(ra) < np.p;
      mb[i] = opt.share_mac ? ma[i] : (u(rb) < np.p);
    }
    for (std::size_t k = 0; k < S; ++k) {
      const double sg = sigmas[k], half = 0.5 * sg * sg;
      double ia = 0, ib = 0;
      for (std::size_t i = 0; i < m; ++i) {
        const double za = still ? Z(i, 0) : Z(2 * i, 0), zb = still ? Z(i, 0) : Z(2 * i + 1, 0);
        if (ma[i]) ia += std::exp(sg * za - half) / path_loss(vnorm(now[i].x, n), np);
        if (mb[i]) ib += std::exp(sg * zb - half) / path_loss(vnorm(later[i].x, n), np);
      }
      X[k][r] = ia;
      Y[k][r] = ib;
    }
  }
  std::vector<Estimate> out;
  for (std::size_t k = 0; k < S; ++k) out.push_back(pearson_jackknife(X[k], Y[k], seed));
  return out;
}

inline Estimate estimate_temporal_corr(const NetworkParams& np, const ShadowingParams& sh, const TemporalQuery& q,
                                       const Window& w, std::size_t reps, std::uint64_t seed, SimOptions opt = {}) {
  sh.validate();
  return estimate_temporal_corr_sigmas(np, sh.d_cor, {sh.sigma}, q, w, reps, seed, opt).front();
}

}  // namespace corrint

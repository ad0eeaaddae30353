#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <type_traits>
#include <variant>

#include "corrint/errors.hpp"
#include "corrint/log_scaled.hpp"

namespace corrint {

struct NetworkParams {
  int n = 2;
  double lambda = 2000.0;
  double p = 1.0;
  double alpha = 4.0;
  double eps0 = 1e-3;

  /// Volume of the unit ball in dimension n.
  double unit_ball_volume() const { return n == 1 ? 2.0 : std::numbers::pi; }
  /// Surface measure of the unit sphere, n * V_n.
  double unit_sphere_area() const { return n * unit_ball_volume(); }

  void validate() const {
    if (n != 1 && n != 2) throw PreconditionError("dimension must be 1 or 2");
    if (!(alpha > n)) throw PreconditionError("path-loss exponent must exceed the dimension");
    if (!(eps0 > 0)) throw PreconditionError("eps0 must be positive");
    if (!(p >= 0 && p <= 1)) throw PreconditionError("ALOHA probability must lie in [0,1]");
    if (!(lambda >= 0)) throw PreconditionError("node intensity must be nonnegative");
  }

  bool degenerate() const { return lambda == 0.0 || p == 0.0; }
};

struct ShadowingParams {
  double sigma = 6.0;
  double d_cor = 0.1;

  double d0() const { return d_cor / std::numbers::ln2; }
  double sigma2() const { return sigma * sigma; }

  void validate() const {
    if (!(sigma > 0)) throw PreconditionError("shadowing spread must be positive");
    if (!(d_cor > 0)) throw PreconditionError("correlation distance must be positive");
  }
};

namespace mobility {
struct Static {};
/// Constrained i.i.d. mobility: position at t is the anchor plus a fresh uniform offset in B(0, R).
struct CIM {
  double R;
};
/// Random walk with i.i.d. steps uniform in B(0, R).
struct RW {
  double R;
};
/// Discrete Brownian motion with per-slot, per-axis variance sigma_v2.
struct BM {
  double sigma_v2;
};
}  // namespace mobility

using MobilityModel = std::variant<mobility::Static, mobility::CIM, mobility::RW, mobility::BM>;

inline void validate(const MobilityModel& m) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, mobility::CIM> || std::is_same_v<T, mobility::RW>) {
          if (!(v.R > 0)) throw PreconditionError("mobility radius must be positive");
        } else if constexpr (std::is_same_v<T, mobility::BM>) {
          if (!(v.sigma_v2 > 0)) throw PreconditionError("Brownian variance must be positive");
        }
      },
      m);
}

inline std::string mobility_name(const MobilityModel& m) {
  static const char* names[] = {"static", "cim", "rw", "bm"};
  return names[m.index()];
}

inline bool is_static(const MobilityModel& m) {
  return std::holds_alternative<mobility::Static>(m);
}

inline double path_loss(double r, const NetworkParams& np) {
  if (!(r >= 0)) throw DomainError("path_loss: negative distance");
  return np.eps0 + std::pow(r, np.alpha);
}

inline double shadowing_corr(double d, const ShadowingParams& sh) {
  if (!(d >= 0)) throw DomainError("shadowing_corr: negative distance");
  return std::exp(-d / sh.d0());
}

/// E[h_i h_j] for two links whose log-shadowing is separated by d.
inline LogScaled pair_mean_product(double d, const ShadowingParams& sh) {
  return LogScaled::from_log(sh.sigma2() * shadowing_corr(d, sh));
}

inline double cross_receiver_corr(double d_rx, double d_tx, const ShadowingParams& sh) {
  if (!(d_rx >= 0) || !(d_tx >= 0)) throw DomainError("cross_receiver_corr: negative distance");
  return shadowing_corr(d_rx + d_tx, sh);
}

}  // namespace corrint

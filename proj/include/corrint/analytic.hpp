#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "corrint/errors.hpp"
#include "corrint/log_scaled.hpp"
#include "corrint/mobility.hpp"
#include "corrint/model.hpp"
#include "corrint/quadrature.hpp"
#include "corrint/watson.hpp"

// Expansions here are series in s = sigma^2. Every moment carries a factor
// exp(sigma^2 * something); coefficients are formed from the brackets with
// the shared exp(sigma^2) divided out symbolically.

namespace corrint {

enum class Variant { full, simplified, upper_bound };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::simplified: return "simplified";
    case Variant::upper_bound: return "upper_bound";
  }
  return "?";
}

struct CorrResult {
  double value = 0.0;
  Variant variant = Variant::full;
  /// Power k of sigma in the first dropped O(sigma^-k) term.
  int remainder_order = 0;
  /// False when evaluated outside the hypothesis of the expansion (forced).
  bool valid = true;
  /// Set when lambda = 0 or p = 0; value is then 0 by convention.
  bool degenerate = false;
  bool in_unit_interval = true;
};

struct SpatialQuery {
  double delta = 0.0;
  /// Evaluate even when delta exceeds d0 ln(sigma^2); the result is flagged.
  bool allow_out_of_validity = false;
};

struct TemporalQuery {
  int tau = 1;
  MobilityModel mobility = mobility::CIM{0.05};
  /// Use the slope coefficient d0 (instead of 2 d0) in the n = 2 correction,
  /// as the coefficient is printed in the closed form of the ratio.
  bool printed_slope_factor = false;
};

namespace detail {

inline double sin_term(const NetworkParams& np) { return std::sin(np.n * std::numbers::pi / np.alpha); }

inline CorrResult finish(double v, Variant var, int rem, bool valid = true) {
  CorrResult r;
  r.value = v;
  r.variant = var;
  r.remainder_order = rem;
  r.valid = valid;
  r.in_unit_interval = v >= 0.0 && v <= 1.0;
  return r;
}

inline CorrResult degenerate_result(Variant var) {
  CorrResult r;
  r.variant = var;
  r.degenerate = true;
  return r;
}

}  // namespace detail

inline double mean_interference(const NetworkParams& np) {
  np.validate();
  const double n = np.n;
  return np.lambda * np.p * np.unit_sphere_area() * std::numbers::pi /
         (std::pow(np.eps0, 1.0 - n / np.alpha) * np.alpha * detail::sin_term(np));
}

/// Integral of 1/l(|x|)^2 over R^n.
inline double gamma_n(const NetworkParams& np) {
  np.validate();
  const double n = np.n;
  return np.unit_sphere_area() * std::numbers::pi * (np.alpha - n) /
         (std::pow(np.eps0, 2.0 - n / np.alpha) * np.alpha * np.alpha * detail::sin_term(np));
}

/// Integral over R^n of 1/(l(|x|) l(|x - delta e1|)) by nested adaptive quadrature.
inline double u_delta(const NetworkParams& np, const SpatialQuery& q, double rel_tol = 1e-7) {
  np.validate();
  const double d = q.delta;
  if (!(d >= 0)) throw DomainError("u_delta: negative separation");
  const double a = np.alpha, e = np.eps0;
  const double inf = std::numeric_limits<double>::infinity();
  if (np.n == 1) {
    auto f = [&](double x) { return 1.0 / ((e + std::pow(std::fabs(x), a)) * (e + std::pow(std::fabs(x - d), a))); };
    return quad::integral(f, -inf, 0.0, {}, rel_tol) + quad::integral(f, 0.0, inf, {d}, rel_tol);
  }
  auto angular = [&](double r) {
    if (d == 0.0) return 2.0 * std::numbers::pi / (e + std::pow(r, a));
    auto g = [&](double th) {
      const double d2 = std::max(0.0, r * r + d * d - 2.0 * r * d * std::cos(th));
      return 1.0 / (e + std::pow(d2, 0.5 * a));
    };
    return 2.0 * quad::integral(g, 0.0, std::numbers::pi, {}, rel_tol * 1e-2);
  };
  auto radial = [&](double r) { return r / (e + std::pow(r, a)) * angular(r); };
  return quad::integral(radial, 0.0, inf, {d}, rel_tol);
}

/// Master double integral with amplitude f (f(0) = f0, f'(0) = f0p); the
/// returned series is in s = sigma^2 and includes the exp(s) factor.
inline AsymptoticResult psi_n_asym(const NetworkParams& np, const ShadowingParams& sh, double f0, double f0p) {
  np.validate();
  sh.validate();
  if (f0 == 0.0) throw PreconditionError("amplitude must be nonzero at the origin");
  const double d0 = sh.d0();
  ExpKernel k;
  k.a = 0.0;
  k.R_a = 1.0;
  k.dR = -1.0 / d0;
  k.d2R = 1.0 / (d0 * d0);
  k.R = [d0](double t) { return std::exp(-t / d0); };
  const double gam = gamma_n(np);
  AmplitudeFn g;
  if (np.n == 1) {
    g.n = 1;
    g.derivs = {f0, f0p};
  } else {
    // Radial amplitude t f(t): (n-1)! f0 and n! f0' in the first two slots.
    g.n = 2;
    g.derivs = {0.0, f0, 2.0 * f0p};
  }
  AsymptoticResult r = watson_expand(k, g).scaled(np.unit_sphere_area() * gam);
  if (np.n == 1) {
    // Extra contribution from the non-differentiable kink of the n = 1 amplitude.
    r.terms[1].coeff += 2.0 * d0 * d0 * f0 / (np.eps0 * np.eps0);
  }
  r.remainder_order = 2 * (np.n + 2);
  return r;
}

struct SecondMoment {
  LogScaled EI2;
  LogScaled VarI;
};

/// Var[I] / exp(sigma^2) from the asymptotic expansion.
inline double variance_bracket(const NetworkParams& np, const ShadowingParams& sh) {
  const double lp = np.lambda * np.p;
  const AsymptoticResult psi = psi_n_asym(np, sh, 1.0, 0.0);
  return lp * gamma_n(np) + lp * lp * series_sum(psi, sh.sigma2());
}

inline SecondMoment second_moment_asym(const NetworkParams& np, const ShadowingParams& sh) {
  np.validate();
  sh.validate();
  if (np.degenerate()) return {LogScaled::zero(), LogScaled::zero()};
  const double lp = np.lambda * np.p;
  const AsymptoticResult psi = psi_n_asym(np, sh, 1.0, 0.0);
  const LogScaled singleton = LogScaled::from_log(sh.sigma2()) * (lp * gamma_n(np));
  const LogScaled pairs = evaluate_asymptotic(psi, sh.sigma2()) * (lp * lp);
  const LogScaled total = singleton + pairs;
  return {total, total};
}

inline double spatial_validity_limit(const ShadowingParams& sh) { return sh.d0() * std::log(sh.sigma2()); }

inline bool check_spatial_validity(const ShadowingParams& sh, const SpatialQuery& q) {
  if (!(q.delta >= 0)) throw DomainError("negative receiver separation");
  const bool ok = q.delta < spatial_validity_limit(sh);
  if (!ok && !q.allow_out_of_validity) {
    throw OutOfValidity("receiver separation exceeds d0 ln(sigma^2)");
  }
  return ok;
}

inline LogScaled spatial_cov_asym(const NetworkParams& np, const ShadowingParams& sh, const SpatialQuery& q) {
  np.validate();
  sh.validate();
  check_spatial_validity(sh, q);
  if (np.degenerate()) return LogScaled::zero();
  if (q.delta == 0.0) return second_moment_asym(np, sh).VarI;
  const double s = sh.sigma2(), d0 = sh.d0(), lp = np.lambda * np.p, e0 = np.eps0;
  const double c = std::exp(-q.delta / d0), e = 1.0 / c;
  const double U = u_delta(np, q);
  if (np.n == 1) {
    const double br = U * (1.0 + 2.0 * lp * d0 * e / s + 2.0 * lp * d0 * e * e / (s * s)) +
                      2.0 * lp * d0 * d0 * e * e / (e0 * (e0 + std::pow(q.delta, np.alpha)) * s * s);
    const double extra = lp * lp * d0 * d0 * std::pow(e, 4) / (e0 * e0 * s * s);
    return LogScaled::from_log(s * c) * (lp * br) + LogScaled::from_log(s * c * c) * extra;
  }
  const double k = std::numbers::pi * lp * d0 * d0;
  const double br = 1.0 + 2.0 * k * e * e / (s * s) + 6.0 * k * e * e * e / (s * s * s);
  return LogScaled::from_log(s * c) * (lp * U * br);
}

inline CorrResult spatial_corr_asym(const NetworkParams& np, const ShadowingParams& sh, const SpatialQuery& q,
                                    Variant variant = Variant::full) {
  np.validate();
  sh.validate();
  const bool valid = check_spatial_validity(sh, q);
  if (np.degenerate()) return detail::degenerate_result(variant);
  const int n = np.n;
  if (q.delta == 0.0) return detail::finish(1.0, variant, variant == Variant::full ? 2 * n + 4 : 2 * n + 2, valid);
  const double s = sh.sigma2(), d0 = sh.d0();
  if (variant == Variant::full) {
    const LogScaled cov = spatial_cov_asym(np, sh, q);
    const LogScaled var = second_moment_asym(np, sh).VarI;
    return detail::finish(ratio(cov, var), variant, 2 * n + 4, valid);
  }
  const double c = std::exp(-q.delta / d0);
  const double k = np.lambda * np.p * np.unit_sphere_area() * std::pow(d0, n) / std::pow(s, n);
  const double shape = std::exp(s * (c - 1.0)) * (1.0 + k / c) / (1.0 + k);
  const double u_ratio = variant == Variant::simplified ? u_delta(np, q) / gamma_n(np) : 1.0;
  return detail::finish(shape * u_ratio, variant, 2 * n + 2, valid);
}

struct MobilityConstants {
  double psi0;
  double psi0p;
};

inline MobilityConstants mobility_constants(const TemporalQuery& q, int n) {
  if (q.tau < 1) throw DomainError("tau must be at least 1");
  validate(q.mobility);
  const double psi0 = psi_at_zero(q.mobility, q.tau, n);
  if (!(psi0 > 0)) throw PreconditionError("displacement density must be positive at the origin");
  double psi0p = psi_slope_at_zero(q.mobility, q.tau, n);
  if (q.printed_slope_factor && n == 2) psi0p *= 0.5;
  return {psi0, psi0p};
}

inline LogScaled temporal_cov_asym(const NetworkParams& np, const ShadowingParams& sh, const TemporalQuery& q) {
  np.validate();
  sh.validate();
  if (q.tau < 1) throw DomainError("tau must be at least 1");
  if (np.degenerate()) return LogScaled::zero();
  const double s = sh.sigma2(), lam = np.lambda, p = np.p;
  if (is_static(q.mobility)) {
    // A node that never moves keeps its shadowing; only the MAC decorrelates.
    const LogScaled pairs = evaluate_asymptotic(psi_n_asym(np, sh, 1.0, 0.0), s) * (lam * lam * p * p);
    return pairs + LogScaled::from_log(s) * (lam * p * p * gamma_n(np));
  }
  const MobilityConstants mc = mobility_constants(q, np.n);
  return evaluate_asymptotic(psi_n_asym(np, sh, lam + mc.psi0, mc.psi0p), s) * (lam * p * p);
}

inline double temporal_floor(const NetworkParams& np, const ShadowingParams& sh) {
  np.validate();
  sh.validate();
  const double k = np.lambda * np.p * np.unit_sphere_area() * std::pow(sh.d0(), np.n);
  return k / (k + std::pow(sh.sigma, 2 * np.n));
}

inline CorrResult temporal_corr_asym(const NetworkParams& np, const ShadowingParams& sh, const TemporalQuery& q,
                                     Variant variant = Variant::full) {
  np.validate();
  sh.validate();
  if (variant == Variant::upper_bound) throw PreconditionError("no upper-bound variant for the temporal coefficient");
  if (np.degenerate()) return detail::degenerate_result(variant);
  const int n = np.n;
  if (variant == Variant::full) {
    const LogScaled cov = temporal_cov_asym(np, sh, q);
    const LogScaled var = second_moment_asym(np, sh).VarI;
    return detail::finish(ratio(cov, var), variant, 2 * n + 4);
  }
  const double k = np.p * np.unit_sphere_area() * std::pow(sh.d0(), n);
  const double s_n = std::pow(sh.sigma, 2 * n);
  if (is_static(q.mobility)) {
    return detail::finish((np.lambda * k + np.p * s_n) / (np.lambda * k + s_n), variant, 2 * n + 2);
  }
  const MobilityConstants mc = mobility_constants(q, n);
  return detail::finish(k * (np.lambda + mc.psi0) / (np.lambda * k + s_n), variant, 2 * n + 2);
}

}  // namespace corrint

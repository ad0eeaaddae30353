#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "corrint/errors.hpp"
#include "corrint/log_scaled.hpp"

namespace corrint {

/// Exponent R(t) of a Laplace-type integral, described by its value and first
/// two derivatives at the left endpoint a, where R attains its maximum.
struct ExpKernel {
  double a = 0.0;
  double R_a = 0.0;
  double dR = -1.0;
  double d2R = 0.0;
  std::function<double(double)> R;  // optional, used only by quadrature checks

  /// Central-difference derivatives; meant for test batteries where R has no
  /// convenient closed-form derivative.
  static ExpKernel from_function(std::function<double(double)> R, double a) {
    const double h = 1e-5 * std::max(1.0, std::fabs(a));
    ExpKernel k;
    k.a = a;
    k.R_a = R(a);
    k.dR = (R(a + h) - R(a - h)) / (2.0 * h);
    k.d2R = (R(a + h) - 2.0 * k.R_a + R(a - h)) / (h * h);
    k.R = std::move(R);
    return k;
  }
};

/// Derivatives g(a), g'(a), ... of the amplitude; n is the index of the
/// leading order, so derivs[0..n-2] are expected to vanish.
struct AmplitudeFn {
  std::vector<double> derivs;
  int n = 1;
};

struct AsymptoticResult {
  struct Term {
    int power;
    double coeff;
  };
  double exp_coeff = 0.0;
  std::vector<Term> terms;
  int order = 0;
  /// Power k of the first dropped term, O(sigma^-k) relative to exp(sigma R(a)).
  int remainder_order = 0;

  AsymptoticResult scaled(double c) const {
    AsymptoticResult r = *this;
    for (auto& t : r.terms) t.coeff *= c;
    return r;
  }
};

inline void require_decreasing(const ExpKernel& k) {
  if (!(k.dR < 0)) throw PreconditionError("exponent must be strictly decreasing at the endpoint");
}

/// Derivatives at 0 of the inverse u of w = R(a) - R(a + u).
inline std::pair<double, double> inverse_map_derivatives(const ExpKernel& k) {
  require_decreasing(k);
  return {-1.0 / k.dR, -k.d2R / (k.dR * k.dR * k.dR)};
}

/// Two-term expansion of the integral of exp(sigma R(t)) g(t) from a.
inline AsymptoticResult watson_expand(const ExpKernel& k, const AmplitudeFn& g) {
  require_decreasing(k);
  const int n = g.n;
  if (n < 1) throw PreconditionError("leading index must be at least 1");
  if (static_cast<int>(g.derivs.size()) < n + 1) {
    throw PreconditionError("amplitude needs derivatives up to order n");
  }
  const double lead = g.derivs[n - 1];
  if (lead == 0.0) throw PreconditionError("leading amplitude derivative vanishes");
  const double m = -k.dR;
  AsymptoticResult r;
  r.exp_coeff = k.R_a;
  r.terms.push_back({n, lead / std::pow(m, n)});
  r.terms.push_back({n + 1, g.derivs[n] / std::pow(m, n + 1) +
                                0.5 * n * (n + 1) * k.d2R * lead / std::pow(m, n + 2)});
  r.order = 2;
  r.remainder_order = n + 2;
  return r;
}

/// The bracketed series alone, sum of c_k sigma^-k, without the exponential.
inline double series_sum(const AsymptoticResult& res, double sigma) {
  double s = 0.0;
  for (const auto& t : res.terms) s += t.coeff * std::pow(sigma, -t.power);
  return s;
}

inline LogScaled evaluate_asymptotic(const AsymptoticResult& res, double sigma) {
  if (!(sigma > 0)) throw DomainError("evaluate_asymptotic: sigma must be positive");
  const double s = series_sum(res, sigma);
  if (s == 0.0) return LogScaled::zero();
  return LogScaled::from_log(sigma * res.exp_coeff + std::log(std::fabs(s)), s > 0 ? 1 : -1);
}

}  // namespace corrint

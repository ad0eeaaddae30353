#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "corrint/errors.hpp"
#include "corrint/model.hpp"
#include "corrint/quadrature.hpp"

namespace corrint {

using Vec2 = std::array<double, 2>;

namespace detail {

inline double factorial(int k) { return std::tgamma(k + 1.0); }

inline void check_tau_v(int tau, double v) {
  if (tau < 1) throw DomainError("mobility_density: tau must be at least 1");
  if (!(v >= 0)) throw DomainError("mobility_density: negative displacement");
}

/// Density of the sum of tau uniforms on (0, 1) and its derivative.
inline double irwin_hall_pdf(int tau, double x) {
  if (x <= 0.0 || x >= tau) return 0.0;
  if (tau == 1) return 1.0;
  double s = 0.0;
  for (int k = 0; k <= static_cast<int>(std::floor(x)); ++k) {
    s += (k % 2 ? -1.0 : 1.0) / (factorial(k) * factorial(tau - k)) * std::pow(x - k, tau - 1);
  }
  return s * tau;
}

inline double irwin_hall_dpdf(int tau, double x) {
  if (tau == 1 || x <= 0.0 || x >= tau) return 0.0;
  double s = 0.0;
  for (int k = 0; k <= static_cast<int>(std::floor(x)); ++k) {
    s += (k % 2 ? -1.0 : 1.0) / (factorial(k) * factorial(tau - k)) * std::pow(x - k, tau - 2);
  }
  return s * tau * (tau - 1);
}

/// Angular measure of {theta : |r e1 - rho e_theta| < 1} for unit disk steps.
inline double disk_arc(double r, double rho) {
  if (rho + r <= 1.0) return 2.0 * std::numbers::pi;
  if (std::fabs(r - rho) >= 1.0) return 0.0;
  const double c = (r * r + rho * rho - 1.0) / (2.0 * r * rho);
  return 2.0 * std::acos(std::clamp(c, -1.0, 1.0));
}

/// Radial profile of the tau-fold convolution of the uniform density on the
/// unit disk, tabulated on [0, tau] and advanced one step at a time by
/// adaptive quadrature against a cubic B-spline of the previous profile.
class DiskConvolution {
 public:
  using Profile = std::function<double(double)>;
  static constexpr int kNodesPerRadius = 400;

  explicit DiskConvolution(int tau) : tau_(tau) {
    if (tau < 1) throw DomainError("DiskConvolution: tau must be at least 1");
    Profile cur = [](double r) { return r < 1.0 ? 1.0 / std::numbers::pi : 0.0; };
    for (int k = 1; k < tau; ++k) {
      input_ = cur;
      const int steps = (k + 1) * kNodesPerRadius;
      const double h = double(k + 1) / steps;
      std::vector<double> vals(steps + 1);
      for (int j = 0; j < steps; ++j) vals[j] = step(input_, k, j * h);
      vals[steps] = 0.0;
      auto spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
          vals.begin(), vals.end(), 0.0, h);
      const double support = k + 1.0;
      cur = [spline, support](double r) { return r >= support ? 0.0 : std::max(0.0, (*spline)(r)); };
    }
    profile_ = cur;
  }

  int tau() const { return tau_; }

  double operator()(double r) const { return r < 0 ? 0.0 : profile_(r); }

  double value_at_zero() const {
    if (tau_ == 1) return 1.0 / std::numbers::pi;
    return step(input_, tau_ - 1, 0.0);
  }

  /// One-sided radial slope at the origin, from a second-order difference of
  /// freshly convolved values rather than of the interpolant.
  double slope_at_zero() const {
    if (tau_ == 1) return 0.0;
    const double h = 1e-3;
    const double f0 = step(input_, tau_ - 1, 0.0);
    const double f1 = step(input_, tau_ - 1, h);
    const double f2 = step(input_, tau_ - 1, 2 * h);
    return (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
  }

  /// Convolves a k-fold profile f with one more unit-disk step, evaluated at r.
  static double step(const Profile& f, int k, double r) {
    if (r == 0.0) return 2.0 * panels([&](double rho) { return rho * f(rho); }, 0.0, 1.0, 1.0);
    const double lower = std::max(0.0, r - 1.0);
    const double upper = std::min(r + 1.0, double(k));
    if (upper <= lower) return 0.0;
    std::vector<double> knots{lower, upper, std::fabs(1.0 - r)};
    for (int j = 1; j <= k; ++j) knots.push_back(j);
    std::erase_if(knots, [&](double x) { return x < lower || x > upper; });
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    // The arc length has square-root behaviour at |1 - r| and 1 + r; the
    // substitution rho = a + (b - a)(3u^2 - 2u^3) regularizes both segment ends.
    double v = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
      const double a = knots[i], w = knots[i + 1] - a;
      auto g = [&](double u) {
        const double rho = a + w * u * u * (3.0 - 2.0 * u);
        return rho * f(rho) * disk_arc(r, rho) * 6.0 * w * u * (1.0 - u);
      };
      v += panels(g, 0.0, 1.0, w);
    }
    return v / std::numbers::pi;
  }

 private:
  /// Composite 20-point Gauss-Legendre with panels no wider than 1/50 of a
  /// step radius (measured in rho). The spline input is only C2, so a fixed
  /// rule converges more predictably than an adaptive error estimate.
  template <class G>
  static double panels(const G& g, double a, double b, double rho_width) {
    const int m = std::max(1, static_cast<int>(std::ceil(rho_width * 50.0)));
    const double h = (b - a) / m;
    double s = 0.0;
    for (int i = 0; i < m; ++i)
      s += boost::math::quadrature::gauss<double, 20>::integrate(g, a + i * h, a + (i + 1) * h);
    return s;
  }

 private:
  int tau_;
  Profile input_;
  Profile profile_;
};

inline const DiskConvolution& disk_convolution(int tau) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<DiskConvolution>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[tau];
  if (!slot) slot = std::make_unique<DiskConvolution>(tau);
  return *slot;
}

}  // namespace detail

/// Displacement density psi_tau(v) after tau slots, as a function of |v|.
inline double mobility_density(const MobilityModel& m, int tau, double v, int n) {
  detail::check_tau_v(tau, v);
  validate(m);
  return std::visit(
      [&](const auto& mm) -> double {
        using T = std::decay_t<decltype(mm)>;
        if constexpr (std::is_same_v<T, mobility::Static>) {
          throw PreconditionError("static mobility has no displacement density");
        } else if constexpr (std::is_same_v<T, mobility::CIM>) {
          if (v >= mm.R) return 0.0;
          return n == 1 ? 1.0 / (2.0 * mm.R) : 1.0 / (std::numbers::pi * mm.R * mm.R);
        } else if constexpr (std::is_same_v<T, mobility::RW>) {
          if (n == 1) return detail::irwin_hall_pdf(tau, (v + tau * mm.R) / (2.0 * mm.R)) / (2.0 * mm.R);
          return detail::disk_convolution(tau)(v / mm.R) / (mm.R * mm.R);
        } else {
          const double s2 = tau * mm.sigma_v2;
          return std::pow(2.0 * std::numbers::pi * s2, -0.5 * n) * std::exp(-v * v / (2.0 * s2));
        }
      },
      m);
}

inline double psi_at_zero(const MobilityModel& m, int tau, int n) {
  if (const auto* rw = std::get_if<mobility::RW>(&m); rw && n == 2) {
    detail::check_tau_v(tau, 0.0);
    return detail::disk_convolution(tau).value_at_zero() / (rw->R * rw->R);
  }
  return mobility_density(m, tau, 0.0, n);
}

/// One-sided derivative d/dv psi_tau(v) at v = 0+.
inline double psi_slope_at_zero(const MobilityModel& m, int tau, int n) {
  detail::check_tau_v(tau, 0.0);
  validate(m);
  return std::visit(
      [&](const auto& mm) -> double {
        using T = std::decay_t<decltype(mm)>;
        if constexpr (std::is_same_v<T, mobility::Static>) {
          throw PreconditionError("static mobility has no displacement density");
        } else if constexpr (std::is_same_v<T, mobility::CIM>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, mobility::RW>) {
          if (n == 1) {
            if (tau % 2 == 0) throw DerivativeUndefined("random-walk density is not differentiable at 0 for even tau");
            return detail::irwin_hall_dpdf(tau, 0.5 * tau) / (4.0 * mm.R * mm.R);
          }
          return detail::disk_convolution(tau).slope_at_zero() / std::pow(mm.R, 3);
        } else {
          const double v = 0.0;
          return -v / (tau * mm.sigma_v2) * mobility_density(m, tau, v, n);
        }
      },
      m);
}

/// The printed closed form for the one-dimensional random-walk density at the
/// origin, kept verbatim (factorial of tau in place of i!) for comparison.
inline double rw_center_density_printed(int tau, double R) {
  double s = 0.0;
  for (int i = 0; i <= tau / 2; ++i) {
    s += (i % 2 ? -1.0 : 1.0) * tau / (detail::factorial(tau) * detail::factorial(tau - i)) *
         std::pow(0.5 * tau - i, tau - 1);
  }
  return s / (2.0 * R);
}

/// Independent route to the one-dimensional random-walk density at 0:
/// tau-fold convolution of the uniform step carried out on piecewise
/// polynomials. On the unit step scale every piece lives on [k, k + 1] and is
/// stored in the local variable t = x - k, so convolving with the step maps
/// to differences of antiderivatives of neighbouring pieces.
inline double rw_center_density_convolution(int tau, double R) {
  if (tau < 1) throw DomainError("tau must be at least 1");
  if (!(R > 0)) throw PreconditionError("step radius must be positive");
  using Poly = std::vector<double>;  // coefficients in t
  // pieces[k + tau] covers [k, k + 1] for k in [-tau, tau).
  std::vector<Poly> pieces(2 * tau, Poly{0.0});
  pieces[tau - 1] = pieces[tau] = Poly{0.5};
  for (int step = 1; step < tau; ++step) {
    // Antiderivative F with F(-tau) = 0, piecewise in t.
    std::vector<Poly> F(2 * tau);
    double carry = 0.0;
    for (int k = 0; k < 2 * tau; ++k) {
      Poly P(pieces[k].size() + 1, 0.0);
      P[0] = carry;
      for (std::size_t d = 0; d < pieces[k].size(); ++d) P[d + 1] = pieces[k][d] / double(d + 1);
      carry = 0.0;
      for (double c : P) carry += c;  // P(1)
      F[k] = std::move(P);
    }
    auto F_at = [&](int k) -> Poly {
      if (k < 0) return Poly{0.0};
      if (k >= 2 * tau) return Poly{carry};
      return F[k];
    };
    // g(x) = (F(x + 1) - F(x - 1)) / 2 on each unit piece.
    std::vector<Poly> next(2 * tau);
    for (int k = 0; k < 2 * tau; ++k) {
      const Poly hi = F_at(k + 1), lo = F_at(k - 1);
      Poly g(std::max(hi.size(), lo.size()), 0.0);
      for (std::size_t d = 0; d < hi.size(); ++d) g[d] += 0.5 * hi[d];
      for (std::size_t d = 0; d < lo.size(); ++d) g[d] -= 0.5 * lo[d];
      next[k] = std::move(g);
    }
    pieces.swap(next);
  }
  // Density at x = 0 is the value of piece [0, 1] at t = 0.
  return pieces[tau][0] / R;
}

/// Draws one tau-slot displacement vector (first n components meaningful).
template <class Rng>
Vec2 sample_displacement(const MobilityModel& m, int tau, int n, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto in_ball = [&](double R) -> Vec2 {
    if (n == 1) return {R * u(rng), 0.0};
    for (;;) {
      const double a = u(rng), b = u(rng);
      if (a * a + b * b < 1.0) return {R * a, R * b};
    }
  };
  return std::visit(
      [&](const auto& mm) -> Vec2 {
        using T = std::decay_t<decltype(mm)>;
        if constexpr (std::is_same_v<T, mobility::Static>) {
          return {0.0, 0.0};
        } else if constexpr (std::is_same_v<T, mobility::CIM>) {
          return in_ball(mm.R);
        } else if constexpr (std::is_same_v<T, mobility::RW>) {
          Vec2 s{0.0, 0.0};
          for (int k = 0; k < tau; ++k) {
            const Vec2 d = in_ball(mm.R);
            s[0] += d[0];
            s[1] += d[1];
          }
          return s;
        } else {
          std::normal_distribution<double> z(0.0, std::sqrt(tau * mm.sigma_v2));
          Vec2 s{z(rng), 0.0};
          if (n == 2) s[1] = z(rng);
          return s;
        }
      },
      m);
}

}  // namespace corrint

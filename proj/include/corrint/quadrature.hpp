#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "corrint/errors.hpp"

namespace corrint::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod over [a, b] (b may be +inf), split at the given
/// interior breakpoints. Throws QuadratureFailure if the summed error
/// estimate exceeds both rel_tol times the L1 norm of the integrand and abs_tol.
template <class F>
Result integrate(F&& f, double a, double b, std::vector<double> breaks = {}, double rel_tol = 1e-9,
                 double abs_tol = 0.0, unsigned max_depth = 25) {
  std::erase_if(breaks, [&](double x) { return !(x > a && x < b); });
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  std::vector<double> knots{a};
  knots.insert(knots.end(), breaks.begin(), breaks.end());
  knots.push_back(b);

  Result out;
  double l1_total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    double err = 0.0, l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, knots[i], knots[i + 1], max_depth, rel_tol * 0.1, &err, &l1);
    out.value += v;
    out.error += err;
    l1_total += l1;
  }
  if (!std::isfinite(out.value) || out.error > std::max(rel_tol * std::max(l1_total, std::numeric_limits<double>::min()), abs_tol)) {
    throw QuadratureFailure("adaptive quadrature did not reach tolerance", out.value, out.error);
  }
  return out;
}

template <class F>
double integral(F&& f, double a, double b, std::vector<double> breaks = {}, double rel_tol = 1e-9,
                double abs_tol = 0.0) {
  return integrate(std::forward<F>(f), a, b, std::move(breaks), rel_tol, abs_tol).value;
}

}  // namespace corrint::quad

#pragma once

#include <functional>
#include <vector>

namespace treemass::quad {

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_intervals = 4000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;   // estimated absolute error
  int intervals = 0;    // panels used
};

// Adaptive Gauss-Kronrod 7/15 on [a, b]. Nodes are interior, so integrable
// endpoint singularities are tolerated (convergence is slow; prefer the
// substitution helpers below when the endpoint exponent is known).
Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& opts = {});

// Integral of exp(log_f(t)) over t in [lo, hi], evaluated as
// exp(peak) * integral of exp(log_f(t) - peak) so that integrands spanning
// hundreds of nats neither overflow nor vanish. log_f may return -inf.
Result integrate_scaled_exp(const std::function<double(double)>& log_f,
                            double lo, double hi, const Options& opts = {});

// Integral over (0, infinity) of a nonnegative integrand given by its log.
// Substitutes x = e^t (the Jacobian is included here, callers pass log f(x)
// only), locates the peak by hill climbing from t_hint, expands until the
// log-integrand has dropped by ~120 nats on both sides, then integrates the
// peak-scaled exponential. Intended for unimodal-ish densities and density
// products; not a general-purpose improper integrator.
Result integrate_positive_axis(const std::function<double(double)>& log_f_of_x,
                               double t_hint = 0.0, const Options& opts = {},
                               double hard_hi = 0.0);

// Cumulative integrals of a nonnegative density at ascending points: result[i]
// is the integral of `density` over [0, points[i]]. The density may behave like
// C * x^(left_exponent - 1) at the origin; the first segment is integrated
// under x = u^(1/left_exponent), which removes that singularity exactly.
// Per-gap integrals run in parallel, the prefix sum is sequential, so the
// output is identical at any thread count.
std::vector<double> cumulative_density(const std::function<double(double)>& density,
                                       const std::vector<double>& ascending_points,
                                       double left_exponent,
                                       const Options& per_gap = {});

// Integral of `density` over [0, 1] where the density behaves like
// C * p^(left_exponent - 1) at 0 and C' * (1-p)^(right_exponent - 1) at 1.
// Both endpoint singularities are removed by power substitutions.
Result integrate_unit_interval(const std::function<double(double)>& density,
                               double left_exponent, double right_exponent,
                               const Options& opts = {});

}  // namespace treemass::quad

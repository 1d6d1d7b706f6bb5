#include "treemass/normalized_mass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "treemass/errors.hpp"
#include "treemass/quadrature.hpp"

namespace treemass {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Neumaier compensated sum; the residual stays O(eps) at any length.
double compensated_sum(const std::vector<double>& v) {
  double sum = 0.0, comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

// Smallest z with conditioning survival mass below 1e-10.
double tail_bound_z(const DistributionSpec& total) {
  if (const auto g = gamma_view(total)) {
    // Chernoff-style gamma tail: P(Z > z) <= (lambda z / A)^A exp(A - lambda z)
    // for z > A/lambda; double until the bound clears.
    const double A = g->shape, lam = g->rate;
    double z = (A + 1.0) / lam;
    for (int i = 0; i < 200; ++i) {
      const double logb = A * std::log(lam * z / A) + A - lam * z;
      if (logb < std::log(1e-10)) return z;
      z *= 2.0;
    }
    return z;
  }
  // Index-1/2 stable survival erf(a / (2 sqrt(z))) <= a / sqrt(pi z).
  const auto s = stable_view(total);
  const double a = s->scale;
  return a * a / (kPi * 1e-20);
}

double log_integrand_hint(const ConditioningSet& cond) {
  const DistributionSpec total = convolve_all(cond);
  if (const auto g = gamma_view(total)) return std::log(g->shape / g->rate);
  const auto s = stable_view(total);
  return 2.0 * std::log(s->scale);
}

DensityEstimate positive_axis_density(
    const std::function<double(double)>& log_f_of_z,
    const ConditioningSet& cond, const QuadParams& quad) {
  quad::Options opts;
  opts.abs_tol = quad.abs_tol;
  opts.rel_tol = quad.rel_tol;
  opts.max_intervals = quad.max_intervals;
  const double z_max =
      quad.z_max > 0.0 ? quad.z_max : tail_bound_z(convolve_all(cond));
  const quad::Result r = quad::integrate_positive_axis(
      log_f_of_z, log_integrand_hint(cond), opts, z_max);
  if (r.error > std::max(quad.abs_tol, quad.rel_tol * std::fabs(r.value)))
    throw QuadratureFailure("marginal quadrature error " +
                            std::to_string(r.error) + " above tolerance");
  return {r.value, r.error};
}

}  // namespace

ProbVector::ProbVector(std::vector<double> entries) : p_(std::move(entries)) {
  if (p_.empty()) throw InvalidInput("probability vector needs n >= 1");
  for (double x : p_) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw InvalidInput("probability vector entries must be finite and >= 0");
  }
  if (std::fabs(compensated_sum(p_) - 1.0) > 1e-12)
    throw InvalidInput("probability vector must sum to 1 within 1e-12");
}

ProbVector ProbVector::normalized(std::vector<double> raw) {
  if (raw.empty()) throw InvalidInput("probability vector needs n >= 1");
  for (double x : raw) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw InvalidInput("masses must be finite and >= 0");
  }
  const double sum = compensated_sum(raw);
  if (!(sum > 0.0)) throw DegenerateSum("all masses are zero");
  for (double& x : raw) x /= sum;
  // One-entry residual correction: the divided entries each round, so push
  // the leftover into the largest entry to pin the sum at 1.
  const double resid = compensated_sum(raw) - 1.0;
  auto it = std::max_element(raw.begin(), raw.end());
  *it -= resid;
  return ProbVector(std::move(raw), Unchecked{});
}

DistributionSpec convolve_all(const ConditioningSet& cond) {
  if (cond.specs.empty()) throw InvalidInput("conditioning set is empty");
  DistributionSpec acc = cond.specs[0];
  for (std::size_t i = 1; i < cond.specs.size(); ++i)
    acc = convolve_closed(acc, cond.specs[i]);
  return acc;
}

DistributionSpec convolve_excluding(const ConditioningSet& cond,
                                    std::size_t skip) {
  if (skip >= cond.specs.size())
    throw InvalidInput("conditioning index out of range");
  if (cond.specs.size() < 2)
    throw InvalidInput("need at least two conditioners to exclude one");
  DistributionSpec acc;
  bool seeded = false;
  for (std::size_t i = 0; i < cond.specs.size(); ++i) {
    if (i == skip) continue;
    acc = seeded ? convolve_closed(acc, cond.specs[i]) : cond.specs[i];
    seeded = true;
  }
  return acc;
}

SkewFactor::SkewFactor(double a, double b) : alpha(a), beta(b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw InvalidSpec("skew factor requires alpha > 0 and beta > 0");
}

double SkewFactor::operator()(double p) const {
  if (p < 0.0 || p > 1.0) throw InvalidInput("skew factor requires p in [0,1]");
  return alpha * beta / (alpha * alpha * (1.0 - p) + beta * beta * p);
}

ProbVector sample_normalized(const ConditioningSet& cond, RngStream& rng,
                             int max_resample) {
  if (cond.specs.empty()) throw InvalidInput("conditioning set is empty");
  std::vector<double> x(cond.specs.size());
  for (int attempt = 0; attempt <= max_resample; ++attempt) {
    for (std::size_t i = 0; i < cond.specs.size(); ++i)
      x[i] = sample(cond.specs[i], rng);
    if (compensated_sum(x) > 0.0) return ProbVector::normalized(std::move(x));
    x.assign(cond.specs.size(), 0.0);
  }
  throw DegenerateSum("every draw of the conditioning set summed to zero");
}

ExtReal dirichlet_density(const ProbVector& p,
                          const std::vector<double>& alphas) {
  const std::size_t n = alphas.size();
  if (p.size() != n) throw InvalidInput("dimension mismatch");
  if (n < 2) throw InvalidInput("dirichlet density needs n >= 2");
  for (double a : alphas)
    if (!(a > 0.0)) throw InvalidInput("shape parameters must be positive");

  double logv = 0.0;
  double alpha_total = 0.0;
  bool zero = false;
  for (std::size_t i = 0; i < n; ++i) {
    alpha_total += alphas[i];
    logv -= std::lgamma(alphas[i]);
    if (p[i] == 0.0) {
      if (alphas[i] < 1.0) return ExtReal::infinity();
      if (alphas[i] > 1.0) zero = true;
      // alpha_i == 1: the factor is p^0 = 1.
    } else {
      logv += (alphas[i] - 1.0) * std::log(p[i]);
    }
  }
  if (zero) return ExtReal::finite(0.0);
  logv += std::lgamma(alpha_total);
  return ExtReal::finite(std::exp(logv));
}

ProbVector dirichlet_mean(const std::vector<double>& alphas) {
  if (alphas.empty()) throw InvalidInput("needs at least one shape");
  for (double a : alphas)
    if (!(a > 0.0)) throw InvalidInput("shape parameters must be positive");
  return ProbVector::normalized(alphas);
}

ExtReal beta_marginal_density(double p, double alpha_i, double alpha_total) {
  if (!(alpha_i > 0.0)) throw InvalidInput("alpha_i must be positive");
  if (!(alpha_total > alpha_i))
    throw InvalidInput("alpha_total must exceed alpha_i");
  if (p < 0.0 || p > 1.0) throw InvalidInput("p must lie in [0,1]");
  const double b = alpha_total - alpha_i;
  const double lognorm =
      std::lgamma(alpha_total) - std::lgamma(alpha_i) - std::lgamma(b);

  double logv = lognorm;
  if (p == 0.0) {
    if (alpha_i < 1.0) return ExtReal::infinity();
    if (alpha_i > 1.0) return ExtReal::finite(0.0);
  } else {
    logv += (alpha_i - 1.0) * std::log(p);
  }
  if (p == 1.0) {
    if (b < 1.0) return ExtReal::infinity();
    if (b > 1.0) return ExtReal::finite(0.0);
  } else {
    logv += (b - 1.0) * std::log1p(-p);
  }
  return ExtReal::finite(std::exp(logv));
}

ExtReal levy_marginal_density(double p, double alpha_i, double alpha_total) {
  if (!(alpha_i > 0.0)) throw InvalidInput("alpha_i must be positive");
  if (!(alpha_total > alpha_i))
    throw InvalidInput("alpha_total must exceed alpha_i");
  if (p < 0.0 || p > 1.0) throw InvalidInput("p must lie in [0,1]");
  if (p == 0.0 || p == 1.0) return ExtReal::infinity();
  const SkewFactor s(alpha_i, alpha_total - alpha_i);
  return ExtReal::finite(s(p) / (kPi * std::sqrt(p * (1.0 - p))));
}

DensityEstimate numeric_marginal_density(double p, const ConditioningSet& cond,
                                         std::size_t index,
                                         const QuadParams& quad) {
  if (!(p > 0.0) || !(p < 1.0))
    throw InvalidInput("numeric marginal requires interior p");
  if (index >= cond.specs.size())
    throw InvalidInput("conditioning index out of range");
  const DistributionSpec& fi = cond.specs[index];
  const DistributionSpec frest = convolve_excluding(cond, index);
  // Probe once so UnsupportedDensity surfaces before any quadrature runs.
  (void)log_density(fi, 1.0);
  (void)log_density(frest, 1.0);

  auto log_f = [&, p](double z) {
    return std::log(z) + log_density(fi, z * p) +
           log_density(frest, z * (1.0 - p));
  };
  return positive_axis_density(log_f, cond, quad);
}

ExtReal joint_density(const ProbVector& p, const ConditioningSet& cond,
                      const QuadParams& quad) {
  const std::size_t n = cond.specs.size();
  if (p.size() != n) throw InvalidInput("dimension mismatch");
  if (n < 2) throw InvalidInput("joint density needs n >= 2");

  const DistributionSpec total = convolve_all(cond);
  if (gamma_view(total)) {
    std::vector<double> alphas(n);
    for (std::size_t i = 0; i < n; ++i) alphas[i] = gamma_view(cond.specs[i])->shape;
    return dirichlet_density(p, alphas);
  }

  for (std::size_t i = 0; i < n; ++i)
    if (!(p[i] > 0.0) || !(p[i] < 1.0))
      throw InvalidInput("numeric joint density requires interior p");
  (void)log_density(total, 1.0);

  auto log_f = [&](double z) {
    double acc = (static_cast<double>(n) - 1.0) * std::log(z);
    for (std::size_t i = 0; i < n; ++i)
      acc += log_density(cond.specs[i], z * p[i]);
    return acc;
  };
  const DensityEstimate est = positive_axis_density(log_f, cond, quad);
  return ExtReal::finite(est.value);
}

}  // namespace treemass

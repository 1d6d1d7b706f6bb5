#pragma once

#include <cstddef>
#include <vector>

#include "treemass/distributions.hpp"
#include "treemass/rng.hpp"

namespace treemass {

// A point on the probability simplex: n >= 1 nonnegative entries summing to 1
// within 1e-12. Construction validates; normalized() builds one from raw
// nonnegative masses with a compensated sum plus a one-entry residual
// correction, so the invariant holds at any dimension.
class ProbVector {
 public:
  explicit ProbVector(std::vector<double> entries);
  static ProbVector normalized(std::vector<double> raw_masses);

  const std::vector<double>& entries() const { return p_; }
  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }

 private:
  struct Unchecked {};
  ProbVector(std::vector<double> entries, Unchecked) : p_(std::move(entries)) {}
  std::vector<double> p_;
};

// The masses whose normalization is being studied: one distribution per
// component. Closed-form density routes additionally require one closed
// family (all gamma at a common rate, or all stable at a common index);
// mixed sets can only be sampled.
struct ConditioningSet {
  std::vector<DistributionSpec> specs;
};

// Convolution of every member / every member but `skip`; throws
// ClosureViolation when the set does not close.
DistributionSpec convolve_all(const ConditioningSet& cond);
DistributionSpec convolve_excluding(const ConditioningSet& cond, std::size_t skip);

// Skew factor of the normalized-mass marginal for index-1/2 stable
// conditioners: S(p) = alpha*beta / (alpha^2 (1-p) + beta^2 p). Positive on
// [0,1], S(0) = beta/alpha, S(1) = alpha/beta, invariant under a common
// rescaling of (alpha, beta).
struct SkewFactor {
  SkewFactor(double alpha, double beta);
  double operator()(double p) const;

  double alpha;
  double beta;
};

// Draws each component mass independently and normalizes by the sum.
// Degenerate draws (sum zero, possible only through underflow of tiny-shape
// gammas) are retried up to max_resample times, then fail as DegenerateSum.
ProbVector sample_normalized(const ConditioningSet& cond, RngStream& rng,
                             int max_resample = 100);

// Dirichlet density at p with the given shape parameters, with respect to
// Lebesgue measure on the first n-1 coordinates. Boundary entries p_i = 0
// give the divergence marker when alpha_i < 1 and zero when alpha_i > 1.
ExtReal dirichlet_density(const ProbVector& p, const std::vector<double>& alphas);

// (alpha_1/alpha, ..., alpha_n/alpha).
ProbVector dirichlet_mean(const std::vector<double>& alphas);

// Density of Beta(alpha_i, alpha_total - alpha_i) at p in [0,1]; the gamma
// family's normalized-mass marginal. Requires alpha_total > alpha_i.
ExtReal beta_marginal_density(double p, double alpha_i, double alpha_total);

// Normalized-mass marginal for index-1/2 stable conditioners with scales
// (alpha_i, alpha_total - alpha_i):
//   S(p) / (pi * sqrt(p (1-p)))
// with S the SkewFactor above. Diverges at both endpoints (marker).
ExtReal levy_marginal_density(double p, double alpha_i, double alpha_total);

struct QuadParams {
  double z_max = 0.0;       // 0: bound from the conditioning sum's tail so the
                            // survival mass beyond z_max is < 1e-10
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  int max_intervals = 4000;
};

struct DensityEstimate {
  double value = 0.0;
  double error = 0.0;
};

// Marginal density of component `index` at p by direct quadrature of
//   integral over z of  z * f_i(z p) * f_rest(z (1-p))  dz
// where f_rest is the closed-form convolution of the other members. This is
// the numeric route kept deliberately independent of the closed-form
// marginals above. Throws QuadratureFailure when the error estimate exceeds
// the requested tolerance, ClosureViolation when the set does not close, and
// UnsupportedDensity when the family has no pointwise density (stable with
// index != 1/2).
DensityEstimate numeric_marginal_density(double p, const ConditioningSet& cond,
                                         std::size_t index,
                                         const QuadParams& quad = {});

// Joint density of the normalized masses at p (dimension n >= 2). Gamma
// conditioners short-circuit to the closed-form Dirichlet density; stable
// index-1/2 conditioners integrate
//   integral over z of  z^(n-1) * prod_i f_i(z p_i)  dz
// numerically. The numeric route requires interior p.
ExtReal joint_density(const ProbVector& p, const ConditioningSet& cond,
                      const QuadParams& quad = {});

}  // namespace treemass

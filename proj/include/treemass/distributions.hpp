#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "treemass/rng.hpp"

namespace treemass {

// Mass distributions on [0, inf). Gamma{shape, rate} has density
// rate^shape / Gamma(shape) * x^(shape-1) * exp(-rate x) and Laplace transform
// (rate/(rate+s))^shape. Stable{scale, index} is the positive stable law with
// transform exp(-scale * s^index), 0 < index < 1; it has no elementary density
// except at index = 1/2. Levy{scale} is that index-1/2 case kept as its own
// representation because its density, tail and sampler are all closed-form:
// f(x) = scale * exp(-scale^2/(4x)) / (2 sqrt(pi x^3)).
struct GammaSpec {
  double shape;
  double rate;
};

struct LevySpec {
  double scale;
};

struct StableSpec {
  double scale;
  double index;
};

using DistributionSpec = std::variant<GammaSpec, LevySpec, StableSpec>;

// Validating factories; throw InvalidSpec on nonpositive parameters or an
// index outside (0, 1).
DistributionSpec gamma_spec(double shape, double rate);
DistributionSpec levy_spec(double scale);
DistributionSpec stable_spec(double scale, double index);

// Levy{a} and Stable{a, 1/2} are the same law. stable_view canonicalizes both
// to StableSpec for family comparisons; gamma_view extracts the gamma case.
std::optional<StableSpec> stable_view(const DistributionSpec& spec);
std::optional<GammaSpec> gamma_view(const DistributionSpec& spec);

std::string spec_name(const DistributionSpec& spec);

// A nonnegative extended real. `value` is meaningful only when !infinite;
// divergent densities and infinite means are reported this way, never as a
// floating-point sentinel.
struct ExtReal {
  double value = 0.0;
  bool infinite = false;

  static ExtReal finite(double v) { return {v, false}; }
  static ExtReal infinity() { return {0.0, true}; }
};

// Density at x >= 0. Gamma with shape < 1 diverges at x = 0 (infinite marker);
// general stable densities (index != 1/2) throw UnsupportedDensity.
ExtReal density(const DistributionSpec& spec, double x);

// log density at x > 0; same support restrictions as density(). May return
// -inf where the density underflows.
double log_density(const DistributionSpec& spec, double x);

// Laplace transform at s >= 0; lies in (0, 1].
double laplace(const DistributionSpec& spec, double s);

// Gamma: shape/rate. Levy and Stable: infinite marker.
ExtReal mean(const DistributionSpec& spec);

// One draw. Gamma: Marsaglia-Tsang (shape >= 1) or the power-of-uniform boost
// (shape < 1). Levy: scale^2 / (2 Z^2) with Z standard normal. Stable: Kanter's
// construction, evaluated in log space. Rejection loops are capped and throw
// NonConvergence at the cap.
double sample(const DistributionSpec& spec, RngStream& rng);

// Closed-form convolution: gamma + gamma at equal rate adds shapes; stable +
// stable at equal index adds scales (Levy + Levy stays Levy). Anything else
// throws ClosureViolation.
DistributionSpec convolve_closed(const DistributionSpec& a, const DistributionSpec& b);

// Shared scalar samplers; deterministic draw counts per call.
double standard_normal(RngStream& rng);
double standard_exponential(RngStream& rng);
std::uint64_t poisson_sample(double rate, RngStream& rng);

// Density tabulated on a uniformly spaced, strictly increasing grid.
struct DensityTable {
  std::vector<double> xs;
  std::vector<double> fs;

  double spacing() const;
  // Trapezoid mass over the grid span.
  double trapezoid_mass() const;
  // Two-column CSV "x,density"; an optional comment line precedes the header.
  void write_csv(std::ostream& out, const std::string& comment = "") const;
};

// Tabulates a finite density on [x_lo, x_hi] with `points` equally spaced
// rows. Throws InvalidInput on divergent values or points < 2.
DensityTable tabulate_density(const DistributionSpec& spec, double x_lo,
                              double x_hi, std::size_t points);

// Trapezoid discretization of (f*g)(x) = integral of f(u) g(x-u) du on the
// union grid. Both tables must be anchored at 0 with equal spacing
// (GridMismatch otherwise); values beyond a table's end count as 0. The sum
// is accumulated symmetrically, so numeric_convolve(a,b) == numeric_convolve(b,a)
// bit for bit. Outputs are independent, computed in parallel.
DensityTable numeric_convolve(const DensityTable& a, const DensityTable& b);

struct MeanWithSem {
  double value = 0.0;
  double sem = 0.0;
};

// Monte Carlo transform estimate: mean and standard error of exp(-s x) over
// the sample. Summation is chunked in fixed 4096-element blocks accumulated in
// index order, so the result does not depend on the thread count.
MeanWithSem empirical_laplace(std::span<const double> samples, double s);

}  // namespace treemass

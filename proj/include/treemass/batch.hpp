#pragma once

#include <cstddef>
#include <vector>

#include "treemass/distributions.hpp"
#include "treemass/normalized_mass.hpp"
#include "treemass/rng.hpp"

namespace treemass {

// Monte Carlo batch kernels. Each element derives its own RNG stream from
// (base, element index), so results are independent of evaluation order:
// the parallel kernels below are bit-identical to the serial references in
// serial_ref at any thread count. Reductions (means, SEMs) accumulate fixed
// 4096-element chunks in index order for the same reason.

// n independent draws of spec.
std::vector<double> sample_batch(const DistributionSpec& spec, std::size_t n,
                                 const RngStream& base);

// n independent draws of X + Y with X ~ a, Y ~ b.
std::vector<double> sample_sum_batch(const DistributionSpec& a,
                                     const DistributionSpec& b, std::size_t n,
                                     const RngStream& base);

// Component `index` of n independent normalized-mass draws.
std::vector<double> sample_normalized_component(const ConditioningSet& cond,
                                                std::size_t index, std::size_t n,
                                                const RngStream& base);

struct MeanVectorWithSem {
  std::vector<double> mean;
  std::vector<double> sem;
};

// Component-wise empirical means (and standard errors) of n normalized draws.
MeanVectorWithSem sample_normalized_means(const ConditioningSet& cond,
                                          std::size_t n, const RngStream& base);

// Plain-loop reference implementations, kept for equivalence tests and the
// kernel benchmark. Generation kernels must match the parallel ones bit for
// bit; reduction kernels accumulate in a single left-to-right pass and are
// compared within floating-point slack.
namespace serial_ref {

std::vector<double> sample_batch(const DistributionSpec& spec, std::size_t n,
                                 const RngStream& base);
std::vector<double> sample_sum_batch(const DistributionSpec& a,
                                     const DistributionSpec& b, std::size_t n,
                                     const RngStream& base);
std::vector<double> sample_normalized_component(const ConditioningSet& cond,
                                                std::size_t index, std::size_t n,
                                                const RngStream& base);
MeanVectorWithSem sample_normalized_means(const ConditioningSet& cond,
                                          std::size_t n, const RngStream& base);
MeanWithSem empirical_laplace(std::span<const double> samples, double s);
DensityTable numeric_convolve(const DensityTable& a, const DensityTable& b);

}  // namespace serial_ref

}  // namespace treemass

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "treemass/rng.hpp"
#include "treemass/tree.hpp"

namespace treemass {

struct DegreeHistogram {
  std::map<std::size_t, std::size_t> counts;  // in-degree -> vertex count
  std::size_t total_vertices = 0;
  std::size_t total_edges = 0;
};

// Exact counts; sum of counts = vertices, degree-weighted sum = edges.
DegreeHistogram degree_histogram(const Forest& forest);

// Two-sided Kolmogorov-Smirnov distance between the empirical CDF of
// `samples` and `cdf`: sup over the sorted samples of
// max(F(x_(i)) - (i-1)/n, i/n - F(x_(i))). EmptyInput on no samples.
double ks_statistic(std::span<const double> samples,
                    const std::function<double(double)>& cdf);

// Same statistic when the CDF has already been evaluated at the sorted
// samples (values[i] = F(x_(i))); saves re-integrating numeric CDFs.
double ks_from_cdf_values(std::span<const double> sorted_cdf_values);

// Two-sided KS distance between two empirical CDFs.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

struct ValidationReport {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  std::uint64_t n_samples = 0;
  bool passed = false;  // statistic <= threshold
};

struct ValidationConfig {
  std::uint64_t n_samples = 100000;

  void validate() const;  // InvalidSpec when n_samples == 0
};

// The fixed six-check battery, one report per check, in order:
//   gamma-closure     KS of pairwise gamma sums against the merged gamma CDF
//   stable-closure    KS of pairwise stable sums against the merged CDF
//   stable-transform  worst |z| of the empirical transform over a
//                     (index, s) grid against exp(-s^nu)
//   dirichlet-mean    worst component-mean |z| of normalized gamma masses
//   beta-marginal     KS of the first normalized gamma component against its
//                     closed-form marginal
//   levy-marginal     KS of the first normalized index-1/2 stable component
//                     against its closed-form marginal, with the two
//                     conditioners drawn through distinct sampler routes
// KS thresholds are 1.36/sqrt(N) + 0.01 (the 0.01 covers the numeric CDF);
// z thresholds are 3. Deterministic per rng: each check derives its own
// child stream by check index. Failures are reported, never thrown.
std::vector<ValidationReport> validate_suite(const ValidationConfig& cfg,
                                             RngStream& rng);

void write_reports_json(std::ostream& out,
                        std::span<const ValidationReport> reports);
void write_reports_table(std::ostream& out,
                         std::span<const ValidationReport> reports);

// Least-squares slope of log(count) against log(degree) over the distinct
// degrees >= max(k_min, 1) with nonzero counts (degree 0 has no logarithm).
// Diagnostic only. InsufficientSupport with fewer than 5 support points.
double tail_slope(const DegreeHistogram& hist, std::size_t k_min);

}  // namespace treemass

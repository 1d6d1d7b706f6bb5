#include "treemass/batch.hpp"

#include <algorithm>
#include <cmath>

#include "treemass/errors.hpp"

namespace treemass {
namespace {

// Stream-derivation tag reserved for batch elements.
constexpr std::uint64_t kBatchTag = 0xb0;

RngStream element_stream(const RngStream& base, std::size_t i) {
  return base.child(kBatchTag, static_cast<std::uint64_t>(i));
}

}  // namespace

std::vector<double> sample_batch(const DistributionSpec& spec, std::size_t n,
                                 const RngStream& base) {
  std::vector<double> out(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng = element_stream(base, i);
    out[i] = sample(spec, rng);
  }
  return out;
}

std::vector<double> sample_sum_batch(const DistributionSpec& a,
                                     const DistributionSpec& b, std::size_t n,
                                     const RngStream& base) {
  std::vector<double> out(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng = element_stream(base, i);
    const double x = sample(a, rng);
    const double y = sample(b, rng);
    out[i] = x + y;
  }
  return out;
}

std::vector<double> sample_normalized_component(const ConditioningSet& cond,
                                                std::size_t index, std::size_t n,
                                                const RngStream& base) {
  if (index >= cond.specs.size())
    throw InvalidInput("conditioning index out of range");
  std::vector<double> out(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng = element_stream(base, i);
    out[i] = sample_normalized(cond, rng)[index];
  }
  return out;
}

MeanVectorWithSem sample_normalized_means(const ConditioningSet& cond,
                                          std::size_t n, const RngStream& base) {
  if (n == 0) throw EmptyInput("needs at least one draw");
  const std::size_t d = cond.specs.size();
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> part(chunks * d, 0.0), part2(chunks * d, 0.0);

#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t lo = c * kChunk;
    const std::size_t hi = std::min(lo + kChunk, n);
    for (std::size_t i = lo; i < hi; ++i) {
      RngStream rng = element_stream(base, i);
      const ProbVector p = sample_normalized(cond, rng);
      for (std::size_t j = 0; j < d; ++j) {
        part[c * d + j] += p[j];
        part2[c * d + j] += p[j] * p[j];
      }
    }
  }

  MeanVectorWithSem out;
  out.mean.assign(d, 0.0);
  out.sem.assign(d, 0.0);
  std::vector<double> sum2(d, 0.0);
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t j = 0; j < d; ++j) {
      out.mean[j] += part[c * d + j];
      sum2[j] += part2[c * d + j];
    }
  }
  const double nn = static_cast<double>(n);
  for (std::size_t j = 0; j < d; ++j) {
    const double s = out.mean[j];
    out.mean[j] = s / nn;
    if (n > 1) {
      const double var = std::max(0.0, (sum2[j] - s * s / nn) / (nn - 1.0));
      out.sem[j] = std::sqrt(var / nn);
    }
  }
  return out;
}

namespace serial_ref {

std::vector<double> sample_batch(const DistributionSpec& spec, std::size_t n,
                                 const RngStream& base) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng = element_stream(base, i);
    out[i] = sample(spec, rng);
  }
  return out;
}

std::vector<double> sample_sum_batch(const DistributionSpec& a,
                                     const DistributionSpec& b, std::size_t n,
                                     const RngStream& base) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng = element_stream(base, i);
    const double x = sample(a, rng);
    const double y = sample(b, rng);
    out[i] = x + y;
  }
  return out;
}

std::vector<double> sample_normalized_component(const ConditioningSet& cond,
                                                std::size_t index, std::size_t n,
                                                const RngStream& base) {
  if (index >= cond.specs.size())
    throw InvalidInput("conditioning index out of range");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng = element_stream(base, i);
    out[i] = sample_normalized(cond, rng)[index];
  }
  return out;
}

MeanVectorWithSem sample_normalized_means(const ConditioningSet& cond,
                                          std::size_t n, const RngStream& base) {
  if (n == 0) throw EmptyInput("needs at least one draw");
  const std::size_t d = cond.specs.size();
  std::vector<double> sum(d, 0.0), sum2(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng = element_stream(base, i);
    const ProbVector p = sample_normalized(cond, rng);
    for (std::size_t j = 0; j < d; ++j) {
      sum[j] += p[j];
      sum2[j] += p[j] * p[j];
    }
  }
  MeanVectorWithSem out;
  out.mean.assign(d, 0.0);
  out.sem.assign(d, 0.0);
  const double nn = static_cast<double>(n);
  for (std::size_t j = 0; j < d; ++j) {
    out.mean[j] = sum[j] / nn;
    if (n > 1) {
      const double var =
          std::max(0.0, (sum2[j] - sum[j] * sum[j] / nn) / (nn - 1.0));
      out.sem[j] = std::sqrt(var / nn);
    }
  }
  return out;
}

MeanWithSem empirical_laplace(std::span<const double> samples, double s) {
  if (samples.empty()) throw EmptyInput("empirical_laplace needs samples");
  if (s < 0.0) throw InvalidInput("empirical_laplace requires s >= 0");
  const std::size_t n = samples.size();
  double sum = 0.0, sum2 = 0.0;
  for (double x : samples) {
    const double e = std::exp(-s * x);
    sum += e;
    sum2 += e * e;
  }
  const double m = sum / static_cast<double>(n);
  if (n == 1) return {m, 0.0};
  const double var =
      std::max(0.0, (sum2 - sum * sum / static_cast<double>(n)) /
                        static_cast<double>(n - 1));
  return {m, std::sqrt(var / static_cast<double>(n))};
}

DensityTable numeric_convolve(const DensityTable& a, const DensityTable& b) {
  // Same symmetric pairing as the parallel kernel, minus the pragma.
  const double dx = a.spacing();
  if (std::fabs(dx - b.spacing()) > 1e-12 * std::max(dx, b.spacing()))
    throw GridMismatch("convolution grids differ in spacing");
  const std::size_t n = std::max(a.xs.size(), b.xs.size());
  auto fa = [&](std::size_t i) { return i < a.fs.size() ? a.fs[i] : 0.0; };
  auto fb = [&](std::size_t i) { return i < b.fs.size() ? b.fs[i] : 0.0; };
  DensityTable out;
  out.xs.resize(n);
  out.fs.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    out.xs[k] = static_cast<double>(k) * dx;
  out.fs[0] = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    double sum = 0.5 * (fa(0) * fb(k) + fa(k) * fb(0));
    for (std::size_t j = 1; 2 * j < k; ++j)
      sum += fa(j) * fb(k - j) + fa(k - j) * fb(j);
    if (k % 2 == 0) sum += fa(k / 2) * fb(k / 2);
    out.fs[k] = sum * dx;
  }
  return out;
}

}  // namespace serial_ref
}  // namespace treemass

// Times the OpenMP batch kernels against their serial references and checks
// that generation kernels agree bit for bit. Usage: treemass_bench [n].
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "treemass/batch.hpp"
#include "treemass/distributions.hpp"
#include "treemass/normalized_mass.hpp"
#include "treemass/rng.hpp"

using namespace treemass;

namespace {

double seconds(const std::function<void()>& fn) {
  double best = 1e30;
  for (int rep = 0; rep < 3; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::fabs(a[i]), std::fabs(b[i]), 1e-300});
    worst = std::max(worst, std::fabs(a[i] - b[i]) / scale);
  }
  return worst;
}

void row(const char* name, double serial_s, double parallel_s, double diff) {
  char agree[32];
  if (diff == 0.0)
    std::snprintf(agree, sizeof agree, "bit-exact");
  else
    std::snprintf(agree, sizeof agree, "max rel diff %.3e", diff);
  std::printf("%-24s %10.4fs %10.4fs %7.2fx   %s\n", name, serial_s, parallel_s,
              serial_s / parallel_s, agree);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1000000;
  const RngStream base(42, 0);

  std::printf("%-24s %11s %11s %8s   %s\n", "kernel", "serial", "parallel",
              "speedup", "agreement");

  {
    const DistributionSpec spec = gamma_spec(2.5, 1.0);
    std::vector<double> s, p;
    const double ts = seconds([&] { s = serial_ref::sample_batch(spec, n, base); });
    const double tp = seconds([&] { p = sample_batch(spec, n, base); });
    row("sample_batch gamma", ts, tp, max_rel_diff(s, p));
  }
  {
    const DistributionSpec spec = stable_spec(1.0, 0.3);
    std::vector<double> s, p;
    const double ts = seconds([&] { s = serial_ref::sample_batch(spec, n, base); });
    const double tp = seconds([&] { p = sample_batch(spec, n, base); });
    row("sample_batch stable", ts, tp, max_rel_diff(s, p));
  }
  {
    const DistributionSpec a = gamma_spec(1.5, 1.0);
    const DistributionSpec b = gamma_spec(2.5, 1.0);
    std::vector<double> s, p;
    const double ts = seconds([&] { s = serial_ref::sample_sum_batch(a, b, n, base); });
    const double tp = seconds([&] { p = sample_sum_batch(a, b, n, base); });
    row("sample_sum_batch", ts, tp, max_rel_diff(s, p));
  }
  {
    ConditioningSet cond;
    for (double alpha : {0.5, 1.0, 2.0, 4.0})
      cond.specs.push_back(gamma_spec(alpha, 1.0));
    MeanVectorWithSem s, p;
    const double ts =
        seconds([&] { s = serial_ref::sample_normalized_means(cond, n, base); });
    const double tp = seconds([&] { p = sample_normalized_means(cond, n, base); });
    row("normalized means", ts, tp,
        std::max(max_rel_diff(s.mean, p.mean), max_rel_diff(s.sem, p.sem)));
  }
  {
    const std::vector<double> xs = sample_batch(gamma_spec(2.0, 1.0), n, base);
    MeanWithSem s{}, p{};
    const double ts = seconds([&] { s = serial_ref::empirical_laplace(xs, 1.0); });
    const double tp = seconds([&] { p = empirical_laplace(xs, 1.0); });
    row("empirical_laplace", ts, tp,
        std::fabs(s.value - p.value) / std::max(std::fabs(s.value), 1e-300));
  }
  {
    const DensityTable ta = tabulate_density(gamma_spec(1.0, 1.0), 0.0, 16.0, 2048);
    const DensityTable tb = tabulate_density(gamma_spec(2.0, 1.0), 0.0, 16.0, 2048);
    DensityTable s, p;
    const double ts = seconds([&] { s = serial_ref::numeric_convolve(ta, tb); });
    const double tp = seconds([&] { p = numeric_convolve(ta, tb); });
    row("numeric_convolve", ts, tp, max_rel_diff(s.fs, p.fs));
  }
  return 0;
}

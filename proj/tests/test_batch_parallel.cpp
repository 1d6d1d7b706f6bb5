#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "treemass/batch.hpp"
#include "treemass/distributions.hpp"
#include "treemass/rng.hpp"

using namespace treemass;

namespace {

void check_bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
}

}  // namespace

TEST_CASE("sample_batch matches the serial reference bit for bit") {
  const RngStream base(31, 0);
  for (const DistributionSpec& spec :
       {gamma_spec(2.5, 1.0), gamma_spec(0.4, 2.0), levy_spec(1.5),
        stable_spec(1.0, 0.3)}) {
    check_bit_equal(sample_batch(spec, 10000, base),
                    serial_ref::sample_batch(spec, 10000, base));
  }
}

TEST_CASE("batch elements are addressed by index, not draw order") {
  // A shorter batch is a strict prefix of a longer one.
  const RngStream base(32, 0);
  const DistributionSpec spec = gamma_spec(2.0, 1.0);
  const std::vector<double> big = sample_batch(spec, 1000, base);
  const std::vector<double> small = sample_batch(spec, 100, base);
  for (std::size_t i = 0; i < small.size(); ++i) REQUIRE(small[i] == big[i]);
}

TEST_CASE("sample_sum_batch matches serial and the closure law") {
  const RngStream base(33, 0);
  const DistributionSpec a = gamma_spec(1.5, 1.0);
  const DistributionSpec b = gamma_spec(2.5, 1.0);
  const std::vector<double> par = sample_sum_batch(a, b, 20000, base);
  check_bit_equal(par, serial_ref::sample_sum_batch(a, b, 20000, base));

  double sum = 0.0;
  for (double x : par) sum += x;
  CHECK(sum / par.size() == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("sample_normalized_component matches serial") {
  ConditioningSet cond;
  cond.specs = {gamma_spec(2.0, 1.0), gamma_spec(3.0, 1.0)};
  const RngStream base(34, 0);
  check_bit_equal(sample_normalized_component(cond, 0, 5000, base),
                  serial_ref::sample_normalized_component(cond, 0, 5000, base));

  ConditioningSet stables;
  stables.specs = {levy_spec(1.0), stable_spec(3.0, 0.5)};
  check_bit_equal(sample_normalized_component(stables, 1, 5000, base),
                  serial_ref::sample_normalized_component(stables, 1, 5000, base));
}

TEST_CASE("components of one batch share draws across component indices") {
  ConditioningSet cond;
  cond.specs = {gamma_spec(2.0, 1.0), gamma_spec(3.0, 1.0)};
  const RngStream base(35, 0);
  const std::vector<double> c0 = sample_normalized_component(cond, 0, 2000, base);
  const std::vector<double> c1 = sample_normalized_component(cond, 1, 2000, base);
  for (std::size_t i = 0; i < c0.size(); ++i)
    REQUIRE(c0[i] + c1[i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sample_normalized_means matches serial within reduction slack") {
  ConditioningSet cond;
  cond.specs = {gamma_spec(0.5, 1.0), gamma_spec(1.0, 1.0), gamma_spec(2.0, 1.0)};
  const RngStream base(36, 0);
  const MeanVectorWithSem par = sample_normalized_means(cond, 50000, base);
  const MeanVectorWithSem ser = serial_ref::sample_normalized_means(cond, 50000, base);
  REQUIRE(par.mean.size() == ser.mean.size());
  for (std::size_t i = 0; i < par.mean.size(); ++i) {
    CHECK(par.mean[i] == doctest::Approx(ser.mean[i]).epsilon(1e-12));
    CHECK(par.sem[i] == doctest::Approx(ser.sem[i]).epsilon(1e-9));
    CHECK(par.sem[i] > 0.0);
  }

  // Sanity: the means sit where the shape ratios put them.
  CHECK(std::fabs(par.mean[0] - 0.5 / 3.5) < 3.0 * par.sem[0] + 1e-12);
  CHECK(std::fabs(par.mean[2] - 2.0 / 3.5) < 3.0 * par.sem[2] + 1e-12);
}

TEST_CASE("empirical_laplace matches serial within reduction slack") {
  const std::vector<double> xs =
      sample_batch(gamma_spec(2.0, 1.0), 100000, RngStream(37, 0));
  for (double s : {0.1, 1.0, 10.0}) {
    const MeanWithSem par = empirical_laplace(xs, s);
    const MeanWithSem ser = serial_ref::empirical_laplace(xs, s);
    CHECK(par.value == doctest::Approx(ser.value).epsilon(1e-13));
    CHECK(par.sem == doctest::Approx(ser.sem).epsilon(1e-10));
  }
}

TEST_CASE("numeric_convolve matches serial bit for bit") {
  const DensityTable a = tabulate_density(gamma_spec(1.0, 1.0), 0.0, 16.0, 2048);
  const DensityTable b = tabulate_density(gamma_spec(2.0, 1.0), 0.0, 16.0, 2048);
  const DensityTable par = numeric_convolve(a, b);
  const DensityTable ser = serial_ref::numeric_convolve(a, b);
  check_bit_equal(par.xs, ser.xs);
  check_bit_equal(par.fs, ser.fs);
}

TEST_CASE("batch kernels are reproducible across calls") {
  const RngStream base(38, 0);
  check_bit_equal(sample_batch(levy_spec(2.0), 4096, base),
                  sample_batch(levy_spec(2.0), 4096, base));
}

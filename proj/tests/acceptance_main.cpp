// Release gate: every acceptance criterion, one [PASS]/[FAIL] line each.
// argv[1] is the regular CLI binary, argv[2] the fault-injection build used
// by the final end-to-end check. Exit code is the number of failed criteria.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "treemass/analysis.hpp"
#include "treemass/batch.hpp"
#include "treemass/distributions.hpp"
#include "treemass/errors.hpp"
#include "treemass/growth.hpp"
#include "treemass/normalized_mass.hpp"
#include "treemass/quadrature.hpp"
#include "treemass/rng.hpp"
#include "treemass/tree.hpp"

using namespace treemass;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double erlang_cdf(int k, double x) {
  double term = 1.0;
  double acc = 1.0;
  for (int i = 1; i < k; ++i) {
    term *= x / i;
    acc += term;
  }
  return 1.0 - std::exp(-x) * acc;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---- criterion 1: sums of gamma masses follow the merged gamma law ----
bool gamma_closure(std::string& detail) {
  const double t0 = now_seconds();
  const std::size_t n = 100000;
  const std::vector<double> sums = sample_sum_batch(
      gamma_spec(1.5, 1.0), gamma_spec(2.5, 1.0), n, RngStream(1001, 0));
  const double d = ks_statistic(sums, [](double x) { return erlang_cdf(4, x); });
  const double elapsed = now_seconds() - t0;
  const double threshold = 1.36 / std::sqrt(static_cast<double>(n)) + 0.01;
  detail = "KS " + fmt(d) + " vs " + fmt(threshold) + ", " + fmt(elapsed) + " s";
  return d < threshold && elapsed < 5.0;
}

// ---- criterion 2: stable samplers reproduce exp(-s^nu) ----
bool stable_transform(std::string& detail) {
  const double t0 = now_seconds();
  const std::size_t n = 1000000;
  double worst_z = 0.0;
  std::uint64_t k = 0;
  for (const double nu : {0.3, 0.5, 0.8}) {
    const std::vector<double> xs =
        sample_batch(stable_spec(1.0, nu), n, RngStream(2001 + k++, 0));
    for (const double s : {0.1, 1.0, 10.0}) {
      const MeanWithSem est = empirical_laplace(xs, s);
      const double z = std::fabs(est.value - std::exp(-std::pow(s, nu))) / est.sem;
      worst_z = std::max(worst_z, z);
    }
  }
  const double elapsed = now_seconds() - t0;
  detail = "worst |z| " + fmt(worst_z) + " vs 3, " + fmt(elapsed) + " s";
  return worst_z <= 3.0 && elapsed < 30.0;
}

// ---- criterion 3: the two index-1/2 sampler routes agree ----
bool levy_stable_agreement(std::string& detail) {
  const std::size_t n = 100000;
  const std::vector<double> a = sample_batch(levy_spec(2.0), n, RngStream(3001, 0));
  const std::vector<double> b =
      sample_batch(stable_spec(2.0, 0.5), n, RngStream(3002, 0));
  const double d = ks_two_sample(a, b);
  const double threshold = 1.36 * std::sqrt(2.0 / static_cast<double>(n)) + 0.01;
  detail = "two-sample KS " + fmt(d) + " vs " + fmt(threshold);
  return d < threshold;
}

// ---- criterion 4: normalized-mass component means ----
bool dirichlet_mean_criterion(std::string& detail) {
  ConditioningSet cond;
  const double shapes[4] = {0.5, 1.0, 2.0, 4.0};
  for (double a : shapes) cond.specs.push_back(gamma_spec(a, 1.0));
  const MeanVectorWithSem m =
      sample_normalized_means(cond, 100000, RngStream(4001, 0));
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    worst = std::max(worst, std::fabs(m.mean[i] - shapes[i] / 7.5));
  detail = "worst mean deviation " + fmt(worst) + " vs 0.006";
  return worst <= 0.006;
}

double ks_against_closed_form(std::vector<double> samples,
                              const std::function<double(double)>& density,
                              double left_exponent) {
  std::sort(samples.begin(), samples.end());
  const std::vector<double> cdf =
      quad::cumulative_density(density, samples, left_exponent);
  return ks_from_cdf_values(cdf);
}

// ---- criterion 5: gamma-pair share follows the closed-form marginal ----
bool beta_marginal_criterion(std::string& detail) {
  ConditioningSet cond;
  cond.specs = {gamma_spec(2.0, 1.0), gamma_spec(3.0, 1.0)};
  const std::size_t n = 100000;
  std::vector<double> p1 =
      sample_normalized_component(cond, 0, n, RngStream(5001, 0));
  const double d = ks_against_closed_form(
      std::move(p1),
      [](double p) { return beta_marginal_density(p, 2.0, 5.0).value; }, 2.0);
  const double threshold = 1.36 / std::sqrt(static_cast<double>(n)) + 0.01;
  detail = "KS " + fmt(d) + " vs " + fmt(threshold);
  return d < threshold;
}

// ---- criterion 6: index-1/2 stable share follows its marginal ----
bool levy_marginal_criterion(std::string& detail) {
  const double exact = levy_marginal_density(0.5, 1.0, 4.0).value;
  const double want = 1.2 / 3.14159265358979323846;
  const double point_err = std::fabs(exact - want);

  ConditioningSet cond;
  cond.specs = {levy_spec(1.0), levy_spec(3.0)};
  const std::size_t n = 100000;
  std::vector<double> p1 =
      sample_normalized_component(cond, 0, n, RngStream(6001, 0));
  const double d = ks_against_closed_form(
      std::move(p1),
      [](double p) { return levy_marginal_density(p, 1.0, 4.0).value; }, 0.5);
  const double threshold = 1.36 / std::sqrt(static_cast<double>(n)) + 0.01;
  detail = "KS " + fmt(d) + " vs " + fmt(threshold) + ", pointwise error " +
           fmt(point_err);
  return d < threshold && point_err <= 1e-12;
}

// ---- criterion 7: quadrature marginal matches both closed forms ----
bool numeric_marginal_criterion(std::string& detail) {
  const double t0 = now_seconds();
  ConditioningSet g;
  g.specs = {gamma_spec(2.0, 1.0), gamma_spec(3.0, 1.0)};
  ConditioningSet l;
  l.specs = {levy_spec(1.0), levy_spec(1.0), levy_spec(2.0)};
  double worst = 0.0;
  for (const double p : {0.1, 0.5, 0.9}) {
    worst = std::max(worst, std::fabs(numeric_marginal_density(p, g, 0).value -
                                      beta_marginal_density(p, 2.0, 5.0).value));
    worst = std::max(worst, std::fabs(numeric_marginal_density(p, l, 1).value -
                                      levy_marginal_density(p, 1.0, 4.0).value));
  }
  const double elapsed = now_seconds() - t0;
  detail = "max deviation " + fmt(worst) + " vs 1e-06, " + fmt(elapsed) + " s";
  return worst < 1e-6 && elapsed < 10.0;
}

// ---- criterion 8: growth bookkeeping under every scheme ----
GrowthConfig scheme_config(Scheme scheme, std::uint64_t seed) {
  GrowthConfig cfg;
  cfg.scheme = scheme;
  cfg.eta = 1.0;
  cfg.poisson_rate = 2.0;
  cfg.steps = 5000;
  cfg.seed = seed;
  switch (scheme) {
    case Scheme::FreeMass:
    case Scheme::MeanAffine:
    case Scheme::CRP:
      cfg.beta = 1.0;
      break;
    case Scheme::RandomForest:
      cfg.beta = 2.0;
      cfg.delta = 1.0;
      break;
    case Scheme::MeanFitness:
      cfg.fitness_spec = gamma_spec(2.0, 1.0);
      break;
    default:
      break;
  }
  return cfg;
}

GrowResult run_scheme(const GrowthConfig& cfg) {
  try {
    return grow(cfg);
  } catch (const HaltedNoTargets& halted) {
    // Starvation is a legitimate outcome (degree-weighted schemes can never
    // leave a bare root); the partial result must still keep its books.
    return halted.partial;
  }
}

std::string exports_of(const GrowResult& res) {
  std::ostringstream out;
  res.forest.write_edge_tsv(out);
  write_step_jsonl(out, res.records);
  return out.str();
}

bool growth_accounting(std::string& detail) {
  const Scheme schemes[7] = {Scheme::LeafMass,   Scheme::FreeMass,
                             Scheme::MeanDegree, Scheme::MeanFitness,
                             Scheme::MeanAffine, Scheme::RandomForest,
                             Scheme::CRP};
  bool forest_root_growth_seen = false;
  for (const Scheme scheme : schemes) {
    for (std::uint64_t seed = 11; seed <= 15; ++seed) {
      const GrowthConfig cfg = scheme_config(scheme, seed);
      const GrowResult res = run_scheme(cfg);
      const Forest& f = res.forest;

      std::size_t parented = 0;
      std::size_t degree_sum = 0;
      for (const Vertex& v : f.vertices()) {
        if (v.parent) ++parented;
        degree_sum += f.in_degree(v.id);
      }
      if (parented != f.vertices().size() - f.roots().size() ||
          degree_sum != parented) {
        detail = scheme_name(scheme) + " seed " + std::to_string(seed) +
                 ": edge accounting broken";
        return false;
      }

      if (scheme == Scheme::LeafMass) {
        for (const StepRecord& rec : res.records) {
          for (const AttachmentChoice& c : rec.choices) {
            if (!c.target) {
              detail = "LeafMass planted a root";
              return false;
            }
            for (const VertexId child : f.cluster_members(*c.target)) {
              if (f.vertices()[child].birth_step < rec.step) {
                detail = "LeafMass seed " + std::to_string(seed) +
                         ": target was already deep at step start";
                return false;
              }
            }
          }
        }
      }

      if (scheme == Scheme::RandomForest && f.roots().size() > 1)
        forest_root_growth_seen = true;

      if (seed == 11) {
        const GrowResult again = run_scheme(cfg);
        if (exports_of(res) != exports_of(again)) {
          detail = scheme_name(scheme) + ": reruns are not byte-identical";
          return false;
        }
      }
    }
  }
  if (!forest_root_growth_seen) {
    detail = "RandomForest never planted a root in any sweep";
    return false;
  }
  detail = "7 schemes x 5 seeds, reruns byte-identical";
  return true;
}

// ---- criterion 9: affine mean weights drive selection frequencies ----
bool mean_affine_frequencies(std::string& detail) {
  GrowthConfig cfg;
  cfg.scheme = Scheme::MeanAffine;
  cfg.eta = 1.0;
  cfg.beta = 1.0;
  cfg.poisson_rate = 1.0;
  cfg.seed = 9001;

  // The affine weight vector for degrees (2,1,0) is (3,2,1)/6 exactly.
  const std::array<std::size_t, 3> degrees{2, 1, 0};
  const ProbVector w =
      attachment_weights_from(degrees, {}, Scheme::MeanAffine, cfg);
  const double expect[3] = {0.5, 1.0 / 3.0, 1.0 / 6.0};
  for (int i = 0; i < 3; ++i) {
    if (std::fabs(w[i] - expect[i]) > 1e-15) {
      detail = "weight vector off at entry " + std::to_string(i);
      return false;
    }
  }

  // No 3-vertex forest carries degrees (2,1,0): the degree sum would need 3
  // edges on 2 non-roots. The smallest forest containing them has a fourth,
  // degree-zero vertex; draws that land on it are discarded so the conditional
  // frequencies over the (2,1,0) triple are exactly (3,2,1)/6.
  Forest base = Forest::create();
  base.attach(0, 1);
  base.attach(0, 1);
  base.attach(1, 2);
  base.advance_to(2);

  const RngStream master(9002, 0);
  std::array<std::uint64_t, 3> hits{0, 0, 0};
  std::uint64_t kept = 0;
  const std::uint64_t target_draws = 100000;
  for (std::uint64_t i = 0; kept < target_draws && i < 3000000; ++i) {
    Forest copy = base;
    RngStream rng = master.child(0xa9, i);
    const StepRecord rec = mean_step(copy, cfg, rng);
    for (const AttachmentChoice& c : rec.choices) {
      if (!c.target || *c.target > 2) continue;
      if (kept == target_draws) break;
      ++hits[*c.target];
      ++kept;
    }
  }
  if (kept < target_draws) {
    detail = "draw budget exhausted";
    return false;
  }
  double worst_sigma = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double sem =
        std::sqrt(expect[i] * (1.0 - expect[i]) / static_cast<double>(kept));
    worst_sigma =
        std::max(worst_sigma,
                 std::fabs(hits[i] / static_cast<double>(kept) - expect[i]) / sem);
  }
  detail = "worst |z| " + fmt(worst_sigma) + " vs 3 over " +
           std::to_string(kept) + " draws";
  return worst_sigma <= 3.0;
}

// ---- criterion 10: the CLI validation gate, healthy and faulted ----
struct CliRun {
  int exit_code = -1;
  std::string output;
};

CliRun run_cli(const std::string& binary, const std::string& args) {
  const std::string cmd = binary + " " + args + " 2>&1";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// Returns check names carrying the given verdict, in table order.
std::vector<std::string> checks_with(const std::string& output,
                                     const std::string& verdict) {
  std::vector<std::string> names;
  std::istringstream in(output);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find(verdict) == std::string::npos) continue;
    const auto space = line.find(' ');
    if (space == std::string::npos || space == 0) continue;
    names.push_back(line.substr(0, space));
  }
  return names;
}

bool cli_validation_gate(const std::string& healthy, const std::string& faulty,
                         std::string& detail) {
  const CliRun ok = run_cli(healthy, "validate --seed 1");
  if (ok.exit_code != 0) {
    detail = "healthy build exited " + std::to_string(ok.exit_code);
    return false;
  }
  if (checks_with(ok.output, "PASS").size() != 6 ||
      !checks_with(ok.output, "FAIL").empty()) {
    detail = "healthy build did not report six passing checks";
    return false;
  }

  const CliRun bad = run_cli(faulty, "validate --seed 1");
  if (bad.exit_code != 3) {
    detail = "faulted build exited " + std::to_string(bad.exit_code) +
             ", expected 3";
    return false;
  }
  const std::vector<std::string> failed = checks_with(bad.output, "FAIL");
  if (failed.size() != 1 || failed[0] != "levy-marginal") {
    detail = "faulted build failed " + std::to_string(failed.size()) +
             " checks, expected exactly levy-marginal";
    return false;
  }
  detail = "healthy exit 0 with 6 passes; faulted exit 3 failing only levy-marginal";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s <cli-binary> <faulted-cli-binary>\n", argv[0]);
    return 64;
  }
  const std::string healthy = argv[1];
  const std::string faulty = argv[2];

  struct Criterion {
    int index;
    const char* label;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "gamma closure KS at N=1e5", gamma_closure},
      {2, "stable transform within 3 SE at N=1e6", stable_transform},
      {3, "two index-1/2 sampler routes agree by KS", levy_stable_agreement},
      {4, "normalized-mass component means", dirichlet_mean_criterion},
      {5, "gamma-pair share vs closed-form marginal", beta_marginal_criterion},
      {6, "stable-pair share vs closed-form marginal", levy_marginal_criterion},
      {7, "quadrature marginal vs closed forms", numeric_marginal_criterion},
      {8, "growth bookkeeping across schemes and seeds", growth_accounting},
      {9, "affine mean-scheme selection frequencies", mean_affine_frequencies},
      {10, "validation gate end to end", [&](std::string& d) {
         return cli_validation_gate(healthy, faulty, d);
       }},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    std::string detail;
    bool pass = false;
    try {
      pass = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", c.index,
                c.label, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  return failures;
}

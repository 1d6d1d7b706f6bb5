#include "treemass/growth.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <utility>

#include "json.hpp"
#include "treemass/errors.hpp"

namespace treemass {
namespace {

// Purpose tags for child streams. Step streams are keyed by step index, the
// birth-bound streams by vertex id, so every value is a pure function of the
// config and its address and never depends on draw order elsewhere.
constexpr std::uint64_t kStepTag = 0x73;
constexpr std::uint64_t kFitnessTag = 0x66;
constexpr std::uint64_t kMemberMassTag = 0x6d;
constexpr std::uint64_t kOffsetMassTag = 0x6f;

DistributionSpec mass_spec(const GrowthConfig& cfg, double shape) {
  if (cfg.family == MassFamily::Gamma) return gamma_spec(shape, 1.0);
  return stable_spec(shape, cfg.nu);
}

// Mass a vertex contributes to the cluster it sits in, frozen at birth.
double fixed_member_mass(const GrowthConfig& cfg, VertexId v) {
  RngStream stream = RngStream(cfg.seed, 0).child(kMemberMassTag, v);
  return sample(mass_spec(cfg, cfg.eta), stream);
}

// Free attachment's per-vertex offset share, frozen at birth.
double fixed_offset_mass(const GrowthConfig& cfg, VertexId v) {
  RngStream stream = RngStream(cfg.seed, 0).child(kOffsetMassTag, v);
  return sample(mass_spec(cfg, cfg.beta), stream);
}

std::vector<double> cumulative_weights(std::span<const double> weights) {
  std::vector<double> cum(weights.size());
  double run = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    run += weights[i];
    cum[i] = run;
  }
  return cum;
}

// Inverse-CDF pick with one uniform. Zero-weight cells have zero width and
// cannot be hit except through the end clamp, which walks back to the last
// positive cell.
std::size_t categorical_pick(std::span<const double> cum,
                             std::span<const double> weights, RngStream& rng) {
  const double x = rng.next_double() * cum.back();
  std::size_t i = static_cast<std::size_t>(
      std::upper_bound(cum.begin(), cum.end(), x) - cum.begin());
  if (i >= cum.size()) i = cum.size() - 1;
  while (i > 0 && weights[i] <= 0.0) --i;
  return i;
}

std::size_t uniform_index(std::size_t n, RngStream& rng) {
  const auto i = static_cast<std::size_t>(rng.next_double() * static_cast<double>(n));
  return std::min(i, n - 1);
}

StepRecord begin_step(const Forest& forest, const GrowthConfig& cfg,
                      RngStream& rng) {
  StepRecord rec;
  rec.step = forest.current_step() + 1;
  rec.arrivals = poisson_sample(cfg.poisson_rate, rng);
  return rec;
}

// Attaches every queued target (nullopt plants a root) with this step's birth
// stamp and advances the clock. All engines mutate the forest only here, so
// within a step the target set stays exactly as it was at step start.
void commit_step(Forest& forest, StepRecord& rec,
                 std::span<const std::optional<VertexId>> targets) {
  for (const std::optional<VertexId>& t : targets) {
    const VertexId id =
        t ? forest.attach(*t, rec.step) : forest.add_root(rec.step);
    rec.choices.push_back(AttachmentChoice{id, t});
  }
  forest.advance_to(rec.step);
}

void require_scheme(const GrowthConfig& cfg, Scheme scheme, const char* op) {
  if (cfg.scheme != scheme)
    throw InvalidInput(std::string(op) + " requires the " +
                       scheme_name(scheme) + " scheme");
}

bool is_mean_scheme(Scheme s) {
  return s == Scheme::MeanDegree || s == Scheme::MeanFitness ||
         s == Scheme::MeanAffine;
}

bool is_mass_scheme(Scheme s) {
  return s == Scheme::LeafMass || s == Scheme::FreeMass;
}

void check_positive(double v, const char* field) {
  if (!std::isfinite(v) || !(v > 0.0))
    throw InvalidSpec(std::string(field) + " must be positive");
}

void check_nonnegative(double v, const char* field) {
  if (!std::isfinite(v) || v < 0.0)
    throw InvalidSpec(std::string(field) + " must be nonnegative");
}

}  // namespace

std::string scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::LeafMass: return "LeafMass";
    case Scheme::FreeMass: return "FreeMass";
    case Scheme::MeanDegree: return "MeanDegree";
    case Scheme::MeanFitness: return "MeanFitness";
    case Scheme::MeanAffine: return "MeanAffine";
    case Scheme::RandomForest: return "RandomForest";
    case Scheme::CRP: return "CRP";
  }
  throw InvalidSpec("unknown scheme");
}

std::optional<Scheme> scheme_from_name(std::string_view name) {
  for (Scheme s : {Scheme::LeafMass, Scheme::FreeMass, Scheme::MeanDegree,
                   Scheme::MeanFitness, Scheme::MeanAffine,
                   Scheme::RandomForest, Scheme::CRP})
    if (name == scheme_name(s)) return s;
  return std::nullopt;
}

std::string family_name(MassFamily family) {
  return family == MassFamily::Gamma ? "Gamma" : "Stable";
}

std::optional<MassFamily> family_from_name(std::string_view name) {
  if (name == "Gamma") return MassFamily::Gamma;
  if (name == "Stable") return MassFamily::Stable;
  return std::nullopt;
}

void GrowthConfig::validate() const {
  check_positive(eta, "eta");
  check_nonnegative(beta, "beta");
  check_nonnegative(delta, "delta");
  check_positive(poisson_rate, "poisson_rate");
  if (family == MassFamily::Stable && !(nu > 0.0 && nu < 1.0))
    throw InvalidSpec("nu must lie in (0, 1) for the Stable family");
  if (scheme == Scheme::FreeMass && !(beta > 0.0))
    throw InvalidSpec("beta must be positive for the FreeMass scheme");
  if (scheme == Scheme::CRP && !(beta > 0.0))
    throw InvalidSpec("beta must be positive for the CRP scheme");
  if (scheme == Scheme::RandomForest && !(delta > 0.0 && delta < beta))
    throw InvalidSpec(
        "delta must satisfy 0 < delta < beta for the RandomForest scheme");
  if (scheme == Scheme::MeanFitness && !fitness_spec)
    throw InvalidSpec("fitness_spec is required for the MeanFitness scheme");
  if (fitness_spec && scheme != Scheme::MeanFitness)
    throw InvalidSpec("fitness_spec applies to the MeanFitness scheme only");
  if (resample_per_arrival && !is_mass_scheme(scheme))
    throw InvalidSpec("resample_per_arrival applies to the mass schemes only");
  if (fixed_vertex_mass && !is_mass_scheme(scheme))
    throw InvalidSpec("fixed_vertex_mass applies to the mass schemes only");
  if (resample_per_arrival && fixed_vertex_mass)
    throw InvalidSpec(
        "resample_per_arrival and fixed_vertex_mass are mutually exclusive");
}

void append_step_jsonl(std::ostream& out, const StepRecord& record) {
  nlohmann::ordered_json j;
  j["step"] = record.step;
  j["arrivals"] = record.arrivals;
  j["weights"] = record.weights;
  nlohmann::ordered_json choices = nlohmann::ordered_json::array();
  for (const AttachmentChoice& c : record.choices) {
    nlohmann::ordered_json cj;
    cj["vertex"] = c.vertex;
    if (c.target)
      cj["target"] = *c.target;
    else
      cj["target"] = nullptr;
    choices.push_back(std::move(cj));
  }
  j["choices"] = std::move(choices);
  out << j.dump() << '\n';
}

void write_step_jsonl(std::ostream& out, std::span<const StepRecord> records) {
  for (const StepRecord& r : records) append_step_jsonl(out, r);
}

double fitness_value(const GrowthConfig& cfg, VertexId vertex) {
  if (!cfg.fitness_spec)
    throw InvalidSpec("fitness_spec is required for the MeanFitness scheme");
  RngStream stream = RngStream(cfg.seed, 0).child(kFitnessTag, vertex);
  return sample(*cfg.fitness_spec, stream);
}

ProbVector attachment_weights_from(std::span<const std::size_t> degrees,
                                   std::span<const double> etas, Scheme scheme,
                                   const GrowthConfig& cfg) {
  if (degrees.empty())
    throw InvalidInput("attachment weights need at least one target");
  std::vector<double> w(degrees.size());
  switch (scheme) {
    case Scheme::MeanDegree:
      for (std::size_t i = 0; i < degrees.size(); ++i)
        w[i] = static_cast<double>(degrees[i]);
      break;
    case Scheme::MeanFitness:
      if (etas.size() != degrees.size())
        throw InvalidInput("fitness values must align with the degree vector");
      for (std::size_t i = 0; i < degrees.size(); ++i)
        w[i] = etas[i] * static_cast<double>(degrees[i]);
      break;
    case Scheme::MeanAffine:
      for (std::size_t i = 0; i < degrees.size(); ++i)
        w[i] = cfg.eta * static_cast<double>(degrees[i]) + cfg.beta;
      break;
    default:
      throw InvalidInput("attachment weights are defined for the mean schemes only");
  }
  double total = 0.0;
  for (double v : w) total += v;
  if (!(total > 0.0)) throw NoEligibleTarget("every attachment weight is zero");
  return ProbVector::normalized(std::move(w));
}

ProbVector attachment_weights(const Forest& forest, Scheme scheme,
                              const GrowthConfig& cfg) {
  const std::size_t n = forest.vertices().size();
  std::vector<std::size_t> degrees(n);
  for (std::size_t v = 0; v < n; ++v) degrees[v] = forest.in_degree(v);
  std::vector<double> etas;
  if (scheme == Scheme::MeanFitness) {
    etas.resize(n);
    for (std::size_t v = 0; v < n; ++v) etas[v] = fitness_value(cfg, v);
  }
  return attachment_weights_from(degrees, etas, scheme, cfg);
}

StepRecord leaf_step(Forest& forest, const GrowthConfig& cfg, RngStream& rng) {
  require_scheme(cfg, Scheme::LeafMass, "leaf_step");
  StepRecord rec = begin_step(forest, cfg, rng);
  std::vector<std::optional<VertexId>> targets;
  if (rec.arrivals > 0) {
    const std::vector<LeafCluster> clusters = eligible_leaf_clusters(forest);
    if (clusters.empty())
      throw NoEligibleTarget("every leaf cluster is at full capacity");

    ConditioningSet cond;
    ProbVector pv = [&] {
      if (cfg.fixed_vertex_mass) {
        std::vector<double> masses(clusters.size());
        for (std::size_t c = 0; c < clusters.size(); ++c) {
          if (clusters[c].owner) {
            double m = 0.0;
            for (VertexId v : forest.cluster_members(*clusters[c].owner))
              m += fixed_member_mass(cfg, v);
            masses[c] = m;
          } else {
            // Synthetic cluster: the still-leaf root is its only member.
            masses[c] = fixed_member_mass(cfg, clusters[c].leaves.front());
          }
        }
        return ProbVector::normalized(std::move(masses));
      }
      for (const LeafCluster& c : clusters) {
        const std::size_t k =
            c.owner ? forest.cluster_members(*c.owner).size() : 1;
        cond.specs.push_back(mass_spec(cfg, cfg.eta * static_cast<double>(k)));
      }
      return sample_normalized(cond, rng);
    }();
    rec.weights = pv.entries();
    std::vector<double> cum = cumulative_weights(pv.entries());
    for (std::uint64_t a = 0; a < rec.arrivals; ++a) {
      if (a > 0 && cfg.resample_per_arrival) {
        pv = sample_normalized(cond, rng);
        cum = cumulative_weights(pv.entries());
      }
      const std::size_t c = categorical_pick(cum, pv.entries(), rng);
      const std::vector<VertexId>& leaves = clusters[c].leaves;
      targets.emplace_back(leaves[uniform_index(leaves.size(), rng)]);
    }
  }
  commit_step(forest, rec, targets);
  return rec;
}

StepRecord free_step(Forest& forest, const GrowthConfig& cfg, RngStream& rng) {
  require_scheme(cfg, Scheme::FreeMass, "free_step");
  StepRecord rec = begin_step(forest, cfg, rng);
  std::vector<std::optional<VertexId>> targets;
  if (rec.arrivals > 0) {
    const std::size_t n = forest.vertices().size();
    ConditioningSet cond;
    ProbVector pv = [&] {
      if (cfg.fixed_vertex_mass) {
        std::vector<double> masses(n);
        for (std::size_t v = 0; v < n; ++v) {
          double m = fixed_offset_mass(cfg, v);
          for (VertexId c : forest.cluster_members(v))
            m += fixed_member_mass(cfg, c);
          masses[v] = m;
        }
        return ProbVector::normalized(std::move(masses));
      }
      for (std::size_t v = 0; v < n; ++v) {
        const double shape =
            cfg.eta * static_cast<double>(forest.in_degree(v)) + cfg.beta;
        cond.specs.push_back(mass_spec(cfg, shape));
      }
      return sample_normalized(cond, rng);
    }();
    rec.weights = pv.entries();
    std::vector<double> cum = cumulative_weights(pv.entries());
    for (std::uint64_t a = 0; a < rec.arrivals; ++a) {
      if (a > 0 && cfg.resample_per_arrival) {
        pv = sample_normalized(cond, rng);
        cum = cumulative_weights(pv.entries());
      }
      targets.emplace_back(categorical_pick(cum, pv.entries(), rng));
    }
  }
  commit_step(forest, rec, targets);
  return rec;
}

StepRecord mean_step(Forest& forest, const GrowthConfig& cfg, RngStream& rng) {
  if (!is_mean_scheme(cfg.scheme))
    throw InvalidInput("mean_step requires one of the mean schemes");
  StepRecord rec = begin_step(forest, cfg, rng);
  std::vector<std::optional<VertexId>> targets;
  if (rec.arrivals > 0) {
    const ProbVector w = attachment_weights(forest, cfg.scheme, cfg);
    rec.weights = w.entries();
    const std::vector<double> cum = cumulative_weights(w.entries());
    for (std::uint64_t a = 0; a < rec.arrivals; ++a)
      targets.emplace_back(categorical_pick(cum, w.entries(), rng));
  }
  commit_step(forest, rec, targets);
  return rec;
}

StepRecord forest_step(Forest& forest, const GrowthConfig& cfg, RngStream& rng) {
  require_scheme(cfg, Scheme::RandomForest, "forest_step");
  if (!(cfg.delta > 0.0 && cfg.delta < cfg.beta))
    throw InvalidInput("delta must satisfy 0 < delta < beta");
  StepRecord rec = begin_step(forest, cfg, rng);
  std::vector<std::optional<VertexId>> targets;
  if (rec.arrivals > 0) {
    const std::size_t n = forest.vertices().size();
    std::vector<double> w(n + 1);
    for (std::size_t v = 0; v < n; ++v)
      w[v] = cfg.eta * static_cast<double>(forest.in_degree(v)) + cfg.delta;
    w[n] = cfg.beta - cfg.delta;
    const ProbVector pv = ProbVector::normalized(std::move(w));
    rec.weights = pv.entries();
    const std::vector<double> cum = cumulative_weights(pv.entries());
    for (std::uint64_t a = 0; a < rec.arrivals; ++a) {
      const std::size_t i = categorical_pick(cum, pv.entries(), rng);
      if (i == n)
        targets.emplace_back(std::nullopt);
      else
        targets.emplace_back(i);
    }
  }
  commit_step(forest, rec, targets);
  return rec;
}

std::optional<std::size_t> crp_step(std::span<const std::uint64_t> tables,
                                    double beta, RngStream& rng) {
  if (!std::isfinite(beta) || !(beta > 0.0))
    throw InvalidInput("beta must be positive");
  double total = beta;
  for (std::uint64_t k : tables) total += static_cast<double>(k);
  const double x = rng.next_double() * total;
  double run = 0.0;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    run += static_cast<double>(tables[i]);
    if (x < run) return i;
  }
  return std::nullopt;
}

namespace {

// CRP embedded as a star forest: each root is a table whose occupancy is
// itself plus its direct children; joining seats the arrival under the root,
// a new table is a new root.
StepRecord crp_grow_step(Forest& forest, const GrowthConfig& cfg,
                         RngStream& rng) {
  StepRecord rec = begin_step(forest, cfg, rng);
  std::vector<std::optional<VertexId>> targets;
  if (rec.arrivals > 0) {
    const std::vector<VertexId> roots = forest.roots();
    std::vector<std::uint64_t> occupancy(roots.size());
    std::vector<double> w(roots.size() + 1);
    for (std::size_t i = 0; i < roots.size(); ++i) {
      occupancy[i] = 1 + forest.in_degree(roots[i]);
      w[i] = static_cast<double>(occupancy[i]);
    }
    w.back() = cfg.beta;
    rec.weights = ProbVector::normalized(std::move(w)).entries();
    for (std::uint64_t a = 0; a < rec.arrivals; ++a) {
      const std::optional<std::size_t> table = crp_step(occupancy, cfg.beta, rng);
      if (table)
        targets.emplace_back(roots[*table]);
      else
        targets.emplace_back(std::nullopt);
    }
  }
  commit_step(forest, rec, targets);
  return rec;
}

StepRecord run_step(Forest& forest, const GrowthConfig& cfg, RngStream& rng) {
  switch (cfg.scheme) {
    case Scheme::LeafMass: return leaf_step(forest, cfg, rng);
    case Scheme::FreeMass: return free_step(forest, cfg, rng);
    case Scheme::MeanDegree:
    case Scheme::MeanFitness:
    case Scheme::MeanAffine: return mean_step(forest, cfg, rng);
    case Scheme::RandomForest: return forest_step(forest, cfg, rng);
    case Scheme::CRP: return crp_grow_step(forest, cfg, rng);
  }
  throw InvalidSpec("unknown scheme");
}

}  // namespace

GrowResult grow(const GrowthConfig& cfg) {
  cfg.validate();
  GrowResult res{Forest::create(), {}};
  RngStream master(cfg.seed, 0);
  for (std::uint64_t s = 1; s <= cfg.steps; ++s) {
    RngStream step_rng = master.child(kStepTag, s);
    try {
      res.records.push_back(run_step(res.forest, cfg, step_rng));
    } catch (const NoEligibleTarget& e) {
      throw HaltedNoTargets(
          "growth halted at step " + std::to_string(s) + ": " + e.what(),
          std::move(res));
    }
  }
  return res;
}

}  // namespace treemass

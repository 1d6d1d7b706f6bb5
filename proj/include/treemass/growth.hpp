#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "treemass/distributions.hpp"
#include "treemass/normalized_mass.hpp"
#include "treemass/rng.hpp"
#include "treemass/tree.hpp"

namespace treemass {

// How arrivals pick their targets. The two mass schemes sample a normalized
// mass vector each step; the mean schemes use its expectation directly;
// RandomForest splits the affine weight into attachment and root creation;
// CRP is the table-occupancy process embedded as a star forest.
enum class Scheme {
  LeafMass,
  FreeMass,
  MeanDegree,
  MeanFitness,
  MeanAffine,
  RandomForest,
  CRP,
};

// Conditioning family for the mass schemes: gamma at rate 1, or stable at a
// common index nu.
enum class MassFamily { Gamma, Stable };

std::string scheme_name(Scheme scheme);
std::optional<Scheme> scheme_from_name(std::string_view name);
std::string family_name(MassFamily family);
std::optional<MassFamily> family_from_name(std::string_view name);

struct GrowthConfig {
  Scheme scheme = Scheme::LeafMass;
  double eta = 1.0;    // per-vertex shape
  double beta = 0.0;   // free/affine offset, new-table weight
  double delta = 0.0;  // RandomForest attachment share, 0 < delta < beta
  MassFamily family = MassFamily::Gamma;
  double nu = 0.5;  // stability index when family == Stable
  std::optional<DistributionSpec> fitness_spec;  // MeanFitness only
  double poisson_rate = 1.0;
  std::uint64_t steps = 0;
  std::uint64_t seed = 0;

  // Mass schemes only. Default: one shared sample per step, vertex masses
  // redrawn every step. fixed_vertex_mass freezes per-vertex masses at birth
  // instead (an extension; weights then evolve deterministically), and is
  // incompatible with resample_per_arrival.
  bool resample_per_arrival = false;
  bool fixed_vertex_mass = false;

  // InvalidSpec naming the offending field.
  void validate() const;
};

struct AttachmentChoice {
  VertexId vertex;                  // the arrival
  std::optional<VertexId> target;   // absent: planted a new root / new table
};

// Audit of one time step. weights is the probability vector the arrivals
// drew from (the sampled normalized masses, the mean weights, or the
// split/occupancy probabilities with the creation entry last); empty when
// the step had no arrivals. With resample_per_arrival the first sample is
// recorded.
struct StepRecord {
  std::uint64_t step = 0;
  std::uint64_t arrivals = 0;
  std::vector<double> weights;
  std::vector<AttachmentChoice> choices;  // |choices| == arrivals
};

// One JSON object per line, fields in fixed order:
//   {"step":..,"arrivals":..,"weights":[..],"choices":[{"vertex":..,"target":..},..]}
// target is null for a new root / new table.
void append_step_jsonl(std::ostream& out, const StepRecord& record);
void write_step_jsonl(std::ostream& out, std::span<const StepRecord> records);

// Mean-scheme weight kernel over an explicit degree vector, index-aligned
// with `degrees`. etas supplies the per-vertex fitness values and is only
// read for MeanFitness. Throws NoEligibleTarget when every weight is zero
// (e.g. MeanDegree with no deep vertex).
ProbVector attachment_weights_from(std::span<const std::size_t> degrees,
                                   std::span<const double> etas, Scheme scheme,
                                   const GrowthConfig& cfg);

// Same weights over a live forest, indexed by vertex id. MeanFitness values
// come from the id-keyed fitness stream (deterministic per config and id).
ProbVector attachment_weights(const Forest& forest, Scheme scheme,
                              const GrowthConfig& cfg);

// Fitness value of one vertex under cfg.fitness_spec: a pure function of
// (cfg.seed, vertex id), equivalent to drawing once at birth and caching.
double fitness_value(const GrowthConfig& cfg, VertexId vertex);

// One time step of each scheme. Each draws arrivals ~ Poisson(rate), fixes
// the target set as of step start, commits all attachments at step end, and
// advances the forest clock by one even when arrivals == 0. Within a step no
// arrival can target a vertex created in that step.
//
// leaf_step: targets are the eligible leaf clusters, weighted by a normalized
// mass draw with per-cluster shape eta * |cluster| (virtual root cluster:
// k = 1); the arrival then picks a leaf uniformly inside the chosen cluster.
// Throws NoEligibleTarget when arrivals land while every cluster is at full
// capacity.
StepRecord leaf_step(Forest& forest, const GrowthConfig& cfg, RngStream& rng);

// free_step: every vertex is a target with shape eta * in_degree + beta; any
// depth, never at capacity.
StepRecord free_step(Forest& forest, const GrowthConfig& cfg, RngStream& rng);

// mean_step: arrivals select independently from attachment_weights; no mass
// sampling.
StepRecord mean_step(Forest& forest, const GrowthConfig& cfg, RngStream& rng);

// forest_step: per arrival, attach to vertex i with probability proportional
// to eta * k_i + delta, or plant a new root with probability proportional to
// beta - delta. Requires 0 < delta < beta (InvalidInput otherwise).
StepRecord forest_step(Forest& forest, const GrowthConfig& cfg, RngStream& rng);

// One seating choice: existing table i with probability k_i / (sum k + beta),
// a new table (nullopt) with probability beta / (sum k + beta).
std::optional<std::size_t> crp_step(std::span<const std::uint64_t> tables,
                                    double beta, RngStream& rng);

struct GrowResult {
  Forest forest;
  std::vector<StepRecord> records;
};

// Raised by grow() when a step's arrivals find no eligible target; carries
// everything grown up to (not including) the halted step.
class HaltedNoTargets : public std::runtime_error {
 public:
  HaltedNoTargets(const std::string& what, GrowResult partial_result)
      : std::runtime_error(what), partial(std::move(partial_result)) {}

  GrowResult partial;
};

// Runs cfg.steps steps of the configured scheme from a fresh single-root
// forest. Deterministic in cfg.seed: same config, same result, bit for bit.
GrowResult grow(const GrowthConfig& cfg);

}  // namespace treemass

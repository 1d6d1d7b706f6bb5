#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "treemass/analysis.hpp"
#include "treemass/batch.hpp"
#include "treemass/distributions.hpp"
#include "treemass/errors.hpp"
#include "treemass/growth.hpp"
#include "treemass/normalized_mass.hpp"
#include "treemass/rng.hpp"
#include "treemass/tree.hpp"

namespace {

// Divergent densities are tabulated on grids clipped away from the endpoint
// by this margin (absolute on [0,1], relative to max-x on the positive axis).
constexpr double kEpsilon = 1e-6;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    g[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  g.front() = lo;
  g.back() = hi;
  return g;
}

treemass::DistributionSpec spec_from_json(const nlohmann::json& j,
                                          const std::string& context) {
  if (!j.is_object())
    throw treemass::InvalidSpec(context + " must be an object");
  static const std::set<std::string> known = {"family", "alpha", "lambda", "nu"};
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      throw treemass::InvalidSpec("unknown " + context + " key: " + item.key());
  const std::string family = j.at("family").get<std::string>();
  if (family == "gamma")
    return treemass::gamma_spec(j.at("alpha").get<double>(),
                                j.value("lambda", 1.0));
  if (family == "levy") return treemass::levy_spec(j.at("alpha").get<double>());
  if (family == "stable")
    return treemass::stable_spec(j.at("alpha").get<double>(),
                                 j.at("nu").get<double>());
  throw treemass::InvalidSpec("unknown " + context + " family: " + family);
}

treemass::GrowthConfig growth_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw treemass::InvalidSpec("config must be a JSON object");
  static const std::set<std::string> known = {
      "scheme",       "eta",  "beta",          "delta",
      "family",       "nu",   "fitness",       "poisson_rate",
      "steps",        "seed", "resample_per_arrival", "fixed_vertex_mass"};
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      throw treemass::InvalidSpec("unknown config key: " + item.key());
  treemass::GrowthConfig cfg;
  if (j.contains("scheme")) {
    const std::string name = j.at("scheme").get<std::string>();
    const auto s = treemass::scheme_from_name(name);
    if (!s) throw treemass::InvalidSpec("unknown scheme: " + name);
    cfg.scheme = *s;
  }
  if (j.contains("eta")) cfg.eta = j.at("eta").get<double>();
  if (j.contains("beta")) cfg.beta = j.at("beta").get<double>();
  if (j.contains("delta")) cfg.delta = j.at("delta").get<double>();
  if (j.contains("family")) {
    const std::string name = j.at("family").get<std::string>();
    const auto f = treemass::family_from_name(name);
    if (!f) throw treemass::InvalidSpec("unknown family: " + name);
    cfg.family = *f;
  }
  if (j.contains("nu")) cfg.nu = j.at("nu").get<double>();
  if (j.contains("fitness"))
    cfg.fitness_spec = spec_from_json(j.at("fitness"), "fitness");
  if (j.contains("poisson_rate")) cfg.poisson_rate = j.at("poisson_rate").get<double>();
  if (j.contains("steps")) cfg.steps = j.at("steps").get<std::uint64_t>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("resample_per_arrival"))
    cfg.resample_per_arrival = j.at("resample_per_arrival").get<bool>();
  if (j.contains("fixed_vertex_mass"))
    cfg.fixed_vertex_mass = j.at("fixed_vertex_mass").get<bool>();
  return cfg;
}

treemass::GrowthConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw treemass::InvalidSpec("cannot read config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw treemass::InvalidSpec(std::string("config parse error: ") + e.what());
  }
  return growth_config_from_json(j);
}

struct GlobalArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir;
  bool out_given = false;
  std::string format;
  bool format_given = false;
};

std::uint64_t require_seed(const GlobalArgs& g) {
  if (!g.seed_given)
    throw treemass::InvalidSpec("--seed is required (reproducibility is mandatory)");
  return g.seed;
}

std::filesystem::path prepare_out_dir(const GlobalArgs& g) {
  const std::filesystem::path dir = g.out_given ? g.out_dir : ".";
  std::filesystem::create_directories(dir);
  return dir;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw treemass::InvalidSpec("cannot write " + p.string());
  return out;
}

// ----- grow

struct GrowOverrides {
  std::string scheme;
  double eta = 0;
  double beta = 0;
  double delta = 0;
  std::string family;
  double nu = 0;
  double rate = 0;
  std::uint64_t steps = 0;
  CLI::Option* o_scheme = nullptr;
  CLI::Option* o_eta = nullptr;
  CLI::Option* o_beta = nullptr;
  CLI::Option* o_delta = nullptr;
  CLI::Option* o_family = nullptr;
  CLI::Option* o_nu = nullptr;
  CLI::Option* o_rate = nullptr;
  CLI::Option* o_steps = nullptr;
  CLI::Option* o_resample = nullptr;
  CLI::Option* o_fixed = nullptr;
};

int run_grow(const GlobalArgs& g, const GrowOverrides& ov) {
  treemass::GrowthConfig cfg;
  if (!g.config_path.empty()) cfg = load_config(g.config_path);
  if (ov.o_scheme->count()) {
    const auto s = treemass::scheme_from_name(ov.scheme);
    if (!s) throw treemass::InvalidSpec("unknown scheme: " + ov.scheme);
    cfg.scheme = *s;
  }
  if (ov.o_eta->count()) cfg.eta = ov.eta;
  if (ov.o_beta->count()) cfg.beta = ov.beta;
  if (ov.o_delta->count()) cfg.delta = ov.delta;
  if (ov.o_family->count()) {
    const auto f = treemass::family_from_name(ov.family);
    if (!f) throw treemass::InvalidSpec("unknown family: " + ov.family);
    cfg.family = *f;
  }
  if (ov.o_nu->count()) cfg.nu = ov.nu;
  if (ov.o_rate->count()) cfg.poisson_rate = ov.rate;
  if (ov.o_steps->count()) cfg.steps = ov.steps;
  if (ov.o_resample->count()) cfg.resample_per_arrival = true;
  if (ov.o_fixed->count()) cfg.fixed_vertex_mass = true;
  cfg.seed = require_seed(g);
  cfg.validate();

  bool want_dot = false;
  if (g.format_given) {
    if (g.format == "dot")
      want_dot = true;
    else if (g.format != "tsv")
      throw treemass::InvalidSpec("grow supports --format tsv or dot");
  }

  treemass::GrowResult res{treemass::Forest::create(), {}};
  bool halted = false;
  std::string halt_message;
  try {
    res = treemass::grow(cfg);
  } catch (treemass::HaltedNoTargets& h) {
    res = std::move(h.partial);
    halted = true;
    halt_message = h.what();
  }

  const std::filesystem::path dir = prepare_out_dir(g);
  {
    std::ofstream out = open_out(dir / "edges.tsv");
    res.forest.write_edge_tsv(out);
  }
  {
    std::ofstream out = open_out(dir / "steps.jsonl");
    treemass::write_step_jsonl(out, res.records);
  }
  {
    const treemass::DegreeHistogram hist = treemass::degree_histogram(res.forest);
    nlohmann::ordered_json stats;
    stats["vertices"] = hist.total_vertices;
    stats["edges"] = hist.total_edges;
    stats["roots"] = res.forest.roots().size();
    stats["steps_completed"] = res.records.size();
    stats["halted"] = halted;
    nlohmann::ordered_json counts;
    for (const auto& [degree, count] : hist.counts)
      counts[std::to_string(degree)] = count;
    stats["degree_histogram"] = std::move(counts);
    std::ofstream out = open_out(dir / "stats.json");
    out << stats.dump(2) << '\n';
  }
  if (want_dot) {
    std::ofstream out = open_out(dir / "forest.dot");
    res.forest.write_dot(out);
  }
  if (halted) {
    std::cerr << halt_message << '\n';
    return 2;
  }
  return 0;
}

// ----- density

void write_csv_rows(std::ostream& out, const char* x_name,
                    const std::vector<double>& xs,
                    const std::vector<double>& fs,
                    const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << x_name << ",density\n";
  for (std::size_t i = 0; i < xs.size(); ++i)
    out << fmt(xs[i]) << ',' << fmt(fs[i]) << '\n';
}

struct DensityArgs {
  double alpha = 0;
  double lambda = 1.0;
  double alpha_i = 0;
  double alpha_total = 0;
  std::vector<double> alphas;
  std::size_t index = 0;
  int points = 101;
  double max_x = 0;
};

int write_density_csv(const GlobalArgs& g, const std::string& kind,
                      const DensityArgs& a) {
  if (a.points < 2) throw treemass::InvalidSpec("points must be at least 2");
  std::vector<double> xs;
  std::vector<double> fs;
  std::string comment;
  const char* x_name = "p";

  if (kind == "gamma" || kind == "levy") {
    x_name = "x";
    if (!(a.max_x > 0)) throw treemass::InvalidSpec("max-x must be positive");
    const treemass::DistributionSpec spec =
        kind == "gamma" ? treemass::gamma_spec(a.alpha, a.lambda)
                        : treemass::levy_spec(a.alpha);
    xs = linspace(0.0, a.max_x, a.points);
    if (treemass::density(spec, 0.0).infinite) {
      xs.front() = kEpsilon * a.max_x;
      comment = "divergent left endpoint clipped to x = " + fmt(xs.front());
    }
    fs.reserve(xs.size());
    for (double x : xs) fs.push_back(treemass::density(spec, x).value);
  } else if (kind == "beta-marginal" || kind == "levy-marginal") {
    const bool levy = kind == "levy-marginal";
    if (!(a.alpha_i > 0)) throw treemass::InvalidSpec("alpha-i must be positive");
    if (!(a.alpha_total > a.alpha_i))
      throw treemass::InvalidSpec("alpha-total must exceed alpha-i");
    const bool clip_left = levy || a.alpha_i < 1.0;
    const bool clip_right = levy || (a.alpha_total - a.alpha_i) < 1.0;
    xs = linspace(0.0, 1.0, a.points);
    if (clip_left) xs.front() = kEpsilon;
    if (clip_right) xs.back() = 1.0 - kEpsilon;
    if (clip_left || clip_right)
      comment = "divergent endpoints clipped to [" + fmt(xs.front()) + ", " +
                fmt(xs.back()) + "]";
    fs.reserve(xs.size());
    for (double p : xs)
      fs.push_back(levy
                       ? treemass::levy_marginal_density(p, a.alpha_i, a.alpha_total).value
                       : treemass::beta_marginal_density(p, a.alpha_i, a.alpha_total).value);
  } else if (kind == "dirichlet-slice") {
    // Slice through the simplex: component `index` runs over t while the
    // others keep their mean proportions, p_j = (1-t) alpha_j / sum_rest.
    if (a.alphas.size() < 2)
      throw treemass::InvalidSpec("alphas must list at least 2 shapes");
    if (a.index >= a.alphas.size())
      throw treemass::InvalidSpec("index must address one of the alphas");
    double rest = 0.0;
    for (std::size_t j = 0; j < a.alphas.size(); ++j) {
      if (!(a.alphas[j] > 0))
        throw treemass::InvalidSpec("alphas must be positive");
      if (j != a.index) rest += a.alphas[j];
    }
    bool clip_left = a.alphas[a.index] < 1.0;
    bool clip_right = false;
    for (std::size_t j = 0; j < a.alphas.size(); ++j)
      if (j != a.index && a.alphas[j] < 1.0) clip_right = true;
    xs = linspace(0.0, 1.0, a.points);
    if (clip_left) xs.front() = kEpsilon;
    if (clip_right) xs.back() = 1.0 - kEpsilon;
    if (clip_left || clip_right)
      comment = "divergent endpoints clipped to [" + fmt(xs.front()) + ", " +
                fmt(xs.back()) + "]";
    fs.reserve(xs.size());
    for (double t : xs) {
      std::vector<double> p(a.alphas.size());
      for (std::size_t j = 0; j < a.alphas.size(); ++j)
        p[j] = j == a.index ? t : (1.0 - t) * a.alphas[j] / rest;
      fs.push_back(
          treemass::dirichlet_density(treemass::ProbVector(std::move(p)), a.alphas)
              .value);
    }
  } else {
    throw treemass::InvalidSpec("unknown density kind: " + kind);
  }

  if (g.format_given && g.format != "csv")
    throw treemass::InvalidSpec("density emits CSV only");
  if (g.out_given) {
    const std::filesystem::path dir = prepare_out_dir(g);
    std::ofstream out = open_out(dir / "density.csv");
    write_csv_rows(out, x_name, xs, fs, comment);
  } else {
    write_csv_rows(std::cout, x_name, xs, fs, comment);
  }
  return 0;
}

// ----- sample

struct SampleArgs {
  std::string family;
  double alpha = 0;
  double lambda = 1.0;
  double nu = 0.5;
  std::vector<double> alphas;
  std::uint64_t count = 0;
};

int run_sample_dist(const GlobalArgs& g, const SampleArgs& a) {
  if (a.count == 0) throw treemass::InvalidSpec("count must be positive");
  treemass::DistributionSpec spec = treemass::gamma_spec(1.0, 1.0);
  if (a.family == "gamma")
    spec = treemass::gamma_spec(a.alpha, a.lambda);
  else if (a.family == "levy")
    spec = treemass::levy_spec(a.alpha);
  else if (a.family == "stable")
    spec = treemass::stable_spec(a.alpha, a.nu);
  else
    throw treemass::InvalidSpec("family must be gamma, levy, or stable");
  const treemass::RngStream base(require_seed(g), 0);
  const std::vector<double> xs = treemass::sample_batch(spec, a.count, base);

  auto write = [&](std::ostream& out) {
    out << "x\n";
    for (double x : xs) out << fmt(x) << '\n';
  };
  if (g.out_given) {
    std::ofstream out = open_out(prepare_out_dir(g) / "samples.csv");
    write(out);
  } else {
    write(std::cout);
  }
  return 0;
}

int run_sample_normalized(const GlobalArgs& g, const SampleArgs& a) {
  if (a.count == 0) throw treemass::InvalidSpec("count must be positive");
  if (a.alphas.empty()) throw treemass::InvalidSpec("alphas must be nonempty");
  treemass::ConditioningSet cond;
  for (double alpha : a.alphas) {
    if (a.family == "gamma")
      cond.specs.push_back(treemass::gamma_spec(alpha, 1.0));
    else if (a.family == "stable")
      cond.specs.push_back(treemass::stable_spec(alpha, a.nu));
    else
      throw treemass::InvalidSpec("family must be gamma or stable");
  }
  treemass::RngStream rng(require_seed(g), 0);

  auto write = [&](std::ostream& out) {
    for (std::size_t i = 0; i < cond.specs.size(); ++i)
      out << (i ? "," : "") << 'p' << i + 1;
    out << '\n';
    for (std::uint64_t row = 0; row < a.count; ++row) {
      const treemass::ProbVector p = treemass::sample_normalized(cond, rng);
      for (std::size_t i = 0; i < p.size(); ++i)
        out << (i ? "," : "") << fmt(p[i]);
      out << '\n';
    }
  };
  if (g.out_given) {
    std::ofstream out = open_out(prepare_out_dir(g) / "samples.csv");
    write(out);
  } else {
    write(std::cout);
  }
  return 0;
}

// ----- validate

int run_validate(const GlobalArgs& g, std::uint64_t n_samples) {
  treemass::ValidationConfig cfg;
  cfg.n_samples = n_samples;
  cfg.validate();
  treemass::RngStream rng(require_seed(g), 0);
  const std::vector<treemass::ValidationReport> reports =
      treemass::validate_suite(cfg, rng);
  if (g.format_given && g.format == "json")
    treemass::write_reports_json(std::cout, reports);
  else
    treemass::write_reports_table(std::cout, reports);
  for (const treemass::ValidationReport& r : reports)
    if (!r.passed) return 3;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cluster-mass random tree and forest growth toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs g;
  app.add_option("--config", g.config_path, "JSON config file");
  CLI::Option* o_seed = app.add_option("--seed", g.seed, "RNG seed (required for randomized commands)");
  CLI::Option* o_out = app.add_option("--out", g.out_dir, "output directory");
  CLI::Option* o_format =
      app.add_option("--format", g.format, "output format: tsv, dot, json, csv")
          ->check(CLI::IsMember({"tsv", "dot", "json", "csv"}));

  // grow
  CLI::App* grow_cmd = app.add_subcommand("grow", "grow a forest and export it");
  grow_cmd->fallthrough();
  GrowOverrides ov;
  ov.o_scheme = grow_cmd->add_option("--scheme", ov.scheme, "attachment scheme");
  ov.o_eta = grow_cmd->add_option("--eta", ov.eta, "per-vertex shape");
  ov.o_beta = grow_cmd->add_option("--beta", ov.beta, "offset / new-table weight");
  ov.o_delta = grow_cmd->add_option("--delta", ov.delta, "attachment share");
  ov.o_family = grow_cmd->add_option("--family", ov.family, "Gamma or Stable");
  ov.o_nu = grow_cmd->add_option("--nu", ov.nu, "stability index");
  ov.o_rate = grow_cmd->add_option("--rate", ov.rate, "Poisson arrival rate");
  ov.o_steps = grow_cmd->add_option("--steps", ov.steps, "number of time steps");
  ov.o_resample = grow_cmd->add_flag("--resample-per-arrival",
                                     "fresh mass sample per arrival");
  ov.o_fixed = grow_cmd->add_flag("--fixed-vertex-mass",
                                  "freeze per-vertex masses at birth");

  // density
  CLI::App* density_cmd =
      app.add_subcommand("density", "tabulate a closed-form density as CSV");
  density_cmd->fallthrough();
  density_cmd->require_subcommand(1);
  DensityArgs da;
  std::vector<std::pair<std::string, CLI::App*>> density_kinds;
  for (const char* kind :
       {"gamma", "levy", "beta-marginal", "levy-marginal", "dirichlet-slice"}) {
    CLI::App* sub = density_cmd->add_subcommand(kind, "");
    sub->fallthrough();
    density_kinds.emplace_back(kind, sub);
  }
  for (auto& [kind, sub] : density_kinds) {
    sub->add_option("--points", da.points, "grid points");
    if (kind == "gamma") {
      sub->add_option("--alpha", da.alpha, "shape")->required();
      sub->add_option("--lambda", da.lambda, "decay rate");
      sub->add_option("--max-x", da.max_x, "grid upper end")->required();
    } else if (kind == "levy") {
      sub->add_option("--alpha", da.alpha, "scale")->required();
      sub->add_option("--max-x", da.max_x, "grid upper end")->required();
    } else if (kind == "dirichlet-slice") {
      sub->add_option("--alphas", da.alphas, "shape list")
          ->required()
          ->delimiter(',');
      sub->add_option("--index", da.index, "component that runs over the grid");
    } else {
      sub->add_option("--alpha-i", da.alpha_i, "component shape/scale")->required();
      sub->add_option("--alpha-total", da.alpha_total, "total shape/scale")
          ->required();
    }
  }

  // sample
  CLI::App* sample_cmd = app.add_subcommand("sample", "draw reproducible samples");
  sample_cmd->fallthrough();
  sample_cmd->require_subcommand(1);
  SampleArgs sa;
  CLI::App* sample_dist = sample_cmd->add_subcommand("dist", "raw variates");
  sample_dist->fallthrough();
  sample_dist->add_option("--family", sa.family, "gamma, levy, or stable")->required();
  sample_dist->add_option("--alpha", sa.alpha, "shape/scale")->required();
  sample_dist->add_option("--lambda", sa.lambda, "gamma decay rate");
  sample_dist->add_option("--nu", sa.nu, "stable index");
  sample_dist->add_option("--count", sa.count, "sample count")->required();
  CLI::App* sample_norm =
      sample_cmd->add_subcommand("normalized", "normalized mass vectors");
  sample_norm->fallthrough();
  sample_norm->add_option("--family", sa.family, "gamma or stable")->required();
  sample_norm->add_option("--alphas", sa.alphas, "per-component shapes/scales")
      ->required()
      ->delimiter(',');
  sample_norm->add_option("--nu", sa.nu, "stable index");
  sample_norm->add_option("--count", sa.count, "row count")->required();

  // validate
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "run the statistical check battery");
  validate_cmd->fallthrough();
  std::uint64_t n_samples = 100000;
  validate_cmd->add_option("--n-samples", n_samples, "samples per check")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  g.seed_given = o_seed->count() > 0;
  g.out_given = o_out->count() > 0;
  g.format_given = o_format->count() > 0;

  try {
    if (grow_cmd->parsed()) return run_grow(g, ov);
    if (density_cmd->parsed()) {
      for (auto& [kind, sub] : density_kinds)
        if (sub->parsed()) return write_density_csv(g, kind, da);
      return 1;
    }
    if (sample_cmd->parsed()) {
      if (sample_dist->parsed()) return run_sample_dist(g, sa);
      return run_sample_normalized(g, sa);
    }
    if (validate_cmd->parsed()) return run_validate(g, n_samples);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

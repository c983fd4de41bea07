// genbound: command-line front end for chain analysis, complexity estimates,
// generalization bounds, reductions and Monte Carlo verification.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "genbound/analysis.hpp"
#include "genbound/bounds.hpp"
#include "genbound/chain.hpp"
#include "genbound/deepnet.hpp"
#include "genbound/empirical.hpp"
#include "genbound/error.hpp"
#include "genbound/io.hpp"
#include "genbound/random.hpp"
#include "genbound/reduce.hpp"
#include "genbound/verify.hpp"

namespace fs = std::filesystem;
using namespace genbound;
using io::json;
using io::num;
using io::nums;

namespace {

struct Global {
  std::string seed_text;
  std::string format = "text";
  std::string out;
  std::size_t replicas = 10000;
  unsigned workers = 1;
  std::uint64_t seed = kDefaultSeed;
};

/// Independent key for one consumer of the master seed.
std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) { return SplitMix64::stream(seed, tag)(); }

enum SeedTag : std::uint64_t { kTagComplexity = 1, kTagPrior = 2, kTagNoise = 3 };

std::uint64_t parse_seed(const std::string& text, const std::string& field) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used, 0);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidInput, "cannot read seed \"" + text + "\"", field);
}

// ------------------------------------------------------------ inputs

struct ChainOpts {
  std::string chain;
  std::string cls;
  std::string trajectory;
  std::size_t n = 0;
  double t = 1.0;
  std::string guard = "guarded";
  std::string convention = "pi-weighted";
  bool stationary_start = false;
};

void add_chain(CLI::App* c, ChainOpts& o, bool with_class = true) {
  c->add_option("--chain", o.chain, "chain file")->required();
  if (with_class) c->add_option("--class", o.cls, "function-class file")->required();
  c->add_option("--guard", o.guard, "tau_min mode")->check(CLI::IsMember({"guarded", "literal"}));
  c->add_option("--convention", o.convention, "chi-divergence norm")->check(CLI::IsMember({"pi-weighted", "unweighted"}));
}

void add_sample(CLI::App* c, ChainOpts& o) {
  c->add_option("--n", o.n, "sample size");
  c->add_option("--trajectory", o.trajectory, "trajectory file {\"indices\": [...]} instead of sampling");
  c->add_option("--t", o.t, "confidence parameter t");
}

AnalysisOptions analysis_options(const ChainOpts& o) {
  AnalysisOptions a;
  a.guard = o.guard == "literal" ? GuardMode::Literal : GuardMode::Guarded;
  a.convention = o.convention == "unweighted" ? NormConvention::Unweighted : NormConvention::PiWeighted;
  return a;
}

io::ChainFile load_chain(const std::string& path) { return io::parse_chain(io::load_json(path, "chain")); }
FunctionClass load_class(const std::string& path) { return io::parse_class(io::load_json(path, "class")); }

Trajectory get_trajectory(const ChainOpts& o, const ChainSpec& spec, std::uint64_t seed) {
  if (o.trajectory.empty()) {
    require(o.n >= 1, ErrorCode::InvalidInput, "--n is required without --trajectory", "n");
    return sample_trajectory(spec, o.n, seed);
  }
  const json j = io::load_json(o.trajectory, "trajectory");
  const auto idx = io::doubles(io::member(j, "indices", "trajectory"), "indices");
  Trajectory traj{spec.size(), {}, seed};
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double v = idx[i];
    require(v >= 0.0 && v < static_cast<double>(spec.size()) && v == std::floor(v), ErrorCode::InvalidInput,
            "state index out of range", "indices[" + std::to_string(i) + "]");
    traj.indices.push_back(static_cast<int>(v));
  }
  require(!traj.indices.empty(), ErrorCode::InvalidInput, "trajectory is empty", "indices");
  require(o.n == 0 || o.n == traj.size(), ErrorCode::DimensionMismatch, "--n disagrees with the trajectory length", "n");
  return traj;
}

struct ComplexityOpts {
  std::optional<double> value;
};

void add_complexity(CLI::App* c, ComplexityOpts& o) {
  c->add_option("--complexity", o.value, "use this complexity value instead of estimating it");
}

/// Exact enumeration when (2|S|)^n fits under the cap, Monte Carlo otherwise.
ComplexityEstimate get_complexity(ComplexityKind kind, const FunctionClass& cls, const ChainSpec& spec, std::size_t n,
                                  const Global& g, const ComplexityOpts& o, bool stationary_start = false) {
  if (o.value) {
    require(*o.value >= 0.0 && std::isfinite(*o.value), ErrorCode::InvalidInput, "complexity must be >= 0",
            "complexity");
    ComplexityEstimate c;
    c.kind = kind;
    c.value = *o.value;
    c.n = n;
    return c;
  }
  McOptions mc;
  mc.replicas = g.replicas;
  mc.seed = derive(g.seed, kTagComplexity);
  mc.workers = g.workers;
  mc.stationary_start = stationary_start;
  if (kind == ComplexityKind::Gaussian) return gaussian_complexity(cls, spec, n, mc);
  const bool exact = n <= 62 && std::pow(2.0 * static_cast<double>(spec.size()), static_cast<double>(n)) <= kExactCap;
  return rademacher_complexity(cls, spec, n, mc, exact);
}

struct GridOpts {
  int kmax = 20;
  std::vector<double> grid;
  std::string phi = "ramp";
};

void add_grid(CLI::App* c, GridOpts& o, bool with_phi = true) {
  c->add_option("--grid-kmax", o.kmax, "dyadic grid 2^0..2^-kmax");
  c->add_option("--grid", o.grid, "explicit delta grid")->delimiter(',');
  if (with_phi)
    c->add_option("--phi", o.phi, "margin loss")->check(CLI::IsMember({"ramp", "ramp-upper", "ramp-lower", "indicator"}));
}

std::vector<double> get_grid(const GridOpts& o) {
  if (!o.grid.empty()) return o.grid;
  require(o.kmax >= 0 && o.kmax <= 60, ErrorCode::InvalidGrid, "grid-kmax must lie in [0, 60]", "grid-kmax");
  return dyadic_grid(o.kmax);
}

json cdf_json(const StepCdf& F) {
  json o;
  o["atoms"] = nums(F.atoms);
  o["masses"] = nums(F.masses);
  return o;
}

StepCdf load_cdf(const std::string& path, const std::string& field) {
  const json j = io::load_json(path, field);
  StepCdf F;
  F.atoms = io::doubles(io::member(j, "atoms", field), field + ".atoms");
  F.masses = io::doubles(io::member(j, "masses", field), field + ".masses");
  validate_cdf(F, field);
  return F;
}

/// Margins for network bounds: lifted over (state, label) when the chain has an emission.
FunctionClass net_margins(const NetworkSpec& net, const io::ChainFile& cf, const std::vector<int>& labels,
                          const json& netfile) {
  if (cf.emission) {
    std::vector<double> lv;
    for (const auto& l : cf.labels) {
      try {
        lv.push_back(std::stod(l));
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidInput, "labels must be +1 or -1 for network margins", "labels");
      }
    }
    require(!lv.empty(), ErrorCode::InvalidInput, "chain with emission needs numeric labels", "labels");
    return network_margins_lifted(net, lv);
  }
  if (!labels.empty()) return network_margins(net, labels);
  require(netfile.contains("labels"), ErrorCode::InvalidInput, "no labels given (--labels or network \"labels\")",
          "labels");
  std::vector<int> l;
  for (double v : io::doubles(netfile["labels"], "labels")) l.push_back(static_cast<int>(v));
  return network_margins(net, l);
}

// ----------------------------------------------------------- reports

json analysis_json(const ChainAnalysis& a, const ChainSpec& spec) {
  json o;
  o["states"] = spec.states;
  o["irreducible"] = a.stationary.irreducible;
  o["reversible"] = a.stationary.reversible;
  o["pi"] = nums(a.stationary.pi);
  o["pi_star"] = num(a.stationary.pi_star);
  o["lambda"] = num(a.spectral.lambda);
  o["gamma_star"] = num(a.spectral.gamma_star);
  o["norm_convention"] = to_string(a.spectral.norm_convention);
  o["in_M2"] = a.spectral.in_M2;
  o["chi_div"] = num(a.spectral.chi_div);
  o["chi_div_pi_weighted"] = num(a.chi_div_pi_weighted);
  o["chi_div_unweighted"] = num(a.chi_div_unweighted);
  json sp = json::array();
  for (const auto& z : a.spectral.spectrum) sp.push_back(json::array({num(z.real()), num(z.imag())}));
  o["spectrum"] = sp;
  const auto& d = a.profile.d_values;
  o["d_profile"] = nums(std::vector<double>(d.begin(), d.begin() + static_cast<long>(std::min<std::size_t>(50, d.size()))));
  o["horizon"] = a.profile.T_max;
  o["converged"] = a.profile.converged;
  o["periodic"] = a.profile.periodic;
  try {
    o["t_mix"] = t_mix(a.profile, 0.25, a.guard);
  } catch (const Error&) {
    o["t_mix"] = nullptr;
  }
  o["guard"] = to_string(a.guard);
  o["tau_min_guarded"] = num(a.tau_min_guarded);
  o["tau_min_literal"] = num(a.tau_min_literal);
  if (a.stationary.irreducible) {
    const auto b = gap_mixing_bracket(a.spectral.gamma_star, a.stationary.pi_star);
    o["gap_bracket"] = {{"lower", num(b.lower)}, {"upper", num(b.upper)}, {"degenerate", b.degenerate}};
  }
  return o;
}

json function_names(const FunctionClass& cls) { return cls.names; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"genbound: generalization bounds for Markov-dependent samples", "genbound"};
  app.fallthrough();
  app.require_subcommand(1);
  Global g;
  app.add_option("--seed", g.seed_text, "64-bit seed (decimal or 0x hex); overrides GENBOUND_SEED");
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--out", g.out, "write output here instead of stdout");
  app.add_option("--replicas", g.replicas, "Monte Carlo replicas")->check(CLI::PositiveNumber);
  app.add_option("--workers", g.workers, "worker threads")->check(CLI::PositiveNumber);

  std::string command;
  std::function<json()> action;
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help, std::function<json()> fn) {
    auto* c = parent->add_subcommand(name, help);
    c->callback([&command, &action, parent, name, fn] {
      command = parent->get_name() + " " + name;
      action = fn;
    });
    return c;
  };

  // ------------------------------------------------------------- chain
  auto* chain = app.add_subcommand("chain", "chain analysis and sampling");
  chain->require_subcommand(1);
  std::string chain_file;
  ChainOpts co;
  std::size_t sample_n = 0;
  double smoothing = 0.0;

  auto* analyze = leaf(chain, "analyze", "stationary law, spectral gap, mixing profile", [&] {
    const auto cf = load_chain(chain_file);
    const auto spec = cf.effective();
    json o = analysis_json(analyze_chain(spec, analysis_options(co)), spec);
    o["hmm_lift"] = cf.emission.has_value();
    return o;
  });
  analyze->add_option("file", chain_file, "chain file")->required();
  analyze->add_option("--guard", co.guard)->check(CLI::IsMember({"guarded", "literal"}));
  analyze->add_option("--convention", co.convention)->check(CLI::IsMember({"pi-weighted", "unweighted"}));

  auto* sample = leaf(chain, "sample", "draw a trajectory", [&] {
    const auto spec = load_chain(chain_file).effective();
    const auto traj = sample_trajectory(spec, sample_n, g.seed);
    json o;
    o["n"] = traj.size();
    o["indices"] = traj.indices;
    json names = json::array();
    for (int x : traj.indices) names.push_back(spec.states[static_cast<std::size_t>(x)]);
    o["states"] = names;
    return o;
  });
  sample->add_option("file", chain_file, "chain file")->required();
  sample->add_option("--n", sample_n, "trajectory length")->required()->check(CLI::PositiveNumber);

  auto* estimate = leaf(chain, "estimate", "plug-in kernel from a sampled trajectory", [&] {
    const auto spec = load_chain(chain_file).effective();
    const auto traj = sample_trajectory(spec, sample_n, g.seed);
    const auto est = estimate_kernel(traj, smoothing);
    json o;
    o["n"] = traj.size();
    o["smoothing"] = num(smoothing);
    o["chain"] = io::to_json(est.chain);
    json unvisited = json::array();
    for (std::size_t i = 0; i < est.unvisited.size(); ++i)
      if (est.unvisited[i]) unvisited.push_back(i);
    o["unvisited_rows"] = unvisited;
    o["max_abs_error"] = num((est.chain.Q - spec.Q).cwiseAbs().maxCoeff());
    return o;
  });
  estimate->add_option("file", chain_file, "chain file")->required();
  estimate->add_option("--n", sample_n, "trajectory length")->required()->check(CLI::PositiveNumber);
  estimate->add_option("--smoothing", smoothing, "additive smoothing");

  // -------------------------------------------------------- complexity
  auto* complexity = app.add_subcommand("complexity", "Rademacher and Gaussian complexities");
  complexity->require_subcommand(1);
  ChainOpts cx;
  bool cx_exact = false;
  auto* rad = leaf(complexity, "rademacher", "R_n(F)", [&] {
    const auto spec = load_chain(cx.chain).effective();
    const auto cls = load_class(cx.cls);
    McOptions mc{g.replicas, g.seed, g.workers, cx.stationary_start};
    json o = io::to_json(rademacher_complexity(cls, spec, cx.n, mc, cx_exact));
    o["functions"] = function_names(cls);
    return o;
  });
  add_chain(rad, cx);
  rad->add_option("--n", cx.n)->required()->check(CLI::PositiveNumber);
  rad->add_flag("--exact", cx_exact, "exact enumeration over paths and signs");
  rad->add_flag("--stationary-start", cx.stationary_start, "start from pi instead of nu");
  auto* gau = leaf(complexity, "gaussian", "G_n(F)", [&] {
    const auto spec = load_chain(cx.chain).effective();
    const auto cls = load_class(cx.cls);
    McOptions mc{g.replicas, g.seed, g.workers, cx.stationary_start};
    json o = io::to_json(gaussian_complexity(cls, spec, cx.n, mc));
    o["functions"] = function_names(cls);
    return o;
  });
  add_chain(gau, cx);
  gau->add_option("--n", cx.n)->required()->check(CLI::PositiveNumber);
  gau->add_flag("--stationary-start", cx.stationary_start, "start from pi instead of nu");

  // ------------------------------------------------------------- bound
  auto* bound = app.add_subcommand("bound", "generalization bounds");
  bound->require_subcommand(1);
  ChainOpts bo;
  GridOpts go;
  ComplexityOpts cxo;
  std::string flavor = "rademacher";
  std::size_t family_K = 10;
  double vc = 1.0, C = 1.0, alpha = 0.05, zeta_alpha = 3.0, gamma = 0.5;
  std::string net_file;
  std::vector<int> labels;
  std::vector<double> prior;
  std::optional<std::size_t> w_samples;

  struct Prepared {
    io::ChainFile cf;
    ChainSpec spec;
    ChainAnalysis a;
    FunctionClass cls;
    Trajectory traj;
  };
  auto prepare = [&](bool with_class) {
    Prepared p;
    p.cf = load_chain(bo.chain);
    p.spec = p.cf.effective();
    p.a = analyze_chain(p.spec, analysis_options(bo));
    if (with_class) p.cls = load_class(bo.cls);
    p.traj = get_trajectory(bo, p.spec, g.seed);
    return p;
  };
  auto with_complexity = [](json o, const ComplexityEstimate& c) {
    o["complexity_estimate"] = io::to_json(c);
    return o;
  };

  auto* thm1 = leaf(bound, "thm1", "margin bound with Rademacher or Gaussian complexity", [&] {
    auto p = prepare(true);
    const auto kind = flavor == "gaussian" ? ComplexityKind::Gaussian : ComplexityKind::Rademacher;
    const auto c = get_complexity(kind, p.cls, p.spec, p.traj.size(), g, cxo);
    return with_complexity(
        io::to_json(bound_thm1(p.cls, p.a, p.traj, io::parse_loss(go.phi), bo.t, get_grid(go), kind, c)), c);
  });
  add_chain(thm1, bo);
  add_sample(thm1, bo);
  add_grid(thm1, go);
  add_complexity(thm1, cxo);
  thm1->add_option("--flavor", flavor)->check(CLI::IsMember({"rademacher", "gaussian"}));

  auto* family = leaf(bound, "family", "bound over the dyadic family phi(2^k x)", [&] {
    auto p = prepare(true);
    const auto c = get_complexity(ComplexityKind::Rademacher, p.cls, p.spec, p.traj.size(), g, cxo);
    const auto phis = dyadic_family(io::parse_loss(go.phi), family_K);
    return with_complexity(io::to_json(bound_family(p.cls, p.a, p.traj, phis, bo.t, c)), c);
  });
  add_chain(family, bo);
  add_sample(family, bo);
  add_complexity(family, cxo);
  family->add_option("--phi", go.phi)->check(CLI::IsMember({"ramp", "ramp-upper", "indicator"}));
  family->add_option("--K", family_K, "family size")->check(CLI::PositiveNumber);

  auto* two = leaf(bound, "two-sided", "bound on |P_n{f<=0} - P{f<=0}|", [&] {
    auto p = prepare(true);
    const auto c = get_complexity(ComplexityKind::Rademacher, p.cls, p.spec, p.traj.size(), g, cxo);
    return with_complexity(io::to_json(bound_two_sided(p.cls, p.a, p.traj, bo.t, get_grid(go), c)), c);
  });
  add_chain(two, bo);
  add_sample(two, bo);
  add_grid(two, go, false);
  add_complexity(two, cxo);

  auto* pac = leaf(bound, "pac-vc", "voting-classifier bound with VC dimension", [&] {
    auto p = prepare(true);
    return io::to_json(bound_pac_vc(vc, C, alpha, p.cls, p.a, p.traj, get_grid(go)));
  });
  add_chain(pac, bo);
  pac->add_option("--n", bo.n, "sample size");
  pac->add_option("--trajectory", bo.trajectory);
  add_grid(pac, go, false);
  pac->add_option("--vc", vc, "VC dimension of the base class")->required();
  pac->add_option("--C", C, "constant (not fixed by the theory)");
  pac->add_option("--alpha", alpha, "failure probability");

  auto net_inputs = [&](Prepared& p, json& netfile) {
    netfile = io::load_json(net_file, "network");
    const auto net = io::parse_network(netfile, fs::path(net_file).parent_path());
    p.cls = net_margins(net, p.cf, labels, netfile);
    return net;
  };
  auto base_complexity = [&](const NetworkSpec& net, const Prepared& p) {
    // G_n of the base class over the chain it is tabulated on
    return get_complexity(ComplexityKind::Gaussian, net.base, p.cf.chain, p.traj.size(), g, cxo);
  };

  auto* layered = leaf(bound, "deep-layered", "network bound with per-layer budgets", [&] {
    auto p = prepare(false);
    json netfile;
    const auto net = net_inputs(p, netfile);
    std::vector<double> L, b;
    for (std::size_t j = 0; j < net.layers.size(); ++j) {
      require(net.layers[j].budget.has_value(), ErrorCode::InvalidInput, "layer needs a weight budget",
              "layers[" + std::to_string(j) + "].budget");
      L.push_back(net.layers[j].L);
      b.push_back(*net.layers[j].budget);
    }
    const auto G = base_complexity(net, p);
    return with_complexity(
        io::to_json(bound_deep_layered(L, b, G, io::parse_loss(go.phi), bo.t, get_grid(go), p.a, p.cls, p.traj)), G);
  });
  add_chain(layered, bo, false);
  add_sample(layered, bo);
  add_grid(layered, go);
  add_complexity(layered, cxo);
  layered->add_option("--network", net_file, "network file")->required();
  layered->add_option("--labels", labels, "+1/-1 per state")->delimiter(',');

  auto* adaptive = leaf(bound, "deep-adaptive", "network bound adapted to the realized weights", [&] {
    auto p = prepare(false);
    json netfile;
    const auto net = net_inputs(p, netfile);
    const auto G = base_complexity(net, p);
    json o = io::to_json(
        bound_deep_adaptive(net, zeta_alpha, G, io::parse_loss(go.phi), bo.t, get_grid(go), p.a, p.cls, p.traj));
    return with_complexity(o, G);
  });
  add_chain(adaptive, bo, false);
  add_sample(adaptive, bo);
  add_grid(adaptive, go);
  add_complexity(adaptive, cxo);
  adaptive->add_option("--network", net_file, "network file")->required();
  adaptive->add_option("--labels", labels, "+1/-1 per state")->delimiter(',');
  adaptive->add_option("--alpha", zeta_alpha, "exponent with zeta(alpha) < 3/2");

  auto* bayes = leaf(bound, "bayes", "bound for f(x, w) averaged over a prior on w", [&] {
    auto p = prepare(true);
    const Eigen::VectorXd pr = Eigen::Map<const Eigen::VectorXd>(prior.data(), static_cast<Eigen::Index>(prior.size()));
    const auto lifted_spec = lift_prior_product(p.spec, pr);
    const auto lifted = analyze_chain(lifted_spec, analysis_options(bo));
    const auto kind = flavor == "gaussian" ? ComplexityKind::Gaussian : ComplexityKind::Rademacher;
    const auto c = get_complexity(kind, p.cls, lifted_spec, p.traj.size(), g, cxo);
    BayesOptions bopt;
    bopt.w_samples = w_samples;
    bopt.seed = derive(g.seed, kTagPrior);
    bopt.flavor = kind;
    return with_complexity(
        io::to_json(bound_bayes(p.cls, pr, io::parse_loss(go.phi), bo.t, get_grid(go), p.traj, lifted, c, bopt)), c);
  });
  add_chain(bayes, bo);
  add_sample(bayes, bo);
  add_grid(bayes, go);
  add_complexity(bayes, cxo);
  bayes->add_option("--prior", prior, "prior weights over W")->required()->delimiter(',');
  bayes->add_option("--w-samples", w_samples, "Monte Carlo draws from the prior (exact average when absent)");
  bayes->add_option("--flavor", flavor)->check(CLI::IsMember({"rademacher", "gaussian"}));

  auto* levy = leaf(bound, "levy", "uniform Levy-distance bound", [&] {
    auto p = prepare(true);
    const auto c = get_complexity(ComplexityKind::Rademacher, p.cls, p.spec, p.traj.size(), g, cxo);
    json o = io::to_json(bound_levy(c.value, p.cls.M, static_cast<double>(p.traj.size()), bo.t, p.a));
    return with_complexity(o, c);
  });
  add_chain(levy, bo);
  add_sample(levy, bo);
  add_complexity(levy, cxo);

  auto* supcdf = leaf(bound, "sup-cdf", "uniform CDF deviation bound", [&] {
    const auto spec = load_chain(bo.chain).effective();
    require(bo.n >= 1, ErrorCode::InvalidInput, "--n is required", "n");
    return io::to_json(bound_sup_cdf(analyze_chain(spec, analysis_options(bo)), static_cast<double>(bo.n), bo.t));
  });
  add_chain(supcdf, bo, false);
  supcdf->add_option("--n", bo.n)->required();
  supcdf->add_option("--t", bo.t);

  auto* gm = leaf(bound, "gamma-margin", "gamma-margins under pi and under the sample", [&] {
    auto p = prepare(true);
    const double n = static_cast<double>(p.traj.size());
    const Eigen::VectorXd w = pn_weights(p.traj);
    json o;
    o["n"] = p.traj.size();
    o["gamma"] = num(gamma);
    json fsj = json::array();
    for (Eigen::Index f = 0; f < p.cls.values.rows(); ++f) {
      const Eigen::VectorXd v = p.cls.values.row(f).transpose();
      const double d = gamma_margin(v, p.a.stationary.pi, gamma, n), dh = gamma_margin(v, w, gamma, n);
      fsj.push_back({{"name", p.cls.names[static_cast<std::size_t>(f)]},
                     {"delta", num(d)},
                     {"delta_hat", num(dh)},
                     {"ratio", num(d > 0.0 ? dh / d : kInf)}});
    }
    o["functions"] = fsj;
    o["caveats"] = json::array({"the equivalence constants are not specified; only the ratio is reported"});
    return o;
  });
  add_chain(gm, bo);
  add_sample(gm, bo);
  gm->add_option("--gamma", gamma, "gamma in (0, 1]");

  // ----------------------------------------------------------- margins
  auto* margins = app.add_subcommand("margins", "margin distributions and Levy distance");
  margins->require_subcommand(1);
  std::string F_file, G_file;
  auto* ld = leaf(margins, "levy-distance", "Levy distance between two step CDFs", [&] {
    const auto F = load_cdf(F_file, "F"), G = load_cdf(G_file, "G");
    json o;
    o["levy_distance"] = num(levy_distance(F, G));
    o["F"] = cdf_json(F);
    o["G"] = cdf_json(G);
    return o;
  });
  ld->add_option("--F", F_file, "CDF file {\"atoms\": [...], \"masses\": [...]}")->required();
  ld->add_option("--G", G_file, "CDF file")->required();

  ChainOpts mo;
  auto* dist = leaf(margins, "distribution", "law of each f under pi and under the sample", [&] {
    const auto spec = load_chain(mo.chain).effective();
    const auto cls = load_class(mo.cls);
    validate_class(cls, spec.size());
    const auto st = stationary(spec);
    const auto traj = get_trajectory(mo, spec, g.seed);
    const Eigen::VectorXd w = pn_weights(traj);
    json o;
    o["n"] = traj.size();
    json fsj = json::array();
    for (Eigen::Index f = 0; f < cls.values.rows(); ++f) {
      const Eigen::VectorXd v = cls.values.row(f).transpose();
      const auto F = StepCdf::from_weights(v, st.pi), Fn = StepCdf::from_weights(v, w);
      double sup = 0.0;
      for (double y : F.atoms) sup = std::max(sup, std::abs(F(y) - Fn(y)));
      for (double y : Fn.atoms) sup = std::max(sup, std::abs(F(y) - Fn(y)));
      fsj.push_back({{"name", cls.names[static_cast<std::size_t>(f)]},
                     {"stationary", cdf_json(F)},
                     {"empirical", cdf_json(Fn)},
                     {"sup_cdf_gap", num(sup)},
                     {"levy_distance", num(levy_distance(F, Fn))}});
    }
    o["functions"] = fsj;
    return o;
  });
  add_chain(dist, mo);
  dist->add_option("--n", mo.n);
  dist->add_option("--trajectory", mo.trajectory);

  // ------------------------------------------------------------ reduce
  auto* reduce = app.add_subcommand("reduce", "lifts of AR/ARMA/mixture models to first order");
  reduce->require_subcommand(1);
  std::vector<double> ra, rtheta, history;
  double rc = 0.0, sigma = 1.0, lo = -4.0, hi = 4.0, threshold = 0.0;
  std::size_t steps = 200, bins = 0;
  std::string mixture_file, emit_chain;

  auto default_history = [&](std::size_t m) {
    if (!history.empty()) {
      require(history.size() == m, ErrorCode::DimensionMismatch, "history needs one value per lag", "history");
      return history;
    }
    std::vector<double> h(m, 0.0);
    h[0] = 1.0;
    return h;
  };
  auto emit = [&](const ChainSpec& spec) {
    if (emit_chain.empty()) return;
    std::ofstream os(emit_chain);
    require(static_cast<bool>(os), ErrorCode::InvalidInput, "cannot write " + emit_chain, "emit-chain");
    os << io::dump(io::to_json(spec));
  };

  auto* comp = leaf(reduce, "companion", "companion lift of X_k = sum a_i X_{k-i}", [&] {
    const auto L = companion_lift(ra);
    const auto run = simulate_companion(L, default_history(ra.size()), steps);
    json o;
    o["order"] = L.order();
    o["G"] = io::rows(L.G);
    o["det"] = num(L.G.determinant());
    o["steps"] = steps;
    o["max_deviation"] = num(run.max_deviation);
    return o;
  });
  comp->add_option("--a", ra, "coefficients a_1..a_m")->required()->delimiter(',');
  comp->add_option("--history", history, "X_0, X_-1, ... (default 1, 0, ...)")->delimiter(',');
  comp->add_option("--steps", steps);

  auto* aff = leaf(reduce, "affine", "companion lift with constant offset", [&] {
    const auto L = affine_lift(ra, rc);
    const auto run = simulate_affine(ra, rc, default_history(ra.size()), steps);
    json o;
    o["order"] = L.order();
    o["G"] = io::rows(L.G);
    o["u"] = num(L.u);
    o["steps"] = steps;
    o["max_deviation"] = num(run.max_deviation);
    if (bins > 0) {
      require(ra.size() == 1, ErrorCode::InvalidInput, "discretization is available for AR(1) only", "a");
      const auto d = discretize_ar1(rc, ra[0], sigma, lo, hi, bins);
      json dj;
      dj["bins"] = bins;
      dj["lo"] = num(lo);
      dj["hi"] = num(hi);
      dj["sigma"] = num(sigma);
      dj["tv_error"] = num(d.tv_error);
      dj["centers"] = nums(d.centers);
      o["discretization"] = dj;
      emit(d.chain);
    }
    return o;
  });
  aff->add_option("--a", ra)->required()->delimiter(',');
  aff->add_option("--c", rc, "constant term");
  aff->add_option("--history", history)->delimiter(',');
  aff->add_option("--steps", steps);
  aff->add_option("--discretize", bins, "AR(1) only: bins of the discretized chain");
  aff->add_option("--sigma", sigma, "noise standard deviation for --discretize");
  aff->add_option("--lo", lo);
  aff->add_option("--hi", hi);
  aff->add_option("--emit-chain", emit_chain, "write the discretized chain here");

  auto* arma = leaf(reduce, "arma", "state-space lift of ARMA(m, q)", [&] {
    const auto L = arma_lift(rc, ra, rtheta);
    const auto eps = gaussian_noise(steps, sigma, derive(g.seed, kTagNoise));
    const auto run = simulate_arma(L, eps);
    json o;
    o["m"] = L.m();
    o["q"] = L.q();
    o["dim"] = L.dim();
    o["G"] = io::rows(L.G);
    o["u"] = num(L.u);
    o["noise_positions"] = L.noise_positions;
    o["steps"] = steps;
    o["max_deviation"] = num(run.max_deviation);
    return o;
  });
  arma->add_option("--c", rc);
  arma->add_option("--a", ra)->required()->delimiter(',');
  arma->add_option("--theta", rtheta)->required()->delimiter(',');
  arma->add_option("--sigma", sigma);
  arma->add_option("--steps", steps);

  auto* mix = leaf(reduce, "mixture", "lift of a linear combination of independent chains", [&] {
    const json j = io::load_json(mixture_file, "mixture");
    const auto alphas = io::doubles(io::member(j, "alphas", "mixture"), "alphas");
    const json& cj = io::member(j, "components", "mixture");
    require(cj.is_array(), ErrorCode::ParseError, "components must be an array", "components");
    std::vector<MixtureComponent> comps;
    for (std::size_t i = 0; i < cj.size(); ++i) {
      const std::string f = "components[" + std::to_string(i) + "]";
      const json& ch = io::member(cj[i], "chain", f);
      const auto spec = ch.is_string()
                            ? load_chain((fs::path(mixture_file).parent_path() / ch.get<std::string>()).string()).chain
                            : io::parse_chain(ch).chain;
      comps.push_back({spec, io::doubles(io::member(cj[i], "values", f), f + ".values")});
    }
    const auto L = mixture_lift(comps, alphas);
    const double thr = threshold;
    const auto run = simulate_mixture(L, comps, [thr](double y) { return y - thr; }, steps, g.seed);
    emit(L.product);
    json o;
    o["G"] = io::rows(L.G);
    o["det"] = num(L.det());
    o["product_states"] = L.product.size();
    o["steps"] = run.steps;
    o["threshold"] = num(thr);
    o["direct_count"] = run.direct_count;
    o["lifted_count"] = run.lifted_count;
    o["identity_holds"] = run.direct_count == run.lifted_count;
    return o;
  });
  mix->add_option("--spec", mixture_file, "mixture file")->required();
  mix->add_option("--steps", steps);
  mix->add_option("--threshold", threshold, "count steps with Y_k <= threshold");
  mix->add_option("--emit-chain", emit_chain, "write the product chain here");

  // ------------------------------------------------------------ verify
  auto* verify = app.add_subcommand("verify", "Monte Carlo and exact checks of the lemmas");
  verify->require_subcommand(1);
  ChainOpts vo;
  std::size_t function_index = 0, n0 = 0, complexity_replicas = 20000;
  std::vector<double> t_grid;
  std::string target = "thm1-rademacher";
  GridOpts vgo;

  auto vopts = [&] {
    VerifyOptions o;
    o.replicas = g.replicas;
    o.seed = g.seed;
    o.workers = g.workers;
    o.stationary_start = vo.stationary_start;
    o.guard = vo.guard == "literal" ? GuardMode::Literal : GuardMode::Guarded;
    return o;
  };
  auto pick = [&](const FunctionClass& cls) {
    require(function_index < cls.size(), ErrorCode::InvalidInput, "function index out of range", "function");
    return Eigen::VectorXd(cls.values.row(static_cast<Eigen::Index>(function_index)).transpose());
  };
  auto verify_leaf = [&](const std::string& name, const std::string& help, std::function<json()> fn) {
    auto* c = leaf(verify, name, help, std::move(fn));
    add_chain(c, vo);
    c->add_option("--n", vo.n)->required()->check(CLI::PositiveNumber);
    c->add_flag("--stationary-start", vo.stationary_start, "start from pi instead of nu");
    return c;
  };

  verify_leaf("symmetrization", "symmetrization sandwich", [&] {
    return io::to_json(verify_symmetrization(load_chain(vo.chain).effective(), load_class(vo.cls), vo.n, vopts()));
  });
  auto* var = verify_leaf("variance", "variance bound for the burned-in path mean", [&] {
    return io::to_json(verify_variance(load_chain(vo.chain).effective(), pick(load_class(vo.cls)), vo.n, n0, vopts()));
  });
  var->add_option("--function", function_index, "row of the class file");
  var->add_option("--n0", n0, "burn-in");
  auto* mcd = verify_leaf("mcdiarmid", "McDiarmid inequality for the path mean", [&] {
    const auto spec = load_chain(vo.chain).effective();
    const auto v = pick(load_class(vo.cls));
    const auto stat = mean_statistic(spec, v, vo.n, vo.stationary_start);
    return io::to_json(verify_mcdiarmid(spec, mean_coefficients(v, vo.n), stat, t_grid, vopts()));
  });
  mcd->add_option("--function", function_index, "row of the class file");
  mcd->add_option("--t-grid", t_grid, "deviation levels")->required()->delimiter(',');
  auto* tail = verify_leaf("tail", "violation frequency against a theorem's tail", [&] {
    const auto targets = {TailTarget::Thm1Rademacher, TailTarget::Thm1Gaussian, TailTarget::TwoSided,
                          TailTarget::DkwLemma, TailTarget::LevyLemma};
    TailTarget tt = TailTarget::Thm1Rademacher;
    for (auto x : targets)
      if (to_string(x) == target) tt = x;
    TailOptions topt;
    topt.phi = io::parse_loss(vgo.phi);
    topt.grid = get_grid(vgo);
    topt.complexity_replicas = complexity_replicas;
    return io::to_json(
        verify_theorem_tail(tt, load_chain(vo.chain).effective(), load_class(vo.cls), vo.n, vo.t, vopts(), topt));
  });
  tail->add_option("--target", target)
      ->check(CLI::IsMember({"thm1-rademacher", "thm1-gaussian", "two-sided", "dkw-lemma", "levy-lemma"}));
  tail->add_option("--t", vo.t);
  tail->add_option("--complexity-replicas", complexity_replicas);
  add_grid(tail, vgo);
  verify_leaf("replica-identity", "exact check of the replica identity", [&] {
    return io::to_json(verify_replica_identity(load_chain(vo.chain).effective(), load_class(vo.cls), vo.n, vopts()));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;
    std::cerr << app.help();
    return 2;
  }

  auto emit_doc = [&](const json& doc) {
    const std::string text = g.format == "json" ? io::dump(doc) : io::dump_text(doc);
    if (g.out.empty()) {
      std::cout << text;
      return true;
    }
    std::ofstream os(g.out, std::ios::binary);
    os << text;
    return static_cast<bool>(os);
  };

  json doc;
  doc["schema"] = io::kSchema;
  doc["command"] = command;
  try {
    if (!g.seed_text.empty()) g.seed = parse_seed(g.seed_text, "seed");
    else if (const char* env = std::getenv("GENBOUND_SEED"); env && *env) g.seed = parse_seed(env, "GENBOUND_SEED");
    doc["seed"] = g.seed;
    const json body = action();
    for (auto it = body.begin(); it != body.end(); ++it) doc[it.key()] = it.value();
  } catch (const Error& e) {
    doc["error"] = io::to_json(e);
    std::cerr << "error [" << to_string(e.code()) << "] " << (e.field().empty() ? "" : e.field() + ": ") << e.what()
              << "\n";
    emit_doc(doc);
    return 1;
  }
  if (!emit_doc(doc)) {
    std::cerr << "error: cannot write " << g.out << "\n";
    return 1;
  }
  return 0;
}

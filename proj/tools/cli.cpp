#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "netobs/errors.hpp"
#include "netobs/montecarlo.hpp"
#include "netobs/network_io.hpp"
#include "netobs/oracles.hpp"
#include "netobs/solver.hpp"
#include "validate.hpp"

namespace netobs::cli {

namespace {

using json = nlohmann::ordered_json;

struct SolverFlags {
  double psi = 0.9;
  int max_iter = 500;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  int restarts = 8;
  std::string method = "projected";
  int threads = 1;
  int mu_refresh = 1;

  SolverConfig config() const {
    SolverConfig c;
    c.psi = psi;
    c.max_iter = max_iter;
    c.conv_tol = tol;
    c.seed = seed;
    c.restarts = restarts;
    c.method = parse_method(method);
    c.threads = threads;
    c.mu_refresh = mu_refresh;
    c.validate();
    return c;
  }
};

std::uint64_t default_seed() {
  const char* env = std::getenv("NETOBS_SEED");
  if (!env || !*env) return 0;
  try {
    size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw InvalidInput(std::string("NETOBS_SEED is not an unsigned integer: ") + env);
  }
}

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--psi", f.psi, "Shift factor in (0.5, 1)")->capture_default_str();
  cmd->add_option("--max-iter", f.max_iter, "Iteration cap per run")->capture_default_str();
  cmd->add_option("--tol", f.tol, "Convergence tolerance")->capture_default_str();
  cmd->add_option("--seed", f.seed, "RNG seed (default: NETOBS_SEED or 0)");
  cmd->add_option("--restarts", f.restarts, "Initializations per lambda")->capture_default_str();
  cmd->add_option("--method", f.method, "projected | inverse-iteration")->capture_default_str();
  cmd->add_option("--threads", f.threads, "Worker threads for grid evaluation")->capture_default_str();
  cmd->add_option("--mu-refresh", f.mu_refresh, "Inverse iteration: shift refresh period")
      ->capture_default_str();
}

Complex parse_lambda(const std::string& text) {
  const size_t comma = text.find(',');
  if (comma == std::string::npos) throw InvalidInput("lambda must be given as re,im");
  try {
    size_t a = 0, b = 0;
    const std::string re = text.substr(0, comma), im = text.substr(comma + 1);
    const double r = std::stod(re, &a), i = std::stod(im, &b);
    if (a != re.size() || b != im.size() || !std::isfinite(r) || !std::isfinite(i))
      throw std::invalid_argument("bad number");
    return {r, i};
  } catch (const std::exception&) {
    throw InvalidInput("lambda must be given as re,im: " + text);
  }
}

std::vector<int> parse_sizes(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InvalidInput("sizes must be a comma-separated list of integers: " + text);
    }
  }
  if (out.empty()) throw InvalidInput("sizes list is empty");
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Eigen::VectorXcd& v) {
  json x = json::array();
  for (int i = 0; i < v.size(); ++i) x.push_back({v(i).real(), v(i).imag()});
  return x;
}

json result_json(const FixedLambdaResult& r, const SolverConfig& cfg) {
  json doc;
  doc["delta_frobenius"] = r.delta();
  doc["cost"] = r.cost;
  doc["lambda_star"] = {r.lambda.real(), r.lambda.imag()};
  doc["perturbation"] = matrix_json(r.perturbation->delta());
  doc["certificate"] = {{"r_eig", r.verification.r_eig},
                        {"r_out", r.verification.r_out},
                        {"sigma_min", r.verification.sigma_min},
                        {"verified", r.verification.verified},
                        {"eigenvector", vector_json(r.eigenvector)}};
  doc["identity"] = {{"cost", r.identity_lhs}, {"sigma_xAy", r.identity_rhs}, {"bound", r.bound_rhs}};
  doc["iterations"] = r.iterations;
  doc["converged"] = r.converged;
  doc["residual"] = r.residual;
  doc["restart"] = r.restart;
  doc["sign"] = to_string(r.sign);
  doc["method"] = to_string(cfg.method);
  doc["seed"] = cfg.seed;
  return doc;
}

// Writes to `path`, or to `out` when the path is empty.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot open output file: " + path);
  f << text;
  if (!f) throw InvalidInput("write failed: " + path);
}

struct SolveRequest {
  std::string network;
  std::string lambda;
  std::string grid;
  SolverFlags flags;
};

struct Solved {
  FixedLambdaResult best;
  std::vector<SearchPoint> trace;
  SolverConfig cfg;
  NetworkFile file;
};

Solved solve(const SolveRequest& req) {
  NetworkFile file = load_network(req.network);
  Solved s{{}, {}, req.flags.config(), std::move(file)};
  if (!req.lambda.empty()) {
    s.best = solve_fixed_lambda(s.file.net, s.file.mask, parse_lambda(req.lambda), s.cfg);
  } else {
    const RadiusResult r =
        solve_radius(s.file.net, s.file.mask, GridSpec::parse(req.grid.empty() ? "default" : req.grid), s.cfg);
    s.best = r.best;
    s.trace = r.search_trace;
  }
  if (!s.best.ok()) throw SolverFailure("no restart produced a verified perturbation");
  return s;
}

int cmd_radius(const SolveRequest& req, bool trace, const std::string& output, std::ostream& out) {
  const Solved s = solve(req);
  json doc = result_json(s.best, s.cfg);
  doc["mode"] = req.lambda.empty() ? "grid" : "fixed_lambda";
  if (trace) {
    json t = json::array();
    for (const SearchPoint& p : s.trace)
      t.push_back({p.lambda.real(), p.lambda.imag(), std::isfinite(p.cost) ? json(p.cost) : json(nullptr)});
    doc["search_trace"] = t;
  }
  emit(doc.dump(2) + "\n", output, out);
  return kOk;
}

int cmd_perturb(const SolveRequest& req, const std::string& output, std::ostream& out) {
  const Solved s = solve(req);
  emit(perturbation_to_json(*s.best.perturbation, s.best.lambda, s.best.eigenvector, &s.best.verification) +
           "\n",
       output, out);
  return kOk;
}

int cmd_perturb_check(const std::string& network, const std::string& pert_path, std::ostream& out,
                      std::ostream& err) {
  const NetworkFile file = load_network(network);
  const PerturbationFile pf = parse_perturbation(read_text_file(pert_path));
  if (pf.delta.rows() != file.net.n()) throw InvalidInput("perturbation size does not match the network");
  const Perturbation pert(pf.delta, file.mask);
  const UnobservabilityReport rep = verify_unobservability(file.net, pert, pf.lambda, pf.certificate);
  json doc;
  doc["r_eig"] = rep.r_eig;
  doc["r_out"] = rep.r_out;
  doc["sigma_min"] = rep.sigma_min;
  doc["verified"] = rep.verified;
  doc["frob_cost"] = pert.frob_cost();
  bool ok = rep.verified;
  if (pf.residuals) {
    const double diff = std::max({std::abs(rep.r_eig - pf.residuals->r_eig), std::abs(rep.r_out - pf.residuals->r_out),
                                  std::abs(rep.sigma_min - pf.residuals->sigma_min)});
    doc["stored_residual_diff"] = diff;
    ok = ok && diff <= 1e-12;
  }
  doc["ok"] = ok;
  out << doc.dump(2) << "\n";
  if (!ok) {
    err << "perturbation check failed\n";
    return kValidationFailure;
  }
  return kOk;
}

json oracle_json(const OracleResult& r) {
  json doc;
  doc["delta_frobenius"] = r.delta;
  doc["cost"] = r.delta * r.delta;
  doc["lambda_star"] = {r.lambda_star.real(), r.lambda_star.imag()};
  doc["branch"] = to_string(r.branch);
  if (r.where.first >= 0) doc["where"] = {r.where.first + 1, r.where.second + 1};
  doc["perturbation"] = matrix_json(r.perturbation);
  return doc;
}

int cmd_oracle(const std::string& network, const std::string& lambda, const std::string& output,
               std::ostream& out) {
  const NetworkFile file = load_network(network);
  const NetworkSystem& net = file.net;
  const Eigen::MatrixXd& a = net.weights();
  if (net.sensors() != std::vector<int>{0})
    throw InvalidInput("closed-form oracles need the single sensor at node 1");
  if (file.mask.mask() != net.edges())
    throw InvalidInput("closed-form oracles need the constraint set equal to the edge set");
  json doc;
  if (!lambda.empty()) {
    const Line3Result r = line3_optimal(a, parse_lambda(lambda));
    if (!r.found) throw SolverFailure("no admissible root of the stationarity system");
    doc = oracle_json(r.best);
    json roots = json::array();
    for (const Line3Root& root : r.roots)
      roots.push_back({{"b22", root.b22}, {"b23", root.b23}, {"b32", root.b32}, {"b33", root.b33},
                       {"cost", root.cost}, {"residual", root.residual}});
    doc["roots"] = roots;
  } else if (has_line_structure(a)) {
    doc = oracle_json(line_radius(a));
    doc["topology"] = "line";
  } else if (has_star_structure(a)) {
    doc = oracle_json(star_radius(a));
    doc["topology"] = "star";
    doc["gamma"] = star_gamma(a);
  } else {
    throw InvalidInput("no closed-form oracle for this topology (line or star with hub sensor)");
  }
  doc["cut_bound"] = {{"k", 1}, {"omega", net.n() - 1}, {"value", cut_bound(1, net.n() - 1)}};
  emit(doc.dump(2) + "\n", output, out);
  return kOk;
}

struct MonteCarloFlags {
  std::string topology = "line";
  std::string network;
  std::string sizes = "5,10,20";
  int trials = 100;
  std::uint64_t seed = 0;
  std::string method = "oracle";
  std::string out;
  std::string summary;
  int threads = 1;
  double max_exclusion = 0.1;
  bool convergence = false;
  std::string lambda = "0,1";
};

int cmd_montecarlo(const MonteCarloFlags& f, std::ostream& out, std::ostream& err) {
  if (f.convergence) {
    ConvergenceSpec spec;
    spec.trials = f.trials;
    spec.lambda = parse_lambda(f.lambda);
    spec.seed = f.seed;
    spec.cfg.seed = f.seed;
    const ConvergenceResult r = convergence_experiment(spec);
    std::ostringstream csv;
    write_convergence_csv(csv, r);
    emit(csv.str(), f.out, out);
    err << "convergence: used " << r.used << " of " << f.trials << ", oracle failures "
        << r.reference_failures << ", solver failures " << r.solver_failures << "\n";
    return kOk;
  }
  EnsembleSpec spec;
  spec.topology = parse_topology(f.topology);
  spec.sizes = parse_sizes(f.sizes);
  spec.trials = f.trials;
  spec.seed = f.seed;
  spec.threads = f.threads;
  spec.max_exclusion_rate = f.max_exclusion;
  if (spec.topology == Topology::kFile) {
    if (f.network.empty()) throw InvalidInput("--topology file needs --network");
    const NetworkFile file = load_network(f.network);
    spec.pattern = file.net.edges();
    spec.sensors = file.net.sensors();
  }
  SolverConfig cfg;
  cfg.seed = f.seed;
  const EnsembleResult r = estimate_expected_radius(spec, parse_estimate_method(f.method), cfg);
  if (!f.out.empty()) {
    std::ostringstream csv;
    write_trials_csv(csv, r);
    emit(csv.str(), f.out, out);
  }
  std::ostringstream summary;
  write_summary_csv(summary, r, spec.topology);
  emit(summary.str(), f.summary, out);
  bool valid = true;
  for (const SizeSummary& s : r.sizes) {
    if (s.valid) continue;
    valid = false;
    err << "n=" << s.n << ": exclusion rate " << s.exclusion_rate << " exceeds " << f.max_exclusion << "\n";
  }
  return valid ? kOk : kSolverFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structured observability radius of networks"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  SolveRequest radius_req, perturb_req;
  bool trace = false;
  std::string radius_out, perturb_out, check_path, oracle_net, oracle_lambda, oracle_out;
  MonteCarloFlags mc;
  ValidateOptions vopt;

  try {
    const std::uint64_t seed0 = default_seed();
    radius_req.flags.seed = perturb_req.flags.seed = mc.seed = vopt.seed = seed0;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  auto* radius = app.add_subcommand("radius", "Minimum-norm perturbation making the network unobservable");
  radius->add_option("network", radius_req.network, "Network JSON file")->required();
  auto* rl = radius->add_option("--lambda", radius_req.lambda, "Fixed eigenvalue re,im");
  radius->add_option("--grid", radius_req.grid, "Lambda grid spec (default, seeds, line, star, rect:..., list:...)")
      ->excludes(rl);
  radius->add_flag("--trace", trace, "Include the lambda search trace");
  radius->add_option("-o,--output", radius_out, "Write JSON here instead of stdout");
  add_solver_flags(radius, radius_req.flags);

  auto* perturb = app.add_subcommand("perturb", "Write the optimal perturbation file, or re-check one");
  perturb->add_option("network", perturb_req.network, "Network JSON file")->required();
  auto* pl = perturb->add_option("--lambda", perturb_req.lambda, "Fixed eigenvalue re,im");
  auto* pg = perturb->add_option("--grid", perturb_req.grid, "Lambda grid spec")->excludes(pl);
  perturb->add_option("-o,--output", perturb_out, "Write JSON here instead of stdout");
  perturb->add_option("--check", check_path, "Re-verify an existing perturbation file against the network")
      ->excludes(pl)
      ->excludes(pg);
  add_solver_flags(perturb, perturb_req.flags);

  auto* montecarlo = app.add_subcommand("montecarlo", "Random-weight ensembles and the convergence experiment");
  montecarlo->add_option("--topology", mc.topology, "line | star | file")->capture_default_str();
  montecarlo->add_option("--network", mc.network, "Edge pattern and sensors for --topology file");
  montecarlo->add_option("--sizes", mc.sizes, "Comma-separated network sizes")->capture_default_str();
  montecarlo->add_option("--trials", mc.trials, "Trials per size")->capture_default_str();
  montecarlo->add_option("--seed", mc.seed, "Master seed (default: NETOBS_SEED or 0)");
  montecarlo->add_option("--method", mc.method, "oracle | solver")->capture_default_str();
  montecarlo->add_option("--out", mc.out, "Per-trial CSV (ensemble) or gap CSV (convergence)");
  montecarlo->add_option("--summary", mc.summary, "Per-size summary CSV (default stdout)");
  montecarlo->add_option("--threads", mc.threads, "Worker threads")->capture_default_str();
  montecarlo->add_option("--max-exclusion", mc.max_exclusion, "Largest valid solver exclusion rate")
      ->capture_default_str();
  montecarlo->add_flag("--convergence", mc.convergence, "Run the 3-node line convergence experiment");
  montecarlo->add_option("--lambda", mc.lambda, "Eigenvalue for --convergence")->capture_default_str();

  auto* oracle = app.add_subcommand("oracle", "Closed-form radius for line, star and 3-node line networks");
  oracle->add_option("network", oracle_net, "Network JSON file")->required();
  oracle->add_option("--lambda", oracle_lambda, "3-node line: fixed eigenvalue re,im");
  oracle->add_option("-o,--output", oracle_out, "Write JSON here instead of stdout");

  auto* validate = app.add_subcommand("validate", "Run the built-in property suite");
  validate->add_option("--seed", vopt.seed, "Seed (default: NETOBS_SEED or 0)");
  validate->add_option("--pencils", vopt.pencil_cases, "Random pencil instances")->capture_default_str();
  validate->add_flag("--inject-sign-flip", vopt.inject_sign_flip,
                     "Reconstruct with the rejected sign variant (the identity checks must fail)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*radius) return cmd_radius(radius_req, trace, radius_out, out);
    if (*perturb) {
      if (!check_path.empty()) return cmd_perturb_check(perturb_req.network, check_path, out, err);
      return cmd_perturb(perturb_req, perturb_out, out);
    }
    if (*montecarlo) return cmd_montecarlo(mc, out, err);
    if (*oracle) return cmd_oracle(oracle_net, oracle_lambda, oracle_out, out);
    if (*validate) {
      const int failed = run_validation(vopt, out);
      if (failed > 0) {
        err << failed << " validation checks failed\n";
        return kValidationFailure;
      }
      return kOk;
    }
  } catch (const Unobservable& e) {
    err << "error: " << e.what() << "\n";
    return kUnobservable;
  } catch (const SolverFailure& e) {
    err << "error: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace netobs::cli

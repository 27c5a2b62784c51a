#include "netobs/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "netobs/errors.hpp"
#include "netobs/oracles.hpp"
#include "netobs/rng.hpp"

namespace netobs {

const char* to_string(Topology t) {
  switch (t) {
    case Topology::kLine:
      return "line";
    case Topology::kStar:
      return "star";
    case Topology::kFile:
      return "file";
  }
  return "unknown";
}

Topology parse_topology(const std::string& s) {
  if (s == "line") return Topology::kLine;
  if (s == "star") return Topology::kStar;
  if (s == "file") return Topology::kFile;
  throw InvalidInput("unknown topology '" + s + "'");
}

const char* to_string(EstimateMethod m) { return m == EstimateMethod::kOracle ? "oracle" : "solver"; }

EstimateMethod parse_estimate_method(const std::string& s) {
  if (s == "oracle") return EstimateMethod::kOracle;
  if (s == "solver") return EstimateMethod::kSolver;
  throw InvalidInput("unknown estimation method '" + s + "'");
}

void EnsembleSpec::validate() const {
  if (trials < 1) throw InvalidInput("trials must be at least 1");
  if (sizes.empty()) throw InvalidInput("at least one size is required");
  for (int n : sizes)
    if (n < 3) throw InvalidInput("ensemble sizes must be at least 3");
  if (topology == Topology::kFile) {
    if (!pattern) throw InvalidInput("file topology needs an edge pattern");
    for (int n : sizes)
      if (n != pattern->rows()) throw InvalidInput("file topology sizes must equal the file's n");
  }
  if (!(max_exclusion_rate >= 0.0 && max_exclusion_rate <= 1.0))
    throw InvalidInput("exclusion rate must lie in [0, 1]");
  if (threads < 1) throw InvalidInput("threads must be at least 1");
}

std::uint64_t trial_seed(std::uint64_t master, int n, int trial) {
  return derive_seed({master, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(trial)});
}

bool line_certificate(const Eigen::MatrixXd& a) {
  for (int i = 0; i + 1 < a.rows(); ++i)
    if (a(i, i + 1) == 0.0) return false;
  return true;
}

bool star_certificate(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  for (int i = 1; i < n; ++i) {
    if (a(0, i) == 0.0) return false;
    for (int j = i + 1; j < n; ++j)
      if (a(i, i) == a(j, j)) return false;
  }
  return true;
}

namespace {

Eigen::MatrixXd draw(Topology t, int n, std::mt19937_64& rng, const Eigen::MatrixXi* pattern) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  if (t == Topology::kLine) {
    for (int i = 0; i < n; ++i) {
      a(i, i) = uniform01(rng);
      if (i + 1 < n) {
        a(i, i + 1) = uniform01(rng);
        a(i + 1, i) = uniform01(rng);
      }
    }
  } else if (t == Topology::kStar) {
    for (int i = 0; i < n; ++i) a(i, i) = uniform01(rng);
    for (int i = 1; i < n; ++i) {
      a(0, i) = uniform01(rng);
      a(i, 0) = uniform01(rng);
    }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if ((*pattern)(i, j)) a(i, j) = uniform01(rng);
  }
  return a;
}

Eigen::MatrixXi structure(Topology t, int n, const Eigen::MatrixXi* pattern) {
  if (t == Topology::kFile) return *pattern;
  Eigen::MatrixXi e = Eigen::MatrixXi::Zero(n, n);
  for (int i = 0; i < n; ++i) e(i, i) = 1;
  for (int i = 1; i < n; ++i) {
    if (t == Topology::kLine) {
      e(i - 1, i) = e(i, i - 1) = 1;
    } else {
      e(0, i) = e(i, 0) = 1;
    }
  }
  return e;
}

Sample sample_impl(Topology t, int n, std::uint64_t seed, const Eigen::MatrixXi* pattern,
                   const std::vector<int>& sensors) {
  if (n < 2) throw InvalidInput("sample size must be at least 2");
  const Eigen::MatrixXi e = structure(t, n, pattern);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt));
    const Eigen::MatrixXd a = draw(t, n, rng, pattern);
    if (t == Topology::kFile) {
      try {
        NetworkSystem net(a, e, sensors);
        return Sample{net, ConstraintMask(e), attempt};
      } catch (const Unobservable&) {
        continue;
      }
    }
    const bool ok = t == Topology::kLine ? line_certificate(a) : star_certificate(a);
    if (!ok) continue;
    ObservabilityOptions opts;
    opts.enforce_a1 = false;
    NetworkSystem net(a, e, {0}, opts);
    return Sample{net, ConstraintMask(e), attempt};
  }
  throw SolverFailure("could not draw an observable sample");
}

template <typename F>
void parallel_for(int count, int threads, F&& f) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  const int t = std::min(threads, count);
  for (int w = 0; w < t; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += t) f(i);
    });
  for (std::thread& th : pool) th.join();
}

OracleResult oracle_for(Topology t, const Eigen::MatrixXd& a) {
  return t == Topology::kLine ? line_radius(a) : star_radius(a);
}

}  // namespace

Sample sample_network(Topology topology, int n, std::uint64_t seed) {
  if (topology == Topology::kFile) throw InvalidInput("file topology needs an ensemble spec");
  return sample_impl(topology, n, seed, nullptr, {0});
}

Sample sample_network(const EnsembleSpec& spec, int n, int trial) {
  const std::uint64_t seed = trial_seed(spec.seed, n, trial);
  if (spec.topology == Topology::kFile) return sample_impl(spec.topology, n, seed, &*spec.pattern, spec.sensors);
  return sample_impl(spec.topology, n, seed, nullptr, {0});
}

EnsembleResult estimate_expected_radius(const EnsembleSpec& spec, EstimateMethod method,
                                        const SolverConfig& cfg) {
  spec.validate();
  if (method == EstimateMethod::kOracle && spec.topology == Topology::kFile)
    throw InvalidInput("oracle method needs line or star topology");
  EnsembleResult out;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int n : spec.sizes) {
    std::vector<TrialRecord> recs(spec.trials);
    parallel_for(spec.trials, spec.threads, [&](int t) {
      const Sample s = sample_network(spec, n, t);
      TrialRecord& r = recs[t];
      r.topology = spec.topology;
      r.n = n;
      r.trial = t;
      r.method = method;
      r.resamples = s.resamples;
      r.oracle_delta = nan;
      if (spec.topology != Topology::kFile) {
        const OracleResult o = oracle_for(spec.topology, s.net.weights());
        r.oracle_delta = o.delta;
        if (method == EstimateMethod::kOracle) {
          r.delta = o.delta;
          r.lambda = o.lambda_star;
          r.branch = to_string(o.branch);
          r.converged = true;
          return;
        }
      }
      GridSpec grid;
      grid.kind = spec.topology == Topology::kLine   ? GridSpec::Kind::kLine
                  : spec.topology == Topology::kStar ? GridSpec::Kind::kStar
                                                     : GridSpec::Kind::kDefault;
      const RadiusResult rr = solve_radius(s.net, s.mask, grid, cfg);
      r.branch = "solver";
      r.converged = rr.best.converged;
      r.excluded = !rr.ok();
      r.lambda = rr.lambda_star;
      r.delta = rr.ok() ? rr.best.delta() : nan;
      r.identity_lhs = rr.best.identity_lhs;
      r.identity_rhs = rr.best.identity_rhs;
      r.bound_rhs = rr.best.bound_rhs;
    });

    SizeSummary sum;
    sum.n = n;
    sum.trials = spec.trials;
    int within = 0;
    for (const TrialRecord& r : recs) {
      sum.resamples += r.resamples;
      if (r.excluded) {
        ++sum.excluded;
        continue;
      }
      sum.deltas.push_back(r.delta);
      if (method == EstimateMethod::kSolver && std::isfinite(r.oracle_delta)) {
        const double gap = r.delta - r.oracle_delta;
        sum.max_abs_gap = std::max(sum.max_abs_gap, std::abs(gap));
        if (std::abs(gap) <= 1e-4) ++within;
        if (gap < -1e-6) ++sum.below_oracle;
      }
    }
    sum.used = static_cast<int>(sum.deltas.size());
    if (sum.used > 0) {
      double acc = 0.0;
      for (double d : sum.deltas) acc += d;
      sum.mean = acc / sum.used;
      double ss = 0.0;
      for (double d : sum.deltas) ss += (d - sum.mean) * (d - sum.mean);
      sum.std = sum.used > 1 ? std::sqrt(ss / (sum.used - 1)) : 0.0;
      sum.se = sum.std / std::sqrt(static_cast<double>(sum.used));
      sum.within_1e4 = static_cast<double>(within) / sum.used;
    }
    sum.exclusion_rate = static_cast<double>(sum.excluded) / spec.trials;
    sum.valid = sum.exclusion_rate < spec.max_exclusion_rate || sum.excluded == 0;
    if (spec.topology == Topology::kStar) {
      sum.lower_bound = 1.0 / (std::sqrt(2.0) * n * (n - 1.0));
      sum.upper_bound = 1.0 / (std::sqrt(2.0) * n * (n - 2.0));
    } else {
      sum.lower_bound = sum.upper_bound = 1.0 / n;
    }
    sum.cut_bound = cut_bound(1, n - 1);
    out.sizes.push_back(std::move(sum));
    for (TrialRecord& r : recs) out.trials.push_back(std::move(r));
  }
  return out;
}

double empirical_survival(const std::vector<double>& deltas, double x) {
  if (deltas.empty()) return 0.0;
  const auto c = std::count_if(deltas.begin(), deltas.end(), [x](double d) { return d >= x; });
  return static_cast<double>(c) / deltas.size();
}

double line_survival(int n, double x) {
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  return std::pow(1.0 - x, n - 1);
}

double dkw_epsilon(int m, double alpha) { return std::sqrt(std::log(2.0 / alpha) / (2.0 * m)); }

double max_survival_deviation(std::vector<double> deltas, int n) {
  std::sort(deltas.begin(), deltas.end());
  const double m = static_cast<double>(deltas.size());
  double worst = 0.0;
  for (size_t k = 0; k < deltas.size(); ++k) {
    const double model = line_survival(n, deltas[k]);
    // Just before the k-th order statistic and just after it.
    const double at = (m - k) / m;
    const double after = (m - k - 1) / m;
    worst = std::max({worst, std::abs(at - model), std::abs(after - model)});
  }
  return worst;
}

ConvergenceResult convergence_experiment(const ConvergenceSpec& spec) {
  if (spec.trials < 1) throw InvalidInput("trials must be at least 1");
  ConvergenceResult out;
  const bool real = spec.lambda.imag() == 0.0;
  double formulation_gap = 0.0;
  std::vector<std::vector<double>> traces;
  for (int t = 0; t < spec.trials; ++t) {
    const Sample s = sample_network(Topology::kLine, 3, trial_seed(spec.seed, 3, t));
    ConvergenceTrial tr;
    tr.trial = t;
    Eigen::MatrixXd reference;
    if (real) {
      SolverConfig full = spec.cfg;
      full.force_complex = true;
      const FixedLambdaResult ref = solve_fixed_lambda(s.net, s.mask, spec.lambda, full);
      tr.reference_ok = ref.ok();
      if (tr.reference_ok) {
        reference = ref.perturbation->delta();
        tr.reference_cost = ref.cost;
      }
    } else {
      const Line3Result orc = line3_optimal(s.net.weights(), spec.lambda);
      tr.reference_ok = orc.found;
      if (orc.found) {
        reference = orc.best.perturbation;
        tr.reference_cost = orc.best.delta * orc.best.delta;
      }
    }
    const FixedLambdaResult sol = solve_fixed_lambda(s.net, s.mask, spec.lambda, spec.cfg);
    tr.solver_ok = sol.ok();
    tr.converged = sol.ok() && sol.converged;
    tr.solver_cost = sol.cost;
    tr.identity_lhs = sol.identity_lhs;
    tr.identity_rhs = sol.identity_rhs;
    tr.bound_rhs = sol.bound_rhs;
    if (!tr.reference_ok) ++out.reference_failures;
    if (!tr.converged) ++out.solver_failures;
    if (tr.reference_ok && tr.converged) {
      for (const Eigen::MatrixXd& d : sol.trajectory) tr.gaps.push_back((d - reference).norm());
      tr.final_gap = (sol.perturbation->delta() - reference).norm();
      tr.gaps.push_back(tr.final_gap);
      traces.push_back(tr.gaps);
      ++out.used;
      if (real) formulation_gap = std::max(formulation_gap, std::abs(sol.cost - tr.reference_cost));
    }
    out.trials.push_back(std::move(tr));
  }
  if (real) out.formulation_gap = formulation_gap;

  size_t len = 0;
  for (const auto& g : traces) len = std::max(len, g.size());
  out.mean_gap.assign(len, 0.0);
  out.std_gap.assign(len, 0.0);
  if (traces.empty()) return out;
  for (size_t i = 0; i < len; ++i) {
    double acc = 0.0, acc2 = 0.0;
    for (const auto& g : traces) {
      const double v = i < g.size() ? g[i] : g.back();
      acc += v;
      acc2 += v * v;
    }
    const double m = static_cast<double>(traces.size());
    out.mean_gap[i] = acc / m;
    out.std_gap[i] = std::sqrt(std::max(0.0, acc2 / m - out.mean_gap[i] * out.mean_gap[i]));
  }
  return out;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_trials_csv(std::ostream& os, const EnsembleResult& r) {
  os << "topology,n,trial,delta,method,lambda_re,lambda_im,branch,converged\n";
  for (const TrialRecord& t : r.trials) {
    os << to_string(t.topology) << ',' << t.n << ',' << t.trial << ',' << num(t.delta) << ','
       << to_string(t.method) << ',' << num(t.lambda.real()) << ',' << num(t.lambda.imag()) << ','
       << t.branch << ',' << (t.converged ? "true" : "false") << '\n';
  }
}

void write_summary_csv(std::ostream& os, const EnsembleResult& r, Topology topology) {
  os << "topology,n,trials,used,excluded,mean,se,lower_bound,upper_bound,cut_bound,scaled_mean\n";
  for (const SizeSummary& s : r.sizes) {
    const double scaled = topology == Topology::kStar ? s.mean * std::sqrt(2.0) * s.n * s.n : s.mean * s.n;
    os << to_string(topology) << ',' << s.n << ',' << s.trials << ',' << s.used << ',' << s.excluded
       << ',' << num(s.mean) << ',' << num(s.se) << ',' << num(s.lower_bound) << ','
       << num(s.upper_bound) << ',' << num(s.cut_bound) << ',' << num(scaled) << '\n';
  }
}

void write_convergence_csv(std::ostream& os, const ConvergenceResult& r) {
  os << "iteration,mean_gap,std_gap\n";
  for (size_t i = 0; i < r.mean_gap.size(); ++i)
    os << i << ',' << num(r.mean_gap[i]) << ',' << num(r.std_gap[i]) << '\n';
}

}  // namespace netobs

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "netobs/network.hpp"
#include "netobs/solver.hpp"

namespace netobs {

enum class Topology { kLine, kStar, kFile };
const char* to_string(Topology t);
Topology parse_topology(const std::string& s);

enum class EstimateMethod { kOracle, kSolver };
const char* to_string(EstimateMethod m);
EstimateMethod parse_estimate_method(const std::string& s);

struct EnsembleSpec {
  Topology topology = Topology::kLine;
  std::vector<int> sizes;
  int trials = 100;
  std::uint64_t seed = 0;
  // Weights are i.i.d. uniform on [0, 1]; this is the only supported law.
  // File topology: the edge pattern and sensors to re-weight (sizes must equal its n).
  std::optional<Eigen::MatrixXi> pattern;
  std::vector<int> sensors;
  double max_exclusion_rate = 0.1;
  int threads = 1;

  void validate() const;
};

struct Sample {
  NetworkSystem net;
  ConstraintMask mask;
  int resamples = 0;  // certificate failures before acceptance
};

// Line/star samples are certified observable structurally (nonzero superdiagonal;
// nonzero spokes and distinct leaf diagonals); failures are resampled.
Sample sample_network(Topology topology, int n, std::uint64_t trial_seed);
Sample sample_network(const EnsembleSpec& spec, int n, int trial);
std::uint64_t trial_seed(std::uint64_t master, int n, int trial);

bool line_certificate(const Eigen::MatrixXd& a);
bool star_certificate(const Eigen::MatrixXd& a);

struct TrialRecord {
  Topology topology = Topology::kLine;
  int n = 0;
  int trial = 0;
  double delta = 0.0;
  EstimateMethod method = EstimateMethod::kOracle;
  Complex lambda{0.0, 0.0};
  std::string branch;
  bool converged = false;
  bool excluded = false;
  double oracle_delta = 0.0;  // NaN when no oracle applies
  int resamples = 0;
  // Solver runs: cost identity terms of the returned triple.
  double identity_lhs = 0.0, identity_rhs = 0.0, bound_rhs = 0.0;
};

struct SizeSummary {
  int n = 0;
  int trials = 0;
  int used = 0;
  int excluded = 0;
  int resamples = 0;
  double mean = 0.0;
  double std = 0.0;
  double se = 0.0;
  double lower_bound = 0.0;  // 1/n (line) or 1/(sqrt2 n(n-1)) (star)
  double upper_bound = 0.0;  // 1/n (line) or 1/(sqrt2 n(n-2)) (star)
  double cut_bound = 0.0;    // k = 1, omega = n - 1
  double exclusion_rate = 0.0;
  bool valid = true;
  // Solver runs only.
  double max_abs_gap = 0.0;
  double within_1e4 = 0.0;  // fraction of used trials within 1e-4 of the oracle
  int below_oracle = 0;     // trials below oracle - 1e-6
  std::vector<double> deltas;
};

struct EnsembleResult {
  std::vector<SizeSummary> sizes;
  std::vector<TrialRecord> trials;
};

EnsembleResult estimate_expected_radius(const EnsembleSpec& spec, EstimateMethod method,
                                        const SolverConfig& cfg = {});

// Pr(delta >= x) estimated from samples.
double empirical_survival(const std::vector<double>& deltas, double x);
// (1 - x)^(n - 1) clipped to [0, 1].
double line_survival(int n, double x);
// Dvoretzky-Kiefer-Wolfowitz half-width for m samples at level alpha.
double dkw_epsilon(int m, double alpha);
// sup_x |empirical - model| evaluated at the jump points.
double max_survival_deviation(std::vector<double> deltas, int n);

struct ConvergenceSpec {
  int trials = 100;
  Complex lambda{0.0, 1.0};
  std::uint64_t seed = 0;
  SolverConfig cfg;
};

struct ConvergenceTrial {
  int trial = 0;
  bool reference_ok = false;
  bool solver_ok = false;
  bool converged = false;
  double reference_cost = 0.0;
  double solver_cost = 0.0;
  double final_gap = 0.0;
  std::vector<double> gaps;  // |Delta^(i) - Delta*|_F
  double identity_lhs = 0.0, identity_rhs = 0.0, bound_rhs = 0.0;
};

struct ConvergenceResult {
  std::vector<double> mean_gap;
  std::vector<double> std_gap;
  int used = 0;
  int reference_failures = 0;
  int solver_failures = 0;
  // Real lambda: max |cost(real formulation) - cost(full formulation)|.
  std::optional<double> formulation_gap;
  std::vector<ConvergenceTrial> trials;
};

// 3-node lines with sensor {1}. Nonreal lambda: reference from the stationarity-root
// oracle. Real lambda: reference from the full (complex) formulation of the solver.
ConvergenceResult convergence_experiment(const ConvergenceSpec& spec);

void write_trials_csv(std::ostream& os, const EnsembleResult& r);
void write_summary_csv(std::ostream& os, const EnsembleResult& r, Topology topology);
void write_convergence_csv(std::ostream& os, const ConvergenceResult& r);

}  // namespace netobs

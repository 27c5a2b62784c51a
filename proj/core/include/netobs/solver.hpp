#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netobs/fixed_lambda.hpp"
#include "netobs/network.hpp"
#include "netobs/reduced.hpp"
#include "netobs/spectrum.hpp"

namespace netobs {

enum class Method {
  kProjected,         // variable projection + stationarity polish (default)
  kInverseIteration,  // shifted inverse iteration on the nonlinear pencil
};

const char* to_string(Method m);
Method parse_method(const std::string& s);

struct SolverConfig {
  double psi = 0.9;
  int max_iter = 500;
  double conv_tol = 1e-9;
  int restarts = 8;
  std::uint64_t seed = 0;
  Method method = Method::kProjected;
  // Inverse iteration recomputes the shift every `mu_refresh` iterations.
  int mu_refresh = 1;
  // Eigen-constraint residual and PBH threshold for accepting a perturbation.
  double accept_tol = 1e-8;
  // Use the complex formulation even for real lambda.
  bool force_complex = false;
  SignPolicy sign_policy = SignPolicy::kBestResidual;
  // Worker threads for grid evaluation (1 = sequential).
  int threads = 1;

  void validate() const;
};

struct FixedLambdaResult {
  Complex lambda{0.0, 0.0};
  CandidateTriple triple;  // normalized, full (2q, 2n) layout
  std::optional<Perturbation> perturbation;
  Eigen::VectorXcd eigenvector;  // original node order
  double cost = 0.0;             // |Delta|_F^2
  int iterations = 0;
  bool converged = false;
  bool verified = false;
  double residual = 0.0;
  // |Delta^(i) - Delta_final|_F per iteration.
  std::vector<double> history;
  // Delta^(i) in original coordinates.
  std::vector<Eigen::MatrixXd> trajectory;
  SignVariant sign = SignVariant::kPlus;
  double eig_residual = 0.0;
  double identity_lhs = 0.0;
  double identity_rhs = 0.0;
  double bound_rhs = 0.0;
  double a_tilde_norm = 0.0;
  // Inverse iteration only: phi + mu from the final step.
  double phi_plus_mu = 0.0;
  double psi_used = 0.0;
  int restart = -1;
  std::vector<int> support;
  UnobservabilityReport verification;

  bool ok() const { return perturbation.has_value() && verified; }
  double delta() const;
};

// One run from a given start on a prepared reduced problem. `x0` lives in the
// model space of FixedLambdaModel(rp, cfg.force_complex). No network verification.
FixedLambdaResult heuristic_iterate(const ReducedProblem& rp, const CanonicalForm& cf,
                                    const SolverConfig& cfg, const Eigen::VectorXd& x0);

struct InverseIterationRun {
  Eigen::VectorXd x, y;  // per-block unit vectors, model space
  double sigma = 0.0;    // Rayleigh quotient
  double phi_plus_mu = 0.0;
  double psi = 0.0;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  std::vector<double> sigma_trace;
  std::vector<Eigen::MatrixXd> corrections;
};

InverseIterationRun run_inverse_iteration(const FixedLambdaModel& model, const Eigen::VectorXd& x0,
                                          const Eigen::VectorXd& y0, const SolverConfig& cfg);

struct FixedLambdaOptions {
  // Non-sensor nodes the eigenvector may use; empty means all.
  std::vector<int> support;
  // Optional warm start (original node order).
  std::optional<Eigen::VectorXcd> warm_start;
  // Override of cfg.restarts.
  std::optional<int> restarts;
};

FixedLambdaResult solve_fixed_lambda(const NetworkSystem& net, const ConstraintMask& mask,
                                     Complex lambda, const SolverConfig& cfg,
                                     const FixedLambdaOptions& opt = {});

struct LambdaCandidate {
  Complex lambda;
  std::vector<int> support;  // empty = all non-sensor nodes
};

struct GridSpec {
  enum class Kind { kExplicit, kRectangle, kSubmatrixSeeds, kLine, kStar, kDefault };
  Kind kind = Kind::kDefault;
  std::vector<Complex> points;  // kExplicit
  double re_min = -2.0, re_max = 2.0, im_min = -2.0, im_max = 2.0;
  int n_re = 21, n_im = 21;
  bool refine = true;
  int refine_steps = 20;
  // Refinement stops once the step falls below this.
  double refine_min_step = 1e-5;
  // Greedy support pruning on the best few candidates; default grid only unless set.
  std::optional<bool> prune;
  int prune_candidates = 3;

  static GridSpec parse(const std::string& text);
};

std::vector<LambdaCandidate> expand_grid(const NetworkSystem& net, const GridSpec& spec);

struct SearchPoint {
  Complex lambda;
  double cost;  // |Delta|_F^2, +inf on failure
};

struct RadiusResult {
  FixedLambdaResult best;
  Complex lambda_star{0.0, 0.0};
  std::vector<SearchPoint> search_trace;
  bool ok() const { return best.ok(); }
};

RadiusResult solve_radius(const NetworkSystem& net, const ConstraintMask& mask,
                          const GridSpec& grid, const SolverConfig& cfg);

// Deterministic order used when merging results: cost, then (Re, Im) of lambda.
bool better_result(const FixedLambdaResult& a, const FixedLambdaResult& b);

}  // namespace netobs

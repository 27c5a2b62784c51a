#include "validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "netobs/montecarlo.hpp"
#include "netobs/oracles.hpp"
#include "netobs/solver.hpp"
#include "netobs/validation.hpp"

namespace netobs::cli {

namespace {

class Report {
 public:
  explicit Report(std::ostream& out) : out_(out) {}

  void line(const std::string& check, const std::string& detail, bool pass) {
    out_ << (pass ? "PASS " : "FAIL ") << check << ' ' << detail << '\n';
    if (!pass) ++failed_;
  }
  int failed() const { return failed_; }

 private:
  std::ostream& out_;
  int failed_ = 0;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

void spectrum_checks(const ValidateOptions& opt, Report& rep) {
  for (int i = 0; i < opt.pencil_cases; ++i) {
    const PencilCase c = random_pencil_case(opt.seed, i);
    const SpectrumCheck s = check_spectrum(c.pencil);
    const bool pass = s.zero_in_spectrum(1e-8) && s.pairing <= 1e-8 &&
                      (!s.regular || s.qz_max_imag <= 1e-8);
    rep.line("spectrum",
             "case=" + std::to_string(i) + " " + c.family + " n=" + std::to_string(c.n) +
                 (c.real_form ? " real" : " complex") + (s.regular ? " regular" : " singular") +
                 fmt(" zero=%.3g h_sigma_min=%.3g pairing=%.3g qz_imag=%.3g", s.zero_distance, s.h_sigma_min,
                     s.pairing, s.qz_max_imag),
             pass);
  }
}

void identity_checks(const ValidateOptions& opt, Report& rep) {
  const Complex lambda(0.0, 1.0);
  SolverConfig cfg;
  cfg.seed = opt.seed;
  for (int t = 0; t < opt.identity_cases; ++t) {
    const Sample s = sample_network(Topology::kLine, 3, trial_seed(opt.seed, 3, t));
    const FixedLambdaResult r = solve_fixed_lambda(s.net, s.mask, lambda, cfg);
    const std::string tag = "line3 trial=" + std::to_string(t);
    if (!r.ok() || !r.converged) {
      rep.line("identity", tag + " solver did not converge", false);
      continue;
    }
    const CanonicalForm cf = canonicalize(s.net, s.mask);
    const ReducedProblem rp = build_reduced(cf, lambda);
    const SignPolicy policy = opt.inject_sign_flip ? SignPolicy::kFlipped : SignPolicy::kBestResidual;
    const Reconstruction rec = reconstruct_perturbation(rp, r.triple, cf, cfg.accept_tol, policy);
    const double rel = std::abs(rec.identity_lhs - rec.identity_rhs) / std::max(rec.identity_lhs, 1e-300);
    const bool pass = rel <= 1e-6 && rec.identity_lhs <= rec.bound_rhs + 1e-9 && rec.eig_residual <= 1e-8;
    rep.line("identity",
             tag + fmt(" cost=%.10g sigma_xAy=%.10g rel=%.3g eig_residual=%.3g", rec.identity_lhs,
                       rec.identity_rhs, rel, rec.eig_residual),
             pass);
  }
}

void oracle_checks(const ValidateOptions& opt, Report& rep) {
  const Complex lambda(0.0, 1.0);
  SolverConfig cfg;
  cfg.seed = opt.seed;
  for (int t = 0; t < opt.oracle_cases; ++t) {
    const Sample s = sample_network(Topology::kLine, 3, trial_seed(opt.seed ^ 0x5bd1e995ULL, 3, t));
    const Line3Result orc = line3_optimal(s.net.weights(), lambda);
    const FixedLambdaResult r = solve_fixed_lambda(s.net, s.mask, lambda, cfg);
    const bool ran = orc.found && r.ok();
    const double gap = ran ? (r.perturbation->delta() - orc.best.perturbation).norm() : INFINITY;
    rep.line("oracle", "line3 trial=" + std::to_string(t) + fmt(" gap=%.3g", gap), ran && gap <= 1e-5);
  }
  for (Topology top : {Topology::kLine, Topology::kStar}) {
    const GridSpec grid = GridSpec::parse(top == Topology::kLine ? "line" : "star");
    for (int t = 0; t < opt.oracle_cases; ++t) {
      const int n = 4 + t % 3;
      const Sample s = sample_network(top, n, trial_seed(opt.seed, n, t));
      const OracleResult orc =
          top == Topology::kLine ? line_radius(s.net.weights()) : star_radius(s.net.weights());
      const RadiusResult r = solve_radius(s.net, s.mask, grid, cfg);
      const double got = r.ok() ? r.best.delta() : INFINITY;
      const double gap = got - orc.delta;
      rep.line("oracle",
               std::string(to_string(top)) + " n=" + std::to_string(n) + " trial=" + std::to_string(t) +
                   fmt(" solver=%.10g oracle=%.10g gap=%.3g", got, orc.delta, gap),
               std::abs(gap) <= 1e-4);
    }
  }
}

}  // namespace

int run_validation(const ValidateOptions& opt, std::ostream& out) {
  Report rep(out);
  spectrum_checks(opt, rep);
  identity_checks(opt, rep);
  oracle_checks(opt, rep);
  out << (rep.failed() == 0 ? "all checks passed" : std::to_string(rep.failed()) + " checks failed")
      << '\n';
  return rep.failed();
}

}  // namespace netobs::cli

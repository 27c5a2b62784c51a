#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "netobs/errors.hpp"
#include "netobs/solver.hpp"

namespace netobs {

namespace {

void unit_blocks(Eigen::VectorXd& z, int mx) {
  const double ax = z.head(mx).norm(), ay = z.tail(z.size() - mx).norm();
  if (ax > 0.0) z.head(mx) /= ax;
  if (ay > 0.0) z.tail(z.size() - mx) /= ay;
}

}  // namespace

InverseIterationRun run_inverse_iteration(const FixedLambdaModel& model, const Eigen::VectorXd& x0,
                                          const Eigen::VectorXd& y0, const SolverConfig& cfg) {
  const int mx = model.x_dim(), my = model.y_dim();
  if (x0.size() != mx || y0.size() != my) throw InvalidInput("inverse iteration start dimensions");
  InverseIterationRun run;
  Eigen::VectorXd z(mx + my);
  z << x0, y0;
  unit_blocks(z, mx);

  PencilPair pp = model.pencil(z.head(mx), z.tail(my));
  double top = smallest_positive(generalized_spectrum(pp));
  double psi = cfg.psi;
  run.psi = psi;
  if (!std::isfinite(top)) {
    run.x = z.head(mx);
    run.y = z.tail(my);
    return run;
  }
  double mu = psi * top;
  double phi = 0.0;
  int since_refresh = 0;

  for (int it = 0; it < cfg.max_iter; ++it) {
    run.iterations = it + 1;
    const Eigen::MatrixXd shifted = pp.h - mu * pp.d;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(shifted);
    if (!(lu.rcond() > 1e-14)) {
      // Shift sits on an eigenvalue; back off.
      if (psi * 0.95 <= 0.5) break;
      psi *= 0.95;
      mu = psi * top;
      continue;
    }
    Eigen::VectorXd w = lu.solve(pp.d * z);
    const double zw = z.dot(w);
    phi = zw != 0.0 ? z.squaredNorm() / zw : std::numeric_limits<double>::infinity();
    unit_blocks(w, mx);
    if (w.dot(z) < 0.0) w = -w;
    if (!w.allFinite()) break;
    const double dz = (w - z).norm();
    z = w;

    pp = model.pencil(z.head(mx), z.tail(my));
    const double zdz = z.dot(pp.d * z);
    run.sigma = zdz != 0.0 ? z.dot(pp.h * z) / zdz : std::numeric_limits<double>::quiet_NaN();
    run.residual = (pp.h * z - run.sigma * (pp.d * z)).norm();
    run.sigma_trace.push_back(run.sigma);
    run.corrections.push_back(model.correction(z.head(mx)));
    run.phi_plus_mu = phi + mu;
    if (dz <= cfg.conv_tol && run.residual <= cfg.conv_tol) {
      run.converged = true;
      break;
    }
    if (++since_refresh >= cfg.mu_refresh) {
      since_refresh = 0;
      const double next = smallest_positive(generalized_spectrum(pp));
      if (!std::isfinite(next)) break;
      top = next;
      mu = psi * top;
    }
  }
  run.psi = psi;
  run.x = z.head(mx);
  run.y = z.tail(my);
  return run;
}

}  // namespace netobs

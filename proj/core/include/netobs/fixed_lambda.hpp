#pragma once

#include <vector>

#include "netobs/reduced.hpp"

namespace netobs {

/// The fixed-eigenvalue structured least-squares problem in reduced variables.
/// For real lambda (unless forced otherwise) the eigenvector is real: x has
/// length q and the multiplier has length n; otherwise lengths 2q and 2n.
class FixedLambdaModel {
 public:
  explicit FixedLambdaModel(ReducedProblem rp, bool force_complex = false);

  const ReducedProblem& reduced() const { return rp_; }
  bool real() const { return real_; }
  int x_dim() const { return static_cast<int>(k_.cols()); }
  int y_dim() const { return static_cast<int>(k_.rows()); }
  const Eigen::MatrixXd& op() const { return k_; }

  // |rho(x)|^2 is the cost of the cheapest admissible correction that makes x an
  // eigenvector; rows that cannot be corrected carry a large penalty.
  // Invariant under scaling of x.
  Eigen::VectorXd projected_residual(const Eigen::VectorXd& x) const;
  double projected_cost(const Eigen::VectorXd& x) const;
  // Minimum-norm multipliers l with correction row i = -l_i^T (x restricted to row support).
  Eigen::VectorXd multipliers(const Eigen::VectorXd& x) const;
  // Minimum-norm correction (n x q) for eigenvector x.
  Eigen::MatrixXd correction(const Eigen::VectorXd& x) const;

  Eigen::VectorXd dx_times(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  Eigen::VectorXd dy_times(const Eigen::VectorXd& y, const Eigen::VectorXd& x) const;
  // [K x - s D_x y; K^T y - s D_y x; (|x|^2-1)/2; (|y|^2-1)/2].
  Eigen::VectorXd stationarity(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                               double sigma) const;
  // Pencil matching the formulation (full or real-eigenvalue form).
  PencilPair pencil(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

  // Pads a real-formulation triple to the full (2q, 2n) layout.
  CandidateTriple embed(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double sigma) const;
  // Model-space vector from a canonical-coordinate complex eigenvector.
  Eigen::VectorXd from_canonical(const Eigen::VectorXcd& xc) const;

  static constexpr double kPenalty = 1e4;

 private:
  ReducedProblem rp_;
  bool real_;
  Eigen::MatrixXd k_;
  std::vector<std::vector<int>> row_support_;
};

struct ProjectedOptions {
  int max_iter = 500;
  double conv_tol = 1e-9;
  int polish_iter = 60;
  int polish_every = 10;
  int trial_polish_iter = 8;
};

struct ProjectedRun {
  Eigen::VectorXd x, y;
  double sigma = 0.0;
  double lm_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;  // stationarity residual of the normalized triple
  double step = 0.0;      // last polish step length
  std::vector<Eigen::MatrixXd> corrections;  // per iteration, n x q
};

// Levenberg-Marquardt on the projected cost, then Gauss-Newton on the stationarity system.
ProjectedRun run_projected(const FixedLambdaModel& model, const Eigen::VectorXd& x0,
                           const ProjectedOptions& opt);

}  // namespace netobs

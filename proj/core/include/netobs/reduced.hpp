#pragma once

#include <Eigen/Dense>

#include "netobs/network.hpp"

namespace netobs {

/// Reduced real-variable blocks for a fixed candidate eigenvalue.
struct ReducedProblem {
  Eigen::MatrixXd a_bar;  // [A12; A22], n x q
  Eigen::MatrixXd m_bar;  // [0; Im(lambda) I]
  Eigen::MatrixXd n_bar;  // [0; Re(lambda) I]
  Eigen::MatrixXd v_bar;  // [V12; V22], binary
  Complex lambda;

  int n() const { return static_cast<int>(a_bar.rows()); }
  int q() const { return static_cast<int>(a_bar.cols()); }
  bool is_real() const { return lambda.imag() == 0.0; }
  // [[A-N, M], [-M, A-N]], 2n x 2q.
  Eigen::MatrixXd a_tilde() const;
  // A-N, the operator of the real-eigenvalue formulation.
  Eigen::MatrixXd real_operator() const { return a_bar - n_bar; }
};

ReducedProblem build_reduced(const CanonicalForm& cf, Complex lambda);

/// Stationary triple; x = (x_Re, x_Im) has length 2q, y = (y1, y2) has length 2n.
struct CandidateTriple {
  double sigma = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

struct Weightings {
  Eigen::VectorXd s_x, t_x, q_x;  // length n
  Eigen::VectorXd s_y, t_y, q_y;  // length q
  Eigen::MatrixXd d_x() const;    // [[S_x, T_x], [T_x, Q_x]]
  Eigen::MatrixXd d_y() const;    // [[S_y, T_y], [T_y, Q_y]]
};

Weightings build_weightings(const ReducedProblem& rp, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& y);

struct PencilPair {
  Eigen::MatrixXd h;
  Eigen::MatrixXd d;
  Eigen::MatrixXd a_tilde;
  int size() const { return static_cast<int>(h.rows()); }
};

// Pencil on z = [x; y]: H = [[0, A~^T], [A~, 0]], D = diag(D_y, D_x).
PencilPair assemble_pencil(const ReducedProblem& rp, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y);
// Real-eigenvalue pencil on z = [x_Re; y1]: H = [[0, K^T], [K, 0]], D = diag(S_y, S_x), K = A-N.
PencilPair assemble_real_pencil(const ReducedProblem& rp, const Eigen::VectorXd& x_re,
                                const Eigen::VectorXd& y1);

// Normalizes (alpha = sgn(sigma)/|x|, beta = 1/|y|, sigma' = sigma/(alpha beta)).
CandidateTriple normalize_triple(const CandidateTriple& t);

// |A~^T y - sigma D_y x| and |A~ x - sigma D_x y| stacked.
double stationarity_residual(const ReducedProblem& rp, const CandidateTriple& t);

enum class SignVariant { kPlus, kMinus };
// kFlipped keeps the variant kBestResidual would reject (test hook).
enum class SignPolicy { kBestResidual, kPlusOnly, kMinusOnly, kFlipped };

const char* to_string(SignVariant s);

struct Reconstruction {
  Perturbation perturbation;
  // Canonical-coordinate eigenvector (zeros on pinned nodes), unit norm.
  Eigen::VectorXcd eigenvector_canonical;
  // Eigenvector in original node order.
  Eigen::VectorXcd eigenvector;
  SignVariant sign = SignVariant::kPlus;
  double eig_residual = 0.0;        // |(A+Delta)x - lambda x| for the kept variant
  double other_sign_residual = 0.0;
  double identity_lhs = 0.0;        // |Delta|_F^2
  double identity_rhs = 0.0;        // sigma x^T A~^T y
  double bound_rhs = 0.0;           // sigma |A~|_F
  bool accepted = false;
};

// Minimum-norm perturbation built from (sigma, x, y); rejects (accepted = false) when the
// eigen-constraint residual exceeds `tol`.
Reconstruction reconstruct_perturbation(const ReducedProblem& rp, const CandidateTriple& t,
                                        const CanonicalForm& cf, double tol = 1e-8,
                                        SignPolicy policy = SignPolicy::kBestResidual);

// Stationarity-in-lambda diagnostic: returns (l^T [0; x_Im]-type inner products)
// for the real and imaginary parts of lambda.
Eigen::Vector2d lambda_orthogonality(const ReducedProblem& rp, const CandidateTriple& t);

}  // namespace netobs

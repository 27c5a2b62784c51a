#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace netobs {

using Complex = std::complex<double>;

struct ObservabilityOptions {
  // Smallest PBH singular value still accepted as observable at construction.
  double a1_threshold = 1e-10;
  // Callers holding a structural certificate may skip the numeric check.
  bool enforce_a1 = true;
};

struct ObservabilityReport {
  bool observable = true;
  // min over eigenvalues of A of sigma_min([lambda I - A; C_O]).
  double margin = 0.0;
  Complex worst_eigenvalue{0.0, 0.0};
};

/// Weighted directed network with sensor nodes. Node indices are 0-based.
class NetworkSystem {
 public:
  // Edge set taken from the nonzero pattern of `weights`.
  NetworkSystem(Eigen::MatrixXd weights, std::vector<int> sensors,
                ObservabilityOptions options = {});
  // Explicit edge set; zero-weight edges are allowed.
  NetworkSystem(Eigen::MatrixXd weights, Eigen::MatrixXi edges,
                std::vector<int> sensors, ObservabilityOptions options = {});

  int n() const { return static_cast<int>(weights_.rows()); }
  int p() const { return static_cast<int>(sensors_.size()); }
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::MatrixXi& edges() const { return edges_; }
  const std::vector<int>& sensors() const { return sensors_; }
  bool is_sensor(int node) const;
  Eigen::MatrixXd output_matrix() const;
  // Margin computed at construction (0 when the check was skipped).
  double observability_margin() const { return margin_; }

 private:
  Eigen::MatrixXd weights_;
  Eigen::MatrixXi edges_;
  std::vector<int> sensors_;
  double margin_ = 0.0;
};

/// Binary mask of admissible perturbation entries.
class ConstraintMask {
 public:
  explicit ConstraintMask(Eigen::MatrixXi mask);
  static ConstraintMask same_as_graph(const NetworkSystem& net);
  static ConstraintMask from_pairs(int n, const std::vector<std::pair<int, int>>& pairs);

  int n() const { return static_cast<int>(mask_.rows()); }
  bool allows(int i, int j) const { return mask_(i, j) != 0; }
  const Eigen::MatrixXi& mask() const { return mask_; }

 private:
  Eigen::MatrixXi mask_;
};

class Perturbation {
 public:
  // Throws InvalidInput if delta has a nonzero (or negative zero) entry off the mask.
  Perturbation(Eigen::MatrixXd delta, const ConstraintMask& mask);

  const Eigen::MatrixXd& delta() const { return delta_; }
  double frob_cost() const { return frob_cost_; }
  double frobenius_norm() const;

 private:
  Eigen::MatrixXd delta_;
  double frob_cost_ = 0.0;
};

/// Relabeling that puts the zero-pinned nodes (sensors first) at the front.
struct CanonicalForm {
  // order[k] = original index of canonical node k.
  std::vector<int> order;
  // Number of pinned leading nodes (sensors plus any excluded nodes).
  int p = 0;
  // Number of genuine sensors among the pinned nodes.
  int sensor_count = 0;
  Eigen::MatrixXd a;
  Eigen::MatrixXi v;
  ConstraintMask mask{Eigen::MatrixXi::Zero(0, 0)};

  int n() const { return static_cast<int>(a.rows()); }
  int q() const { return n() - p; }
  Eigen::MatrixXd a11() const { return a.topLeftCorner(p, p); }
  Eigen::MatrixXd a12() const { return a.topRightCorner(p, q()); }
  Eigen::MatrixXd a21() const { return a.bottomLeftCorner(q(), p); }
  Eigen::MatrixXd a22() const { return a.bottomRightCorner(q(), q()); }
  Eigen::MatrixXi v_bar() const { return v.rightCols(q()); }
  // Canonical -> original coordinates.
  Eigen::MatrixXd restore(const Eigen::MatrixXd& m) const;
  Eigen::MatrixXi restore(const Eigen::MatrixXi& m) const;
  Eigen::VectorXcd restore(const Eigen::VectorXcd& x) const;
  Eigen::MatrixXd output_matrix() const;
};

CanonicalForm canonicalize(const NetworkSystem& net, const ConstraintMask& mask);
// Eigenvectors are restricted to `support` (non-sensor nodes); every other
// node is pinned to zero along with the sensors.
CanonicalForm canonicalize(const NetworkSystem& net, const ConstraintMask& mask,
                           const std::vector<int>& support);

ObservabilityReport is_observable(const Eigen::MatrixXd& a, const std::vector<int>& sensors,
                                  double threshold = 1e-10);
ObservabilityReport is_observable(const NetworkSystem& net, double threshold = 1e-10);

// sigma_min([lambda I - M; C]).
double pbh_sigma_min(const Eigen::MatrixXd& m, const Eigen::MatrixXd& c, Complex lambda);
// Right singular vector for sigma_min of the PBH matrix.
Eigen::VectorXcd pbh_vector(const Eigen::MatrixXd& m, const Eigen::MatrixXd& c, Complex lambda);

struct UnobservabilityReport {
  double r_eig = 0.0;
  double r_out = 0.0;
  double sigma_min = 0.0;
  Eigen::VectorXcd certificate;
  bool verified = false;
};

// Uses the PBH singular vector as certificate.
UnobservabilityReport verify_unobservability(const NetworkSystem& net, const Perturbation& pert,
                                             Complex lambda, double threshold = 1e-8);
// Uses the supplied eigenvector (normalized internally).
UnobservabilityReport verify_unobservability(const NetworkSystem& net, const Perturbation& pert,
                                             Complex lambda, const Eigen::VectorXcd& x,
                                             double threshold = 1e-8);

}  // namespace netobs

#pragma once

#include <utility>
#include <vector>

#include "netobs/network.hpp"

namespace netobs {

enum class Branch { kEdgeDeletion, kSymmetryCreation, kRootSystem };
const char* to_string(Branch b);

struct OracleResult {
  double delta = 0.0;  // Frobenius norm of the optimal perturbation
  Complex lambda_star{0.0, 0.0};
  Eigen::MatrixXd perturbation;
  Branch branch = Branch::kEdgeDeletion;
  // Edge deletion: the deleted edge. Symmetry: the two equalized leaves.
  std::pair<int, int> where{-1, -1};
};

// Trailing 2x2 block (b22, b23, b32, b33) of a stationary 3-node line.
struct Line3Root {
  double b22, b23, b32, b33;
  double cost;      // |B - A|_F^2 including the deleted a12
  double residual;  // max-abs of the four stationarity equations
};

struct Line3Result {
  OracleResult best;
  std::vector<Line3Root> roots;  // distinct roots, ascending cost
  bool found = false;
};

// Residuals of the four stationarity equations for a 3-node line with O = {1}.
Eigen::Vector4d line3_equations(const Eigen::Matrix3d& a, Complex lambda, const Eigen::Vector4d& b);

// Multi-start damped Newton over the stationarity system. Throws InvalidInput for
// real lambda or wrong sparsity; `found` is false if no admissible root converged.
Line3Result line3_optimal(const Eigen::MatrixXd& a, Complex lambda);

bool has_line_structure(const Eigen::MatrixXd& a);
bool has_star_structure(const Eigen::MatrixXd& a);

// Sensor {1}: min superdiagonal weight, tie to smallest index.
OracleResult line_radius(const Eigen::MatrixXd& a);
// Sensor at the hub: min over spokes a_1i and gamma = min |a_ii - a_jj| / sqrt(2).
OracleResult star_radius(const Eigen::MatrixXd& a);
double star_gamma(const Eigen::MatrixXd& a);

// Gamma(1/k) Gamma(w+1) / (sqrt(k) Gamma(w+1+1/k)), via log-Gamma.
double cut_bound(int k, int omega);

struct CutFamily {
  std::vector<std::vector<std::pair<int, int>>> cuts;  // directed edges (i, j): a_ij
  int k = 0;
  int omega() const { return static_cast<int>(cuts.size()); }
};

// Nodes whose state can reach a sensor when `removed` edges are dropped.
std::vector<char> observed_nodes(const Eigen::MatrixXi& edges, const std::vector<int>& sensors,
                                 const std::vector<std::pair<int, int>>& removed = {});

// Greedy lexicographic packing of pairwise disjoint minimal k-cuts (k <= 3).
CutFamily enumerate_cut_family(const NetworkSystem& net, int k);

// Perturbation deleting the given edges; cost = sum of squared weights.
Eigen::MatrixXd deletion_perturbation(const Eigen::MatrixXd& a,
                                      const std::vector<std::pair<int, int>>& cut);

}  // namespace netobs

#pragma once

#include <optional>
#include <string>

#include "netobs/network.hpp"

namespace netobs {

struct NetworkFile {
  NetworkSystem net;
  ConstraintMask mask;
};

// Format: { "n", "edges": [[i, j, w], ...], "sensors": [...],
//           "constraint": "same_as_graph" | [[i, j], ...] }, 1-based indices.
// Parse problems throw InvalidInput; an unobservable pair throws Unobservable.
NetworkFile parse_network(const std::string& json_text, ObservabilityOptions options = {});
NetworkFile load_network(const std::string& path, ObservabilityOptions options = {});
std::string network_to_json(const NetworkSystem& net, const ConstraintMask& mask);

// Dense row-major perturbation with explicit zeros.
// With a report, its residuals are stored under "residuals" for later re-checks.
std::string perturbation_to_json(const Perturbation& pert, Complex lambda,
                                 const Eigen::VectorXcd& certificate,
                                 const UnobservabilityReport* report = nullptr);
struct StoredResiduals {
  double r_eig = 0.0;
  double r_out = 0.0;
  double sigma_min = 0.0;
};
struct PerturbationFile {
  Eigen::MatrixXd delta;
  Complex lambda;
  Eigen::VectorXcd certificate;
  std::optional<StoredResiduals> residuals;
};
PerturbationFile parse_perturbation(const std::string& json_text);

std::string read_text_file(const std::string& path);

}  // namespace netobs

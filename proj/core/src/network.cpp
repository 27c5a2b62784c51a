#include "netobs/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "netobs/errors.hpp"

namespace netobs {

namespace {

void check_sensors(int n, std::vector<int>& sensors) {
  if (n < 2) throw InvalidInput("network needs at least 2 nodes");
  std::vector<int> sorted = sensors;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidInput("duplicate sensor index");
  for (int s : sensors)
    if (s < 0 || s >= n) throw InvalidInput("sensor index out of range");
  if (sensors.empty()) throw InvalidInput("at least one sensor is required");
  if (static_cast<int>(sensors.size()) >= n)
    throw InvalidInput("at least one non-sensor node is required");
}

Eigen::MatrixXd selector(int n, const std::vector<int>& rows) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<int>(rows.size()), n);
  for (size_t k = 0; k < rows.size(); ++k) c(static_cast<int>(k), rows[k]) = 1.0;
  return c;
}

}  // namespace

NetworkSystem::NetworkSystem(Eigen::MatrixXd weights, std::vector<int> sensors,
                             ObservabilityOptions options)
    : NetworkSystem(weights, (weights.array() != 0.0).cast<int>().matrix(),
                    std::move(sensors), options) {}

NetworkSystem::NetworkSystem(Eigen::MatrixXd weights, Eigen::MatrixXi edges,
                             std::vector<int> sensors, ObservabilityOptions options)
    : weights_(std::move(weights)), edges_(std::move(edges)), sensors_(std::move(sensors)) {
  if (weights_.rows() != weights_.cols()) throw InvalidInput("weight matrix must be square");
  if (edges_.rows() != weights_.rows() || edges_.cols() != weights_.cols())
    throw InvalidInput("edge pattern dimension mismatch");
  if (!weights_.allFinite()) throw InvalidInput("weights must be finite");
  check_sensors(n(), sensors_);
  for (int i = 0; i < n(); ++i)
    for (int j = 0; j < n(); ++j) {
      if (edges_(i, j) != 0 && edges_(i, j) != 1) throw InvalidInput("edge pattern must be binary");
      if (weights_(i, j) != 0.0 && edges_(i, j) == 0)
        throw InvalidInput("nonzero weight outside the edge set");
    }
  if (options.enforce_a1) {
    ObservabilityReport rep = is_observable(weights_, sensors_, options.a1_threshold);
    margin_ = rep.margin;
    if (!rep.observable) {
      std::ostringstream msg;
      msg << "network is not observable: PBH margin " << rep.margin << " at eigenvalue "
          << rep.worst_eigenvalue;
      throw Unobservable(msg.str());
    }
  }
}

bool NetworkSystem::is_sensor(int node) const {
  return std::find(sensors_.begin(), sensors_.end(), node) != sensors_.end();
}

Eigen::MatrixXd NetworkSystem::output_matrix() const { return selector(n(), sensors_); }

ConstraintMask::ConstraintMask(Eigen::MatrixXi mask) : mask_(std::move(mask)) {
  if (mask_.rows() != mask_.cols()) throw InvalidInput("constraint mask must be square");
  for (int i = 0; i < mask_.rows(); ++i)
    for (int j = 0; j < mask_.cols(); ++j)
      if (mask_(i, j) != 0 && mask_(i, j) != 1)
        throw InvalidInput("constraint mask entries must be 0 or 1");
}

ConstraintMask ConstraintMask::same_as_graph(const NetworkSystem& net) {
  return ConstraintMask(net.edges());
}

ConstraintMask ConstraintMask::from_pairs(int n, const std::vector<std::pair<int, int>>& pairs) {
  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(n, n);
  for (auto [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= n || j >= n) throw InvalidInput("constraint index out of range");
    if (m(i, j)) throw InvalidInput("duplicate constraint entry");
    m(i, j) = 1;
  }
  return ConstraintMask(m);
}

Perturbation::Perturbation(Eigen::MatrixXd delta, const ConstraintMask& mask)
    : delta_(std::move(delta)) {
  if (delta_.rows() != mask.n() || delta_.cols() != mask.n())
    throw InvalidInput("perturbation dimension mismatch");
  for (int i = 0; i < delta_.rows(); ++i)
    for (int j = 0; j < delta_.cols(); ++j) {
      const double d = delta_(i, j);
      if (!std::isfinite(d)) throw InvalidInput("perturbation entries must be finite");
      if (!mask.allows(i, j) && (d != 0.0 || std::signbit(d)))
        throw InvalidInput("perturbation has support outside the constraint mask");
    }
  frob_cost_ = delta_.squaredNorm();
}

double Perturbation::frobenius_norm() const { return std::sqrt(frob_cost_); }

Eigen::MatrixXd CanonicalForm::restore(const Eigen::MatrixXd& m) const {
  Eigen::MatrixXd out(n(), n());
  for (int i = 0; i < n(); ++i)
    for (int j = 0; j < n(); ++j) out(order[i], order[j]) = m(i, j);
  return out;
}

Eigen::MatrixXi CanonicalForm::restore(const Eigen::MatrixXi& m) const {
  Eigen::MatrixXi out(n(), n());
  for (int i = 0; i < n(); ++i)
    for (int j = 0; j < n(); ++j) out(order[i], order[j]) = m(i, j);
  return out;
}

Eigen::VectorXcd CanonicalForm::restore(const Eigen::VectorXcd& x) const {
  Eigen::VectorXcd out(n());
  for (int i = 0; i < n(); ++i) out(order[i]) = x(i);
  return out;
}

Eigen::MatrixXd CanonicalForm::output_matrix() const {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(sensor_count, n());
  c.leftCols(sensor_count).setIdentity();
  return c;
}

CanonicalForm canonicalize(const NetworkSystem& net, const ConstraintMask& mask) {
  std::vector<int> support;
  for (int i = 0; i < net.n(); ++i)
    if (!net.is_sensor(i)) support.push_back(i);
  return canonicalize(net, mask, support);
}

CanonicalForm canonicalize(const NetworkSystem& net, const ConstraintMask& mask,
                           const std::vector<int>& support) {
  const int n = net.n();
  if (mask.n() != n) throw InvalidInput("mask and network dimensions differ");
  std::vector<char> free(n, 0);
  for (int s : support) {
    if (s < 0 || s >= n) throw InvalidInput("support index out of range");
    if (net.is_sensor(s)) throw InvalidInput("support may not contain sensor nodes");
    if (free[s]) throw InvalidInput("duplicate support index");
    free[s] = 1;
  }
  if (support.empty()) throw InvalidInput("support must be nonempty");

  CanonicalForm cf;
  cf.order = net.sensors();
  for (int i = 0; i < n; ++i)
    if (!net.is_sensor(i) && !free[i]) cf.order.push_back(i);
  cf.p = static_cast<int>(cf.order.size());
  cf.sensor_count = net.p();
  for (int s : support) cf.order.push_back(s);
  // Keep the free block in ascending original order for stable layouts.
  std::sort(cf.order.begin() + cf.p, cf.order.end());

  cf.a.resize(n, n);
  cf.v.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cf.a(i, j) = net.weights()(cf.order[i], cf.order[j]);
      cf.v(i, j) = mask.mask()(cf.order[i], cf.order[j]);
    }
  cf.mask = mask;
  return cf;
}

double pbh_sigma_min(const Eigen::MatrixXd& m, const Eigen::MatrixXd& c, Complex lambda) {
  const int n = static_cast<int>(m.rows());
  Eigen::MatrixXcd stacked(n + c.rows(), n);
  stacked.topRows(n) = lambda * Eigen::MatrixXcd::Identity(n, n) - m.cast<Complex>();
  stacked.bottomRows(c.rows()) = c.cast<Complex>();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(stacked);
  return svd.singularValues()(n - 1);
}

Eigen::VectorXcd pbh_vector(const Eigen::MatrixXd& m, const Eigen::MatrixXd& c, Complex lambda) {
  const int n = static_cast<int>(m.rows());
  Eigen::MatrixXcd stacked(n + c.rows(), n);
  stacked.topRows(n) = lambda * Eigen::MatrixXcd::Identity(n, n) - m.cast<Complex>();
  stacked.bottomRows(c.rows()) = c.cast<Complex>();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(stacked, Eigen::ComputeFullV);
  return svd.matrixV().col(n - 1);
}

ObservabilityReport is_observable(const Eigen::MatrixXd& a, const std::vector<int>& sensors,
                                  double threshold) {
  const int n = static_cast<int>(a.rows());
  const Eigen::MatrixXd c = selector(n, sensors);
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  ObservabilityReport rep;
  rep.margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const Complex lam = es.eigenvalues()(k);
    const double s = pbh_sigma_min(a, c, lam);
    if (s < rep.margin) {
      rep.margin = s;
      rep.worst_eigenvalue = lam;
    }
  }
  rep.observable = rep.margin > threshold;
  return rep;
}

ObservabilityReport is_observable(const NetworkSystem& net, double threshold) {
  return is_observable(net.weights(), net.sensors(), threshold);
}

UnobservabilityReport verify_unobservability(const NetworkSystem& net, const Perturbation& pert,
                                             Complex lambda, double threshold) {
  const Eigen::MatrixXd b = net.weights() + pert.delta();
  return verify_unobservability(net, pert, lambda, pbh_vector(b, net.output_matrix(), lambda),
                                threshold);
}

UnobservabilityReport verify_unobservability(const NetworkSystem& net, const Perturbation& pert,
                                             Complex lambda, const Eigen::VectorXcd& x,
                                             double threshold) {
  if (x.size() != net.n()) throw InvalidInput("certificate dimension mismatch");
  const double nx = x.norm();
  if (!(nx > 0.0)) throw InvalidInput("certificate vector is zero");
  const Eigen::MatrixXd b = net.weights() + pert.delta();
  const Eigen::MatrixXd c = net.output_matrix();
  UnobservabilityReport rep;
  rep.certificate = x / nx;
  rep.r_eig = (b.cast<Complex>() * rep.certificate - lambda * rep.certificate).norm();
  rep.r_out = (c.cast<Complex>() * rep.certificate).norm();
  rep.sigma_min = pbh_sigma_min(b, c, lambda);
  rep.verified = rep.sigma_min <= threshold;
  return rep;
}

}  // namespace netobs

#include <gtest/gtest.h>

#include <cmath>

#include "netobs/errors.hpp"
#include "netobs/network.hpp"
#include "netobs/network_io.hpp"

using namespace netobs;

namespace {

Eigen::MatrixXd line3() {
  Eigen::MatrixXd a(3, 3);
  a << 0.3, 0.8, 0.0, 0.5, 0.6, 0.7, 0.0, 0.4, 0.9;
  return a;
}

// Kalman rank of [C; CA; ...; CA^{n-1}], computed without the PBH route.
int kalman_rank(const Eigen::MatrixXd& a, const std::vector<int>& sensors) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<int>(sensors.size()), n);
  for (size_t k = 0; k < sensors.size(); ++k) c(static_cast<int>(k), sensors[k]) = 1.0;
  Eigen::MatrixXd o(c.rows() * n, n);
  Eigen::MatrixXd block = c;
  for (int k = 0; k < n; ++k) {
    o.middleRows(k * c.rows(), c.rows()) = block;
    block = block * a;
  }
  return static_cast<int>(Eigen::FullPivLU<Eigen::MatrixXd>(o).rank());
}

}  // namespace

TEST(NetworkSystem, RejectsBadSensorSets) {
  const Eigen::MatrixXd a = line3();
  EXPECT_THROW(NetworkSystem(a, {}), InvalidInput);
  EXPECT_THROW(NetworkSystem(a, {0, 0}), InvalidInput);
  EXPECT_THROW(NetworkSystem(a, {3}), InvalidInput);
  EXPECT_THROW(NetworkSystem(a, {0, 1, 2}), InvalidInput);
}

TEST(NetworkSystem, RejectsWeightsOffTheEdgeSet) {
  Eigen::MatrixXi e = Eigen::MatrixXi::Zero(3, 3);
  e(0, 1) = e(1, 2) = 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 1) = 1.0;
  a(2, 0) = 0.5;
  EXPECT_THROW(NetworkSystem(a, e, {0}), InvalidInput);
}

TEST(NetworkSystem, ZeroWeightEdgeIsAllowedButBreaksObservability) {
  Eigen::MatrixXd a = line3();
  a(0, 1) = 0.0;
  Eigen::MatrixXi e = (line3().array() != 0.0).cast<int>();
  EXPECT_THROW(NetworkSystem(a, e, {0}), Unobservable);
  const NetworkSystem net(a, e, {0}, {1e-10, false});
  EXPECT_EQ(net.edges()(0, 1), 1);
}

TEST(NetworkSystem, ObservabilityAgreesWithKalmanRank) {
  std::srand(3);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (std::rand() % 3 == 0) a(i, j) = 1.0 + std::rand() % 3;
    const std::vector<int> sensors = {0};
    const bool kalman = kalman_rank(a, sensors) == 4;
    EXPECT_EQ(is_observable(a, sensors, 1e-8).observable, kalman) << a;
  }
}

TEST(ConstraintMask, SameAsGraphAndPairs) {
  const NetworkSystem net(line3(), {0});
  const ConstraintMask m = ConstraintMask::same_as_graph(net);
  EXPECT_EQ(m.mask(), net.edges());
  EXPECT_THROW(ConstraintMask::from_pairs(3, {{0, 1}, {0, 1}}), InvalidInput);
  EXPECT_THROW(ConstraintMask::from_pairs(3, {{0, 3}}), InvalidInput);
  const ConstraintMask p = ConstraintMask::from_pairs(3, {{2, 0}});
  EXPECT_TRUE(p.allows(2, 0));
  EXPECT_FALSE(p.allows(0, 2));
}

TEST(Perturbation, RejectsSupportOffMaskIncludingNegativeZero) {
  const NetworkSystem net(line3(), {0});
  const ConstraintMask m = ConstraintMask::same_as_graph(net);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d(0, 2) = 1e-3;
  EXPECT_THROW(Perturbation(d, m), InvalidInput);
  d(0, 2) = -0.0;
  EXPECT_THROW(Perturbation(d, m), InvalidInput);
  d(0, 2) = 0.0;
  d(0, 1) = 3.0;
  d(1, 1) = 4.0;
  const Perturbation p(d, m);
  EXPECT_DOUBLE_EQ(p.frob_cost(), 25.0);
  EXPECT_DOUBLE_EQ(p.frobenius_norm(), 5.0);
}

TEST(CanonicalForm, PinsSensorsFirstAndRestoresExactly) {
  Eigen::MatrixXd a(4, 4);
  a << 1, 2, 0, 0, 3, 4, 5, 0, 0, 6, 7, 8, 0, 0, 9, 10;
  const NetworkSystem net(a, {2});
  const CanonicalForm cf = canonicalize(net, ConstraintMask::same_as_graph(net));
  EXPECT_EQ(cf.order.front(), 2);
  EXPECT_EQ(cf.p, 1);
  EXPECT_EQ(cf.restore(cf.a), a);
  EXPECT_EQ(cf.restore(cf.v), net.edges());
  Eigen::MatrixXd c = cf.output_matrix();
  EXPECT_EQ(c.rows(), 1);
  EXPECT_EQ(c(0, 0), 1.0);

  const CanonicalForm restricted = canonicalize(net, ConstraintMask::same_as_graph(net), {3});
  EXPECT_EQ(restricted.p, 3);
  EXPECT_EQ(restricted.sensor_count, 1);
  EXPECT_EQ(restricted.order.back(), 3);
  EXPECT_THROW(canonicalize(net, ConstraintMask::same_as_graph(net), {2}), InvalidInput);
}

TEST(Unobservability, DeletingTheOnlyPathIsCertified) {
  const NetworkSystem net(line3(), {0});
  const ConstraintMask m = ConstraintMask::same_as_graph(net);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d(0, 1) = -0.8;
  const Perturbation p(d, m);
  // Eigenvalues of the trailing block are real here; use one of them.
  const Eigen::Matrix2d tail = line3().bottomRightCorner(2, 2);
  const double tr = tail.trace(), det = tail.determinant();
  const double lam = 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det));
  const UnobservabilityReport r = verify_unobservability(net, p, Complex(lam, 0.0));
  EXPECT_TRUE(r.verified);
  EXPECT_LT(r.sigma_min, 1e-10);
  const UnobservabilityReport far = verify_unobservability(net, p, Complex(5.0, 0.0));
  EXPECT_FALSE(far.verified);
}

TEST(NetworkIo, ParsesOneBasedEdgesAndConstraints) {
  const std::string text = R"({"n": 3, "edges": [[1,2,0.8],[2,3,0.7],[3,2,0.4],[2,2,0.1]],
    "sensors": [1], "constraint": [[1,2],[3,3]]})";
  const NetworkFile f = parse_network(text, {1e-10, false});
  EXPECT_EQ(f.net.n(), 3);
  EXPECT_DOUBLE_EQ(f.net.weights()(0, 1), 0.8);
  EXPECT_EQ(f.net.sensors(), std::vector<int>{0});
  EXPECT_TRUE(f.mask.allows(0, 1));
  EXPECT_TRUE(f.mask.allows(2, 2));
  EXPECT_FALSE(f.mask.allows(1, 2));
}

TEST(NetworkIo, RejectsMalformedInput) {
  EXPECT_THROW(parse_network("{not json"), InvalidInput);
  EXPECT_THROW(parse_network(R"({"n": 3, "edges": [[1,2,1.0]]})"), InvalidInput);
  EXPECT_THROW(parse_network(R"({"n": 3, "edges": [[0,1,1.0]], "sensors": [1], "constraint": "same_as_graph"})"),
               InvalidInput);
  EXPECT_THROW(parse_network(R"({"n": 3, "edges": [[1,2,1.0],[1,2,2.0]], "sensors": [1], "constraint": "same_as_graph"})"),
               InvalidInput);
  EXPECT_THROW(parse_network(R"({"n": 3, "edges": [[1,2,1.0]], "sensors": [1], "constraint": "everything"})"),
               InvalidInput);
}

TEST(NetworkIo, UnobservableFileThrowsUnobservable) {
  EXPECT_THROW(parse_network(R"({"n": 3, "edges": [[1,2,1.0],[2,2,0.5],[3,3,0.5]], "sensors": [1],
                                 "constraint": "same_as_graph"})"),
               Unobservable);
}

TEST(NetworkIo, NetworkRoundTrip) {
  const NetworkSystem net(line3(), {0});
  const ConstraintMask m = ConstraintMask::same_as_graph(net);
  const NetworkFile back = parse_network(network_to_json(net, m));
  EXPECT_EQ(back.net.weights(), net.weights());
  EXPECT_EQ(back.net.edges(), net.edges());
  EXPECT_EQ(back.mask.mask(), m.mask());
}

TEST(NetworkIo, PerturbationRoundTripIsBitExact) {
  const NetworkSystem net(line3(), {0});
  const ConstraintMask m = ConstraintMask::same_as_graph(net);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d(0, 1) = -0.8 / 3.0;
  d(1, 2) = std::sqrt(2.0);
  Eigen::VectorXcd x(3);
  x << Complex(0.0, 0.0), Complex(1.0 / 3.0, -0.1), Complex(0.7, std::acos(-1.0));
  UnobservabilityReport rep;
  rep.r_eig = 1.0 / 7.0;
  rep.r_out = 0.0;
  rep.sigma_min = 1e-17;
  const PerturbationFile f =
      parse_perturbation(perturbation_to_json(Perturbation(d, m), Complex(0.25, -1.0 / 3.0), x, &rep));
  EXPECT_EQ(f.delta, d);
  EXPECT_EQ(f.certificate, x);
  EXPECT_EQ(f.lambda, Complex(0.25, -1.0 / 3.0));
  ASSERT_TRUE(f.residuals.has_value());
  EXPECT_EQ(f.residuals->r_eig, 1.0 / 7.0);
  EXPECT_EQ(f.residuals->sigma_min, 1e-17);
}

#include <gtest/gtest.h>

#include <random>

#include "netobs/montecarlo.hpp"
#include "netobs/reduced.hpp"
#include "netobs/solver.hpp"
#include "netobs/spectrum.hpp"

using namespace netobs;

namespace {

struct Fixture {
  NetworkSystem net;
  ConstraintMask mask;
  CanonicalForm cf;
};

Fixture random_fixture(unsigned seed, int n, double density) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (u(rng) < 0.1 + density) a(i, j) = u(rng);
      if (u(rng) < 0.1 + density) m(i, j) = 1;
    }
  NetworkSystem net(a, {0}, {0.0, false});
  ConstraintMask mask(m);
  CanonicalForm cf = canonicalize(net, mask);
  return {net, mask, cf};
}

Eigen::VectorXd normal_vector(std::mt19937_64& rng, int m) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(m);
  for (int i = 0; i < m; ++i) v(i) = nd(rng);
  return v;
}

}  // namespace

TEST(Reduced, StackedOperatorMatchesComplexResidual) {
  const Fixture f = random_fixture(1, 5, 0.5);
  const Complex lambda(0.3, -0.7);
  const ReducedProblem rp = build_reduced(f.cf, lambda);
  std::mt19937_64 rng(2);
  const int n = rp.n(), q = rp.q(), p = n - q;
  const Eigen::VectorXd xr = normal_vector(rng, q), xi = normal_vector(rng, q);
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
  for (int j = 0; j < q; ++j) x(p + j) = Complex(xr(j), xi(j));
  const Eigen::VectorXcd r = f.cf.a.cast<Complex>() * x - lambda * x;
  Eigen::VectorXd stacked(2 * q);
  stacked << xr, xi;
  const Eigen::VectorXd got = rp.a_tilde() * stacked;
  EXPECT_LT((got.head(n) - r.real()).norm(), 1e-13);
  EXPECT_LT((got.tail(n) - r.imag()).norm(), 1e-13);
}

TEST(Reduced, WeightingsAreMaskedSumsOfSquares) {
  const Fixture f = random_fixture(3, 6, 0.4);
  const ReducedProblem rp = build_reduced(f.cf, Complex(0.1, 0.5));
  std::mt19937_64 rng(4);
  const int n = rp.n(), q = rp.q();
  const Eigen::VectorXd x = normal_vector(rng, 2 * q), y = normal_vector(rng, 2 * n);
  const Weightings w = build_weightings(rp, x, y);
  for (int i = 0; i < n; ++i) {
    double s = 0, t = 0, qq = 0;
    for (int j = 0; j < q; ++j) {
      s += rp.v_bar(i, j) * x(j) * x(j);
      t += rp.v_bar(i, j) * x(j) * x(q + j);
      qq += rp.v_bar(i, j) * x(q + j) * x(q + j);
    }
    EXPECT_NEAR(w.s_x(i), s, 1e-13);
    EXPECT_NEAR(w.t_x(i), t, 1e-13);
    EXPECT_NEAR(w.q_x(i), qq, 1e-13);
  }
  for (int j = 0; j < q; ++j) {
    double s = 0, qq = 0;
    for (int i = 0; i < n; ++i) {
      s += rp.v_bar(i, j) * y(i) * y(i);
      qq += rp.v_bar(i, j) * y(n + i) * y(n + i);
    }
    EXPECT_NEAR(w.s_y(j), s, 1e-13);
    EXPECT_NEAR(w.q_y(j), qq, 1e-13);
  }
}

TEST(Reduced, EmptyMaskGivesZeroWeightings) {
  Fixture f = random_fixture(5, 4, 0.5);
  const CanonicalForm cf = canonicalize(f.net, ConstraintMask(Eigen::MatrixXi::Zero(4, 4)));
  const ReducedProblem rp = build_reduced(cf, Complex(0.0, 1.0));
  std::mt19937_64 rng(6);
  const Weightings w = build_weightings(rp, normal_vector(rng, 2 * rp.q()), normal_vector(rng, 2 * rp.n()));
  EXPECT_EQ(w.d_x().norm(), 0.0);
  EXPECT_EQ(w.d_y().norm(), 0.0);
  const FixedLambdaResult r = solve_fixed_lambda(f.net, ConstraintMask(Eigen::MatrixXi::Zero(4, 4)),
                                                 Complex(0.0, 1.0), SolverConfig{});
  EXPECT_FALSE(r.ok());
}

TEST(Reduced, PencilIsSymmetricWithSemidefiniteD) {
  const Fixture f = random_fixture(7, 6, 0.5);
  const ReducedProblem rp = build_reduced(f.cf, Complex(-0.2, 0.9));
  std::mt19937_64 rng(8);
  const PencilPair pp = assemble_pencil(rp, normal_vector(rng, 2 * rp.q()), normal_vector(rng, 2 * rp.n()));
  EXPECT_EQ(pp.size(), 2 * rp.q() + 2 * rp.n());
  EXPECT_LT((pp.h - pp.h.transpose()).norm(), 1e-15);
  EXPECT_LT((pp.d - pp.d.transpose()).norm(), 1e-15);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pp.d);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(Reduced, RealPencilMatchesFullPencilOnNonzeroEigenvalues) {
  for (unsigned seed = 10; seed < 20; ++seed) {
    const Fixture f = random_fixture(seed, 5, 0.5);
    const ReducedProblem rp = build_reduced(f.cf, Complex(0.4, 0.0));
    std::mt19937_64 rng(seed);
    const Eigen::VectorXd xr = normal_vector(rng, rp.q()), y1 = normal_vector(rng, rp.n());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * rp.q()), y = Eigen::VectorXd::Zero(2 * rp.n());
    x.head(rp.q()) = xr;
    y.head(rp.n()) = y1;
    const PencilSpectrum full = generalized_spectrum(assemble_pencil(rp, x, y));
    const PencilSpectrum real = generalized_spectrum(assemble_real_pencil(rp, xr, y1));
    auto nonzero = [](const std::vector<double>& e) {
      std::vector<double> out;
      for (double v : e)
        if (std::abs(v) > 1e-9) out.push_back(v);
      return out;
    };
    const std::vector<double> a = nonzero(full.eigenvalues), b = nonzero(real.eigenvalues);
    ASSERT_EQ(a.size(), b.size()) << "seed " << seed;
    for (size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-9 * std::max(1.0, std::abs(a[k])));
  }
}

TEST(Reduced, CostIdentityHoldsAtConvergedTriples) {
  SolverConfig cfg;
  for (int t = 0; t < 10; ++t) {
    const Sample s = sample_network(Topology::kLine, 3, trial_seed(11, 3, t));
    const FixedLambdaResult r = solve_fixed_lambda(s.net, s.mask, Complex(0.0, 1.0), cfg);
    ASSERT_TRUE(r.ok());
    EXPECT_NEAR(r.identity_lhs, r.identity_rhs, 1e-6 * r.identity_lhs);
    EXPECT_LE(r.identity_lhs, r.bound_rhs + 1e-9);
    EXPECT_NEAR(r.identity_lhs, r.cost, 1e-12 * r.cost);
  }
}

TEST(Reduced, FlippedSignBreaksTheEigenConstraint) {
  const Sample s = sample_network(Topology::kLine, 3, trial_seed(12, 3, 0));
  const FixedLambdaResult r = solve_fixed_lambda(s.net, s.mask, Complex(0.0, 1.0), SolverConfig{});
  ASSERT_TRUE(r.ok());
  const CanonicalForm cf = canonicalize(s.net, s.mask);
  const ReducedProblem rp = build_reduced(cf, Complex(0.0, 1.0));
  const Reconstruction good = reconstruct_perturbation(rp, r.triple, cf);
  const Reconstruction bad = reconstruct_perturbation(rp, r.triple, cf, 1e-8, SignPolicy::kFlipped);
  EXPECT_TRUE(good.accepted);
  EXPECT_FALSE(bad.accepted);
  EXPECT_GT(bad.eig_residual, 1e-3);
  EXPECT_NE(good.sign, bad.sign);
}

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "netobs/errors.hpp"
#include "netobs/montecarlo.hpp"

using namespace netobs;

TEST(Sampling, StructureCounts) {
  const Sample line = sample_network(Topology::kLine, 5, 1);
  EXPECT_EQ((line.net.weights().array() != 0.0).count(), 13);
  EXPECT_EQ(line.net.edges().sum(), 13);
  EXPECT_EQ(line.mask.mask(), line.net.edges());
  const Sample star = sample_network(Topology::kStar, 5, 1);
  EXPECT_EQ((star.net.weights().array() != 0.0).count(), 13);
  for (int i = 1; i < 5; ++i) {
    EXPECT_NE(star.net.weights()(0, i), 0.0);
    EXPECT_NE(star.net.weights()(i, 0), 0.0);
  }
  EXPECT_TRUE(line_certificate(line.net.weights()));
  EXPECT_TRUE(star_certificate(star.net.weights()));
}

TEST(Sampling, DeterministicPerSeedAndSensitiveToIt) {
  EXPECT_EQ(sample_network(Topology::kStar, 8, 42).net.weights(), sample_network(Topology::kStar, 8, 42).net.weights());
  EXPECT_NE(sample_network(Topology::kStar, 8, 42).net.weights(), sample_network(Topology::kStar, 8, 43).net.weights());
  EXPECT_NE(trial_seed(0, 5, 1), trial_seed(0, 5, 2));
  EXPECT_NE(trial_seed(0, 5, 1), trial_seed(0, 6, 1));
}

TEST(Sampling, WeightsLieInTheUnitInterval) {
  for (int t = 0; t < 50; ++t) {
    const Eigen::MatrixXd a = sample_network(Topology::kLine, 10, trial_seed(3, 10, t)).net.weights();
    EXPECT_GE(a.minCoeff(), 0.0);
    EXPECT_LE(a.maxCoeff(), 1.0);
  }
}

TEST(Certificates, RejectDegenerateSamples) {
  Eigen::MatrixXd a = sample_network(Topology::kStar, 4, 5).net.weights();
  a(2, 2) = a(3, 3);
  EXPECT_FALSE(star_certificate(a));
  Eigen::MatrixXd l = sample_network(Topology::kLine, 4, 5).net.weights();
  l(1, 2) = 0.0;
  EXPECT_FALSE(line_certificate(l));
}

TEST(EnsembleSpec, Validation) {
  EnsembleSpec s;
  s.sizes = {5};
  s.trials = 0;
  EXPECT_THROW(s.validate(), InvalidInput);
  s.trials = 10;
  s.sizes = {2};
  EXPECT_THROW(s.validate(), InvalidInput);
  s.sizes = {5};
  s.topology = Topology::kFile;
  EXPECT_THROW(s.validate(), InvalidInput);
}

TEST(Ensemble, OracleLineMeanTracksOneOverN) {
  EnsembleSpec s;
  s.sizes = {5, 8};
  s.trials = 3000;
  s.seed = 17;
  const EnsembleResult r = estimate_expected_radius(s, EstimateMethod::kOracle);
  ASSERT_EQ(r.sizes.size(), 2u);
  for (const SizeSummary& z : r.sizes) {
    EXPECT_NEAR(z.mean, 1.0 / z.n, 3.0 * z.se);
    double acc = 0.0;
    for (double d : z.deltas) acc += (d - z.mean) * (d - z.mean);
    EXPECT_NEAR(z.se, std::sqrt(acc / (z.used - 1)) / std::sqrt(double(z.used)), 1e-12);
    EXPECT_EQ(z.upper_bound, 1.0 / z.n);
  }
}

TEST(Ensemble, StarBoundColumns) {
  EnsembleSpec s;
  s.topology = Topology::kStar;
  s.sizes = {6};
  s.trials = 10;
  const EnsembleResult r = estimate_expected_radius(s, EstimateMethod::kOracle);
  EXPECT_DOUBLE_EQ(r.sizes[0].lower_bound, 1.0 / (std::sqrt(2.0) * 6 * 5));
  EXPECT_DOUBLE_EQ(r.sizes[0].upper_bound, 1.0 / (std::sqrt(2.0) * 6 * 4));
  EXPECT_EQ(r.sizes[0].cut_bound, 1.0 / 6);
}

TEST(Ensemble, SameSeedGivesByteIdenticalCsv) {
  EnsembleSpec s;
  s.topology = Topology::kStar;
  s.sizes = {5, 7};
  s.trials = 40;
  s.seed = 5;
  auto csv = [&](const EnsembleSpec& spec) {
    std::ostringstream a;
    const EnsembleResult r = estimate_expected_radius(spec, EstimateMethod::kOracle);
    write_trials_csv(a, r);
    write_summary_csv(a, r, spec.topology);
    return a.str();
  };
  const std::string first = csv(s);
  EXPECT_EQ(first, csv(s));
  EXPECT_EQ(first.rfind("topology,n,trial,delta,method,lambda_re,lambda_im,branch,converged\n", 0), 0u);
  EnsembleSpec other = s;
  other.seed = 6;
  EXPECT_NE(first, csv(other));
  EnsembleSpec threaded = s;
  threaded.threads = 3;
  EXPECT_EQ(first, csv(threaded));
}

TEST(Ensemble, SolverMethodStaysAboveTheOracle) {
  EnsembleSpec s;
  s.sizes = {4};
  s.trials = 6;
  s.seed = 9;
  const EnsembleResult r = estimate_expected_radius(s, EstimateMethod::kSolver);
  EXPECT_EQ(r.sizes[0].below_oracle, 0);
  for (const TrialRecord& t : r.trials) {
    if (t.excluded) continue;
    EXPECT_GE(t.delta, t.oracle_delta - 1e-6);
    EXPECT_LE(t.delta, t.oracle_delta + 1e-4);
  }
}

TEST(Survival, FormulasAndDeviation) {
  EXPECT_DOUBLE_EQ(line_survival(10, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(line_survival(10, 0.5), std::pow(0.5, 9));
  EXPECT_EQ(line_survival(10, 1.5), 0.0);
  EXPECT_EQ(line_survival(10, -1.0), 1.0);
  EXPECT_DOUBLE_EQ(empirical_survival({0.1, 0.2, 0.3, 0.4}, 0.25), 0.5);
  EXPECT_DOUBLE_EQ(dkw_epsilon(5000, 0.001), std::sqrt(std::log(2000.0) / 10000.0));
  // Two points at 0.5 for n = 2, model 1 - x: jumps from 1 to 0 at 0.5.
  EXPECT_NEAR(max_survival_deviation({0.5, 0.5}, 2), 0.5, 1e-12);
}

TEST(Convergence, SmallRunReachesTheOracle) {
  ConvergenceSpec spec;
  spec.trials = 10;
  const ConvergenceResult r = convergence_experiment(spec);
  EXPECT_GE(r.used, 9);
  for (const ConvergenceTrial& t : r.trials)
    if (t.reference_ok && t.converged) EXPECT_LE(t.final_gap, 1e-5);
  ASSERT_FALSE(r.mean_gap.empty());
  EXPECT_LT(r.mean_gap.back(), r.mean_gap.front());
}

TEST(Convergence, RealLambdaFormulationsAgree) {
  ConvergenceSpec spec;
  spec.trials = 10;
  spec.lambda = Complex(0.5, 0.0);
  const ConvergenceResult r = convergence_experiment(spec);
  ASSERT_TRUE(r.formulation_gap.has_value());
  EXPECT_GE(r.used, 9);
  EXPECT_LE(*r.formulation_gap, 1e-8);
}

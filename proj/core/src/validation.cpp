#include "netobs/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "netobs/rng.hpp"

namespace netobs {

namespace {

Eigen::VectorXd unit_normal(std::mt19937_64& rng, int m) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(m);
  for (int i = 0; i < m; ++i) v(i) = nd(rng);
  return v / v.norm();
}

}  // namespace

PencilCase random_pencil_case(std::uint64_t seed, int index) {
  std::mt19937_64 rng(derive_seed({seed, static_cast<std::uint64_t>(index)}));
  static const char* kFamilies[] = {"line", "star", "random"};
  PencilCase c;
  c.index = index;
  c.family = kFamilies[index % 3];
  c.n = 3 + static_cast<int>(rng() % 6);
  const int n = c.n;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXi mask = Eigen::MatrixXi::Zero(n, n);
  std::vector<int> sensors = {0};
  if (c.family == "line") {
    for (int i = 0; i + 1 < n; ++i) {
      a(i, i + 1) = uniform01_open(rng);
      a(i + 1, i) = uniform01_open(rng);
    }
    for (int i = 0; i < n; ++i) a(i, i) = uniform01(rng);
    mask = (a.array() != 0.0).cast<int>();
  } else if (c.family == "star") {
    for (int i = 1; i < n; ++i) {
      a(0, i) = uniform01_open(rng);
      a(i, 0) = uniform01_open(rng);
      a(i, i) = uniform01(rng);
    }
    a(0, 0) = uniform01(rng);
    mask = (a.array() != 0.0).cast<int>();
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (uniform01(rng) < 0.5) a(i, j) = uniform01_open(rng);
        if (uniform01(rng) < 0.5) mask(i, j) = 1;
      }
    if (n > 4 && (rng() & 1)) sensors.push_back(n - 1);
  }

  const NetworkSystem net(a, sensors, ObservabilityOptions{0.0, false});
  const CanonicalForm cf = canonicalize(net, ConstraintMask(mask));
  c.real_form = index % 4 == 3;
  const double re = 2.0 * uniform01(rng) - 1.0;
  const double im = c.real_form ? 0.0 : 0.2 + 1.8 * uniform01(rng);
  c.lambda = Complex(re, im);
  const ReducedProblem rp = build_reduced(cf, c.lambda);
  if (c.real_form) {
    const Eigen::VectorXd x = unit_normal(rng, rp.q());
    const Eigen::VectorXd y = unit_normal(rng, rp.n());
    c.pencil = assemble_real_pencil(rp, x, y);
  } else {
    const Eigen::VectorXd x = unit_normal(rng, 2 * rp.q());
    const Eigen::VectorXd y = unit_normal(rng, 2 * rp.n());
    c.pencil = assemble_pencil(rp, x, y);
  }
  return c;
}

std::vector<Complex> qz_finite_eigenvalues(const PencilPair& pp, double beta_tol) {
  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(pp.h, pp.d, false);
  std::vector<Complex> out;
  for (int k = 0; k < pp.size(); ++k) {
    const Complex al = ges.alphas()(k);
    const double be = ges.betas()(k);
    if (std::abs(be) > beta_tol * std::abs(al) && be != 0.0) out.push_back(al / be);
  }
  std::sort(out.begin(), out.end(), [](Complex x, Complex y) { return x.real() < y.real(); });
  return out;
}

SpectrumCheck check_spectrum(const PencilPair& pp, const SpectrumOptions& opt) {
  const PencilSpectrum spec = generalized_spectrum(pp, opt);
  SpectrumCheck c;
  c.regular = spec.regular;
  c.finite = static_cast<int>(spec.eigenvalues.size());
  const std::vector<double>& e = spec.eigenvalues;
  auto scaled = [](double d, double v) { return d / std::max(1.0, std::abs(v)); };

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(pp.h);
  const Eigen::VectorXd sv = svd.singularValues();
  c.h_sigma_min = sv.size() == 0 || sv(0) == 0.0 ? 0.0 : sv(sv.size() - 1) / sv(0);

  c.zero_distance = std::numeric_limits<double>::infinity();
  for (double v : e) c.zero_distance = std::min(c.zero_distance, std::abs(v));
  for (double v : e) {
    double best = std::numeric_limits<double>::infinity();
    for (double w : e) best = std::min(best, std::abs(v + w));
    c.pairing = std::max(c.pairing, scaled(best, v));
  }

  const std::vector<Complex> qz = qz_finite_eigenvalues(pp);
  for (const Complex& z : qz) c.qz_max_imag = std::max(c.qz_max_imag, scaled(std::abs(z.imag()), std::abs(z)));
  if (qz.size() != e.size()) {
    c.qz_mismatch = std::numeric_limits<double>::infinity();
  } else {
    for (size_t k = 0; k < e.size(); ++k)
      c.qz_mismatch = std::max(c.qz_mismatch, scaled(std::abs(qz[k].real() - e[k]), e[k]));
  }
  return c;
}

}  // namespace netobs

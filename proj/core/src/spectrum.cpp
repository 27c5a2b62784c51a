#include "netobs/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace netobs {

PencilSpectrum generalized_spectrum(const PencilPair& pp, const SpectrumOptions& opt) {
  const int m = pp.size();
  PencilSpectrum out;
  const double hnorm = std::max(pp.h.norm(), 1e-300);
  const double dnorm = pp.d.norm();

  std::mt19937_64 rng(opt.probe_seed);
  std::uniform_real_distribution<double> unif(0.25, 1.75);
  out.probe_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < opt.probes; ++k) {
    const Complex lam(unif(rng) - 1.0, unif(rng));
    const Eigen::MatrixXcd pencil = pp.h.cast<Complex>() - lam * pp.d.cast<Complex>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil);
    const double scale = hnorm + std::abs(lam) * dnorm;
    out.probe_min = std::min(out.probe_min, svd.singularValues()(m - 1) / scale);
  }
  out.regular = out.probe_min > opt.probe_tol;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ed(pp.d);
  const Eigen::VectorXd& dw = ed.eigenvalues();
  const double dmax = dw.size() ? dw.cwiseAbs().maxCoeff() : 0.0;
  std::vector<int> range_idx, ker_idx;
  for (int i = 0; i < m; ++i) {
    if (dmax > 0.0 && dw(i) > opt.d_tol * dmax)
      range_idx.push_back(i);
    else
      ker_idx.push_back(i);
  }
  const int k1 = static_cast<int>(range_idx.size()), k0 = static_cast<int>(ker_idx.size());
  Eigen::MatrixXd v1(m, k1), v0(m, k0);
  Eigen::VectorXd lam1(k1);
  for (int i = 0; i < k1; ++i) {
    v1.col(i) = ed.eigenvectors().col(range_idx[i]);
    lam1(i) = dw(range_idx[i]);
  }
  for (int i = 0; i < k0; ++i) v0.col(i) = ed.eigenvectors().col(ker_idx[i]);

  if (k1 == 0) {
    out.infinite_count = m;
    out.common_kernel_dim = 0;
    return out;
  }

  const Eigen::MatrixXd h11 = v1.transpose() * pp.h * v1;
  Eigen::MatrixXd s = h11;
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(k1, k1);
  if (k0 > 0) {
    const Eigen::MatrixXd h10 = v1.transpose() * pp.h * v0;
    const Eigen::MatrixXd h00 = v0.transpose() * pp.h * v0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eh(h00);
    const double tol = opt.rank_tol * std::max(hnorm, 1.0);
    std::vector<int> nz, zz;
    for (int i = 0; i < k0; ++i) (std::abs(eh.eigenvalues()(i)) > tol ? nz : zz).push_back(i);
    for (int i : nz) {
      const Eigen::VectorXd u = h10 * eh.eigenvectors().col(i);
      s -= u * u.transpose() / eh.eigenvalues()(i);
    }
    if (!zz.empty()) {
      Eigen::MatrixXd g(k1, static_cast<int>(zz.size()));
      for (size_t i = 0; i < zz.size(); ++i) g.col(static_cast<int>(i)) = h10 * eh.eigenvectors().col(zz[i]);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeFullU);
      int rank = 0;
      for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) ++rank;
      out.common_kernel_dim = static_cast<int>(zz.size()) - rank;
      p = svd.matrixU().rightCols(k1 - rank);
    }
  }
  const int kr = static_cast<int>(p.cols());
  out.infinite_count = m - kr;
  if (kr == 0) return out;

  const Eigen::MatrixXd sp = p.transpose() * s * p;
  const Eigen::MatrixXd lp = p.transpose() * lam1.asDiagonal() * p;
  Eigen::LLT<Eigen::MatrixXd> llt(lp);
  const Eigen::MatrixXd linv = llt.matrixL().solve(Eigen::MatrixXd::Identity(kr, kr));
  Eigen::MatrixXd c = linv * sp * linv.transpose();
  c = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ec(c, Eigen::EigenvaluesOnly);
  out.eigenvalues.assign(ec.eigenvalues().data(), ec.eigenvalues().data() + kr);
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
  return out;
}

double smallest_positive(const PencilSpectrum& spec, double rel_floor) {
  double scale = 0.0;
  for (double e : spec.eigenvalues) scale = std::max(scale, std::abs(e));
  const double floor = rel_floor * std::max(scale, 1e-300);
  double best = std::numeric_limits<double>::quiet_NaN();
  for (double e : spec.eigenvalues)
    if (e > floor && !(best <= e)) best = e;
  return best;
}

}  // namespace netobs

#include "netobs/reduced.hpp"

#include <cmath>

#include "netobs/errors.hpp"

namespace netobs {

Eigen::MatrixXd ReducedProblem::a_tilde() const {
  const int n_ = n(), q_ = q();
  const Eigen::MatrixXd k = real_operator();
  Eigen::MatrixXd t(2 * n_, 2 * q_);
  t << k, m_bar, -m_bar, k;
  return t;
}

ReducedProblem build_reduced(const CanonicalForm& cf, Complex lambda) {
  const int n = cf.n(), p = cf.p, q = cf.q();
  ReducedProblem rp;
  rp.lambda = lambda;
  rp.a_bar = cf.a.rightCols(q);
  rp.v_bar = cf.v.rightCols(q).cast<double>();
  rp.m_bar = Eigen::MatrixXd::Zero(n, q);
  rp.n_bar = Eigen::MatrixXd::Zero(n, q);
  for (int k = 0; k < q; ++k) {
    rp.m_bar(p + k, k) = lambda.imag();
    rp.n_bar(p + k, k) = lambda.real();
  }
  return rp;
}

Eigen::MatrixXd Weightings::d_x() const {
  const int n = static_cast<int>(s_x.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  d.topLeftCorner(n, n).diagonal() = s_x;
  d.topRightCorner(n, n).diagonal() = t_x;
  d.bottomLeftCorner(n, n).diagonal() = t_x;
  d.bottomRightCorner(n, n).diagonal() = q_x;
  return d;
}

Eigen::MatrixXd Weightings::d_y() const {
  const int q = static_cast<int>(s_y.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2 * q, 2 * q);
  d.topLeftCorner(q, q).diagonal() = s_y;
  d.topRightCorner(q, q).diagonal() = t_y;
  d.bottomLeftCorner(q, q).diagonal() = t_y;
  d.bottomRightCorner(q, q).diagonal() = q_y;
  return d;
}

Weightings build_weightings(const ReducedProblem& rp, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& y) {
  const int n = rp.n(), q = rp.q();
  if (x.size() != 2 * q || y.size() != 2 * n) throw InvalidInput("weighting input dimensions");
  const Eigen::ArrayXd xr = x.head(q).array(), xi = x.tail(q).array();
  const Eigen::ArrayXd y1 = y.head(n).array(), y2 = y.tail(n).array();
  Weightings w;
  w.s_x = rp.v_bar * (xr * xr).matrix();
  w.t_x = rp.v_bar * (xr * xi).matrix();
  w.q_x = rp.v_bar * (xi * xi).matrix();
  w.s_y = rp.v_bar.transpose() * (y1 * y1).matrix();
  w.t_y = rp.v_bar.transpose() * (y1 * y2).matrix();
  w.q_y = rp.v_bar.transpose() * (y2 * y2).matrix();
  return w;
}

PencilPair assemble_pencil(const ReducedProblem& rp, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y) {
  const int n = rp.n(), q = rp.q();
  const int mx = 2 * q, m = 2 * q + 2 * n;
  const Weightings w = build_weightings(rp, x, y);
  PencilPair pp;
  pp.a_tilde = rp.a_tilde();
  pp.h = Eigen::MatrixXd::Zero(m, m);
  pp.h.topRightCorner(mx, 2 * n) = pp.a_tilde.transpose();
  pp.h.bottomLeftCorner(2 * n, mx) = pp.a_tilde;
  pp.d = Eigen::MatrixXd::Zero(m, m);
  pp.d.topLeftCorner(mx, mx) = w.d_y();
  pp.d.bottomRightCorner(2 * n, 2 * n) = w.d_x();
  return pp;
}

PencilPair assemble_real_pencil(const ReducedProblem& rp, const Eigen::VectorXd& x_re,
                                const Eigen::VectorXd& y1) {
  const int n = rp.n(), q = rp.q();
  if (x_re.size() != q || y1.size() != n) throw InvalidInput("real pencil input dimensions");
  const Eigen::MatrixXd k = rp.real_operator();
  PencilPair pp;
  pp.a_tilde = k;
  pp.h = Eigen::MatrixXd::Zero(q + n, q + n);
  pp.h.topRightCorner(q, n) = k.transpose();
  pp.h.bottomLeftCorner(n, q) = k;
  pp.d = Eigen::MatrixXd::Zero(q + n, q + n);
  pp.d.topLeftCorner(q, q).diagonal() =
      rp.v_bar.transpose() * y1.array().square().matrix();
  pp.d.bottomRightCorner(n, n).diagonal() = rp.v_bar * x_re.array().square().matrix();
  return pp;
}

CandidateTriple normalize_triple(const CandidateTriple& t) {
  const double nx = t.x.norm(), ny = t.y.norm();
  if (!(nx > 0.0) || !(ny > 0.0)) throw InvalidInput("cannot normalize a zero vector");
  const double alpha = (t.sigma < 0.0 ? -1.0 : 1.0) / nx;
  const double beta = 1.0 / ny;
  CandidateTriple out;
  out.x = alpha * t.x;
  out.y = beta * t.y;
  out.sigma = t.sigma / (alpha * beta);
  return out;
}

double stationarity_residual(const ReducedProblem& rp, const CandidateTriple& t) {
  const Weightings w = build_weightings(rp, t.x, t.y);
  const Eigen::MatrixXd at = rp.a_tilde();
  const double r1 = (at.transpose() * t.y - t.sigma * w.d_y() * t.x).squaredNorm();
  const double r2 = (at * t.x - t.sigma * w.d_x() * t.y).squaredNorm();
  return std::sqrt(r1 + r2);
}

const char* to_string(SignVariant s) { return s == SignVariant::kPlus ? "plus" : "minus"; }

namespace {

Eigen::MatrixXd delta_bar(const ReducedProblem& rp, const CandidateTriple& t, double sign) {
  const int n = rp.n(), q = rp.q();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, q);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < q; ++j)
      if (rp.v_bar(i, j) != 0.0)
        d(i, j) = -t.sigma * (t.y(i) * t.x(j) + sign * t.y(n + i) * t.x(q + j));
  return d;
}

double eig_residual(const CanonicalForm& cf, const Eigen::MatrixXd& dbar, const Eigen::VectorXcd& x,
                    Complex lambda) {
  Eigen::MatrixXd b = cf.a;
  b.rightCols(cf.q()) += dbar;
  return (b.cast<Complex>() * x - lambda * x).norm();
}

}  // namespace

Reconstruction reconstruct_perturbation(const ReducedProblem& rp, const CandidateTriple& t,
                                        const CanonicalForm& cf, double tol, SignPolicy policy) {
  const int n = rp.n(), q = rp.q(), p = cf.p;
  if (t.x.size() != 2 * q || t.y.size() != 2 * n) throw InvalidInput("triple dimensions");
  if (cf.n() != n || cf.q() != q) throw InvalidInput("canonical form does not match problem");

  Eigen::VectorXcd xc = Eigen::VectorXcd::Zero(n);
  for (int j = 0; j < q; ++j) xc(p + j) = Complex(t.x(j), t.x(q + j));
  const double nx = xc.norm();
  if (nx > 0.0) xc /= nx;

  const Eigen::MatrixXd plus = delta_bar(rp, t, 1.0);
  const Eigen::MatrixXd minus = delta_bar(rp, t, -1.0);
  const double r_plus = eig_residual(cf, plus, xc, rp.lambda);
  const double r_minus = eig_residual(cf, minus, xc, rp.lambda);

  SignVariant s = SignVariant::kPlus;
  if (policy == SignPolicy::kMinusOnly || (policy == SignPolicy::kBestResidual && r_minus < r_plus) ||
      (policy == SignPolicy::kFlipped && !(r_minus < r_plus)))
    s = SignVariant::kMinus;
  const Eigen::MatrixXd& kept = (s == SignVariant::kPlus) ? plus : minus;

  Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(n, n);
  dc.rightCols(q) = kept;
  Perturbation pert(cf.restore(dc), cf.mask);

  const Eigen::MatrixXd at = rp.a_tilde();
  Reconstruction rec{std::move(pert), xc, cf.restore(xc)};
  rec.sign = s;
  rec.eig_residual = (s == SignVariant::kPlus) ? r_plus : r_minus;
  rec.other_sign_residual = (s == SignVariant::kPlus) ? r_minus : r_plus;
  rec.identity_lhs = rec.perturbation.frob_cost();
  rec.identity_rhs = t.sigma * t.x.dot(at.transpose() * t.y);
  rec.bound_rhs = t.sigma * at.norm();
  rec.accepted = rec.eig_residual <= tol;
  return rec;
}

Eigen::Vector2d lambda_orthogonality(const ReducedProblem& rp, const CandidateTriple& t) {
  const int n = rp.n(), q = rp.q(), p = n - q;
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (int k = 0; k < q; ++k) {
    const double l1 = t.sigma * t.y(p + k), l2 = t.sigma * t.y(n + p + k);
    const double xr = t.x(k), xi = t.x(q + k);
    g(0) += -(l1 * xr + l2 * xi);
    g(1) += l1 * xi - l2 * xr;
  }
  return g;
}

}  // namespace netobs

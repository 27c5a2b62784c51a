#include "netobs/fixed_lambda.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "netobs/errors.hpp"

namespace netobs {

namespace {

constexpr double kNullRel = 1e-14;   // 2x2 weighting eigenvalues below this fraction of the trace
constexpr double kEmptyRel = 1e-28;  // row weighting below this times |x|^2 counts as empty

struct Sym2 {
  double w0, w1;
  Eigen::Matrix2d u;
};

Sym2 eig2(const Eigen::Matrix2d& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(g);
  return Sym2{es.eigenvalues()(0), es.eigenvalues()(1), es.eigenvectors()};
}

template <typename F>
Eigen::MatrixXd central_jacobian(F&& f, const Eigen::VectorXd& u, int rows, double h) {
  Eigen::MatrixXd j(rows, u.size());
  Eigen::VectorXd w = u;
  for (int k = 0; k < u.size(); ++k) {
    const double keep = w(k);
    w(k) = keep + h;
    const Eigen::VectorXd fp = f(w);
    w(k) = keep - h;
    const Eigen::VectorXd fm = f(w);
    w(k) = keep;
    j.col(k) = (fp - fm) / (2.0 * h);
  }
  return j;
}

}  // namespace

FixedLambdaModel::FixedLambdaModel(ReducedProblem rp, bool force_complex)
    : rp_(std::move(rp)), real_(rp_.is_real() && !force_complex) {
  k_ = real_ ? rp_.real_operator() : rp_.a_tilde();
  row_support_.resize(rp_.n());
  for (int i = 0; i < rp_.n(); ++i)
    for (int j = 0; j < rp_.q(); ++j)
      if (rp_.v_bar(i, j) != 0.0) row_support_[i].push_back(j);
}

Eigen::VectorXd FixedLambdaModel::projected_residual(const Eigen::VectorXd& x) const {
  const int n = rp_.n(), q = rp_.q();
  if (x.size() != x_dim()) throw InvalidInput("eigenvector guess has wrong length");
  const double nx2 = x.squaredNorm();
  const double nx = std::sqrt(nx2);
  const Eigen::VectorXd r = k_ * x;
  Eigen::VectorXd out(y_dim());
  if (real_) {
    for (int i = 0; i < n; ++i) {
      double g = 0.0;
      for (int j : row_support_[i]) g += x(j) * x(j);
      out(i) = (g > kEmptyRel * nx2) ? r(i) / std::sqrt(g) : kPenalty * r(i) / nx;
    }
    return out;
  }
  for (int i = 0; i < n; ++i) {
    Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
    for (int j : row_support_[i]) {
      const Eigen::Vector2d c(x(j), x(q + j));
      g += c * c.transpose();
    }
    const Eigen::Vector2d ri(r(i), r(n + i));
    const double tr = g.trace();
    Eigen::Vector2d rho;
    if (!(tr > kEmptyRel * nx2)) {
      rho = kPenalty * ri / nx;
    } else {
      // Symmetric G^{-1/2} on the range, penalty on the null direction; sign and
      // ordering of the eigenvectors do not matter in this form.
      const Sym2 e = eig2(g);
      const double f0 = e.w0 > kNullRel * tr ? 1.0 / std::sqrt(e.w0) : kPenalty / nx;
      const double f1 = e.w1 > kNullRel * tr ? 1.0 / std::sqrt(e.w1) : kPenalty / nx;
      rho = e.u * Eigen::Vector2d(f0, f1).asDiagonal() * e.u.transpose() * ri;
    }
    out(i) = rho(0);
    out(n + i) = rho(1);
  }
  return out;
}

double FixedLambdaModel::projected_cost(const Eigen::VectorXd& x) const {
  return projected_residual(x).squaredNorm();
}

Eigen::VectorXd FixedLambdaModel::multipliers(const Eigen::VectorXd& x) const {
  const int n = rp_.n(), q = rp_.q();
  const double nx2 = x.squaredNorm();
  const Eigen::VectorXd r = k_ * x;
  Eigen::VectorXd l = Eigen::VectorXd::Zero(y_dim());
  if (real_) {
    for (int i = 0; i < n; ++i) {
      double g = 0.0;
      for (int j : row_support_[i]) g += x(j) * x(j);
      if (g > kEmptyRel * nx2) l(i) = r(i) / g;
    }
    return l;
  }
  for (int i = 0; i < n; ++i) {
    Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
    for (int j : row_support_[i]) {
      const Eigen::Vector2d c(x(j), x(q + j));
      g += c * c.transpose();
    }
    const double tr = g.trace();
    if (!(tr > kEmptyRel * nx2)) continue;
    const Sym2 e = eig2(g);
    const double f0 = e.w0 > kNullRel * tr ? 1.0 / e.w0 : 0.0;
    const double f1 = e.w1 > kNullRel * tr ? 1.0 / e.w1 : 0.0;
    const Eigen::Vector2d li =
        e.u * Eigen::Vector2d(f0, f1).asDiagonal() * e.u.transpose() * Eigen::Vector2d(r(i), r(n + i));
    l(i) = li(0);
    l(n + i) = li(1);
  }
  return l;
}

Eigen::MatrixXd FixedLambdaModel::correction(const Eigen::VectorXd& x) const {
  const int n = rp_.n(), q = rp_.q();
  const Eigen::VectorXd l = multipliers(x);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, q);
  for (int i = 0; i < n; ++i)
    for (int j : row_support_[i])
      d(i, j) = real_ ? -l(i) * x(j) : -(l(i) * x(j) + l(n + i) * x(q + j));
  return d;
}

Eigen::VectorXd FixedLambdaModel::dx_times(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  const int n = rp_.n(), q = rp_.q();
  const Eigen::MatrixXd& v = rp_.v_bar;
  if (real_) return (v * x.array().square().matrix()).cwiseProduct(y);
  const Eigen::ArrayXd xr = x.head(q).array(), xi = x.tail(q).array();
  const Eigen::ArrayXd s = (v * (xr * xr).matrix()).array();
  const Eigen::ArrayXd t = (v * (xr * xi).matrix()).array();
  const Eigen::ArrayXd qq = (v * (xi * xi).matrix()).array();
  Eigen::VectorXd out(2 * n);
  out.head(n) = (s * y.head(n).array() + t * y.tail(n).array()).matrix();
  out.tail(n) = (t * y.head(n).array() + qq * y.tail(n).array()).matrix();
  return out;
}

Eigen::VectorXd FixedLambdaModel::dy_times(const Eigen::VectorXd& y, const Eigen::VectorXd& x) const {
  const int n = rp_.n(), q = rp_.q();
  const Eigen::MatrixXd vt = rp_.v_bar.transpose();
  if (real_) return (vt * y.array().square().matrix()).cwiseProduct(x);
  const Eigen::ArrayXd y1 = y.head(n).array(), y2 = y.tail(n).array();
  const Eigen::ArrayXd s = (vt * (y1 * y1).matrix()).array();
  const Eigen::ArrayXd t = (vt * (y1 * y2).matrix()).array();
  const Eigen::ArrayXd qq = (vt * (y2 * y2).matrix()).array();
  Eigen::VectorXd out(2 * q);
  out.head(q) = (s * x.head(q).array() + t * x.tail(q).array()).matrix();
  out.tail(q) = (t * x.head(q).array() + qq * x.tail(q).array()).matrix();
  return out;
}

Eigen::VectorXd FixedLambdaModel::stationarity(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                               double sigma) const {
  const int mx = x_dim(), my = y_dim();
  Eigen::VectorXd f(my + mx + 2);
  f.head(my) = k_ * x - sigma * dx_times(x, y);
  f.segment(my, mx) = k_.transpose() * y - sigma * dy_times(y, x);
  f(my + mx) = 0.5 * (x.squaredNorm() - 1.0);
  f(my + mx + 1) = 0.5 * (y.squaredNorm() - 1.0);
  return f;
}

PencilPair FixedLambdaModel::pencil(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  return real_ ? assemble_real_pencil(rp_, x, y) : assemble_pencil(rp_, x, y);
}

CandidateTriple FixedLambdaModel::embed(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                        double sigma) const {
  CandidateTriple t;
  t.sigma = sigma;
  if (!real_) {
    t.x = x;
    t.y = y;
    return t;
  }
  t.x = Eigen::VectorXd::Zero(2 * rp_.q());
  t.y = Eigen::VectorXd::Zero(2 * rp_.n());
  t.x.head(rp_.q()) = x;
  t.y.head(rp_.n()) = y;
  return t;
}

Eigen::VectorXd FixedLambdaModel::from_canonical(const Eigen::VectorXcd& xc) const {
  const int n = rp_.n(), q = rp_.q();
  Eigen::VectorXcd tail = xc.tail(q);
  if (xc.size() != n) throw InvalidInput("canonical eigenvector has wrong length");
  if (real_) {
    Eigen::Index k = 0;
    tail.cwiseAbs().maxCoeff(&k);
    const double a = std::abs(tail(k));
    if (a > 0.0) tail *= std::conj(tail(k)) / a;
    return tail.real();
  }
  Eigen::VectorXd out(2 * q);
  out.head(q) = tail.real();
  out.tail(q) = tail.imag();
  return out;
}

ProjectedRun run_projected(const FixedLambdaModel& model, const Eigen::VectorXd& x0,
                           const ProjectedOptions& opt) {
  ProjectedRun run;
  const int mx = model.x_dim(), my = model.y_dim();
  if (x0.size() != mx) throw InvalidInput("initial vector has wrong length");
  const double n0 = x0.norm();
  if (!(n0 > 0.0) || !x0.allFinite()) throw InvalidInput("initial vector must be finite and nonzero");

  auto rho = [&](const Eigen::VectorXd& v) { return model.projected_residual(v); };
  Eigen::VectorXd x = x0 / n0;
  Eigen::VectorXd f = rho(x);
  double cost = f.squaredNorm();
  double damping = 1e-3;
  run.corrections.push_back(model.correction(x));

  auto kkt = [&](const Eigen::VectorXd& w) {
    return model.stationarity(w.head(mx), w.segment(mx, my), w(mx + my));
  };
  auto normalized_residual = [&](const Eigen::VectorXd& w) {
    const double ax = w.head(mx).norm(), ay = w.segment(mx, my).norm();
    const Eigen::VectorXd xn = w.head(mx) / ax, yn = w.segment(mx, my) / ay;
    const double s = w(mx + my) * ax * ay;
    return model.stationarity(xn, yn, s).head(mx + my).norm();
  };
  auto start_point = [&](const Eigen::VectorXd& xs) {
    const Eigen::VectorXd l = model.multipliers(xs);
    const double s0 = l.norm();
    Eigen::VectorXd w(mx + my + 1);
    w << xs, (s0 > 0.0 ? Eigen::VectorXd(l / s0) : Eigen::VectorXd::Zero(my)), s0;
    return w;
  };

  // Newton on the stationarity system from a projected iterate. Accepted only if it
  // meets the convergence test without raising the projected cost.
  struct Polish {
    Eigen::VectorXd u;
    std::vector<Eigen::MatrixXd> corrections;
    double step = 0.0;
    int iterations = 0;
    bool ok = false;
  };
  auto polish = [&](const Eigen::VectorXd& xs, double ref_cost, int budget) {
    Polish p;
    p.u = start_point(xs);
    if (!(p.u(mx + my) > 0.0)) return p;
    Eigen::VectorXd fu = kkt(p.u);
    for (int k = 0; k < budget; ++k) {
      const Eigen::MatrixXd j = central_jacobian(kkt, p.u, my + mx + 2, 1e-6);
      // Phase rotations of (x, y) leave the system invariant; treat that direction as null.
      // (SVD rather than Eigen 3.4.0's COD, whose rank-deficient solve reads uninitialized memory.)
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
      svd.setThreshold(1e-8);
      const Eigen::VectorXd du = -svd.solve(fu);
      double t = 1.0;
      Eigen::VectorXd un = p.u + du;
      Eigen::VectorXd fn = kkt(un);
      while (fn.norm() > fu.norm() && t > 1e-4) {
        t *= 0.5;
        un = p.u + t * du;
        fn = kkt(un);
      }
      p.step = t * du.norm();
      p.u = un;
      fu = fn;
      ++p.iterations;
      p.corrections.push_back(model.correction(p.u.head(mx)));
      if (p.step <= opt.conv_tol && normalized_residual(p.u) <= opt.conv_tol) {
        const double c = model.projected_cost(p.u.head(mx) / p.u.head(mx).norm());
        p.ok = p.u(mx + my) > 0.0 && c <= ref_cost + 1e-8 * std::max(1.0, ref_cost);
        break;
      }
    }
    return p;
  };
  auto finish = [&](const Polish& p) {
    const double ax = p.u.head(mx).norm(), ay = p.u.segment(mx, my).norm();
    run.x = p.u.head(mx) / ax;
    run.y = p.u.segment(mx, my) / ay;
    run.sigma = p.u(mx + my) * ax * ay;
    run.residual = normalized_residual(p.u);
    run.step = p.step;
    run.iterations += p.iterations;
    run.corrections.insert(run.corrections.end(), p.corrections.begin(), p.corrections.end());
    run.converged = true;
  };

  int it = 0;
  bool done = false;
  for (; it < opt.max_iter; ++it) {
    if (cost < 1e-30) break;
    const Eigen::MatrixXd j = central_jacobian(rho, x, my, 1e-7);
    const Eigen::VectorXd g = j.transpose() * f;
    const Eigen::MatrixXd jj = j.transpose() * j;
    bool moved = false;
    double step_norm = 0.0, drop = 0.0;
    while (damping <= 1e14) {
      Eigen::MatrixXd a = jj;
      a.diagonal() += damping * (jj.diagonal().array() + 1e-12).matrix();
      const Eigen::VectorXd step = a.ldlt().solve(-g);
      Eigen::VectorXd xn = x + step;
      xn /= xn.norm();
      const Eigen::VectorXd fn = rho(xn);
      const double cn = fn.squaredNorm();
      if (std::isfinite(cn) && cn <= cost) {
        damping = std::max(damping / 3.0, 1e-15);
        step_norm = step.norm();
        drop = cost - cn;
        x = xn;
        f = fn;
        cost = cn;
        moved = true;
        break;
      }
      damping *= 4.0;
    }
    if (!moved) break;
    run.corrections.push_back(model.correction(x));
    if (drop <= 1e-13 * cost && step_norm < 1e-9) {
      ++it;
      break;
    }
    // Gauss-Newton is only linear at a nonzero-residual minimum; hand off to Newton early.
    if ((it + 1) % opt.polish_every == 0) {
      const Polish p = polish(x, cost, opt.trial_polish_iter);
      if (p.ok) {
        run.iterations = it + 1;
        run.lm_cost = cost;
        finish(p);
        done = true;
        break;
      }
    }
  }
  if (done) return run;
  run.iterations = it;
  run.lm_cost = cost;

  const Polish p = polish(x, cost, opt.polish_iter);
  if (p.ok) {
    finish(p);
    return run;
  }
  const Eigen::VectorXd uf = start_point(x);
  run.x = x;
  run.y = uf.segment(mx, my);
  run.sigma = uf(mx + my);
  run.residual = run.sigma > 0.0 ? normalized_residual(uf) : std::numeric_limits<double>::infinity();
  run.step = p.step;
  run.corrections.push_back(model.correction(x));
  return run;
}

}  // namespace netobs

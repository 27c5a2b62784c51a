#include "netobs/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "netobs/errors.hpp"

namespace netobs {

const char* to_string(Branch b) {
  switch (b) {
    case Branch::kEdgeDeletion:
      return "edge-deletion";
    case Branch::kSymmetryCreation:
      return "symmetry-creation";
    case Branch::kRootSystem:
      return "root-system";
  }
  return "unknown";
}

bool has_line_structure(const Eigen::MatrixXd& a) {
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (std::abs(i - j) > 1 && a(i, j) != 0.0) return false;
  return a.rows() == a.cols() && a.rows() >= 2;
}

bool has_star_structure(const Eigen::MatrixXd& a) {
  for (int i = 1; i < a.rows(); ++i)
    for (int j = 1; j < a.cols(); ++j)
      if (i != j && a(i, j) != 0.0) return false;
  return a.rows() == a.cols() && a.rows() >= 2;
}

Eigen::Vector4d line3_equations(const Eigen::Matrix3d& a, Complex lambda, const Eigen::Vector4d& b) {
  const double b22 = b(0), b23 = b(1), b32 = b(2), b33 = b(3);
  const double a22 = a(1, 1), a23 = a(1, 2), a32 = a(2, 1), a33 = a(2, 2);
  Eigen::Vector4d f;
  f(0) = (b22 - a22) - (b33 - a33) + (b33 - b22) / b32 * (b23 - a23);
  f(1) = (b32 - a32) - b23 / b32 * (b23 - a23);
  f(2) = b22 + b33 - 2.0 * lambda.real();
  f(3) = b22 * b33 - b23 * b32 - std::norm(lambda);
  return f;
}

namespace {

Eigen::Matrix4d line3_jacobian(const Eigen::Matrix3d& a, const Eigen::Vector4d& b) {
  const double b22 = b(0), b23 = b(1), b32 = b(2), b33 = b(3);
  const double a23 = a(1, 2);
  const double e = b23 - a23;
  Eigen::Matrix4d j;
  j << 1.0 - e / b32, (b33 - b22) / b32, -(b33 - b22) * e / (b32 * b32), -1.0 + e / b32,
      0.0, -(2.0 * b23 - a23) / b32, 1.0 + b23 * e / (b32 * b32), 0.0,
      1.0, 0.0, 0.0, 1.0,
      b33, -b32, -b23, b22;
  return j;
}

bool damped_newton(const Eigen::Matrix3d& a, Complex lambda, Eigen::Vector4d& b) {
  Eigen::Vector4d f = line3_equations(a, lambda, b);
  for (int it = 0; it < 200; ++it) {
    if (!f.allFinite()) return false;
    if (f.cwiseAbs().maxCoeff() <= 1e-14) return true;
    if (std::abs(b(2)) < 1e-12) return false;
    Eigen::FullPivLU<Eigen::Matrix4d> lu(line3_jacobian(a, b));
    if (!lu.isInvertible()) return false;
    const Eigen::Vector4d step = lu.solve(f);
    double t = 1.0;
    Eigen::Vector4d bn = b - step;
    Eigen::Vector4d fn = line3_equations(a, lambda, bn);
    while (!(fn.allFinite() && fn.norm() < f.norm()) && t > 1e-6) {
      t *= 0.5;
      bn = b - t * step;
      fn = line3_equations(a, lambda, bn);
    }
    if (!fn.allFinite()) return false;
    if (fn.norm() >= f.norm() && t <= 1e-6) return f.cwiseAbs().maxCoeff() <= 1e-11;
    b = bn;
    f = fn;
  }
  return f.cwiseAbs().maxCoeff() <= 1e-11;
}

}  // namespace

Line3Result line3_optimal(const Eigen::MatrixXd& a_in, Complex lambda) {
  if (a_in.rows() != 3 || a_in.cols() != 3 || !has_line_structure(a_in))
    throw InvalidInput("3-node line oracle needs a 3x3 tridiagonal matrix");
  if (lambda.imag() == 0.0) throw InvalidInput("3-node line oracle needs a nonreal eigenvalue");
  const Eigen::Matrix3d a = a_in;
  const double lr = lambda.real();
  const double half = 0.5 * (a(1, 1) - a(2, 2));
  Eigen::Vector4d base;
  base(0) = lr + half;
  base(3) = lr - half;
  const double prod = base(0) * base(3) - std::norm(lambda);
  const double mag = std::sqrt(std::max(std::abs(prod), 1e-6));
  // Off-diagonal starts alternate in sign and sweep the magnitude split of b23 * b32.
  static constexpr double kSplit[8] = {1.0, 0.5, 2.0, 0.25, 4.0, 1.5, 0.75, 3.0};

  Line3Result out;
  for (int s = 0; s < 16; ++s) {
    Eigen::Vector4d b = base;
    const double sign = (s & 1) ? -1.0 : 1.0;
    b(1) = sign * kSplit[s >> 1] * mag;
    b(2) = prod / b(1);
    if (!damped_newton(a, lambda, b)) continue;
    if (std::abs(b(2)) < 1e-10) continue;
    const double res = line3_equations(a, lambda, b).cwiseAbs().maxCoeff();
    if (res > 1e-10) continue;
    bool dup = false;
    for (const Line3Root& r : out.roots)
      if ((Eigen::Vector4d(r.b22, r.b23, r.b32, r.b33) - b).norm() < 1e-8) dup = true;
    if (dup) continue;
    const double cost = a(0, 1) * a(0, 1) + std::pow(b(0) - a(1, 1), 2) +
                        std::pow(b(1) - a(1, 2), 2) + std::pow(b(2) - a(2, 1), 2) +
                        std::pow(b(3) - a(2, 2), 2);
    out.roots.push_back({b(0), b(1), b(2), b(3), cost, res});
  }
  std::sort(out.roots.begin(), out.roots.end(),
            [](const Line3Root& x, const Line3Root& y) { return x.cost < y.cost; });
  if (out.roots.empty()) return out;
  const Line3Root& r = out.roots.front();
  out.found = true;
  out.best.branch = Branch::kRootSystem;
  out.best.lambda_star = lambda;
  out.best.delta = std::sqrt(r.cost);
  out.best.perturbation = Eigen::MatrixXd::Zero(3, 3);
  out.best.perturbation(0, 1) = -a(0, 1);
  out.best.perturbation(1, 1) = r.b22 - a(1, 1);
  out.best.perturbation(1, 2) = r.b23 - a(1, 2);
  out.best.perturbation(2, 1) = r.b32 - a(2, 1);
  out.best.perturbation(2, 2) = r.b33 - a(2, 2);
  return out;
}

OracleResult line_radius(const Eigen::MatrixXd& a) {
  if (!has_line_structure(a)) throw InvalidInput("line oracle needs a tridiagonal matrix");
  const int n = static_cast<int>(a.rows());
  int best = 0;
  for (int i = 1; i + 1 < n; ++i)
    if (std::abs(a(i, i + 1)) < std::abs(a(best, best + 1))) best = i;
  OracleResult out;
  out.branch = Branch::kEdgeDeletion;
  out.where = {best, best + 1};
  out.delta = std::abs(a(best, best + 1));
  out.perturbation = Eigen::MatrixXd::Zero(n, n);
  out.perturbation(best, best + 1) = -a(best, best + 1);
  const Eigen::MatrixXd tail = a.bottomRightCorner(n - best - 1, n - best - 1);
  Eigen::EigenSolver<Eigen::MatrixXd> es(tail, false);
  std::vector<Complex> eigs;
  for (int k = 0; k < tail.rows(); ++k) {
    const Complex z = es.eigenvalues()(k);
    if (z.imag() >= 0.0) eigs.push_back(z);
  }
  std::sort(eigs.begin(), eigs.end(), [](Complex x, Complex y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  out.lambda_star = eigs.empty() ? es.eigenvalues()(0) : eigs.front();
  return out;
}

double star_gamma(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  double g = std::numeric_limits<double>::infinity();
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g = std::min(g, std::abs(a(i, i) - a(j, j)) / std::sqrt(2.0));
  return g;
}

OracleResult star_radius(const Eigen::MatrixXd& a) {
  if (!has_star_structure(a)) throw InvalidInput("star oracle needs hub-and-spoke sparsity");
  const int n = static_cast<int>(a.rows());
  int spoke = 1;
  for (int i = 2; i < n; ++i)
    if (std::abs(a(0, i)) < std::abs(a(0, spoke))) spoke = i;
  int bi = -1, bj = -1;
  double g = std::numeric_limits<double>::infinity();
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = std::abs(a(i, i) - a(j, j)) / std::sqrt(2.0);
      if (v < g) {
        g = v;
        bi = i;
        bj = j;
      }
    }
  OracleResult out;
  out.perturbation = Eigen::MatrixXd::Zero(n, n);
  if (std::abs(a(0, spoke)) <= g) {
    out.branch = Branch::kEdgeDeletion;
    out.where = {0, spoke};
    out.delta = std::abs(a(0, spoke));
    out.perturbation(0, spoke) = -a(0, spoke);
    out.lambda_star = Complex(a(spoke, spoke), 0.0);
  } else {
    out.branch = Branch::kSymmetryCreation;
    out.where = {bi, bj};
    out.delta = g;
    const double mean = 0.5 * (a(bi, bi) + a(bj, bj));
    out.perturbation(bi, bi) = mean - a(bi, bi);
    out.perturbation(bj, bj) = mean - a(bj, bj);
    out.lambda_star = Complex(mean, 0.0);
  }
  return out;
}

double cut_bound(int k, int omega) {
  if (k < 1 || omega < 1) throw InvalidInput("cut bound needs k >= 1 and omega >= 1");
  // Gamma(w+1)/Gamma(w+2) = 1/(w+1) exactly.
  if (k == 1) return 1.0 / (static_cast<double>(omega) + 1.0);
  const double ik = 1.0 / k;
  const double w = static_cast<double>(omega);
  return std::exp(std::lgamma(ik) + std::lgamma(w + 1.0) - std::lgamma(w + 1.0 + ik)) /
         std::sqrt(static_cast<double>(k));
}

std::vector<char> observed_nodes(const Eigen::MatrixXi& edges, const std::vector<int>& sensors,
                                 const std::vector<std::pair<int, int>>& removed) {
  const int n = static_cast<int>(edges.rows());
  std::vector<char> seen(n, 0);
  std::deque<int> queue;
  for (int s : sensors) {
    if (!seen[s]) queue.push_back(s);
    seen[s] = 1;
  }
  while (!queue.empty()) {
    const int i = queue.front();
    queue.pop_front();
    for (int j = 0; j < n; ++j) {
      if (seen[j] || edges(i, j) == 0 || i == j) continue;
      if (std::find(removed.begin(), removed.end(), std::make_pair(i, j)) != removed.end()) continue;
      seen[j] = 1;
      queue.push_back(j);
    }
  }
  return seen;
}

namespace {

bool disconnects(const NetworkSystem& net, const std::vector<char>& base,
                 const std::vector<std::pair<int, int>>& cut) {
  const std::vector<char> after = observed_nodes(net.edges(), net.sensors(), cut);
  for (size_t i = 0; i < after.size(); ++i)
    if (base[i] && !after[i]) return true;
  return false;
}

bool minimal_cut(const NetworkSystem& net, const std::vector<char>& base,
                 const std::vector<std::pair<int, int>>& cut) {
  if (!disconnects(net, base, cut)) return false;
  const int k = static_cast<int>(cut.size());
  for (int mask = 1; mask < (1 << k) - 1; ++mask) {
    std::vector<std::pair<int, int>> sub;
    for (int b = 0; b < k; ++b)
      if (mask & (1 << b)) sub.push_back(cut[b]);
    if (disconnects(net, base, sub)) return false;
  }
  return true;
}

}  // namespace

CutFamily enumerate_cut_family(const NetworkSystem& net, int k) {
  if (k < 1 || k > 3) throw InvalidInput("cut size must be 1, 2 or 3");
  CutFamily fam;
  fam.k = k;
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < net.n(); ++i)
    for (int j = 0; j < net.n(); ++j)
      if (i != j && net.edges()(i, j)) edges.emplace_back(i, j);
  const std::vector<char> base = observed_nodes(net.edges(), net.sensors());
  const int m = static_cast<int>(edges.size());
  std::vector<char> used(m, 0);
  std::vector<int> idx(k);
  // Lexicographic k-combinations of the edge list.
  for (int i = 0; i < k; ++i) idx[i] = i;
  if (k > m) return fam;
  while (true) {
    bool free = true;
    for (int i : idx) free = free && !used[i];
    if (free) {
      std::vector<std::pair<int, int>> cut;
      for (int i : idx) cut.push_back(edges[i]);
      if (minimal_cut(net, base, cut)) {
        fam.cuts.push_back(cut);
        for (int i : idx) used[i] = 1;
      }
    }
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == m - k + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int i = pos + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
  }
  return fam;
}

Eigen::MatrixXd deletion_perturbation(const Eigen::MatrixXd& a,
                                      const std::vector<std::pair<int, int>>& cut) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  for (auto [i, j] : cut) d(i, j) = -a(i, j);
  return d;
}

}  // namespace netobs

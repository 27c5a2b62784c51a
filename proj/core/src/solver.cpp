#include "netobs/solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

#include "netobs/errors.hpp"
#include "netobs/rng.hpp"

namespace netobs {

const char* to_string(Method m) {
  return m == Method::kProjected ? "projected" : "inverse_iteration";
}

Method parse_method(const std::string& s) {
  if (s == "projected") return Method::kProjected;
  if (s == "inverse_iteration" || s == "inverse-iteration") return Method::kInverseIteration;
  throw InvalidInput("unknown method '" + s + "'");
}

void SolverConfig::validate() const {
  if (!(psi > 0.5 && psi < 1.0)) throw InvalidInput("psi must lie in (0.5, 1)");
  if (max_iter < 1) throw InvalidInput("max_iter must be at least 1");
  if (!(conv_tol > 0.0)) throw InvalidInput("conv_tol must be positive");
  if (restarts < 1) throw InvalidInput("restarts must be at least 1");
  if (mu_refresh < 1) throw InvalidInput("mu_refresh must be at least 1");
  if (!(accept_tol > 0.0)) throw InvalidInput("accept_tol must be positive");
  if (threads < 1) throw InvalidInput("threads must be at least 1");
}

double FixedLambdaResult::delta() const { return std::sqrt(cost); }

namespace {

Eigen::MatrixXd to_original(const CanonicalForm& cf, const Eigen::MatrixXd& corr) {
  Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(cf.n(), cf.n());
  dc.rightCols(cf.q()) = corr;
  return cf.restore(dc);
}

Eigen::VectorXcd to_canonical(const CanonicalForm& cf, const Eigen::VectorXcd& x) {
  Eigen::VectorXcd out(cf.n());
  for (int k = 0; k < cf.n(); ++k) out(k) = x(cf.order[k]);
  return out;
}

std::uint64_t support_hash(const std::vector<int>& s) {
  std::uint64_t h = 0x13198a2e03707344ULL;
  for (int v : s) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
  return h;
}

}  // namespace

FixedLambdaResult heuristic_iterate(const ReducedProblem& rp, const CanonicalForm& cf,
                                    const SolverConfig& cfg, const Eigen::VectorXd& x0) {
  cfg.validate();
  const FixedLambdaModel model(rp, cfg.force_complex);
  FixedLambdaResult res;
  res.lambda = rp.lambda;
  res.a_tilde_norm = rp.a_tilde().norm();
  res.psi_used = cfg.psi;

  Eigen::VectorXd x, y;
  double sigma = 0.0;
  std::vector<Eigen::MatrixXd> corrections;
  if (cfg.method == Method::kProjected) {
    ProjectedOptions po;
    po.max_iter = cfg.max_iter;
    po.conv_tol = cfg.conv_tol;
    ProjectedRun run = run_projected(model, x0, po);
    x = run.x;
    y = run.y;
    sigma = run.sigma;
    res.iterations = run.iterations;
    res.converged = run.converged;
    res.residual = run.residual;
    corrections = std::move(run.corrections);
  } else {
    Eigen::VectorXd y0 = model.multipliers(x0);
    if (!(y0.norm() > 0.0)) y0 = Eigen::VectorXd::Ones(model.y_dim());
    InverseIterationRun run = run_inverse_iteration(model, x0, y0, cfg);
    x = run.x;
    y = run.y;
    sigma = run.sigma;
    res.iterations = run.iterations;
    res.converged = run.converged;
    res.residual = run.residual;
    res.phi_plus_mu = run.phi_plus_mu;
    res.psi_used = run.psi;
    corrections = std::move(run.corrections);
  }

  if (!(x.norm() > 0.0) || !(y.norm() > 0.0) || !std::isfinite(sigma) || sigma == 0.0) {
    res.converged = false;
    res.cost = std::numeric_limits<double>::infinity();
    return res;
  }
  res.triple = normalize_triple(model.embed(x, y, sigma));
  Reconstruction rec = reconstruct_perturbation(rp, res.triple, cf, cfg.accept_tol, cfg.sign_policy);
  res.sign = rec.sign;
  res.eig_residual = rec.eig_residual;
  res.identity_lhs = rec.identity_lhs;
  res.identity_rhs = rec.identity_rhs;
  res.bound_rhs = rec.bound_rhs;
  res.eigenvector = rec.eigenvector;
  res.cost = rec.perturbation.frob_cost();
  if (res.converged) res.converged = res.residual <= cfg.conv_tol;

  res.trajectory.reserve(corrections.size());
  for (const Eigen::MatrixXd& c : corrections) res.trajectory.push_back(to_original(cf, c));
  const Eigen::MatrixXd& final_delta = rec.perturbation.delta();
  res.history.reserve(res.trajectory.size());
  for (const Eigen::MatrixXd& d : res.trajectory) res.history.push_back((d - final_delta).norm());
  if (rec.accepted) res.perturbation = std::move(rec.perturbation);
  return res;
}

bool better_result(const FixedLambdaResult& a, const FixedLambdaResult& b) {
  if (a.ok() != b.ok()) return a.ok();
  const double scale = std::max({1e-300, std::abs(a.cost), std::abs(b.cost)});
  if (std::abs(a.cost - b.cost) > 1e-10 * scale) return a.cost < b.cost;
  if (a.converged != b.converged) return a.converged;
  if (a.cost != b.cost) return a.cost < b.cost;
  if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
  if (a.lambda.imag() != b.lambda.imag()) return a.lambda.imag() < b.lambda.imag();
  return a.restart < b.restart;
}

FixedLambdaResult solve_fixed_lambda(const NetworkSystem& net, const ConstraintMask& mask,
                                     Complex lambda, const SolverConfig& cfg,
                                     const FixedLambdaOptions& opt) {
  cfg.validate();
  if (mask.n() != net.n()) throw InvalidInput("mask and network dimensions differ");
  std::vector<int> support = opt.support;
  if (support.empty())
    for (int i = 0; i < net.n(); ++i)
      if (!net.is_sensor(i)) support.push_back(i);
  std::sort(support.begin(), support.end());
  const CanonicalForm cf = canonicalize(net, mask, support);
  const ReducedProblem rp = build_reduced(cf, lambda);
  const FixedLambdaModel model(rp, cfg.force_complex);
  const int dim = model.x_dim();

  std::vector<Eigen::VectorXd> starts;
  if (opt.warm_start && opt.warm_start->size() == net.n()) {
    const Eigen::VectorXd w = model.from_canonical(to_canonical(cf, *opt.warm_start));
    if (w.norm() > 1e-12) starts.push_back(w);
  }
  {
    const Eigen::VectorXcd pbh = pbh_vector(net.weights(), net.output_matrix(), lambda);
    const Eigen::VectorXd w = model.from_canonical(to_canonical(cf, pbh));
    if (w.norm() > 1e-12) starts.push_back(w);
  }
  const int total = std::max(1, opt.restarts.value_or(cfg.restarts));
  const std::uint64_t base =
      derive_seed({cfg.seed, std::bit_cast<std::uint64_t>(lambda.real()),
                   std::bit_cast<std::uint64_t>(lambda.imag()), support_hash(support)});
  for (int r = 0; static_cast<int>(starts.size()) < total; ++r) {
    std::mt19937_64 rng(derive_seed({base, static_cast<std::uint64_t>(r)}));
    std::normal_distribution<double> normal;
    Eigen::VectorXd w(dim);
    for (int k = 0; k < dim; ++k) w(k) = normal(rng);
    starts.push_back(w);
  }
  if (static_cast<int>(starts.size()) > total) starts.resize(total);

  FixedLambdaResult best;
  bool have = false;
  for (int r = 0; r < static_cast<int>(starts.size()); ++r) {
    FixedLambdaResult cand = heuristic_iterate(rp, cf, cfg, starts[r]);
    cand.restart = r;
    cand.support = support;
    if (cand.perturbation) {
      cand.verification =
          verify_unobservability(net, *cand.perturbation, lambda, cand.eigenvector, cfg.accept_tol);
      cand.verified = cand.verification.verified;
    }
    if (!have || better_result(cand, best)) {
      best = std::move(cand);
      have = true;
    }
  }
  if (!best.ok()) best.converged = false;
  return best;
}

GridSpec GridSpec::parse(const std::string& text) {
  GridSpec g;
  std::vector<std::string> parts;
  {
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, '/')) parts.push_back(tok);
  }
  if (parts.empty()) throw InvalidInput("empty grid spec");
  const std::string& head = parts[0];
  auto numbers = [](const std::string& s, char sep) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) {
      try {
        size_t used = 0;
        v.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw InvalidInput("bad number '" + tok + "' in grid spec");
      } catch (const std::logic_error&) {
        throw InvalidInput("bad number '" + tok + "' in grid spec");
      }
    }
    return v;
  };
  if (head == "default") {
    g.kind = Kind::kDefault;
  } else if (head == "seeds" || head == "eigs_of_submatrices") {
    g.kind = Kind::kSubmatrixSeeds;
  } else if (head == "line") {
    g.kind = Kind::kLine;
  } else if (head == "star") {
    g.kind = Kind::kStar;
  } else if (head.rfind("rect:", 0) == 0) {
    g.kind = Kind::kRectangle;
    const std::vector<double> v = numbers(head.substr(5), ',');
    if (v.size() != 6) throw InvalidInput("rect grid needs re0,re1,im0,im1,nre,nim");
    g.re_min = v[0];
    g.re_max = v[1];
    g.im_min = v[2];
    g.im_max = v[3];
    g.n_re = static_cast<int>(v[4]);
    g.n_im = static_cast<int>(v[5]);
    if (g.n_re < 1 || g.n_im < 1 || g.re_min > g.re_max || g.im_min > g.im_max)
      throw InvalidInput("invalid rect grid bounds");
  } else if (head.rfind("list:", 0) == 0) {
    g.kind = Kind::kExplicit;
    std::stringstream ss(head.substr(5));
    std::string pt;
    while (std::getline(ss, pt, ';')) {
      const std::vector<double> v = numbers(pt, ',');
      if (v.size() != 2) throw InvalidInput("list grid points are re,im");
      g.points.emplace_back(v[0], v[1]);
    }
    if (g.points.empty()) throw InvalidInput("list grid needs at least one point");
  } else {
    throw InvalidInput("unknown grid spec '" + head + "'");
  }
  for (size_t i = 1; i < parts.size(); ++i) {
    if (parts[i] == "norefine")
      g.refine = false;
    else if (parts[i] == "prune")
      g.prune = true;
    else if (parts[i] == "noprune")
      g.prune = false;
    else
      throw InvalidInput("unknown grid option '" + parts[i] + "'");
  }
  return g;
}

namespace {

Complex clean(Complex z, double scale) {
  const double tol = 1e-13 * std::max(1.0, scale);
  double im = std::abs(z.imag()) <= tol ? 0.0 : std::abs(z.imag());
  return Complex(z.real(), im);
}

void add_seeds(const NetworkSystem& net, std::vector<LambdaCandidate>& out) {
  std::vector<int> ns;
  for (int i = 0; i < net.n(); ++i)
    if (!net.is_sensor(i)) ns.push_back(i);
  const int q = static_cast<int>(ns.size());
  Eigen::MatrixXd a22(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) a22(i, j) = net.weights()(ns[i], ns[j]);
  const double scale = a22.cwiseAbs().maxCoeff();
  for (int k = 0; k < q; ++k) {
    const Eigen::MatrixXd sub = a22.bottomRightCorner(q - k, q - k);
    Eigen::EigenSolver<Eigen::MatrixXd> es(sub, false);
    std::vector<int> support(ns.begin() + k, ns.end());
    std::vector<Complex> seen;
    for (int e = 0; e < sub.rows(); ++e) {
      const Complex raw = es.eigenvalues()(e);
      if (raw.imag() < -1e-13 * std::max(1.0, scale)) continue;
      const Complex lam = clean(raw, scale);
      if (std::find(seen.begin(), seen.end(), lam) != seen.end()) continue;
      seen.push_back(lam);
      out.push_back({lam, support});
    }
  }
}

void add_star(const NetworkSystem& net, std::vector<LambdaCandidate>& out) {
  std::vector<int> ns;
  for (int i = 0; i < net.n(); ++i)
    if (!net.is_sensor(i)) ns.push_back(i);
  const Eigen::MatrixXd& a = net.weights();
  for (int i : ns) out.push_back({Complex(a(i, i), 0.0), {i}});
  for (size_t x = 0; x < ns.size(); ++x)
    for (size_t y = x + 1; y < ns.size(); ++y) {
      const int i = ns[x], j = ns[y];
      out.push_back({Complex(0.5 * (a(i, i) + a(j, j)), 0.0), {i, j}});
    }
}

void add_rectangle(const GridSpec& g, std::vector<LambdaCandidate>& out) {
  // Costs are symmetric under conjugation, so the lower half-plane folds onto the upper.
  std::vector<Complex> pts;
  for (int a = 0; a < g.n_re; ++a)
    for (int b = 0; b < g.n_im; ++b) {
      const double re = g.n_re == 1 ? g.re_min : g.re_min + (g.re_max - g.re_min) * a / (g.n_re - 1);
      const double im = g.n_im == 1 ? g.im_min : g.im_min + (g.im_max - g.im_min) * b / (g.n_im - 1);
      const Complex z(re, std::abs(im));
      if (std::find(pts.begin(), pts.end(), z) == pts.end()) pts.push_back(z);
    }
  for (const Complex& z : pts) out.push_back({z, {}});
}

double refine_step(const GridSpec& g) {
  if (g.kind == GridSpec::Kind::kRectangle || g.kind == GridSpec::Kind::kDefault) {
    double h = 0.0;
    if (g.n_re > 1) h = std::max(h, (g.re_max - g.re_min) / (g.n_re - 1));
    if (g.n_im > 1) h = std::max(h, (g.im_max - g.im_min) / (g.n_im - 1));
    if (h > 0.0) return g.kind == GridSpec::Kind::kDefault ? 0.05 : h;
  }
  return 0.05;
}

template <typename F>
void parallel_for(int count, int threads, F&& f) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  const int t = std::min(threads, count);
  for (int w = 0; w < t; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += t) f(i);
    });
  for (std::thread& th : pool) th.join();
}

}  // namespace

std::vector<LambdaCandidate> expand_grid(const NetworkSystem& net, const GridSpec& spec) {
  std::vector<LambdaCandidate> out;
  switch (spec.kind) {
    case GridSpec::Kind::kExplicit:
      for (const Complex& z : spec.points) out.push_back({z, {}});
      break;
    case GridSpec::Kind::kRectangle:
      add_rectangle(spec, out);
      break;
    case GridSpec::Kind::kSubmatrixSeeds:
    case GridSpec::Kind::kLine:
      add_seeds(net, out);
      break;
    case GridSpec::Kind::kStar:
      add_star(net, out);
      break;
    case GridSpec::Kind::kDefault:
      add_seeds(net, out);
      add_rectangle(spec, out);
      break;
  }
  return out;
}

RadiusResult solve_radius(const NetworkSystem& net, const ConstraintMask& mask, const GridSpec& grid,
                          const SolverConfig& cfg) {
  cfg.validate();
  const std::vector<LambdaCandidate> cands = expand_grid(net, grid);
  if (cands.empty()) throw InvalidInput("lambda grid is empty");

  std::vector<FixedLambdaResult> results(cands.size());
  parallel_for(static_cast<int>(cands.size()), cfg.threads, [&](int i) {
    FixedLambdaOptions o;
    o.support = cands[i].support;
    results[i] = solve_fixed_lambda(net, mask, cands[i].lambda, cfg, o);
  });

  RadiusResult out;
  auto record = [&](const FixedLambdaResult& r) {
    out.search_trace.push_back(
        {r.lambda, r.ok() ? r.cost : std::numeric_limits<double>::infinity()});
  };
  for (const FixedLambdaResult& r : results) record(r);

  std::vector<int> order(results.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return better_result(results[a], results[b]); });

  const bool prune = grid.prune.value_or(grid.kind == GridSpec::Kind::kDefault);
  if (prune) {
    const int top = std::min<int>(grid.prune_candidates, static_cast<int>(order.size()));
    for (int t = 0; t < top; ++t) {
      FixedLambdaResult& cur = results[order[t]];
      if (!cur.ok()) continue;
      while (cur.support.size() > 1) {
        FixedLambdaResult best_drop;
        bool found = false;
        for (size_t k = 0; k < cur.support.size(); ++k) {
          FixedLambdaOptions o;
          o.support = cur.support;
          o.support.erase(o.support.begin() + static_cast<long>(k));
          o.warm_start = cur.eigenvector;
          FixedLambdaResult r = solve_fixed_lambda(net, mask, cur.lambda, cfg, o);
          record(r);
          if (!r.ok() || r.cost > cur.cost * (1.0 + 1e-9) + 1e-14) continue;
          if (!found || better_result(r, best_drop)) {
            best_drop = std::move(r);
            found = true;
          }
        }
        if (!found) break;
        cur = std::move(best_drop);
      }
    }
  }

  FixedLambdaResult best = results[order[0]];
  for (const FixedLambdaResult& r : results)
    if (better_result(r, best)) best = r;

  if (grid.refine && best.ok()) {
    double h = refine_step(grid);
    for (int step = 0; step < grid.refine_steps && h >= grid.refine_min_step; ++step) {
      const Complex c = best.lambda;
      std::vector<Complex> moves = {c + Complex(h, 0.0), c - Complex(h, 0.0), c + Complex(0.0, h)};
      if (c.imag() > 0.0) moves.push_back(c - Complex(0.0, h));
      bool moved = false;
      for (const Complex& m : moves) {
        FixedLambdaOptions o;
        o.support = best.support;
        o.warm_start = best.eigenvector;
        o.restarts = 2;
        const Complex lam(m.real(), std::abs(m.imag()));
        FixedLambdaResult r = solve_fixed_lambda(net, mask, lam, cfg, o);
        record(r);
        if (r.ok() && r.cost < best.cost) {
          best = std::move(r);
          moved = true;
          break;
        }
      }
      if (!moved) h *= 0.5;
    }
  }
  out.lambda_star = best.lambda;
  out.best = std::move(best);
  return out;
}

}  // namespace netobs

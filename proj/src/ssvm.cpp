#include "cog/ssvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cog/error.hpp"
#include "cog/parallel.hpp"

namespace cog {

namespace {

constexpr double kCurvatureFloor = 1e-12;

double squared_norm(const std::vector<double>& w) {
  double s = 0.0;
  for (double v : w) s += v * v;
  return s;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(C > 0.0)) throw Error(ErrorCode::kInvalidArgument, "C must be positive");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be positive");
  if (max_iterations < 1) throw Error(ErrorCode::kInvalidArgument, "max_iterations must be >= 1");
  if (mining_k < 1) throw Error(ErrorCode::kInvalidArgument, "mining_k must be >= 1");
}

NSlackSolver::NSlackSolver(std::size_t dimension, std::size_t examples, double C)
    : dim_(dimension), box_(C / static_cast<double>(std::max<std::size_t>(examples, 1))),
      w_(dimension, 0.0), blocks_(examples) {}

bool NSlackSolver::add(std::size_t example, Violator v) {
  auto& b = blocks_.at(example);
  if (v.id >= 0) {
    for (const auto& c : b.constraints) {
      if (c.id == v.id) return false;
    }
  }
  std::vector<double> row;
  row.reserve(b.constraints.size() + 1);
  for (std::size_t c = 0; c < b.constraints.size(); ++c) {
    const double k = b.constraints[c].psi.dot(v.psi);
    row.push_back(k);
    b.gram[c].push_back(k);
  }
  row.push_back(v.psi.squared_norm());
  b.gram.push_back(std::move(row));
  b.constraints.push_back(std::move(v));
  b.alpha.push_back(0.0);
  return true;
}

double NSlackSolver::gradient(std::size_t i, std::size_t c) const {
  const auto& con = blocks_[i].constraints[c];
  return con.loss - con.psi.dot(w_);
}

void NSlackSolver::optimize_block(std::size_t i) {
  auto& b = blocks_[i];
  const std::size_t m = b.constraints.size();
  if (m == 0) return;
  std::vector<double> g(m);
  for (std::size_t c = 0; c < m; ++c) g[c] = gradient(i, c);
  const std::size_t slack = m;  // pseudo-index of the slack variable (g = 0, psi = 0)
  const std::size_t max_steps = 20 * (m + 1);
  for (std::size_t step = 0; step < max_steps; ++step) {
    double alpha_sum = 0.0;
    for (double a : b.alpha) alpha_sum += a;
    const double alpha_slack = std::max(box_ - alpha_sum, 0.0);
    // p: steepest ascent direction; q: cheapest variable to take mass from.
    std::size_t p = slack, q = slack;
    double gp = 0.0, gq = alpha_slack > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < m; ++c) {
      if (g[c] > gp) {
        gp = g[c];
        p = c;
      }
      if (b.alpha[c] > 0.0 && g[c] < gq) {
        gq = g[c];
        q = c;
      }
    }
    if (p == q || !(gp - gq > 1e-15)) break;
    const double kpp = p == slack ? 0.0 : b.gram[p][p];
    const double kqq = q == slack ? 0.0 : b.gram[q][q];
    const double kpq = (p == slack || q == slack) ? 0.0 : b.gram[p][q];
    const double eta = kpp + kqq - 2.0 * kpq;
    const double avail = q == slack ? alpha_slack : b.alpha[q];
    double t = eta > kCurvatureFloor ? (gp - gq) / eta : avail;
    t = std::min(t, avail);
    if (!(t > 0.0)) break;
    if (p != slack) {
      b.alpha[p] += t;
      b.constraints[p].psi.add_to(w_, t);
    }
    if (q != slack) {
      b.alpha[q] = std::max(b.alpha[q] - t, 0.0);
      b.constraints[q].psi.add_to(w_, -t);
    }
    for (std::size_t c = 0; c < m; ++c) {
      const double kcp = p == slack ? 0.0 : b.gram[c][p];
      const double kcq = q == slack ? 0.0 : b.gram[c][q];
      g[c] -= t * (kcp - kcq);
    }
  }
}

void NSlackSolver::solve(double tolerance, int max_sweeps) {
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (std::size_t i = 0; i < blocks_.size(); ++i) optimize_block(i);
    if (duality_gap() <= tolerance) break;
  }
}

double NSlackSolver::dual_objective() const {
  double lin = 0.0;
  for (const auto& b : blocks_) {
    for (std::size_t c = 0; c < b.constraints.size(); ++c) lin += b.alpha[c] * b.constraints[c].loss;
  }
  return lin - 0.5 * squared_norm(w_);
}

double NSlackSolver::slack(std::size_t i) const {
  double xi = 0.0;
  for (std::size_t c = 0; c < blocks_[i].constraints.size(); ++c) xi = std::max(xi, gradient(i, c));
  return xi;
}

double NSlackSolver::working_primal() const {
  double s = 0.0;
  for (std::size_t i = 0; i < blocks_.size(); ++i) s += slack(i);
  return 0.5 * squared_norm(w_) + box_ * s;
}

double NSlackSolver::duality_gap() const {
  double gap = 0.0;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    double xi = 0.0, weighted = 0.0;
    for (std::size_t c = 0; c < b.constraints.size(); ++c) {
      const double g = gradient(i, c);
      xi = std::max(xi, g);
      weighted += b.alpha[c] * g;
    }
    gap += box_ * xi - weighted;
  }
  return gap;
}

std::size_t NSlackSolver::constraint_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.constraints.size();
  return n;
}

TrainResult train_nslack(const SeparationOracle& oracle, const TrainConfig& config,
                         const std::vector<double>& w0, const IterationCallback& on_iter) {
  config.validate();
  const std::size_t n = oracle.num_examples();
  const std::size_t dim = oracle.dimension();
  if (n == 0) throw Error(ErrorCode::kNoPositiveExamples, "no training examples");
  NSlackSolver solver(dim, n, config.C);
  TrainResult result;
  result.w = w0.empty() ? std::vector<double>(dim, 0.0) : w0;
  if (result.w.size() != dim) throw Error(ErrorCode::kInvalidArgument, "initial weight size mismatch");

  std::vector<std::vector<Violator>> found(n);
  for (int it = 1; it <= config.max_iterations; ++it) {
    parallel_for(n, config.threads, [&](std::size_t i) {
      found[i] = oracle.most_violated(i, result.w, config.mining_k);
    });
    IterationLog entry;
    entry.iteration = it;
    entry.max_violation = -std::numeric_limits<double>::infinity();
    double hinge_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = solver.slack(i);
      double hinge = 0.0;
      for (auto& v : found[i]) {
        const double h = v.loss - v.psi.dot(result.w);
        hinge = std::max(hinge, h);
        entry.max_violation = std::max(entry.max_violation, h - xi);
        if (h > xi + config.epsilon && solver.add(i, std::move(v))) ++entry.added;
      }
      hinge_sum += hinge;
    }
    entry.primal_objective =
        0.5 * squared_norm(result.w) + config.C / static_cast<double>(n) * hinge_sum;
    if (entry.added > 0) {
      solver.solve(config.qp_tolerance, config.qp_max_sweeps);
      result.w = solver.w();
    }
    entry.dual_objective = solver.dual_objective();
    entry.constraints = solver.constraint_count();
    result.log.push_back(entry);
    if (on_iter) on_iter(entry);
    if (entry.added == 0) {
      result.converged = true;
      break;
    }
  }
  result.slack.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.slack[i] = solver.slack(i);
  return result;
}

double max_constraint_violation(const SeparationOracle& oracle, const std::vector<double>& w,
                                const std::vector<double>& slack) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < oracle.num_examples(); ++i) {
    for (const auto& v : oracle.most_violated(i, w, 1)) {
      worst = std::max(worst, v.loss - v.psi.dot(w) - slack[i]);
    }
  }
  return worst;
}

}  // namespace cog

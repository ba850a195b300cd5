#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "cog/sparse.hpp"

namespace cog {

// One margin-rescaled constraint w.psi >= loss - xi_i, psi = phi(truth) - phi(candidate).
struct Violator {
  SparseVector psi;
  double loss = 0.0;
  std::int64_t id = -1;  // candidate identity, used to skip duplicate constraints
};

// Loss-augmented inference for a set of training examples.
class SeparationOracle {
 public:
  virtual ~SeparationOracle() = default;
  virtual std::size_t num_examples() const = 0;
  virtual std::size_t dimension() const = 0;
  // Up to k candidates with the largest loss + w.phi(candidate), most violated first.
  virtual std::vector<Violator> most_violated(std::size_t example, const std::vector<double>& w,
                                              std::size_t k) const = 0;
};

struct TrainConfig {
  double C = 1.0;
  double epsilon = 1e-3;       // cutting-plane tolerance
  int max_iterations = 200;
  std::size_t mining_k = 50;   // violators considered per example per iteration
  double qp_tolerance = 1e-9;  // duality-gap target of the working-set QP
  int qp_max_sweeps = 100000;
  int threads = 1;

  void validate() const;
};

struct IterationLog {
  int iteration = 0;
  double dual_objective = 0.0;    // working-set QP optimum (non-decreasing)
  double primal_objective = 0.0;  // true objective at the current w
  double max_violation = 0.0;     // max over examples of H_i - xi_i
  std::size_t constraints = 0;
  std::size_t added = 0;
};

struct TrainResult {
  std::vector<double> w;
  std::vector<IterationLog> log;
  bool converged = false;
  std::vector<double> slack;  // xi_i from the final working set
};

// One block of the n-slack dual with its constraints and multipliers.
struct ConstraintBlock {
  std::vector<Violator> constraints;
  std::vector<double> alpha;
  std::vector<std::vector<double>> gram;  // psi_a . psi_b
};

// Dual working-set solver for
//   min 1/2 |w|^2 + C/n sum_i xi_i  s.t.  w.psi_c >= loss_c - xi_i for c in block i.
class NSlackSolver {
 public:
  NSlackSolver(std::size_t dimension, std::size_t examples, double C);

  // Returns false if an identical candidate is already in the block.
  bool add(std::size_t example, Violator v);
  // Pairwise coordinate ascent until the duality gap is <= tolerance.
  void solve(double tolerance, int max_sweeps);

  const std::vector<double>& w() const { return w_; }
  double dual_objective() const;
  double working_primal() const;
  double slack(std::size_t example) const;
  double duality_gap() const;
  std::size_t constraint_count() const;
  const ConstraintBlock& block(std::size_t i) const { return blocks_[i]; }
  double box() const { return box_; }

 private:
  double gradient(std::size_t i, std::size_t c) const;
  void optimize_block(std::size_t i);

  std::size_t dim_;
  double box_;  // C / n
  std::vector<double> w_;
  std::vector<ConstraintBlock> blocks_;
};

using IterationCallback = std::function<void(const IterationLog&)>;

// Cutting-plane training. Hitting max_iterations returns the last model with
// converged = false.
TrainResult train_nslack(const SeparationOracle& oracle, const TrainConfig& config,
                         const std::vector<double>& w0 = {}, const IterationCallback& on_iter = {});

// Largest H_i - xi_i over examples for a given model and per-example slacks.
double max_constraint_violation(const SeparationOracle& oracle, const std::vector<double>& w,
                                const std::vector<double>& slack);

}  // namespace cog

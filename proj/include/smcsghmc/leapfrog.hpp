#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "smcsghmc/mlp.hpp"
#include "smcsghmc/posterior.hpp"
#include "smcsghmc/rng.hpp"

namespace smcsghmc {

struct LeapfrogResult {
    Eigen::VectorXd position;
    Eigen::VectorXd momentum;
};

// Gradient of the potential energy at a position. The step index tells
// stochastic variants which mini-batch to use; deterministic potentials can
// ignore it. Steps run from 0 (initial half-step) to `steps` (final
// half-step), inclusive.
using IndexedGradFn = std::function<Eigen::VectorXd(int step, const Eigen::VectorXd&)>;
using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Velocity-Verlet integration of Hamiltonian dynamics with unit mass:
//   r <- r - (eps/2) grad_u(0, theta)
//   repeat steps-1 times (t = 1..steps-1):
//     theta <- theta + eps r;  r <- r - eps grad_u(t, theta)
//   theta <- theta + eps r
//   r <- r - (eps/2) grad_u(steps, theta)
// The map is volume preserving and, for a step-independent gradient,
// reversible: integrating the result with negated momentum returns to the
// starting point.
LeapfrogResult leapfrog(const Eigen::VectorXd& position, const Eigen::VectorXd& momentum,
                        double step_size, int steps, const IndexedGradFn& grad_u);

// One Hamiltonian Monte Carlo move with fresh momentum r ~ N(0, I) and an
// exact gradient. No accept/reject step: within the sampler the importance
// weights absorb the residual bias, so every trajectory endpoint is kept.
Eigen::VectorXd hmc_propose(const Eigen::VectorXd& theta, const GradFn& grad_u,
                            double step_size, int steps, RngStream& rng);

// Same move, but also returns the final momentum (used to verify
// reversibility and volume preservation).
LeapfrogResult hmc_propose_with_momentum(const Eigen::VectorXd& theta, const GradFn& grad_u,
                                         double step_size, int steps, RngStream& rng);

// Stochastic-gradient HMC move over a posterior: one trajectory consumes the
// given mini-batches, one batch per integration step, so a trajectory touches
// every training example exactly once. Batch b serves step b for
// b = 0..L-1 and the last batch is reused for the closing half-step. The
// batches must partition the dataset; otherwise the call throws
// ContractViolation. Momentum is drawn fresh inside.
Eigen::VectorXd sghmc_propose(const TemperedPosterior& target, const Eigen::VectorXd& theta,
                              const std::vector<MiniBatch>& batches, double step_size,
                              RngStream& rng);

// Convenience overload that shuffles and partitions the dataset internally.
Eigen::VectorXd sghmc_propose(const TemperedPosterior& target, const Eigen::VectorXd& theta,
                              Eigen::Index batch_size, double step_size, RngStream& rng);

}  // namespace smcsghmc

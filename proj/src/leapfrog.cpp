#include "smcsghmc/leapfrog.hpp"

#include <cstddef>
#include <string>
#include <vector>

#include "smcsghmc/errors.hpp"

namespace smcsghmc {

LeapfrogResult leapfrog(const Eigen::VectorXd& position, const Eigen::VectorXd& momentum,
                        double step_size, int steps, const IndexedGradFn& grad_u) {
    if (position.size() != momentum.size())
        throw ShapeError("position and momentum must have the same dimension");
    if (steps < 1) throw ConfigError("leapfrog needs at least one step");
    if (step_size < 0.0) throw ConfigError("leapfrog step size must be non-negative");

    LeapfrogResult state{position, momentum};
    state.momentum -= 0.5 * step_size * grad_u(0, state.position);
    for (int t = 1; t < steps; ++t) {
        state.position += step_size * state.momentum;
        state.momentum -= step_size * grad_u(t, state.position);
    }
    state.position += step_size * state.momentum;
    state.momentum -= 0.5 * step_size * grad_u(steps, state.position);

    if (!state.position.allFinite() || !state.momentum.allFinite())
        throw NumericalError("leapfrog trajectory left the finite domain");
    return state;
}

Eigen::VectorXd hmc_propose(const Eigen::VectorXd& theta, const GradFn& grad_u,
                            double step_size, int steps, RngStream& rng) {
    return hmc_propose_with_momentum(theta, grad_u, step_size, steps, rng).position;
}

LeapfrogResult hmc_propose_with_momentum(const Eigen::VectorXd& theta, const GradFn& grad_u,
                                         double step_size, int steps, RngStream& rng) {
    Eigen::VectorXd momentum(theta.size());
    rng.fill_normal(std::span<double>(momentum.data(), std::size_t(momentum.size())));
    return leapfrog(theta, momentum, step_size, steps,
                    [&grad_u](int, const Eigen::VectorXd& p) { return grad_u(p); });
}

namespace {

void check_partition(const std::vector<MiniBatch>& batches, Eigen::Index n) {
    if (batches.empty()) throw ContractViolation("SGHMC needs at least one mini-batch");
    std::vector<char> seen(std::size_t(n), 0);
    Eigen::Index covered = 0;
    for (const MiniBatch& batch : batches) {
        if (batch.indices.empty()) throw EmptyBatch("SGHMC mini-batch is empty");
        for (Eigen::Index idx : batch.indices) {
            if (idx < 0 || idx >= n)
                throw ContractViolation("mini-batch index " + std::to_string(idx) +
                                        " outside dataset of size " + std::to_string(n));
            if (seen[std::size_t(idx)]++)
                throw ContractViolation("mini-batches visit index " + std::to_string(idx) +
                                        " more than once");
            ++covered;
        }
    }
    if (covered != n)
        throw ContractViolation("mini-batches cover " + std::to_string(covered) + " of " +
                                std::to_string(n) + " examples");
}

}  // namespace

Eigen::VectorXd sghmc_propose(const TemperedPosterior& target, const Eigen::VectorXd& theta,
                              const std::vector<MiniBatch>& batches, double step_size,
                              RngStream& rng) {
    check_partition(batches, target.data().n());

    Eigen::VectorXd momentum(theta.size());
    rng.fill_normal(std::span<double>(momentum.data(), std::size_t(momentum.size())));

    const int steps = int(batches.size());
    const auto grad = [&target, &batches, steps](int step, const Eigen::VectorXd& p) {
        const int batch_index = std::min(step, steps - 1);
        return target.grad_u_minibatch(p, batches[std::size_t(batch_index)]);
    };
    return leapfrog(theta, momentum, step_size, steps, grad).position;
}

Eigen::VectorXd sghmc_propose(const TemperedPosterior& target, const Eigen::VectorXd& theta,
                              Eigen::Index batch_size, double step_size, RngStream& rng) {
    const std::vector<MiniBatch> batches =
        partition_minibatches(target.data().n(), batch_size, rng);
    return sghmc_propose(target, theta, batches, step_size, rng);
}

}  // namespace smcsghmc

#pragma once

#include <Eigen/Dense>

#include "smcsghmc/dataset.hpp"
#include "smcsghmc/mlp.hpp"

namespace smcsghmc {

// Bayesian posterior over network weights with a tempered likelihood.
//
// The temperature T only rescales the log-likelihood used in importance
// weights: with T equal to the dataset size the tempered log-likelihood is
// the mean per-example log-likelihood. Proposal gradients are untempered;
// they always target the full posterior
//   U(theta) = -log p(D | theta) - log p(theta).
class TemperedPosterior {
public:
    TemperedPosterior(const MlpModel& model, const GaussianPrior& prior,
                      const Dataset& data, double temperature);

    const MlpModel& model() const { return model_; }
    const GaussianPrior& prior() const { return prior_; }
    const Dataset& data() const { return data_; }
    double temperature() const { return temperature_; }

    // Full-data log p(D | theta).
    double log_likelihood(const Eigen::VectorXd& theta) const;

    // log p(D | theta) / T.
    double tempered_log_likelihood(const Eigen::VectorXd& theta) const;

    // Stochastic gradient of U(theta) estimated from one mini-batch, with the
    // likelihood term rescaled by N / M.
    Eigen::VectorXd grad_u_minibatch(const Eigen::VectorXd& theta,
                                     const MiniBatch& batch) const;

private:
    const MlpModel& model_;
    const GaussianPrior& prior_;
    const Dataset& data_;
    double temperature_;
};

}  // namespace smcsghmc

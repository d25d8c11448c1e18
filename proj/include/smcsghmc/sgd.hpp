#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "smcsghmc/dataset.hpp"
#include "smcsghmc/mlp.hpp"

namespace smcsghmc {

enum class LrDecay { none, cosine };

struct OptimizerConfig {
    double learning_rate = 0.1;
    double momentum = 0.9;
    double weight_decay = 0.0;  // adds weight_decay * theta to the mean-loss gradient
    Eigen::Index batch_size = 128;
    int epochs = 10;
    LrDecay lr_decay = LrDecay::none;

    void validate() const;  // throws ConfigError on out-of-range values
};

struct TrainHistoryRow {
    int epoch = 0;
    double train_loss = 0.0;  // mean cross-entropy plus the decay penalty
    double val_loss = 0.0;    // mean cross-entropy on held-out data
    double val_accuracy = 0.0;
};

struct TrainResult {
    Eigen::VectorXd theta;
    std::vector<TrainHistoryRow> history;
};

// Draws initial weights scaled to the layer fan-in: He-style for rectified
// units, Glorot-style for tanh. Biases start at zero.
Eigen::VectorXd init_params(const MlpModel& model, RngStream& rng);

// Mean cross-entropy of the model on a dataset (no decay penalty).
double mean_cross_entropy(const MlpModel& model, const Eigen::VectorXd& theta,
                          const Dataset& data);

// Fraction of examples whose arg-max logit matches the label.
double classification_accuracy(const MlpModel& model, const Eigen::VectorXd& theta,
                               const Dataset& data);

// Minimizes mean cross-entropy plus (weight_decay / 2) * ||theta||^2 with
// momentum SGD over shuffled mini-batches. One history row per epoch. Throws
// TrainingDiverged as soon as the loss stops being finite.
TrainResult train_sgd(const MlpModel& model, const Dataset& train, const Dataset& validation,
                      const OptimizerConfig& config, std::uint64_t seed);

}  // namespace smcsghmc

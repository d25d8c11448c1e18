#include "smcsghmc/sgd.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "smcsghmc/errors.hpp"

namespace smcsghmc {

void OptimizerConfig::validate() const {
    // A zero learning rate or zero epochs is a valid no-op run: the result is
    // exactly the initialization.
    if (learning_rate < 0.0) throw ConfigError("learning rate must be non-negative");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must lie in [0, 1)");
    if (weight_decay < 0.0) throw ConfigError("weight decay must be non-negative");
    if (batch_size <= 0) throw ConfigError("batch size must be positive");
    if (epochs < 0) throw ConfigError("epoch count must be non-negative");
}

Eigen::VectorXd init_params(const MlpModel& model, RngStream& rng) {
    const std::vector<int>& sizes = model.layer_sizes();
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(model.param_count());

    Eigen::Index offset = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const Eigen::Index fan_in = sizes[l];
        const Eigen::Index fan_out = sizes[l + 1];
        const double scale = model.activation() == Activation::relu
                                 ? std::sqrt(2.0 / double(fan_in))
                                 : std::sqrt(2.0 / double(fan_in + fan_out));
        for (Eigen::Index i = 0; i < fan_in * fan_out; ++i)
            theta[offset + i] = scale * rng.normal();
        offset += fan_in * fan_out + fan_out;  // biases stay zero
    }
    return theta;
}

double mean_cross_entropy(const MlpModel& model, const Eigen::VectorXd& theta,
                          const Dataset& data) {
    if (data.n() == 0) throw EmptyInput("cross-entropy of an empty dataset");
    return -model.log_likelihood(theta, data.features, data.labels) / double(data.n());
}

double classification_accuracy(const MlpModel& model, const Eigen::VectorXd& theta,
                               const Dataset& data) {
    if (data.n() == 0) throw EmptyInput("accuracy of an empty dataset");
    const RowMajorMatrix scores = model.logits(theta, data.features);
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        Eigen::Index predicted = 0;
        scores.row(i).maxCoeff(&predicted);
        if (int(predicted) == data.labels[i]) ++correct;
    }
    return double(correct) / double(data.n());
}

TrainResult train_sgd(const MlpModel& model, const Dataset& train, const Dataset& validation,
                      const OptimizerConfig& config, std::uint64_t seed) {
    config.validate();
    if (train.n() == 0) throw EmptyInput("cannot train on an empty dataset");
    if (train.dim() != model.input_dim())
        throw ShapeError("training features do not match the model input dimension");

    RngStream init_rng(seed, 0);
    RngStream shuffle_rng(seed, 1);

    TrainResult result;
    result.theta = init_params(model, init_rng);
    Eigen::VectorXd velocity = Eigen::VectorXd::Zero(model.param_count());

    RowMajorMatrix batch_inputs;
    Eigen::VectorXi batch_labels;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        double lr = config.learning_rate;
        if (config.lr_decay == LrDecay::cosine)
            lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * double(epoch - 1) /
                                        double(config.epochs)));

        const std::vector<MiniBatch> batches =
            partition_minibatches(train.n(), config.batch_size, shuffle_rng);

        double loss_sum = 0.0;
        Eigen::Index example_count = 0;
        for (const MiniBatch& batch : batches) {
            const Eigen::Index m = Eigen::Index(batch.indices.size());
            batch_inputs.resize(m, train.dim());
            batch_labels.resize(m);
            for (Eigen::Index i = 0; i < m; ++i) {
                batch_inputs.row(i) = train.features.row(batch.indices[std::size_t(i)]);
                batch_labels[i] = train.labels[batch.indices[std::size_t(i)]];
            }

            double batch_log_lik = 0.0;
            const Eigen::VectorXd grad_lik =
                model.grad_log_likelihood(result.theta, batch_inputs, batch_labels,
                                          &batch_log_lik);
            const Eigen::VectorXd grad =
                -grad_lik / double(m) + config.weight_decay * result.theta;

            velocity = config.momentum * velocity - lr * grad;
            result.theta += velocity;

            loss_sum += -batch_log_lik;
            example_count += m;
        }

        const double penalty = 0.5 * config.weight_decay * result.theta.squaredNorm();
        TrainHistoryRow row;
        row.epoch = epoch;
        row.train_loss = loss_sum / double(example_count) + penalty;
        if (!std::isfinite(row.train_loss))
            throw TrainingDiverged("training loss became non-finite at epoch " +
                                   std::to_string(epoch));
        if (validation.n() > 0) {
            row.val_loss = mean_cross_entropy(model, result.theta, validation);
            row.val_accuracy = classification_accuracy(model, result.theta, validation);
            if (!std::isfinite(row.val_loss))
                throw TrainingDiverged("validation loss became non-finite at epoch " +
                                       std::to_string(epoch));
        }
        result.history.push_back(row);
    }
    return result;
}

}  // namespace smcsghmc

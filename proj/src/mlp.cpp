#include "smcsghmc/mlp.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "smcsghmc/errors.hpp"

namespace smcsghmc {

MlpModel::MlpModel(std::vector<int> layer_sizes, Activation activation)
    : layer_sizes_(std::move(layer_sizes)), activation_(activation) {
    if (layer_sizes_.size() < 2)
        throw ConfigError("MlpModel needs at least an input and an output layer");
    for (int size : layer_sizes_)
        if (size <= 0) throw ConfigError("MlpModel layer sizes must be positive");

    for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
        weight_offsets_.push_back(param_count_);
        param_count_ += Eigen::Index(layer_sizes_[l]) * layer_sizes_[l + 1];
        bias_offsets_.push_back(param_count_);
        param_count_ += layer_sizes_[l + 1];
    }
}

std::vector<ParamShape> MlpModel::param_shapes() const {
    std::vector<ParamShape> shapes;
    for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
        shapes.push_back({layer_sizes_[l], layer_sizes_[l + 1]});
        shapes.push_back({1, layer_sizes_[l + 1]});
    }
    return shapes;
}

void MlpModel::check_theta(const Eigen::VectorXd& theta) const {
    if (theta.size() != param_count_)
        throw ShapeError("parameter vector has size " + std::to_string(theta.size()) +
                         ", expected " + std::to_string(param_count_));
}

void MlpModel::check_batch(const RowMajorMatrix& inputs, const Eigen::VectorXi& labels) const {
    if (inputs.cols() != input_dim())
        throw ShapeError("input dimension " + std::to_string(inputs.cols()) +
                         " does not match model input " + std::to_string(input_dim()));
    if (labels.size() != inputs.rows())
        throw ShapeError("label count does not match input row count");
    for (Eigen::Index i = 0; i < labels.size(); ++i)
        if (labels[i] < 0 || labels[i] >= output_dim())
            throw ContractViolation("label " + std::to_string(labels[i]) +
                                    " outside [0, " + std::to_string(output_dim()) + ")");
}

namespace {

using ConstBlockMap = Eigen::Map<const RowMajorMatrix>;
using ConstRowMap = Eigen::Map<const Eigen::RowVectorXd>;

double apply_activation(double z, Activation act) {
    return act == Activation::relu ? std::max(z, 0.0) : std::tanh(z);
}

double activation_slope(double activated, Activation act) {
    return act == Activation::relu ? (activated > 0.0 ? 1.0 : 0.0)
                                   : 1.0 - activated * activated;
}

}  // namespace

RowMajorMatrix MlpModel::logits(const Eigen::VectorXd& theta,
                                const RowMajorMatrix& inputs) const {
    check_theta(theta);
    if (inputs.cols() != input_dim())
        throw ShapeError("input dimension " + std::to_string(inputs.cols()) +
                         " does not match model input " + std::to_string(input_dim()));

    RowMajorMatrix h = inputs;
    const std::size_t layer_count = layer_sizes_.size() - 1;
    for (std::size_t l = 0; l < layer_count; ++l) {
        ConstBlockMap w(theta.data() + weight_offsets_[l], layer_sizes_[l], layer_sizes_[l + 1]);
        ConstRowMap b(theta.data() + bias_offsets_[l], layer_sizes_[l + 1]);
        RowMajorMatrix z = (h * w).rowwise() + b;
        if (l + 1 < layer_count)
            h = z.unaryExpr([this](double v) { return apply_activation(v, activation_); });
        else
            h = std::move(z);
    }
    return h;
}

RowMajorMatrix MlpModel::log_softmax(const RowMajorMatrix& raw_logits) {
    RowMajorMatrix out(raw_logits.rows(), raw_logits.cols());
    for (Eigen::Index i = 0; i < raw_logits.rows(); ++i) {
        const double max_logit = raw_logits.row(i).maxCoeff();
        const double lse =
            max_logit + std::log((raw_logits.row(i).array() - max_logit).exp().sum());
        out.row(i) = raw_logits.row(i).array() - lse;
    }
    return out;
}

double MlpModel::log_likelihood(const Eigen::VectorXd& theta, const RowMajorMatrix& inputs,
                                const Eigen::VectorXi& labels) const {
    check_batch(inputs, labels);
    const RowMajorMatrix log_probs = log_softmax(logits(theta, inputs));
    double total = 0.0;
    for (Eigen::Index i = 0; i < labels.size(); ++i) total += log_probs(i, labels[i]);
    if (!std::isfinite(total))
        throw NumericalError("non-finite log-likelihood");
    return total;
}

Eigen::VectorXd MlpModel::grad_log_likelihood(const Eigen::VectorXd& theta,
                                              const RowMajorMatrix& inputs,
                                              const Eigen::VectorXi& labels,
                                              double* log_likelihood_out) const {
    check_theta(theta);
    check_batch(inputs, labels);
    const std::size_t layer_count = layer_sizes_.size() - 1;

    // Forward pass, keeping each layer's activations for the backward sweep.
    std::vector<RowMajorMatrix> activations;
    activations.reserve(layer_count + 1);
    activations.push_back(inputs);
    for (std::size_t l = 0; l < layer_count; ++l) {
        ConstBlockMap w(theta.data() + weight_offsets_[l], layer_sizes_[l], layer_sizes_[l + 1]);
        ConstRowMap b(theta.data() + bias_offsets_[l], layer_sizes_[l + 1]);
        RowMajorMatrix z = (activations.back() * w).rowwise() + b;
        if (l + 1 < layer_count)
            activations.push_back(
                z.unaryExpr([this](double v) { return apply_activation(v, activation_); }));
        else
            activations.push_back(std::move(z));
    }

    const RowMajorMatrix log_probs = log_softmax(activations.back());
    if (log_likelihood_out) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < labels.size(); ++i) total += log_probs(i, labels[i]);
        *log_likelihood_out = total;
    }

    // d(sum log p)/d(logits) = onehot(label) - softmax(logits).
    RowMajorMatrix delta = -log_probs.array().exp();
    for (Eigen::Index i = 0; i < labels.size(); ++i) delta(i, labels[i]) += 1.0;

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(param_count_);
    for (std::size_t l = layer_count; l-- > 0;) {
        Eigen::Map<RowMajorMatrix> grad_w(grad.data() + weight_offsets_[l], layer_sizes_[l],
                                          layer_sizes_[l + 1]);
        Eigen::Map<Eigen::RowVectorXd> grad_b(grad.data() + bias_offsets_[l],
                                              layer_sizes_[l + 1]);
        grad_w = activations[l].transpose() * delta;
        grad_b = delta.colwise().sum();
        if (l > 0) {
            ConstBlockMap w(theta.data() + weight_offsets_[l], layer_sizes_[l],
                            layer_sizes_[l + 1]);
            RowMajorMatrix upstream = delta * w.transpose();
            delta = upstream.array() * activations[l].unaryExpr([this](double a) {
                return activation_slope(a, activation_);
            }).array();
        }
    }

    if (!grad.allFinite())
        throw NumericalError("non-finite gradient in log-likelihood backward pass");
    return grad;
}

GaussianPrior::GaussianPrior(Eigen::Index dim, double variance)
    : dim_(dim), variance_(variance) {
    if (dim <= 0) throw ConfigError("GaussianPrior dimension must be positive");
    if (!(variance > 0.0)) throw ConfigError("GaussianPrior variance must be positive");
    log_norm_const_ = -0.5 * double(dim_) * std::log(2.0 * std::numbers::pi * variance_);
}

double GaussianPrior::log_density(const Eigen::VectorXd& theta) const {
    if (theta.size() != dim_)
        throw ShapeError("prior dimension mismatch: " + std::to_string(theta.size()) +
                         " vs " + std::to_string(dim_));
    return log_norm_const_ - 0.5 * theta.squaredNorm() / variance_;
}

Eigen::VectorXd GaussianPrior::grad_log_density(const Eigen::VectorXd& theta) const {
    if (theta.size() != dim_)
        throw ShapeError("prior dimension mismatch: " + std::to_string(theta.size()) +
                         " vs " + std::to_string(dim_));
    return -theta / variance_;
}

Eigen::VectorXd GaussianPrior::sample(RngStream& rng) const {
    Eigen::VectorXd draw(dim_);
    rng.fill_normal(std::span<double>(draw.data(), std::size_t(dim_)));
    return draw * std::sqrt(variance_);
}

std::vector<MiniBatch> partition_minibatches(Eigen::Index n, Eigen::Index batch_size,
                                             RngStream& rng) {
    if (n <= 0) throw EmptyInput("cannot partition an empty dataset");
    if (batch_size <= 0) throw ConfigError("batch size must be positive");

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<Eigen::Index>(order));

    std::vector<MiniBatch> batches;
    batches.reserve(std::size_t((n + batch_size - 1) / batch_size));
    for (Eigen::Index start = 0; start < n; start += batch_size) {
        const Eigen::Index count = std::min(batch_size, n - start);
        MiniBatch batch;
        batch.indices.assign(order.begin() + start, order.begin() + start + count);
        batches.push_back(std::move(batch));
    }
    return batches;
}

Eigen::VectorXd grad_neg_log_posterior_minibatch(const MlpModel& model,
                                                 const GaussianPrior& prior,
                                                 const Dataset& data,
                                                 const Eigen::VectorXd& theta,
                                                 const MiniBatch& batch,
                                                 double* scaled_log_likelihood_out) {
    if (batch.indices.empty())
        throw EmptyBatch("mini-batch gradient requested for an empty batch");
    if (prior.dim() != model.param_count())
        throw ShapeError("prior dimension does not match model parameter count");

    RowMajorMatrix inputs(Eigen::Index(batch.indices.size()), data.dim());
    Eigen::VectorXi labels(Eigen::Index(batch.indices.size()));
    for (std::size_t i = 0; i < batch.indices.size(); ++i) {
        const Eigen::Index row = batch.indices[i];
        if (row < 0 || row >= data.n())
            throw ContractViolation("mini-batch index " + std::to_string(row) +
                                    " outside dataset of size " + std::to_string(data.n()));
        inputs.row(Eigen::Index(i)) = data.features.row(row);
        labels[Eigen::Index(i)] = data.labels[row];
    }

    const double scale = double(data.n()) / double(batch.indices.size());
    double batch_log_lik = 0.0;
    Eigen::VectorXd grad_lik = model.grad_log_likelihood(theta, inputs, labels, &batch_log_lik);
    if (scaled_log_likelihood_out) *scaled_log_likelihood_out = scale * batch_log_lik;
    return -scale * grad_lik - prior.grad_log_density(theta);
}

}  // namespace smcsghmc

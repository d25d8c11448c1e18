#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "smcsghmc/dataset.hpp"
#include "smcsghmc/particles.hpp"
#include "smcsghmc/rng.hpp"

namespace smcsghmc {

enum class Activation { relu, tanh_ };

// Fully connected classifier with a flat parameter vector. Parameters are
// packed layer by layer: the weight matrix W_l (row-major, in x out) followed
// by the bias row b_l. A {784, 100, 10} network therefore has
// 784*100 + 100 + 100*10 + 10 = 79510 parameters.
class MlpModel {
public:
    MlpModel(std::vector<int> layer_sizes, Activation activation = Activation::relu);

    Eigen::Index param_count() const { return param_count_; }
    int input_dim() const { return layer_sizes_.front(); }
    int output_dim() const { return layer_sizes_.back(); }
    const std::vector<int>& layer_sizes() const { return layer_sizes_; }
    Activation activation() const { return activation_; }

    // Shapes of the packed parameter blocks, weights interleaved with biases,
    // compatible with flatten_params / unflatten_params.
    std::vector<ParamShape> param_shapes() const;

    // Forward pass: one row of logits per input row.
    RowMajorMatrix logits(const Eigen::VectorXd& theta, const RowMajorMatrix& inputs) const;

    // Row-wise numerically stable log-softmax.
    static RowMajorMatrix log_softmax(const RowMajorMatrix& raw_logits);

    // Sum over rows of log p(label | input, theta).
    double log_likelihood(const Eigen::VectorXd& theta, const RowMajorMatrix& inputs,
                          const Eigen::VectorXi& labels) const;

    // Gradient of the summed log-likelihood with respect to theta, computed by
    // reverse-mode accumulation through the network. Optionally reports the
    // log-likelihood of the same batch (the forward pass is shared).
    Eigen::VectorXd grad_log_likelihood(const Eigen::VectorXd& theta,
                                        const RowMajorMatrix& inputs,
                                        const Eigen::VectorXi& labels,
                                        double* log_likelihood_out = nullptr) const;

private:
    void check_theta(const Eigen::VectorXd& theta) const;
    void check_batch(const RowMajorMatrix& inputs, const Eigen::VectorXi& labels) const;

    std::vector<int> layer_sizes_;
    Activation activation_;
    Eigen::Index param_count_ = 0;
    std::vector<Eigen::Index> weight_offsets_;
    std::vector<Eigen::Index> bias_offsets_;
};

// Isotropic Gaussian N(0, variance * I) used both as the prior over network
// weights and as the initial distribution when particles start from scratch.
class GaussianPrior {
public:
    GaussianPrior(Eigen::Index dim, double variance);

    double log_density(const Eigen::VectorXd& theta) const;
    Eigen::VectorXd grad_log_density(const Eigen::VectorXd& theta) const;
    Eigen::VectorXd sample(RngStream& rng) const;

    Eigen::Index dim() const { return dim_; }
    double variance() const { return variance_; }

private:
    Eigen::Index dim_;
    double variance_;
    double log_norm_const_;
};

// A mini-batch is a list of row indices into a dataset.
struct MiniBatch {
    std::vector<Eigen::Index> indices;
};

// Shuffles 0..n-1 and cuts the result into consecutive batches so that the
// batches partition the dataset: every index appears in exactly one batch.
// The final batch may be smaller when batch_size does not divide n.
std::vector<MiniBatch> partition_minibatches(Eigen::Index n, Eigen::Index batch_size,
                                             RngStream& rng);

// Stochastic gradient of the negative log-posterior,
//   grad_u = -(N / M) * sum_{i in batch} grad log p(y_i | x_i, theta)
//            - grad log prior(theta),
// where N is the full dataset size and M the batch size. The likelihood sum
// over the batch, scaled by N / M, is optionally reported through
// scaled_log_likelihood_out.
Eigen::VectorXd grad_neg_log_posterior_minibatch(const MlpModel& model,
                                                 const GaussianPrior& prior,
                                                 const Dataset& data,
                                                 const Eigen::VectorXd& theta,
                                                 const MiniBatch& batch,
                                                 double* scaled_log_likelihood_out = nullptr);

}  // namespace smcsghmc

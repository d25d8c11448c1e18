#ifndef SMCSGHMC_PARTICLES_HPP
#define SMCSGHMC_PARTICLES_HPP

#include <Eigen/Dense>
#include <vector>

namespace smcsghmc {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A population of J parameter vectors with log-domain importance weights.
///
/// Row j of params is particle j; log_weights[j] is its natural-log weight.
/// Rows are independently writable; whole-set operations (normalize,
/// resample) are single-writer.
struct ParticleSet {
    RowMajorMatrix params;        // J x D
    Eigen::VectorXd log_weights;  // J

    ParticleSet() = default;
    ParticleSet(Eigen::Index count, Eigen::Index dim)
        : params(count, dim),
          log_weights(Eigen::VectorXd::Constant(count, -std::log(double(count)))) {}

    Eigen::Index count() const { return params.rows(); }
    Eigen::Index dim() const { return params.cols(); }
};

struct NormalizedWeights {
    Eigen::VectorXd probabilities;  // sums to 1
    double log_sum;                 // log sum exp of the input
    double log_mean;                // log_sum - log(J); the evidence increment
};

/// log sum exp with max subtraction; finite for inputs within +-1e6.
double log_sum_exp(const Eigen::VectorXd& log_values);

/// Converts log-weights to a normalized probability vector.
///
/// Throws DegenerateWeights when every entry is -inf, ContractViolation
/// when the input is empty.
NormalizedWeights normalize_log_weights(const Eigen::VectorXd& log_weights);

/// In-place variant: rewrites set.log_weights so that sum(exp(.)) == 1.
/// Returns the same summary as normalize_log_weights.
NormalizedWeights normalize_in_place(ParticleSet& set);

/// J_eff = 1 / sum(w^2) for normalized weights; lies in [1, J].
/// Throws ContractViolation when the weights do not sum to 1 within 1e-9.
double effective_sample_size(const Eigen::VectorXd& normalized_weights);

/// Shapes of the structured blocks a flat parameter vector decomposes into.
struct ParamShape {
    Eigen::Index rows;
    Eigen::Index cols;
};

Eigen::Index total_size(const std::vector<ParamShape>& shapes);

/// Concatenates row-major blocks into one flat vector.
Eigen::VectorXd flatten_params(const std::vector<RowMajorMatrix>& blocks);

/// Splits a flat vector back into blocks; exact inverse of flatten_params.
/// Throws ShapeError when flat.size() != total_size(shapes).
std::vector<RowMajorMatrix> unflatten_params(const Eigen::VectorXd& flat,
                                             const std::vector<ParamShape>& shapes);

}  // namespace smcsghmc

#endif

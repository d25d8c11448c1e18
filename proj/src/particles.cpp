#include "smcsghmc/particles.hpp"

#include <cmath>
#include <limits>

#include "smcsghmc/errors.hpp"

namespace smcsghmc {

double log_sum_exp(const Eigen::VectorXd& log_values) {
    if (log_values.size() == 0)
        throw ContractViolation("log_sum_exp: empty input");
    const double max_val = log_values.maxCoeff();
    if (!std::isfinite(max_val)) return max_val;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < log_values.size(); ++i)
        sum += std::exp(log_values[i] - max_val);
    return max_val + std::log(sum);
}

NormalizedWeights normalize_log_weights(const Eigen::VectorXd& log_weights) {
    if (log_weights.size() == 0)
        throw ContractViolation("normalize_log_weights: empty input");
    const double max_val = log_weights.maxCoeff();
    if (max_val == -std::numeric_limits<double>::infinity())
        throw DegenerateWeights("normalize_log_weights: all weights are zero");

    // Scalar std::exp keeps dead particles (log weight -inf) at exactly zero
    // and equal weights exactly uniform; Eigen's vectorized exp clamps its
    // argument and would return subnormal junk for -inf.
    NormalizedWeights out;
    out.probabilities.resize(log_weights.size());
    double sum = 0.0;
    for (Eigen::Index i = 0; i < log_weights.size(); ++i) {
        out.probabilities[i] = std::exp(log_weights[i] - max_val);
        sum += out.probabilities[i];
    }
    out.probabilities /= sum;
    out.log_sum = max_val + std::log(sum);
    out.log_mean = out.log_sum - std::log(double(log_weights.size()));
    return out;
}

NormalizedWeights normalize_in_place(ParticleSet& set) {
    NormalizedWeights norm = normalize_log_weights(set.log_weights);
    set.log_weights.array() -= norm.log_sum;
    return norm;
}

double effective_sample_size(const Eigen::VectorXd& normalized_weights) {
    if (normalized_weights.size() == 0)
        throw ContractViolation("effective_sample_size: empty input");
    const double sum = normalized_weights.sum();
    if (std::abs(sum - 1.0) > 1e-9)
        throw ContractViolation("effective_sample_size: weights not normalized (sum=" +
                                std::to_string(sum) + ")");
    return 1.0 / normalized_weights.squaredNorm();
}

Eigen::Index total_size(const std::vector<ParamShape>& shapes) {
    Eigen::Index n = 0;
    for (const auto& s : shapes) n += s.rows * s.cols;
    return n;
}

Eigen::VectorXd flatten_params(const std::vector<RowMajorMatrix>& blocks) {
    Eigen::Index n = 0;
    for (const auto& b : blocks) n += b.size();
    Eigen::VectorXd flat(n);
    Eigen::Index offset = 0;
    for (const auto& b : blocks) {
        flat.segment(offset, b.size()) =
            Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
        offset += b.size();
    }
    return flat;
}

std::vector<RowMajorMatrix> unflatten_params(const Eigen::VectorXd& flat,
                                             const std::vector<ParamShape>& shapes) {
    if (flat.size() != total_size(shapes))
        throw ShapeError("unflatten_params: flat size " + std::to_string(flat.size()) +
                         " does not match shapes total " +
                         std::to_string(total_size(shapes)));
    std::vector<RowMajorMatrix> blocks;
    blocks.reserve(shapes.size());
    Eigen::Index offset = 0;
    for (const auto& s : shapes) {
        RowMajorMatrix block(s.rows, s.cols);
        Eigen::Map<Eigen::VectorXd>(block.data(), block.size()) =
            flat.segment(offset, s.rows * s.cols);
        offset += s.rows * s.cols;
        blocks.push_back(std::move(block));
    }
    return blocks;
}

}  // namespace smcsghmc

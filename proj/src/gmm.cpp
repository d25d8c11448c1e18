#include "smcsghmc/gmm.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "smcsghmc/errors.hpp"
#include "smcsghmc/particles.hpp"

namespace smcsghmc {

GmmTarget::GmmTarget(const std::vector<double>& axis_coords, double component_variance)
    : variance_(component_variance) {
    if (axis_coords.empty()) throw ConfigError("GmmTarget: empty grid");
    if (component_variance <= 0.0)
        throw ConfigError("GmmTarget: component variance must be positive");
    for (double y : axis_coords)
        for (double x : axis_coords) means_.emplace_back(x, y);
    log_mix_weight_ = -std::log(double(means_.size()));
    log_norm_const_ = -std::log(2.0 * std::numbers::pi * variance_);
}

double GmmTarget::log_density(const Eigen::Vector2d& point) const {
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(means_.size());
    for (std::size_t k = 0; k < means_.size(); ++k) {
        const double sq = (point - means_[k]).squaredNorm();
        terms[k] = log_norm_const_ - 0.5 * sq / variance_;
        if (terms[k] > max_term) max_term = terms[k];
    }
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - max_term);
    return log_mix_weight_ + max_term + std::log(sum);
}

Eigen::Vector2d GmmTarget::grad_log_density(const Eigen::Vector2d& point) const {
    // Responsibilities r_k = softmax of component log-densities.
    std::vector<double> terms(means_.size());
    double max_term = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < means_.size(); ++k) {
        terms[k] = -0.5 * (point - means_[k]).squaredNorm() / variance_;
        if (terms[k] > max_term) max_term = terms[k];
    }
    double denom = 0.0;
    for (double t : terms) denom += std::exp(t - max_term);

    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    for (std::size_t k = 0; k < means_.size(); ++k) {
        const double resp = std::exp(terms[k] - max_term) / denom;
        grad += resp * (means_[k] - point) / variance_;
    }
    return grad;
}

Eigen::Vector2d GmmTarget::sample(RngStream& rng) const {
    const auto k = rng.uniform_below(means_.size());
    const double sd = std::sqrt(variance_);
    return means_[k] + sd * Eigen::Vector2d(rng.normal(), rng.normal());
}

int GmmTarget::nearest_mean(const Eigen::Vector2d& point) const {
    int best = 0;
    double best_sq = (point - means_[0]).squaredNorm();
    for (std::size_t k = 1; k < means_.size(); ++k) {
        const double sq = (point - means_[k]).squaredNorm();
        if (sq < best_sq) {
            best_sq = sq;
            best = static_cast<int>(k);
        }
    }
    return best;
}

Eigen::VectorXd mode_masses(const GmmTarget& target, const RowMajorMatrix& points,
                            const Eigen::VectorXd& log_weights) {
    if (points.cols() != 2) throw ShapeError("mode_masses: points must be 2-D");
    if (points.rows() != log_weights.size())
        throw ShapeError("mode_masses: one log-weight per point is required");
    const Eigen::VectorXd probs = normalize_log_weights(log_weights).probabilities;

    Eigen::VectorXd masses = Eigen::VectorXd::Zero(target.component_count());
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        masses[target.nearest_mean(points.row(i).transpose())] += probs[i];
    return masses;
}

}  // namespace smcsghmc

#ifndef SMCSGHMC_GMM_HPP
#define SMCSGHMC_GMM_HPP

#include <Eigen/Dense>
#include <vector>

#include "smcsghmc/particles.hpp"
#include "smcsghmc/rng.hpp"

namespace smcsghmc {

/// Two-dimensional mixture of equally weighted isotropic Gaussians on a
/// square grid. The default layout is 25 components at {-4,-2,0,2,4}^2
/// with per-axis variance 0.3.
///
/// log_density uses log-sum-exp over component log-densities; the gradient
/// is the responsibility-weighted sum of per-component gradients, with the
/// responsibilities formed in log domain so distant modes cannot underflow
/// the result. Both are total functions of finite inputs.
class GmmTarget {
public:
    GmmTarget() : GmmTarget({-4.0, -2.0, 0.0, 2.0, 4.0}, 0.3) {}
    GmmTarget(const std::vector<double>& axis_coords, double component_variance);

    double log_density(const Eigen::Vector2d& point) const;
    Eigen::Vector2d grad_log_density(const Eigen::Vector2d& point) const;

    Eigen::Vector2d sample(RngStream& rng) const;

    /// Index of the component mean closest to the point (Euclidean).
    int nearest_mean(const Eigen::Vector2d& point) const;

    const std::vector<Eigen::Vector2d>& means() const { return means_; }
    double component_variance() const { return variance_; }
    int component_count() const { return static_cast<int>(means_.size()); }

private:
    std::vector<Eigen::Vector2d> means_;
    double variance_;
    double log_mix_weight_;   // log(1/K)
    double log_norm_const_;   // -log(2*pi*variance) for a 2-D isotropic component
};

/// Normalizes the log-weights jointly and accumulates each point's weight
/// onto its nearest component mean. Returns one mass per component; the
/// masses sum to one. Rows of points are 2-D sample locations.
Eigen::VectorXd mode_masses(const GmmTarget& target, const RowMajorMatrix& points,
                            const Eigen::VectorXd& log_weights);

}  // namespace smcsghmc

#endif

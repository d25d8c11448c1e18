#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "smcsghmc/gmm.hpp"
#include "smcsghmc/leapfrog.hpp"
#include "smcsghmc/particles.hpp"
#include "smcsghmc/posterior.hpp"
#include "smcsghmc/rng.hpp"

namespace smcsghmc {

enum class ResampleScheme { systematic, multinomial };

struct SamplerConfig {
    Eigen::Index particles = 0;  // population size J
    int epochs = 0;              // total sampler epochs K
    int warmup_epochs = 0;       // epochs <= this are not collected
    double ess_threshold = 0.5;  // resample when ESS < threshold * J
    bool resample_every_epoch = false;
    ResampleScheme scheme = ResampleScheme::systematic;
    int threads = 1;

    void validate() const;  // throws ConfigError on out-of-range values
};

// Draw particle indices proportional to the given probability vector (which
// must sum to one within 1e-9). Multinomial draws `count` independent
// inverse-CDF samples; systematic uses a single uniform offset and one
// stratified sweep, giving lower variance for the same weights.
std::vector<Eigen::Index> multinomial_resample_indices(const Eigen::VectorXd& probabilities,
                                                       Eigen::Index count, RngStream& rng);
std::vector<Eigen::Index> systematic_resample_indices(const Eigen::VectorXd& probabilities,
                                                      Eigen::Index count, RngStream& rng);

// Replaces the population with the selected rows and resets every log-weight
// to log(1/J) exactly.
void apply_resample(ParticleSet& particles, const std::vector<Eigen::Index>& indices);

// Flat storage for parameter vectors collected after warmup, with the
// log-weight, epoch, and particle slot recorded at collection time. Capacity
// is fixed up front; appending past it is a contract violation.
class SampleStore {
public:
    SampleStore() = default;
    SampleStore(Eigen::Index capacity, Eigen::Index dim);

    void append(const Eigen::Ref<const Eigen::VectorXd>& theta, double log_weight, int epoch,
                int particle_id);

    Eigen::Index size() const { return size_; }
    Eigen::Index capacity() const { return params_.rows(); }
    Eigen::Index dim() const { return params_.cols(); }

    Eigen::Ref<const RowMajorMatrix> params() const { return params_.topRows(size_); }
    Eigen::Ref<const Eigen::VectorXd> log_weights() const { return log_weights_.head(size_); }
    const std::vector<int>& epochs() const { return epochs_; }
    const std::vector<int>& particle_ids() const { return particle_ids_; }

private:
    RowMajorMatrix params_;
    Eigen::VectorXd log_weights_;
    std::vector<int> epochs_;
    std::vector<int> particle_ids_;
    Eigen::Index size_ = 0;
};

// Adds one tempered log-likelihood increment to a running log-weight. A
// non-finite increment kills the particle (weight becomes -inf) instead of
// poisoning the population; when that happens *degenerate_count is bumped.
double weight_update(double log_weight, double increment, int* degenerate_count = nullptr);

// What the sampler needs from a target distribution: a way to draw and weight
// initial particles, the per-epoch log-weight increment (which may differ
// between warm-up and collection phases), and a move kernel.
class SmcTarget {
public:
    virtual ~SmcTarget() = default;
    virtual Eigen::Index dim() const = 0;
    virtual Eigen::VectorXd initial_draw(RngStream& rng) const = 0;
    virtual double log_initial_weight(const Eigen::VectorXd& theta) const = 0;
    virtual double log_weight_term(const Eigen::VectorXd& theta, bool warmup) const = 0;
    virtual Eigen::VectorXd propose(const Eigen::VectorXd& theta, RngStream& rng) const = 0;
};

// Bayesian network posterior as a sampler target. Particles move by
// stochastic-gradient trajectories over one shuffled pass of the data and are
// reweighted by the tempered full-data log-likelihood. Warm-up epochs may run
// at their own temperature; 0 means "same as the posterior's". Starting from
// the prior makes the initial importance correction collapse to the tempered
// likelihood alone.
class BnnSmcTarget : public SmcTarget {
public:
    BnnSmcTarget(const TemperedPosterior& posterior, Eigen::Index batch_size,
                 double step_size, double warmup_temperature = 0.0);

    Eigen::Index dim() const override;
    Eigen::VectorXd initial_draw(RngStream& rng) const override;
    double log_initial_weight(const Eigen::VectorXd& theta) const override;
    double log_weight_term(const Eigen::VectorXd& theta, bool warmup) const override;
    Eigen::VectorXd propose(const Eigen::VectorXd& theta, RngStream& rng) const override;

private:
    const TemperedPosterior& posterior_;
    Eigen::Index batch_size_;
    double step_size_;
    double warmup_temperature_;
};

// Synthetic two-dimensional mixture as a sampler target: the mixture density
// plays the role of the likelihood at temperature one, particles start
// uniformly in a centered box, and moves use exact-gradient trajectories.
class GmmSmcTarget : public SmcTarget {
public:
    GmmSmcTarget(const GmmTarget& target, double box_half_width, double step_size, int steps);

    Eigen::Index dim() const override { return 2; }
    Eigen::VectorXd initial_draw(RngStream& rng) const override;
    double log_initial_weight(const Eigen::VectorXd& theta) const override;
    double log_weight_term(const Eigen::VectorXd& theta, bool warmup) const override;
    Eigen::VectorXd propose(const Eigen::VectorXd& theta, RngStream& rng) const override;

private:
    const GmmTarget& target_;
    double box_half_width_;
    double step_size_;
    int steps_;
};

struct InitSpec {
    // draw: sample every particle from the target's initial distribution and
    // importance-correct the weights. replicate: copy one parameter vector to
    // every slot (optionally Gaussian-jittered) and start from uniform
    // weights, as when resuming from a pretrained solution.
    enum class Mode { draw, replicate };
    Mode mode = Mode::draw;
    Eigen::VectorXd replicate_theta;
    double jitter_sd = 0.0;
};

struct EpochDiagnostics {
    int epoch = 0;
    double ess = 0.0;  // effective sample size at the start of the epoch
    bool resampled = false;
    double mean_loglik = 0.0;       // average log-weight increment across particles
    double mean_log_weight = 0.0;   // after the update
    double max_log_weight = 0.0;    // after the update
    int degenerate_updates = 0;     // increments that came back non-finite
    double validation_loss = std::numeric_limits<double>::quiet_NaN();
    double wall_seconds = 0.0;
};

struct SmcResult {
    ParticleSet particles;  // final population
    SampleStore samples;
    std::vector<EpochDiagnostics> diagnostics;
    double log_evidence = 0.0;  // running normalizing-constant estimate
    int resample_count = 0;
};

using EpochCallback = std::function<void(const EpochDiagnostics&)>;
using ValidationFn =
    std::function<double(const ParticleSet&, const Eigen::VectorXd& normalized_weights)>;

// Runs the full sampler loop: per epoch, normalize weights, measure ESS,
// resample when below threshold (or always, if configured), move every
// particle through the target's kernel, add the tempered log-weight term, and
// collect the population once past warmup.
//
// Each particle slot owns RngStream(seed, slot + 1) for its entire lifetime
// and resampling moves parameters between slots without touching the streams,
// so results are byte-identical for any thread count. Stream 0 is reserved
// for resampling draws.
//
// Throws DegeneracyError when every particle weight collapses to -inf.
SmcResult run_smc(const SmcTarget& target, const SamplerConfig& config, const InitSpec& init,
                  std::uint64_t seed, const EpochCallback& on_epoch = {},
                  const ValidationFn& validation = {});

}  // namespace smcsghmc

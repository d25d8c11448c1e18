#include "smcsghmc/smc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <string>
#include <thread>
#include <utility>

#include "smcsghmc/errors.hpp"

namespace smcsghmc {

void SamplerConfig::validate() const {
    if (particles <= 0) throw ConfigError("particle count must be positive");
    if (epochs < 1) throw ConfigError("epoch count must be at least 1");
    if (warmup_epochs < 0 || warmup_epochs >= epochs)
        throw ConfigError("warmup epochs must lie in [0, epochs)");
    if (!(ess_threshold > 0.0) || ess_threshold > 1.0)
        throw ConfigError("ESS threshold must lie in (0, 1]");
    if (threads < 1) throw ConfigError("thread count must be at least 1");
}

namespace {

void check_probabilities(const Eigen::VectorXd& probabilities) {
    if (probabilities.size() == 0)
        throw ContractViolation("resampling needs a non-empty probability vector");
    if (std::abs(probabilities.sum() - 1.0) > 1e-9)
        throw ContractViolation("resampling probabilities must sum to one");
    if ((probabilities.array() < 0.0).any())
        throw ContractViolation("resampling probabilities must be non-negative");
}

}  // namespace

std::vector<Eigen::Index> multinomial_resample_indices(const Eigen::VectorXd& probabilities,
                                                       Eigen::Index count, RngStream& rng) {
    check_probabilities(probabilities);
    Eigen::VectorXd cdf(probabilities.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
        acc += probabilities[i];
        cdf[i] = acc;
    }

    std::vector<Eigen::Index> indices(static_cast<std::size_t>(count));
    for (Eigen::Index j = 0; j < count; ++j) {
        const double u = rng.uniform();
        const double* pos = std::upper_bound(cdf.data(), cdf.data() + cdf.size(), u);
        indices[std::size_t(j)] =
            std::min<Eigen::Index>(pos - cdf.data(), probabilities.size() - 1);
    }
    return indices;
}

std::vector<Eigen::Index> systematic_resample_indices(const Eigen::VectorXd& probabilities,
                                                      Eigen::Index count, RngStream& rng) {
    check_probabilities(probabilities);
    const double offset = rng.uniform() / double(count);

    std::vector<Eigen::Index> indices(static_cast<std::size_t>(count));
    double cumulative = probabilities[0];
    Eigen::Index source = 0;
    for (Eigen::Index j = 0; j < count; ++j) {
        const double point = offset + double(j) / double(count);
        while (cumulative < point && source + 1 < probabilities.size())
            cumulative += probabilities[++source];
        indices[std::size_t(j)] = source;
    }
    return indices;
}

void apply_resample(ParticleSet& particles, const std::vector<Eigen::Index>& indices) {
    if (Eigen::Index(indices.size()) != particles.count())
        throw ContractViolation("resample index count must match the population size");
    RowMajorMatrix reordered(particles.count(), particles.dim());
    for (Eigen::Index j = 0; j < particles.count(); ++j) {
        const Eigen::Index src = indices[std::size_t(j)];
        if (src < 0 || src >= particles.count())
            throw ContractViolation("resample index out of range");
        reordered.row(j) = particles.params.row(src);
    }
    particles.params = std::move(reordered);
    particles.log_weights.setConstant(-std::log(double(particles.count())));
}

SampleStore::SampleStore(Eigen::Index capacity, Eigen::Index dim)
    : params_(capacity, dim), log_weights_(capacity) {
    if (capacity < 0 || dim <= 0)
        throw ConfigError("sample store needs non-negative capacity and positive dimension");
    epochs_.reserve(std::size_t(capacity));
    particle_ids_.reserve(std::size_t(capacity));
}

void SampleStore::append(const Eigen::Ref<const Eigen::VectorXd>& theta, double log_weight,
                         int epoch, int particle_id) {
    if (size_ >= params_.rows())
        throw ContractViolation("sample store is full (capacity " +
                                std::to_string(params_.rows()) + ")");
    if (theta.size() != params_.cols())
        throw ShapeError("sample dimension does not match the store");
    params_.row(size_) = theta.transpose();
    log_weights_[size_] = log_weight;
    epochs_.push_back(epoch);
    particle_ids_.push_back(particle_id);
    ++size_;
}

double weight_update(double log_weight, double increment, int* degenerate_count) {
    if (!std::isfinite(increment)) {
        if (degenerate_count) ++*degenerate_count;
        return -std::numeric_limits<double>::infinity();
    }
    return log_weight + increment;
}

BnnSmcTarget::BnnSmcTarget(const TemperedPosterior& posterior, Eigen::Index batch_size,
                           double step_size, double warmup_temperature)
    : posterior_(posterior),
      batch_size_(batch_size),
      step_size_(step_size),
      warmup_temperature_(warmup_temperature > 0.0 ? warmup_temperature
                                                   : posterior.temperature()) {
    if (batch_size <= 0) throw ConfigError("batch size must be positive");
    if (step_size < 0.0) throw ConfigError("step size must be non-negative");
    if (warmup_temperature < 0.0) throw ConfigError("warm-up temperature must be non-negative");
}

Eigen::Index BnnSmcTarget::dim() const { return posterior_.model().param_count(); }

Eigen::VectorXd BnnSmcTarget::initial_draw(RngStream& rng) const {
    return posterior_.prior().sample(rng);
}

double BnnSmcTarget::log_initial_weight(const Eigen::VectorXd& theta) const {
    // Initial particles come from the prior, so the prior density cancels
    // against the proposal density and only the tempered likelihood remains.
    // The first weight belongs to the warm-up phase.
    return log_weight_term(theta, true);
}

double BnnSmcTarget::log_weight_term(const Eigen::VectorXd& theta, bool warmup) const {
    if (warmup) return posterior_.log_likelihood(theta) / warmup_temperature_;
    return posterior_.tempered_log_likelihood(theta);
}

Eigen::VectorXd BnnSmcTarget::propose(const Eigen::VectorXd& theta, RngStream& rng) const {
    return sghmc_propose(posterior_, theta, batch_size_, step_size_, rng);
}

GmmSmcTarget::GmmSmcTarget(const GmmTarget& target, double box_half_width, double step_size,
                           int steps)
    : target_(target), box_half_width_(box_half_width), step_size_(step_size), steps_(steps) {
    if (!(box_half_width > 0.0)) throw ConfigError("box half-width must be positive");
    if (step_size < 0.0) throw ConfigError("step size must be non-negative");
    if (steps < 1) throw ConfigError("trajectory needs at least one step");
}

Eigen::VectorXd GmmSmcTarget::initial_draw(RngStream& rng) const {
    Eigen::VectorXd theta(2);
    theta[0] = box_half_width_ * (2.0 * rng.uniform() - 1.0);
    theta[1] = box_half_width_ * (2.0 * rng.uniform() - 1.0);
    return theta;
}

double GmmSmcTarget::log_initial_weight(const Eigen::VectorXd& theta) const {
    const double log_box_density = -2.0 * std::log(2.0 * box_half_width_);
    return target_.log_density(theta) - log_box_density;
}

double GmmSmcTarget::log_weight_term(const Eigen::VectorXd& theta, bool /*warmup*/) const {
    return target_.log_density(theta);
}

Eigen::VectorXd GmmSmcTarget::propose(const Eigen::VectorXd& theta, RngStream& rng) const {
    const auto grad_u = [this](const Eigen::VectorXd& p) {
        return Eigen::VectorXd(-target_.grad_log_density(p));
    };
    return hmc_propose(theta, grad_u, step_size_, steps_, rng);
}

namespace {

// Runs fn(slot) for every slot, split into contiguous chunks across threads.
// Per-slot exceptions are captured and the one from the lowest slot is
// rethrown, so failure behavior does not depend on the thread count.
void parallel_for_slots(Eigen::Index count, int threads,
                        const std::function<void(Eigen::Index)>& fn) {
    const int workers = int(std::min<Eigen::Index>(std::max(threads, 1), count));
    std::vector<std::pair<Eigen::Index, std::exception_ptr>> failures(static_cast<std::size_t>(workers));

    if (workers <= 1) {
        for (Eigen::Index slot = 0; slot < count; ++slot) fn(slot);
        return;
    }

    std::vector<std::thread> pool;
    pool.reserve(std::size_t(workers));
    for (int w = 0; w < workers; ++w) {
        const Eigen::Index begin = count * w / workers;
        const Eigen::Index end = count * (w + 1) / workers;
        pool.emplace_back([&fn, &failures, w, begin, end] {
            for (Eigen::Index slot = begin; slot < end; ++slot) {
                try {
                    fn(slot);
                } catch (...) {
                    failures[std::size_t(w)] = {slot, std::current_exception()};
                    return;
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();

    const std::exception_ptr* first = nullptr;
    Eigen::Index first_slot = count;
    for (const auto& [slot, err] : failures)
        if (err && slot < first_slot) {
            first_slot = slot;
            first = &err;
        }
    if (first) std::rethrow_exception(*first);
}

double finite_or_neg_inf(double value) {
    return std::isfinite(value) ? value : -std::numeric_limits<double>::infinity();
}

}  // namespace

SmcResult run_smc(const SmcTarget& target, const SamplerConfig& config, const InitSpec& init,
                  std::uint64_t seed, const EpochCallback& on_epoch,
                  const ValidationFn& validation) {
    config.validate();
    const Eigen::Index J = config.particles;
    const Eigen::Index D = target.dim();

    SmcResult result;
    result.particles = ParticleSet(J, D);
    result.samples =
        SampleStore(Eigen::Index(config.epochs - config.warmup_epochs) * J, D);
    ParticleSet& particles = result.particles;

    // Slot j draws from stream j + 1 for the whole run; stream 0 is the
    // sampler's own (resampling offsets and draws).
    RngStream global_stream(seed, 0);
    std::vector<RngStream> slot_streams;
    slot_streams.reserve(std::size_t(J));
    for (Eigen::Index j = 0; j < J; ++j) slot_streams.emplace_back(seed, std::uint64_t(j) + 1);

    if (init.mode == InitSpec::Mode::draw) {
        parallel_for_slots(J, config.threads, [&](Eigen::Index j) {
            const Eigen::VectorXd theta = target.initial_draw(slot_streams[std::size_t(j)]);
            particles.params.row(j) = theta.transpose();
            particles.log_weights[j] = finite_or_neg_inf(target.log_initial_weight(theta));
        });
    } else {
        if (init.replicate_theta.size() != D)
            throw ShapeError("replicated parameter vector does not match the target dimension");
        particles.log_weights.setConstant(-std::log(double(J)));
        parallel_for_slots(J, config.threads, [&](Eigen::Index j) {
            Eigen::VectorXd theta = init.replicate_theta;
            if (init.jitter_sd > 0.0) {
                Eigen::VectorXd noise(D);
                slot_streams[std::size_t(j)].fill_normal(
                    std::span<double>(noise.data(), std::size_t(D)));
                theta += init.jitter_sd * noise;
            }
            particles.params.row(j) = theta.transpose();
        });
    }

    // log_evidence_offset + log-mean of the current unnormalized weights is
    // the running normalizing-constant estimate; resampling banks the current
    // log-sum so the invariant survives the weight reset.
    double log_evidence_offset = 0.0;
    std::vector<double> increments(static_cast<std::size_t>(J));

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        EpochDiagnostics diag;
        diag.epoch = epoch;

        NormalizedWeights norm;
        try {
            norm = normalize_log_weights(particles.log_weights);
        } catch (const DegenerateWeights& e) {
            throw DegeneracyError("epoch " + std::to_string(epoch) + ": " + e.what());
        }
        diag.ess = effective_sample_size(norm.probabilities);

        const bool resample =
            config.resample_every_epoch || diag.ess < config.ess_threshold * double(J);
        if (resample) {
            log_evidence_offset += norm.log_sum;
            const std::vector<Eigen::Index> indices =
                config.scheme == ResampleScheme::systematic
                    ? systematic_resample_indices(norm.probabilities, J, global_stream)
                    : multinomial_resample_indices(norm.probabilities, J, global_stream);
            apply_resample(particles, indices);
            diag.resampled = true;
            ++result.resample_count;
        }

        const bool warmup = epoch <= config.warmup_epochs;
        parallel_for_slots(J, config.threads, [&](Eigen::Index j) {
            Eigen::VectorXd theta = particles.params.row(j).transpose();
            try {
                theta = target.propose(theta, slot_streams[std::size_t(j)]);
            } catch (const NumericalError& e) {
                throw NumericalError("particle " + std::to_string(j) + ": " + e.what());
            }
            particles.params.row(j) = theta.transpose();
            increments[std::size_t(j)] = target.log_weight_term(theta, warmup);
        });

        double increment_sum = 0.0;
        Eigen::Index finite_count = 0;
        for (Eigen::Index j = 0; j < J; ++j) {
            const double inc = increments[std::size_t(j)];
            particles.log_weights[j] =
                weight_update(particles.log_weights[j], inc, &diag.degenerate_updates);
            if (std::isfinite(inc)) {
                increment_sum += inc;
                ++finite_count;
            }
        }
        diag.mean_loglik = finite_count > 0 ? increment_sum / double(finite_count)
                                            : -std::numeric_limits<double>::infinity();
        diag.mean_log_weight = particles.log_weights.mean();
        diag.max_log_weight = particles.log_weights.maxCoeff();

        if (diag.degenerate_updates == J) {
            result.diagnostics.push_back(diag);
            throw DegeneracyError("epoch " + std::to_string(epoch) +
                                  ": every weight update returned a non-finite value");
        }

        if (epoch > config.warmup_epochs)
            for (Eigen::Index j = 0; j < J; ++j)
                result.samples.append(particles.params.row(j).transpose(),
                                      particles.log_weights[j], epoch, int(j));

        if (validation) {
            NormalizedWeights current;
            try {
                current = normalize_log_weights(particles.log_weights);
            } catch (const DegenerateWeights& e) {
                result.diagnostics.push_back(diag);
                throw DegeneracyError("epoch " + std::to_string(epoch) + ": " + e.what());
            }
            diag.validation_loss = validation(particles, current.probabilities);
        }

        diag.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.diagnostics.push_back(diag);
        if (on_epoch) on_epoch(diag);
    }

    NormalizedWeights final_norm;
    try {
        final_norm = normalize_log_weights(particles.log_weights);
    } catch (const DegenerateWeights& e) {
        throw DegeneracyError(std::string("after final epoch: ") + e.what());
    }
    result.log_evidence = log_evidence_offset + final_norm.log_mean;
    return result;
}

}  // namespace smcsghmc

#include "smcsghmc/posterior.hpp"

#include <string>

#include "smcsghmc/errors.hpp"

namespace smcsghmc {

TemperedPosterior::TemperedPosterior(const MlpModel& model, const GaussianPrior& prior,
                                     const Dataset& data, double temperature)
    : model_(model), prior_(prior), data_(data), temperature_(temperature) {
    if (!(temperature > 0.0))
        throw ConfigError("temperature must be positive, got " + std::to_string(temperature));
    if (prior.dim() != model.param_count())
        throw ShapeError("prior dimension does not match model parameter count");
    if (data.dim() != model.input_dim())
        throw ShapeError("dataset feature dimension does not match model input");
    if (data.n() == 0) throw EmptyInput("posterior requires a non-empty dataset");
}

double TemperedPosterior::log_likelihood(const Eigen::VectorXd& theta) const {
    return model_.log_likelihood(theta, data_.features, data_.labels);
}

double TemperedPosterior::tempered_log_likelihood(const Eigen::VectorXd& theta) const {
    return log_likelihood(theta) / temperature_;
}

Eigen::VectorXd TemperedPosterior::grad_u_minibatch(const Eigen::VectorXd& theta,
                                                    const MiniBatch& batch) const {
    return grad_neg_log_posterior_minibatch(model_, prior_, data_, theta, batch);
}

}  // namespace smcsghmc

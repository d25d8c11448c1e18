#include "smcsghmc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "smcsghmc/errors.hpp"

namespace smcsghmc {

WeightedEnsemble::WeightedEnsemble(const MlpModel& model, RowMajorMatrix member_params,
                                   const Eigen::VectorXd& member_log_weights)
    : model_(model), member_params_(std::move(member_params)) {
    if (member_params_.rows() == 0) throw EmptyInput("ensemble needs at least one member");
    if (member_log_weights.size() != member_params_.rows())
        throw ShapeError("one log-weight per ensemble member is required");
    if (member_params_.cols() != model.param_count())
        throw ShapeError("ensemble member dimension does not match the model");
    weights_ = normalize_log_weights(member_log_weights).probabilities;
}

RowMajorMatrix WeightedEnsemble::predict_probs(const RowMajorMatrix& inputs) const {
    RowMajorMatrix mixture = RowMajorMatrix::Zero(inputs.rows(), model_.output_dim());
    for (Eigen::Index m = 0; m < member_params_.rows(); ++m) {
        if (weights_[m] == 0.0) continue;
        const Eigen::VectorXd theta = member_params_.row(m).transpose();
        const RowMajorMatrix log_probs = MlpModel::log_softmax(model_.logits(theta, inputs));
        mixture += weights_[m] * log_probs.array().exp().matrix();
    }
    return mixture;
}

Eigen::VectorXd WeightedEnsemble::energies(const RowMajorMatrix& inputs,
                                           double temperature) const {
    Eigen::VectorXd averaged = Eigen::VectorXd::Zero(inputs.rows());
    for (Eigen::Index m = 0; m < member_params_.rows(); ++m) {
        if (weights_[m] == 0.0) continue;
        const Eigen::VectorXd theta = member_params_.row(m).transpose();
        averaged += weights_[m] * energy_scores(model_.logits(theta, inputs), temperature);
    }
    return averaged;
}

namespace {

void check_probs(const RowMajorMatrix& probs, const Eigen::VectorXi& labels) {
    if (probs.rows() == 0) throw EmptyInput("metric needs at least one prediction row");
    if (labels.size() != probs.rows())
        throw ShapeError("label count does not match prediction rows");
    for (Eigen::Index i = 0; i < labels.size(); ++i)
        if (labels[i] < 0 || labels[i] >= probs.cols())
            throw ContractViolation("label " + std::to_string(labels[i]) +
                                    " outside [0, " + std::to_string(probs.cols()) + ")");
}

}  // namespace

double accuracy(const RowMajorMatrix& probs, const Eigen::VectorXi& labels) {
    check_probs(probs, labels);
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        Eigen::Index arg = 0;
        probs.row(i).maxCoeff(&arg);
        if (int(arg) == labels[i]) ++correct;
    }
    return double(correct) / double(probs.rows());
}

double nll(const RowMajorMatrix& probs, const Eigen::VectorXi& labels) {
    check_probs(probs, labels);
    double total = 0.0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i)
        total -= std::log(probs(i, labels[i]));
    return total / double(probs.rows());
}

double ece(const RowMajorMatrix& probs, const Eigen::VectorXi& labels, int bins) {
    check_probs(probs, labels);
    if (bins < 1) throw ConfigError("calibration needs at least one bin");

    std::vector<double> confidence_sum(std::size_t(bins), 0.0);
    std::vector<double> correct_sum(std::size_t(bins), 0.0);
    std::vector<Eigen::Index> population(std::size_t(bins), 0);

    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        Eigen::Index arg = 0;
        const double confidence = probs.row(i).maxCoeff(&arg);
        const int bin = std::min(bins - 1, int(confidence * bins));
        confidence_sum[std::size_t(bin)] += confidence;
        correct_sum[std::size_t(bin)] += (int(arg) == labels[i]) ? 1.0 : 0.0;
        ++population[std::size_t(bin)];
    }

    double error = 0.0;
    for (int b = 0; b < bins; ++b) {
        if (population[std::size_t(b)] == 0) continue;
        const double n = double(population[std::size_t(b)]);
        error += (n / double(probs.rows())) *
                 std::abs(correct_sum[std::size_t(b)] / n - confidence_sum[std::size_t(b)] / n);
    }
    return error;
}

Eigen::VectorXd energy_scores(const RowMajorMatrix& logits, double temperature) {
    if (logits.rows() == 0) throw EmptyInput("energy of an empty logit matrix");
    if (!(temperature > 0.0)) throw ConfigError("energy temperature must be positive");

    Eigen::VectorXd energies(logits.rows());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const Eigen::ArrayXd scaled = logits.row(i).array() / temperature;
        const double max_val = scaled.maxCoeff();
        energies[i] = -(max_val + std::log((scaled - max_val).exp().sum()));
    }
    return energies;
}

double fpr95_threshold(const Eigen::VectorXd& id_energies) {
    if (id_energies.size() < 20)
        throw InsufficientData("the 95th percentile needs at least 20 scores, got " +
                               std::to_string(id_energies.size()));
    std::vector<double> sorted(id_energies.data(), id_energies.data() + id_energies.size());
    std::sort(sorted.begin(), sorted.end());

    const double rank = 0.95 * double(sorted.size() - 1);
    const std::size_t lo = std::size_t(rank);
    const double frac = rank - double(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double auroc(const Eigen::VectorXd& id_scores, const Eigen::VectorXd& ood_scores) {
    if (id_scores.size() == 0 || ood_scores.size() == 0)
        throw EmptyInput("ROC analysis needs scores from both populations");

    struct Entry {
        double score;
        bool positive;
    };
    std::vector<Entry> all;
    all.reserve(std::size_t(id_scores.size() + ood_scores.size()));
    for (Eigen::Index i = 0; i < id_scores.size(); ++i) all.push_back({id_scores[i], false});
    for (Eigen::Index i = 0; i < ood_scores.size(); ++i) all.push_back({ood_scores[i], true});
    std::sort(all.begin(), all.end(),
              [](const Entry& a, const Entry& b) { return a.score < b.score; });

    // Midranks handle ties: every member of a tied block gets the block mean.
    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j + 1 < all.size() && all[j + 1].score == all[i].score) ++j;
        const double midrank = 0.5 * (double(i + 1) + double(j + 1));
        for (std::size_t k = i; k <= j; ++k)
            if (all[k].positive) positive_rank_sum += midrank;
        i = j + 1;
    }

    const double n_pos = double(ood_scores.size());
    const double n_neg = double(id_scores.size());
    const double u = positive_rank_sum - n_pos * (n_pos + 1.0) / 2.0;
    return u / (n_pos * n_neg);
}

OodReport ood_report(const Eigen::VectorXd& id_energies, const Eigen::VectorXd& ood_energies,
                     double threshold) {
    if (id_energies.size() == 0 || ood_energies.size() == 0)
        throw EmptyInput("the detector report needs energies from both populations");

    const auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
    const double tp = double((ood_energies.array() > threshold).count());
    const double fn = double(ood_energies.size()) - tp;
    const double tn = double((id_energies.array() <= threshold).count());
    const double fp = double(id_energies.size()) - tn;

    OodReport report;
    report.accuracy = ratio(tp + tn, tp + tn + fp + fn);
    report.precision = ratio(tp, tp + fp);
    report.recall = ratio(tp, tp + fn);
    report.f1 = ratio(2.0 * report.precision * report.recall,
                      report.precision + report.recall);
    report.specificity = ratio(tn, tn + fp);
    report.auroc = auroc(id_energies, ood_energies);
    return report;
}

}  // namespace smcsghmc

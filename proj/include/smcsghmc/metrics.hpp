#pragma once

#include <Eigen/Dense>

#include "smcsghmc/mlp.hpp"
#include "smcsghmc/particles.hpp"

namespace smcsghmc {

// Posterior predictive built from stored parameter samples. Member weights
// are the stored log-weights normalized jointly across all members; the
// predictive distribution is the weight-averaged softmax output.
class WeightedEnsemble {
public:
    WeightedEnsemble(const MlpModel& model, RowMajorMatrix member_params,
                     const Eigen::VectorXd& member_log_weights);

    Eigen::Index member_count() const { return member_params_.rows(); }
    const Eigen::VectorXd& weights() const { return weights_; }

    // Predictive class probabilities, one row per input row.
    RowMajorMatrix predict_probs(const RowMajorMatrix& inputs) const;

    // Confidence score per input: the weighted average over members of that
    // member's energy -log sum_k exp(logit_k / temperature). Lower values
    // mean the ensemble sees the input as in-distribution.
    Eigen::VectorXd energies(const RowMajorMatrix& inputs, double temperature = 1.0) const;

private:
    const MlpModel& model_;
    RowMajorMatrix member_params_;
    Eigen::VectorXd weights_;
};

// Fraction of rows whose arg-max probability matches the label.
double accuracy(const RowMajorMatrix& probs, const Eigen::VectorXi& labels);

// Mean negative log predicted probability of the true label.
double nll(const RowMajorMatrix& probs, const Eigen::VectorXi& labels);

// Expected calibration error: confidences (row maxima) are placed into
// equal-width bins over [0, 1] and the bin-population-weighted absolute gap
// between accuracy and mean confidence is summed.
double ece(const RowMajorMatrix& probs, const Eigen::VectorXi& labels, int bins = 15);

// Energy of each logit row: -log sum_k exp(logit_k / temperature).
Eigen::VectorXd energy_scores(const RowMajorMatrix& logits, double temperature = 1.0);

// Threshold tau such that 95% of in-distribution energies fall at or below
// it, computed as the linearly interpolated 95th percentile (the convention
// where the p-th quantile of a sorted sample x_1..x_n sits at rank
// 1 + (n-1)p). Requires at least 20 scores.
double fpr95_threshold(const Eigen::VectorXd& id_energies);

// Area under the ROC curve for separating the two score samples, treating
// higher scores as the positive (out-of-distribution) class. Computed from
// rank sums with midranks for ties.
double auroc(const Eigen::VectorXd& id_scores, const Eigen::VectorXd& ood_scores);

struct OodReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double specificity = 0.0;
    double auroc = 0.0;
};

// Detector report for energy scores against a fixed threshold: an input is
// declared in-distribution when its energy is <= threshold, and the
// out-of-distribution side is the positive class. Ratios with an empty
// denominator are reported as zero.
OodReport ood_report(const Eigen::VectorXd& id_energies, const Eigen::VectorXd& ood_energies,
                     double threshold);

}  // namespace smcsghmc

#ifndef SMCSGHMC_DATASET_HPP
#define SMCSGHMC_DATASET_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "smcsghmc/particles.hpp"
#include "smcsghmc/rng.hpp"

namespace smcsghmc {

/// Immutable supervised dataset: one feature row per example, integer
/// class labels in [0, class_count). Image features are scaled to [0,1].
struct Dataset {
    RowMajorMatrix features;  // n x d
    Eigen::VectorXi labels;   // n
    int class_count = 0;

    Eigen::Index n() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }
};

/// Reads an IDX image/label file pair (the MNIST distribution format).
///
/// Expects big-endian headers with magic 0x00000803 (images, 3 dims) and
/// 0x00000801 (labels, 1 dim). Pixels are scaled by 1/255. Throws IoError
/// when a file cannot be opened and FormatError on bad magic, truncation,
/// or image/label count mismatch.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Writes a dataset back to a big-endian IDX image/label pair. Features
/// must be in [0,1]; they are quantized to bytes, so this is the exact
/// inverse of load_idx only for data that originated from bytes.
void save_idx(const Dataset& dataset, const std::string& images_path,
              const std::string& labels_path, int rows, int cols);

struct SplitResult {
    Dataset train;
    Dataset validation;
    Dataset test;
};

/// Seed-deterministic disjoint partition by shuffled indices.
/// Throws ConfigError when train_n + val_n + test_n exceeds dataset.n().
SplitResult split(const Dataset& dataset, Eigen::Index train_n, Eigen::Index val_n,
                  Eigen::Index test_n, std::uint64_t seed);

/// Two interleaved half-circles, the standard binary toy problem.
/// noise_sd = 0 places every point exactly on its half-circle.
Dataset make_two_moons(Eigen::Index n, double noise_sd, std::uint64_t seed);

/// Exact i.i.d. draws from the default 25-mode grid mixture; used as
/// ground truth for density-recovery checks.
RowMajorMatrix make_grid_gmm_points(Eigen::Index n, std::uint64_t seed);

/// Synthetic 28x28 10-class image set: deterministic class templates plus
/// per-sample shift and pixel noise. A desk-scale stand-in for handwritten
/// digit data when the real files are not on disk; same shapes, same loader
/// path, learnable to high but not perfect accuracy.
Dataset make_synthetic_digits(Eigen::Index n, std::uint64_t seed);

}  // namespace smcsghmc

#endif

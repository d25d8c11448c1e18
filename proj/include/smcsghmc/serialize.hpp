#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "smcsghmc/mlp.hpp"
#include "smcsghmc/particles.hpp"
#include "smcsghmc/sgd.hpp"
#include "smcsghmc/smc.hpp"

namespace smcsghmc {

// Network architecture recorded alongside saved parameters so a file is
// self-describing. An empty layer list means the parameters do not belong to
// a network (for example, samples of a synthetic two-dimensional density).
struct ModelSpec {
    std::vector<int> layer_sizes;
    Activation activation = Activation::relu;
};

// A resumable population snapshot: parameters plus raw log-weights.
struct Checkpoint {
    ModelSpec model;
    ParticleSet particles;
    std::uint64_t seed = 0;
    int epoch = 0;
};

// Collected posterior samples with their collection-time metadata.
struct SampleArchive {
    ModelSpec model;
    RowMajorMatrix params;
    Eigen::VectorXd log_weights;
    std::vector<int> epochs;
    std::vector<int> particle_ids;
    std::uint64_t seed = 0;
    int total_epochs = 0;
};

// Binary layout (all integers and doubles little-endian): the magic
// "SMCSGHMC1", a kind byte (0 checkpoint, 1 sample archive), the declared
// total file size, the model spec, dimensions, seed and epoch, then the
// payload arrays. Readers verify magic, kind, and declared size and throw
// FormatError on any mismatch. Writers stage to "<path>.tmp" and rename so a
// crash never leaves a half-written file at the destination.
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

void save_samples(const SampleArchive& archive, const std::string& path);
SampleArchive load_samples(const std::string& path);

// Convenience: package a finished run for saving.
SampleArchive make_archive(const ModelSpec& model, const SampleStore& store,
                           std::uint64_t seed, int total_epochs);

// CSV emitters (header row first, values at full double precision).
void write_diagnostics_csv(const std::vector<EpochDiagnostics>& rows, const std::string& path);
void write_history_csv(const std::vector<TrainHistoryRow>& rows, const std::string& path);
void write_metrics_csv(const std::vector<std::pair<std::string, double>>& rows,
                       const std::string& path);

}  // namespace smcsghmc

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "smcsghmc/mlp.hpp"
#include "smcsghmc/sgd.hpp"
#include "smcsghmc/smc.hpp"

namespace smcsghmc {

// Flat key = value run configuration. Lines may carry '#' comments; blank
// lines are ignored; keys outside the schema, repeated keys, or malformed
// values raise ConfigError. Every field below doubles as the documented
// default.
struct RunConfig {
    int schema_version = 1;

    // model
    std::vector<int> layer_sizes = {784, 100, 10};
    std::string activation = "relu";
    double prior_variance = 1.0;

    // sampler
    Eigen::Index particles = 10;
    int epochs = 50;
    int warmup_epochs = 25;
    double step_size = 2e-5;
    Eigen::Index batch_size = 500;
    double temperature = 0.0;         // 0 selects the training-set size
    double warmup_temperature = 0.0;  // used before collection starts; 0 = same rule
    double ess_threshold = 0.5;
    bool resample_every_epoch = true;
    std::string resample_scheme = "systematic";
    double init_jitter_sd = 0.0;

    // pretraining
    int pretrain_epochs = 60;
    double pretrain_lr = 0.1;
    double pretrain_momentum = 0.9;
    double pretrain_weight_decay = 1e-4;
    Eigen::Index pretrain_batch_size = 128;
    std::string pretrain_lr_decay = "cosine";

    // data selection and the sizes used when carving train/validation/test
    // splits. dataset: "digits" (IDX files from data_dir or the
    // SMCSGHMC_DATA_DIR environment variable, falling back to the built-in
    // synthetic digit generator) or "two_moons".
    std::string dataset = "digits";
    std::string data_dir = "";
    Eigen::Index train_size = 10000;
    Eigen::Index val_size = 2000;
    Eigen::Index test_size = 2000;

    static RunConfig load(const std::string& path);
    static RunConfig from_text(const std::string& text);

    void validate() const;
    std::string to_text() const;

    // Typed views of the string-valued fields (validated on access).
    Activation activation_kind() const;
    ResampleScheme scheme_kind() const;
    LrDecay lr_decay_kind() const;

    // Sampler / optimizer structs assembled from these fields.
    SamplerConfig sampler_config(int threads) const;
    OptimizerConfig optimizer_config() const;
};

}  // namespace smcsghmc

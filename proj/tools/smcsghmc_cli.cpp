#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "smcsghmc/dataset.hpp"
#include "smcsghmc/errors.hpp"
#include "smcsghmc/gmm.hpp"
#include "smcsghmc/metrics.hpp"
#include "smcsghmc/run_config.hpp"
#include "smcsghmc/serialize.hpp"
#include "smcsghmc/sgd.hpp"
#include "smcsghmc/smc.hpp"

namespace {

using namespace smcsghmc;

// All stages derive the dataset and its split from this fixed seed, so a
// checkpoint written by `pretrain` is always consistent with the splits seen
// by `sample`, `eval`, and `ood`, whatever --seed those runs use.
constexpr std::uint64_t kDataSeed = 715u;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 42;
    int threads = 1;
};

RunConfig load_config(const std::string& path) {
    if (path.empty()) return RunConfig{};
    return RunConfig::load(path);
}

std::filesystem::path prepare_out_dir(const std::string& out_dir) {
    std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
    return dir;
}

void write_effective_config(const RunConfig& config, const std::filesystem::path& dir) {
    const std::filesystem::path path = dir / "effective_config.txt";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << config.to_text();
}

SplitResult load_splits(const RunConfig& config) {
    const Eigen::Index total = config.train_size + config.val_size + config.test_size;
    Dataset full;
    if (config.dataset == "two_moons") {
        full = make_two_moons(total, 0.12, kDataSeed);
        std::printf("data: %lld two-moons examples\n", (long long)full.n());
    } else {
        // Digit images: IDX files from data_dir / the environment when
        // present, otherwise the built-in synthetic generator.
        const char* env_dir = std::getenv("SMCSGHMC_DATA_DIR");
        const std::string base_dir =
            !config.data_dir.empty() ? config.data_dir
                                     : (env_dir && *env_dir ? std::string(env_dir) : "");
        if (!base_dir.empty()) {
            const std::filesystem::path base(base_dir);
            const std::filesystem::path images = base / "train-images-idx3-ubyte";
            const std::filesystem::path labels = base / "train-labels-idx1-ubyte";
            if (!std::filesystem::exists(images) || !std::filesystem::exists(labels))
                throw IoError("data directory is set but " + images.string() + " or " +
                              labels.string() + " is missing");
            full = load_idx(images.string(), labels.string());
            std::printf("data: %lld examples from %s\n", (long long)full.n(),
                        base_dir.c_str());
        } else {
            full = make_synthetic_digits(total, kDataSeed);
            std::printf("data: %lld synthetic digit examples (no data directory set)\n",
                        (long long)full.n());
        }
    }
    if (full.dim() != config.layer_sizes.front())
        throw ConfigError("layer_sizes starts at " + std::to_string(config.layer_sizes.front()) +
                          " but the data has dimension " + std::to_string(full.dim()));
    return split(full, config.train_size, config.val_size, config.test_size, kDataSeed);
}

void print_epoch(const EpochDiagnostics& d, int total) {
    std::printf("epoch %d/%d  ess=%.1f%s  mean_loglik=%.4f  wall=%.2fs\n", d.epoch, total,
                d.ess, d.resampled ? " (resampled)" : "", d.mean_loglik, d.wall_seconds);
    std::fflush(stdout);
}

int run_gmm_demo(const CommonArgs& args, Eigen::Index particles, int epochs, int warmup,
                 double step_size, int steps) {
    const std::filesystem::path dir = prepare_out_dir(args.out_dir);

    GmmTarget target;
    GmmSmcTarget smc_target(target, 6.0, step_size, steps);

    SamplerConfig config;
    config.particles = particles;
    config.epochs = epochs;
    config.warmup_epochs = warmup;
    config.resample_every_epoch = true;
    config.threads = args.threads;

    const SmcResult result = run_smc(smc_target, config, InitSpec{}, args.seed,
                                     [epochs](const EpochDiagnostics& d) {
                                         if (d.epoch % 50 == 0) print_epoch(d, epochs);
                                     });

    ModelSpec no_model;  // two-dimensional samples, not network weights
    save_samples(make_archive(no_model, result.samples, args.seed, epochs),
                 (dir / "gmm_samples.bin").string());
    write_diagnostics_csv(result.diagnostics, (dir / "gmm_diagnostics.csv").string());

    // One row per retained sample, with weights normalized across the store.
    const Eigen::VectorXd sample_weights =
        normalize_log_weights(result.samples.log_weights()).probabilities;
    {
        std::ofstream csv(dir / "gmm_samples.csv");
        if (!csv) throw IoError("cannot write sample table");
        csv << "x,y,weight\n";
        for (Eigen::Index i = 0; i < result.samples.size(); ++i) {
            char line[128];
            std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n",
                          result.samples.params()(i, 0), result.samples.params()(i, 1),
                          sample_weights[i]);
            csv << line;
        }
    }

    const Eigen::VectorXd masses =
        mode_masses(target, result.samples.params(), result.samples.log_weights());
    std::ofstream csv(dir / "gmm_mode_masses.csv");
    if (!csv) throw IoError("cannot write mode-mass table");
    csv << "mode,mean_x,mean_y,mass\n";
    for (int k = 0; k < target.component_count(); ++k) {
        char line[128];
        std::snprintf(line, sizeof(line), "%d,%g,%g,%.17g\n", k, target.means()[k].x(),
                      target.means()[k].y(), masses[k]);
        csv << line;
    }

    std::printf("collected %lld samples over %d modes; mass range [%.4f, %.4f]\n",
                (long long)result.samples.size(), target.component_count(),
                masses.minCoeff(), masses.maxCoeff());
    return 0;
}

int run_pretrain(const CommonArgs& args, int epochs_override) {
    RunConfig config = load_config(args.config_path);
    if (epochs_override >= 0) config.pretrain_epochs = epochs_override;
    const std::filesystem::path dir = prepare_out_dir(args.out_dir);
    write_effective_config(config, dir);

    const SplitResult splits = load_splits(config);
    const MlpModel model(config.layer_sizes, config.activation_kind());
    const TrainResult trained =
        train_sgd(model, splits.train, splits.validation, config.optimizer_config(), args.seed);

    Checkpoint checkpoint;
    checkpoint.model = {config.layer_sizes, config.activation_kind()};
    checkpoint.particles = ParticleSet(1, model.param_count());
    checkpoint.particles.params.row(0) = trained.theta.transpose();
    checkpoint.seed = args.seed;
    checkpoint.epoch = config.pretrain_epochs;
    save_checkpoint(checkpoint, (dir / "pretrained.bin").string());
    write_history_csv(trained.history, (dir / "pretrain_history.csv").string());

    if (trained.history.empty()) {
        std::printf("pretrained 0 epochs: checkpoint equals the initialization\n");
    } else {
        const TrainHistoryRow& last = trained.history.back();
        std::printf("pretrained %d epochs: train_loss=%.4f val_loss=%.4f val_acc=%.4f\n",
                    last.epoch, last.train_loss, last.val_loss, last.val_accuracy);
    }
    return 0;
}

int run_sample(const CommonArgs& args, const std::string& init) {
    const RunConfig config = load_config(args.config_path);
    const std::filesystem::path dir = prepare_out_dir(args.out_dir);
    write_effective_config(config, dir);

    const SplitResult splits = load_splits(config);
    const MlpModel model(config.layer_sizes, config.activation_kind());
    const GaussianPrior prior(model.param_count(), config.prior_variance);
    const double temperature =
        config.temperature > 0.0 ? config.temperature : double(splits.train.n());
    const double warmup_temperature =
        config.warmup_temperature > 0.0 ? config.warmup_temperature : temperature;
    const TemperedPosterior posterior(model, prior, splits.train, temperature);
    const BnnSmcTarget target(posterior, config.batch_size, config.step_size,
                              warmup_temperature);

    InitSpec init_spec;
    if (init == "prior") {
        init_spec.mode = InitSpec::Mode::draw;
    } else {
        const Checkpoint checkpoint = load_checkpoint(init);
        if (checkpoint.particles.dim() != model.param_count())
            throw ConfigError("checkpoint dimension " +
                              std::to_string(checkpoint.particles.dim()) +
                              " does not match the configured model (" +
                              std::to_string(model.param_count()) + " parameters)");
        init_spec.mode = InitSpec::Mode::replicate;
        init_spec.replicate_theta = checkpoint.particles.params.row(0).transpose();
        init_spec.jitter_sd = config.init_jitter_sd;
    }

    // Per-epoch validation loss of the weighted predictive mixture.
    const Dataset& val = splits.validation;
    const ValidationFn validation_nll =
        val.n() == 0 ? ValidationFn{}
                     : [&model, &val](const ParticleSet& population,
                                      const Eigen::VectorXd& weights) {
                           RowMajorMatrix mixture =
                               RowMajorMatrix::Zero(val.n(), model.output_dim());
                           for (Eigen::Index j = 0; j < population.count(); ++j) {
                               if (weights[j] == 0.0) continue;
                               const Eigen::VectorXd theta =
                                   population.params.row(j).transpose();
                               mixture += weights[j] *
                                          MlpModel::log_softmax(
                                              model.logits(theta, val.features))
                                              .array()
                                              .exp()
                                              .matrix();
                           }
                           return nll(mixture, val.labels);
                       };

    const SamplerConfig sampler_config = config.sampler_config(args.threads);
    std::vector<EpochDiagnostics> completed;
    SmcResult result;
    try {
        result = run_smc(target, sampler_config, init_spec, args.seed,
                         [&config, &completed](const EpochDiagnostics& d) {
                             completed.push_back(d);
                             print_epoch(d, config.epochs);
                         },
                         validation_nll);
    } catch (const DegeneracyError&) {
        // Keep the evidence from the epochs that did finish so the collapse
        // can be diagnosed from the run directory.
        write_diagnostics_csv(completed, (dir / "sample_diagnostics.csv").string());
        throw;
    }

    const ModelSpec spec{config.layer_sizes, config.activation_kind()};
    Checkpoint final_state;
    final_state.model = spec;
    final_state.particles = result.particles;
    final_state.seed = args.seed;
    final_state.epoch = config.epochs;
    save_checkpoint(final_state, (dir / "checkpoint.bin").string());
    save_samples(make_archive(spec, result.samples, args.seed, config.epochs),
                 (dir / "samples.bin").string());
    write_diagnostics_csv(result.diagnostics, (dir / "sample_diagnostics.csv").string());

    std::printf("finished %d epochs: %lld samples, %d resampling events, log_evidence=%.4f\n",
                config.epochs, (long long)result.samples.size(), result.resample_count,
                result.log_evidence);
    return 0;
}

MlpModel model_from_spec(const ModelSpec& spec) {
    if (spec.layer_sizes.empty())
        throw ConfigError("the sample archive carries no network architecture");
    return MlpModel(spec.layer_sizes, spec.activation);
}

int run_eval(const CommonArgs& args, const std::string& samples_path,
             const std::string& checkpoint_path) {
    const RunConfig config = load_config(args.config_path);
    const std::filesystem::path dir = prepare_out_dir(args.out_dir);

    const SplitResult splits = load_splits(config);
    const SampleArchive archive = load_samples(samples_path);
    const MlpModel model = model_from_spec(archive.model);
    const WeightedEnsemble ensemble(model, archive.params, archive.log_weights);

    const RowMajorMatrix probs = ensemble.predict_probs(splits.test.features);
    std::vector<std::pair<std::string, double>> metrics;
    metrics.emplace_back("ensemble_members", double(ensemble.member_count()));
    metrics.emplace_back("ensemble_accuracy", accuracy(probs, splits.test.labels));
    metrics.emplace_back("ensemble_nll", nll(probs, splits.test.labels));
    metrics.emplace_back("ensemble_ece", ece(probs, splits.test.labels));

    if (!checkpoint_path.empty()) {
        const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
        const MlpModel base_model = model_from_spec(checkpoint.model);
        const Eigen::VectorXd theta = checkpoint.particles.params.row(0).transpose();
        const RowMajorMatrix base_probs = RowMajorMatrix(
            MlpModel::log_softmax(base_model.logits(theta, splits.test.features))
                .array()
                .exp());
        metrics.emplace_back("pretrained_accuracy", accuracy(base_probs, splits.test.labels));
        metrics.emplace_back("pretrained_nll", nll(base_probs, splits.test.labels));
        metrics.emplace_back("pretrained_ece", ece(base_probs, splits.test.labels));
    }

    write_metrics_csv(metrics, (dir / "eval_metrics.csv").string());
    for (const auto& [name, value] : metrics) std::printf("%s = %.6f\n", name.c_str(), value);
    return 0;
}

int run_ood(const CommonArgs& args, const std::string& samples_path,
            const std::string& ood_images, const std::string& ood_labels) {
    const RunConfig config = load_config(args.config_path);
    const std::filesystem::path dir = prepare_out_dir(args.out_dir);

    const SplitResult splits = load_splits(config);
    const SampleArchive archive = load_samples(samples_path);
    const MlpModel model = model_from_spec(archive.model);
    const WeightedEnsemble ensemble(model, archive.params, archive.log_weights);

    RowMajorMatrix ood_features;
    if (!ood_images.empty()) {
        const Dataset ood = load_idx(ood_images, ood_labels);
        if (ood.dim() != model.input_dim())
            throw ConfigError("out-of-distribution data dimension does not match the model");
        ood_features = ood.features;
    } else {
        // Default held-out foil: uniform pixel noise of the same shape.
        RngStream rng(kDataSeed, 99);
        ood_features.resize(splits.test.n(), model.input_dim());
        for (Eigen::Index i = 0; i < ood_features.rows(); ++i)
            for (Eigen::Index j = 0; j < ood_features.cols(); ++j)
                ood_features(i, j) = rng.uniform();
    }

    // The decision threshold comes from the in-distribution validation split
    // alone; the report below scores the held-out test split against it.
    const Eigen::VectorXd id_val_energies = ensemble.energies(splits.validation.features);
    const double threshold = fpr95_threshold(id_val_energies);
    const Eigen::VectorXd id_energies = ensemble.energies(splits.test.features);
    const Eigen::VectorXd ood_energies = ensemble.energies(ood_features);
    const OodReport report = ood_report(id_energies, ood_energies, threshold);

    std::vector<std::pair<std::string, double>> metrics;
    metrics.emplace_back("energy_threshold", threshold);
    metrics.emplace_back("accuracy", report.accuracy);
    metrics.emplace_back("precision", report.precision);
    metrics.emplace_back("recall", report.recall);
    metrics.emplace_back("f1", report.f1);
    metrics.emplace_back("specificity", report.specificity);
    metrics.emplace_back("auroc", report.auroc);
    metrics.emplace_back("id_count", double(id_energies.size()));
    metrics.emplace_back("ood_count", double(ood_energies.size()));
    write_metrics_csv(metrics, (dir / "ood_metrics.csv").string());
    for (const auto& [name, value] : metrics) std::printf("%s = %.6f\n", name.c_str(), value);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential Monte Carlo sampling with stochastic-gradient trajectories"};
    app.require_subcommand(1);

    CommonArgs args;

    CLI::App* gmm = app.add_subcommand(
        "gmm-demo", "Sample the 25-mode synthetic mixture and report per-mode mass");
    Eigen::Index gmm_particles = 1000;
    int gmm_epochs = 400, gmm_warmup = 200, gmm_steps = 10;
    double gmm_step_size = 0.2;
    gmm->add_option("--out", args.out_dir, "output directory")->required();
    gmm->add_option("--seed", args.seed, "random seed");
    gmm->add_option("--threads", args.threads, "worker threads");
    gmm->add_option("--particles", gmm_particles, "population size");
    gmm->add_option("--epochs", gmm_epochs, "sampler epochs");
    gmm->add_option("--warmup", gmm_warmup, "epochs to discard");
    gmm->add_option("--step-size", gmm_step_size, "trajectory step size");
    gmm->add_option("--steps", gmm_steps, "trajectory steps");

    CLI::App* pretrain =
        app.add_subcommand("pretrain", "Fit a deterministic network with momentum SGD");
    int pretrain_epochs_override = -1;
    pretrain->add_option("--config", args.config_path, "run configuration file");
    pretrain->add_option("--seed", args.seed, "random seed");
    pretrain->add_option("--epochs", pretrain_epochs_override,
                         "override the configured pretraining epochs");
    pretrain->add_option("--out", args.out_dir, "output directory")->required();

    CLI::App* sample = app.add_subcommand(
        "sample", "Run the sequential sampler over the network posterior");
    std::string init = "prior";
    sample->add_option("--config", args.config_path, "run configuration file");
    sample->add_option("--seed", args.seed, "random seed");
    sample->add_option("--threads", args.threads, "worker threads");
    sample->add_option("--init", init, "'prior' or a checkpoint path to start from");
    sample->add_option("--out", args.out_dir, "output directory")->required();

    CLI::App* eval_cmd =
        app.add_subcommand("eval", "Score a sample archive on the held-out test split");
    std::string samples_path, checkpoint_path;
    eval_cmd->add_option("--config", args.config_path, "run configuration file");
    eval_cmd->add_option("--samples", samples_path, "sample archive")->required();
    eval_cmd->add_option("--checkpoint", checkpoint_path,
                         "optional pretrained checkpoint to compare against");
    eval_cmd->add_option("--out", args.out_dir, "output directory")->required();

    CLI::App* ood_cmd = app.add_subcommand(
        "ood", "Energy-based separation of the test split from a foil set");
    std::string ood_images, ood_labels;
    ood_cmd->add_option("--config", args.config_path, "run configuration file");
    ood_cmd->add_option("--samples", samples_path, "sample archive")->required();
    ood_cmd->add_option("--ood-images", ood_images, "foil images (IDX)");
    ood_cmd->add_option("--ood-labels", ood_labels, "foil labels (IDX)");
    ood_cmd->add_option("--out", args.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gmm->parsed())
            return run_gmm_demo(args, gmm_particles, gmm_epochs, gmm_warmup, gmm_step_size,
                                gmm_steps);
        if (pretrain->parsed()) return run_pretrain(args, pretrain_epochs_override);
        if (sample->parsed()) return run_sample(args, init);
        if (eval_cmd->parsed()) return run_eval(args, samples_path, checkpoint_path);
        if (ood_cmd->parsed()) return run_ood(args, samples_path, ood_images, ood_labels);
        std::fprintf(stderr, "no subcommand selected\n");
        return 2;
    } catch (const smcsghmc::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const smcsghmc::DegeneracyError& e) {
        std::fprintf(stderr, "sampler degeneracy: %s\n", e.what());
        return 3;
    } catch (const smcsghmc::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return 4;
    } catch (const smcsghmc::FormatError& e) {
        std::fprintf(stderr, "file format error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

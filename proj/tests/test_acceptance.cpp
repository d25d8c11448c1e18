// End-to-end acceptance checks. Runs each numbered criterion against the
// built library and the command-line tool (path given via --cli), printing
// one PASS/FAIL line per criterion; exits nonzero if any criterion fails.
//
// Usage: acceptance_tests --cli /path/to/smcsghmc [--only N] [--keep]

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "smcsghmc/dataset.hpp"
#include "smcsghmc/errors.hpp"
#include "smcsghmc/gmm.hpp"
#include "smcsghmc/leapfrog.hpp"
#include "smcsghmc/metrics.hpp"
#include "smcsghmc/mlp.hpp"
#include "smcsghmc/particles.hpp"
#include "smcsghmc/posterior.hpp"
#include "smcsghmc/rng.hpp"
#include "smcsghmc/serialize.hpp"
#include "smcsghmc/smc.hpp"

namespace fs = std::filesystem;
using namespace smcsghmc;

namespace {

struct Context {
    std::string cli;
    fs::path scratch;
    std::vector<std::string> failures;

    void check(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }

    void check_close(double actual, double expected, double tol, const std::string& what) {
        if (!(std::abs(actual - expected) <= tol)) {
            std::ostringstream msg;
            msg.precision(17);
            msg << what << ": got " << actual << ", expected " << expected << " +- " << tol;
            failures.push_back(msg.str());
        }
    }

    // Runs the CLI with the given arguments, logging stdout+stderr to a file.
    // Returns true on exit code 0; otherwise records a failure with the log
    // tail attached.
    bool run_cli(const std::string& args, const std::string& log_name) {
        const fs::path log = scratch / (log_name + ".log");
        const std::string command =
            "\"" + cli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
        const int status = std::system(command.c_str());
        const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        if (code == 0) return true;

        std::string tail;
        std::ifstream in(log);
        std::string line;
        std::vector<std::string> lines;
        while (std::getline(in, line)) lines.push_back(line);
        for (std::size_t i = lines.size() > 5 ? lines.size() - 5 : 0; i < lines.size(); ++i)
            tail += "\n        | " + lines[i];
        failures.push_back("command failed (exit " + std::to_string(code) + "): " + args + tail);
        return false;
    }
};

std::map<std::string, double> read_metrics_csv(const fs::path& path, Context& ctx) {
    std::map<std::string, double> out;
    std::ifstream in(path);
    if (!in) {
        ctx.failures.push_back("missing metrics file " + path.string());
        return out;
    }
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) continue;
        out[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
    }
    return out;
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream stream(line);
    std::string field;
    while (std::getline(stream, field, ',')) fields.push_back(field);
    return fields;
}

std::string last_line(const fs::path& path) {
    std::ifstream in(path);
    std::string line, last;
    while (std::getline(in, line))
        if (!line.empty()) last = line;
    return last;
}

bool same_bytes(const fs::path& a, const fs::path& b, Context& ctx, const std::string& what) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) {
        ctx.failures.push_back(what + ": cannot open " + a.string() + " or " + b.string());
        return false;
    }
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    const bool equal = sa.str() == sb.str();
    ctx.check(equal, what + ": " + a.filename().string() + " differs between runs");
    return equal;
}

// ---------------------------------------------------------------------------
// Criterion 1: the sampler recovers every mode of the 25-component grid
// mixture with near-uniform mass.
void criterion_grid_mixture(Context& ctx) {
    const fs::path dir = ctx.scratch / "c1";
    if (!ctx.run_cli("gmm-demo --out \"" + dir.string() + "\" --seed 42", "c1_gmm")) return;

    const SampleArchive archive = load_samples((dir / "gmm_samples.bin").string());
    ctx.check(archive.params.rows() == 200000,
              "expected 200000 retained samples (1000 particles x 200 collection epochs), got " +
                  std::to_string(archive.params.rows()));
    ctx.check(archive.params.cols() == 2, "samples are not two-dimensional");

    const GmmTarget target;
    const Eigen::VectorXd masses =
        mode_masses(target, archive.params, archive.log_weights);
    for (int k = 0; k < target.component_count(); ++k)
        ctx.check(masses[k] > 0.02 && masses[k] < 0.08,
                  "mode " + std::to_string(k) + " mass " + std::to_string(masses[k]) +
                      " outside [0.02, 0.08]");
}

// ---------------------------------------------------------------------------
// Criterion 2: importance-sampling estimates of E[theta^2] under N(0,1) with
// a N(0,2) proposal obey the predicted variance law sigma_q^2 / J, where
// sigma_q^2 = (4/3)^{3/2} - 1.
void criterion_variance_law(Context& ctx) {
    constexpr double kSigmaQ2 = 0.5396007178390021;  // (4/3)^{3/2} - 1
    constexpr int kReplicates = 200;
    const std::vector<Eigen::Index> sizes = {100, 1000, 10000};

    std::vector<double> variances;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        const Eigen::Index draws = sizes[s];
        RngStream rng(2026, std::uint64_t(s));
        double sum = 0.0, sum_sq = 0.0;
        for (int r = 0; r < kReplicates; ++r) {
            double estimate = 0.0;
            for (Eigen::Index i = 0; i < draws; ++i) {
                const double theta = std::sqrt(2.0) * rng.normal();
                const double weight = std::sqrt(2.0) * std::exp(-0.25 * theta * theta);
                estimate += weight * theta * theta;
            }
            estimate /= double(draws);
            sum += estimate;
            sum_sq += estimate * estimate;
        }
        const double mean = sum / kReplicates;
        const double var =
            (sum_sq - kReplicates * mean * mean) / double(kReplicates - 1);
        variances.push_back(var);

        const double mean_tol = 3.0 * std::sqrt(kSigmaQ2 / double(draws) / kReplicates);
        ctx.check_close(mean, 1.0, mean_tol,
                        "mean estimate at J=" + std::to_string(draws));
        const double ratio = var * double(draws) / kSigmaQ2;
        ctx.check(ratio > 0.67 && ratio < 1.33,
                  "variance at J=" + std::to_string(draws) + " is " +
                      std::to_string(ratio) + "x the predicted sigma_q^2/J");
    }
    for (std::size_t s = 0; s + 1 < variances.size(); ++s) {
        const double decade = variances[s] / variances[s + 1];
        ctx.check(decade > 6.0 && decade < 16.0,
                  "variance ratio between J=" + std::to_string(sizes[s]) + " and J=" +
                      std::to_string(sizes[s + 1]) + " is " + std::to_string(decade) +
                      ", expected roughly 10");
    }
}

// ---------------------------------------------------------------------------
// Criterion 3: the mini-batch estimate of the negative log-posterior gradient
// is unbiased: averaging many random-batch estimates reproduces the full-data
// gradient.
void criterion_gradient_unbiased(Context& ctx) {
    const Dataset data = make_two_moons(64, 0.12, 9);
    const MlpModel model({2, 8, 2});
    const GaussianPrior prior(model.param_count(), 1.0);

    RngStream rng(31, 0);
    const Eigen::VectorXd theta = prior.sample(rng);

    const Eigen::VectorXd full_grad =
        -model.grad_log_likelihood(theta, data.features, data.labels) -
        prior.grad_log_density(theta);

    std::vector<Eigen::Index> order(std::size_t(data.n()));
    for (Eigen::Index i = 0; i < data.n(); ++i) order[std::size_t(i)] = i;

    constexpr int kBatches = 20000;
    constexpr Eigen::Index kBatchSize = 8;
    Eigen::VectorXd mean_grad = Eigen::VectorXd::Zero(theta.size());
    for (int b = 0; b < kBatches; ++b) {
        rng.shuffle(std::span<Eigen::Index>(order));
        MiniBatch batch;
        batch.indices.assign(order.begin(), order.begin() + kBatchSize);
        mean_grad += grad_neg_log_posterior_minibatch(model, prior, data, theta, batch);
    }
    mean_grad /= double(kBatches);

    const double rel_error = (mean_grad - full_grad).norm() / full_grad.norm();
    ctx.check(rel_error < 0.02,
              "mean of " + std::to_string(kBatches) +
                  " mini-batch gradients deviates from the full gradient by " +
                  std::to_string(rel_error) + " (relative L2), limit 0.02");
}

// ---------------------------------------------------------------------------
// Criterion 4: the trajectory integrator is time-reversible and volume
// preserving on both a multimodal and a quadratic potential.
void criterion_integrator(Context& ctx) {
    const GmmTarget gmm;
    Eigen::Matrix3d quad;
    quad << 2.0, 0.5, 0.0,
            0.5, 1.5, 0.3,
            0.0, 0.3, 1.0;

    const double eps = 0.1;
    const int steps = 10;
    RngStream rng(77, 0);

    double worst_position = 0.0, worst_momentum = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const bool use_gmm = trial % 2 == 0;
        const Eigen::Index dim = use_gmm ? 2 : 3;
        Eigen::VectorXd q(dim), p(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            q[i] = 3.0 * rng.normal();
            p[i] = rng.normal();
        }
        const IndexedGradFn grad_u = [&](int, const Eigen::VectorXd& x) -> Eigen::VectorXd {
            if (use_gmm) return -gmm.grad_log_density(Eigen::Vector2d(x));
            return quad * x;
        };

        const LeapfrogResult forward = leapfrog(q, p, eps, steps, grad_u);
        const LeapfrogResult back =
            leapfrog(forward.position, -forward.momentum, eps, steps, grad_u);
        worst_position =
            std::max(worst_position, (back.position - q).cwiseAbs().maxCoeff());
        worst_momentum =
            std::max(worst_momentum, (back.momentum + p).cwiseAbs().maxCoeff());
    }
    ctx.check(worst_position < 1e-10, "worst round-trip position error " +
                                          std::to_string(worst_position) + " (limit 1e-10)");
    ctx.check(worst_momentum < 1e-10, "worst round-trip momentum error " +
                                          std::to_string(worst_momentum) + " (limit 1e-10)");

    // Numeric Jacobian of the phase-space map on a handful of starts.
    double worst_det = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const bool use_gmm = trial % 2 == 0;
        const Eigen::Index dim = use_gmm ? 2 : 3;
        Eigen::VectorXd state(2 * dim);
        for (Eigen::Index i = 0; i < 2 * dim; ++i) state[i] = 1.5 * rng.normal();

        const IndexedGradFn grad_u = [&](int, const Eigen::VectorXd& x) -> Eigen::VectorXd {
            if (use_gmm) return -gmm.grad_log_density(Eigen::Vector2d(x));
            return quad * x;
        };
        const auto map = [&](const Eigen::VectorXd& z) {
            const LeapfrogResult end = leapfrog(z.head(dim), z.tail(dim), eps, steps, grad_u);
            Eigen::VectorXd out(2 * dim);
            out << end.position, end.momentum;
            return out;
        };

        const double h = 1e-5;
        Eigen::MatrixXd jacobian(2 * dim, 2 * dim);
        for (Eigen::Index col = 0; col < 2 * dim; ++col) {
            Eigen::VectorXd lo = state, hi = state;
            lo[col] -= h;
            hi[col] += h;
            jacobian.col(col) = (map(hi) - map(lo)) / (2.0 * h);
        }
        worst_det = std::max(worst_det, std::abs(jacobian.determinant() - 1.0));
    }
    ctx.check(worst_det < 1e-6, "worst |det(Jacobian) - 1| = " + std::to_string(worst_det) +
                                    " (limit 1e-6)");
}

// ---------------------------------------------------------------------------
// Criterion 5: resampling restores uniform weights with full effective sample
// size, and multinomial counts match their expected frequencies.
void criterion_resampling(Context& ctx) {
    const Eigen::Index count = 64;
    RngStream rng(5, 0);

    for (const bool systematic : {true, false}) {
        ParticleSet particles(count, 3);
        for (Eigen::Index i = 0; i < particles.params.size(); ++i)
            particles.params.data()[i] = rng.normal();
        for (Eigen::Index j = 0; j < count; ++j)
            particles.log_weights[j] = -2.0 * rng.uniform();
        const NormalizedWeights norm = normalize_in_place(particles);

        const std::vector<Eigen::Index> indices =
            systematic ? systematic_resample_indices(norm.probabilities, count, rng)
                       : multinomial_resample_indices(norm.probabilities, count, rng);
        apply_resample(particles, indices);

        const std::string scheme = systematic ? "systematic" : "multinomial";
        for (Eigen::Index j = 0; j < count; ++j)
            ctx.check(particles.log_weights[j] == -std::log(double(count)),
                      scheme + ": post-resample weight of particle " + std::to_string(j) +
                          " is not exactly 1/J");
        const double ess =
            effective_sample_size(normalize_log_weights(particles.log_weights).probabilities);
        ctx.check(std::abs(ess - double(count)) <= 1e-12 * double(count),
                  scheme + ": post-resample effective sample size " + std::to_string(ess) +
                      " != J");
    }

    // Frequency test: 1e5 multinomial draws over four cells.
    Eigen::VectorXd probs(4);
    probs << 0.1, 0.2, 0.3, 0.4;
    const Eigen::Index draws = 100000;
    const std::vector<Eigen::Index> picks = multinomial_resample_indices(probs, draws, rng);
    Eigen::Vector4d observed = Eigen::Vector4d::Zero();
    for (const Eigen::Index pick : picks) observed[pick] += 1.0;
    double chi_sq = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double expected = double(draws) * probs[k];
        chi_sq += (observed[k] - expected) * (observed[k] - expected) / expected;
    }
    // 99.9th percentile of chi-squared with 3 degrees of freedom.
    ctx.check(chi_sq < 16.26623619623813,
              "multinomial frequency statistic " + std::to_string(chi_sq) +
                  " exceeds the 3-dof 99.9% bound");

    // Systematic counts can only be the floor or ceiling of J * p.
    const std::vector<Eigen::Index> sys_picks =
        systematic_resample_indices(probs, draws, rng);
    Eigen::Vector4d sys_counts = Eigen::Vector4d::Zero();
    for (const Eigen::Index pick : sys_picks) sys_counts[pick] += 1.0;
    for (int k = 0; k < 4; ++k) {
        const double target = double(draws) * probs[k];
        ctx.check(sys_counts[k] == std::floor(target) || sys_counts[k] == std::ceil(target),
                  "systematic count for cell " + std::to_string(k) + " is " +
                      std::to_string(sys_counts[k]) + ", expected floor or ceil of " +
                      std::to_string(target));
    }
}

// ---------------------------------------------------------------------------
// Criterion 6: the full pipeline (pretrain, sample from the pretrained start,
// evaluate the weighted ensemble) holds accuracy within one point of the
// deterministic network and does not worsen calibration, within a 30-minute
// budget.
void criterion_pipeline(Context& ctx) {
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = ctx.scratch / "c6";

    if (!ctx.run_cli("pretrain --out \"" + dir.string() + "\" --seed 42", "c6_pretrain"))
        return;
    const std::vector<std::string> history =
        split_csv_row(last_line(dir / "pretrain_history.csv"));
    if (history.size() != 4) {
        ctx.failures.push_back("pretrain_history.csv has no usable final row");
        return;
    }
    const double val_accuracy = std::stod(history[3]);
    ctx.check(val_accuracy >= 0.95, "pretrained validation accuracy " +
                                        std::to_string(val_accuracy) + " < 0.95");

    if (!ctx.run_cli("sample --init \"" + (dir / "pretrained.bin").string() + "\" --out \"" +
                         dir.string() + "\" --seed 42 --threads 1",
                     "c6_sample"))
        return;
    if (!ctx.run_cli("eval --samples \"" + (dir / "samples.bin").string() +
                         "\" --checkpoint \"" + (dir / "pretrained.bin").string() +
                         "\" --out \"" + dir.string() + "\"",
                     "c6_eval"))
        return;

    const std::map<std::string, double> metrics =
        read_metrics_csv(dir / "eval_metrics.csv", ctx);
    const auto need = [&](const std::string& key) {
        if (metrics.count(key)) return metrics.at(key);
        ctx.failures.push_back("eval_metrics.csv is missing " + key);
        return 0.0;
    };
    const double ensemble_accuracy = need("ensemble_accuracy");
    const double pretrained_accuracy = need("pretrained_accuracy");
    const double ensemble_ece = need("ensemble_ece");
    const double pretrained_ece = need("pretrained_ece");
    if (!ctx.failures.empty()) return;

    ctx.check(std::abs(ensemble_accuracy - pretrained_accuracy) <= 0.01,
              "ensemble accuracy " + std::to_string(ensemble_accuracy) +
                  " deviates from the pretrained network's " +
                  std::to_string(pretrained_accuracy) + " by more than 0.01");
    ctx.check(ensemble_ece <= pretrained_ece + 0.005,
              "ensemble calibration error " + std::to_string(ensemble_ece) +
                  " exceeds the pretrained network's " + std::to_string(pretrained_ece) +
                  " by more than 0.005");

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ctx.check(elapsed <= 1800.0,
              "pipeline took " + std::to_string(elapsed) + "s, budget is 1800s");
}

// ---------------------------------------------------------------------------
// Criterion 7: the evaluation metrics hit hand-computed values exactly.
void criterion_metric_values(Context& ctx) {
    RowMajorMatrix mixed(4, 2);
    mixed << 0.8, 0.2,
             0.8, 0.2,
             1.0, 0.0,
             1.0, 0.0;
    Eigen::VectorXi labels(4);
    labels << 0, 0, 0, 1;
    ctx.check_close(ece(mixed, labels), 0.35, 1e-12, "two-bin calibration error");

    Eigen::VectorXd scores(100);
    for (int i = 0; i < 100; ++i) scores[i] = double(i + 1);
    ctx.check_close(fpr95_threshold(scores), 95.05, 1e-12,
                    "95th percentile of the integers 1..100");

    Eigen::VectorXd id(2), ood(2);
    id << 0.0, 1.0;
    ood << 0.5, 2.0;
    ctx.check_close(auroc(id, ood), 0.75, 1e-12, "rank statistic on the interleaved pair");

    RowMajorMatrix uniform_logits = RowMajorMatrix::Zero(1, 10);
    ctx.check_close(energy_scores(uniform_logits)[0], -std::log(10.0), 1e-12,
                    "energy of ten equal logits");

    RowMajorMatrix one(1, 1);
    one << 2.25;
    ctx.check_close(energy_scores(one)[0], -2.25, 1e-12, "energy of a single logit");

    RowMajorMatrix base(1, 4);
    base << 0.3, -1.2, 2.0, 0.5;
    const RowMajorMatrix shifted = base.array() + 3.0;
    ctx.check_close(energy_scores(shifted)[0], energy_scores(base)[0] - 3.0, 1e-12,
                    "energy shift equivariance");
}

// ---------------------------------------------------------------------------
// Criterion 8: results are byte-identical across thread counts and repeated
// runs.
void criterion_determinism(Context& ctx) {
    const std::string gmm_args = " --seed 7 --particles 64 --epochs 30 --warmup 10";
    const fs::path g1 = ctx.scratch / "c8_gmm_t1";
    const fs::path g8 = ctx.scratch / "c8_gmm_t8";
    const fs::path g8b = ctx.scratch / "c8_gmm_t8_repeat";
    if (!ctx.run_cli("gmm-demo --out \"" + g1.string() + "\" --threads 1" + gmm_args,
                     "c8_gmm_t1"))
        return;
    if (!ctx.run_cli("gmm-demo --out \"" + g8.string() + "\" --threads 8" + gmm_args,
                     "c8_gmm_t8"))
        return;
    if (!ctx.run_cli("gmm-demo --out \"" + g8b.string() + "\" --threads 8" + gmm_args,
                     "c8_gmm_t8_repeat"))
        return;
    same_bytes(g1 / "gmm_samples.bin", g8 / "gmm_samples.bin", ctx,
               "mixture demo, 1 thread vs 8 threads");
    same_bytes(g8 / "gmm_samples.bin", g8b / "gmm_samples.bin", ctx,
               "mixture demo, repeated 8-thread runs");

    const fs::path config_path = ctx.scratch / "c8.cfg";
    {
        std::ofstream config(config_path);
        config << "schema_version = 1\n"
               << "layer_sizes = 2,8,2\n"
               << "dataset = two_moons\n"
               << "train_size = 128\n"
               << "val_size = 32\n"
               << "test_size = 32\n"
               << "particles = 8\n"
               << "epochs = 6\n"
               << "warmup_epochs = 3\n"
               << "batch_size = 32\n"
               << "step_size = 0.001\n";
    }
    const std::string bnn_args =
        "sample --config \"" + config_path.string() + "\" --init prior --seed 11";
    const fs::path b1 = ctx.scratch / "c8_bnn_t1";
    const fs::path b8 = ctx.scratch / "c8_bnn_t8";
    if (!ctx.run_cli(bnn_args + " --out \"" + b1.string() + "\" --threads 1", "c8_bnn_t1"))
        return;
    if (!ctx.run_cli(bnn_args + " --out \"" + b8.string() + "\" --threads 8", "c8_bnn_t8"))
        return;
    same_bytes(b1 / "samples.bin", b8 / "samples.bin", ctx,
               "network sampler, 1 thread vs 8 threads");
    same_bytes(b1 / "checkpoint.bin", b8 / "checkpoint.bin", ctx,
               "network sampler final population, 1 thread vs 8 threads");
}

struct Criterion {
    int id;
    std::string name;
    std::function<void(Context&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    std::string cli;
    int only = 0;
    bool keep = false;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--cli" && i + 1 < argc) cli = argv[++i];
        else if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
        else if (arg == "--keep") keep = true;
        else {
            std::fprintf(stderr, "unknown argument %s\n", arg.c_str());
            return 2;
        }
    }
    if (cli.empty()) {
        std::fprintf(stderr, "usage: acceptance_tests --cli /path/to/smcsghmc [--only N]\n");
        return 2;
    }
    if (!fs::exists(cli)) {
        std::fprintf(stderr, "cli binary not found: %s\n", cli.c_str());
        return 2;
    }

    const std::vector<Criterion> criteria = {
        {1, "grid-mixture mode recovery", criterion_grid_mixture},
        {2, "importance-sampling variance law", criterion_variance_law},
        {3, "mini-batch gradient unbiasedness", criterion_gradient_unbiased},
        {4, "integrator reversibility and volume", criterion_integrator},
        {5, "resampling correctness", criterion_resampling},
        {6, "pretrain/sample/eval pipeline", criterion_pipeline},
        {7, "metric reference values", criterion_metric_values},
        {8, "thread-count determinism", criterion_determinism},
    };

    Context ctx;
    ctx.cli = cli;
    ctx.scratch = fs::temp_directory_path() /
                  ("smcsghmc_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(ctx.scratch);

    int failed = 0;
    for (const Criterion& criterion : criteria) {
        if (only != 0 && criterion.id != only) continue;
        ctx.failures.clear();
        try {
            criterion.run(ctx);
        } catch (const std::exception& e) {
            ctx.failures.push_back(std::string("unhandled exception: ") + e.what());
        }
        if (ctx.failures.empty()) {
            std::printf("criterion %d (%s): PASS\n", criterion.id, criterion.name.c_str());
        } else {
            ++failed;
            std::printf("criterion %d (%s): FAIL\n", criterion.id, criterion.name.c_str());
            for (const std::string& reason : ctx.failures)
                std::printf("    - %s\n", reason.c_str());
        }
        std::fflush(stdout);
    }

    if (failed == 0 && !keep) {
        std::error_code ec;
        fs::remove_all(ctx.scratch, ec);
    } else if (failed != 0) {
        std::printf("artifacts kept in %s\n", ctx.scratch.string().c_str());
    }
    return failed == 0 ? 0 : 1;
}

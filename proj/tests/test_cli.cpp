// End-to-end contract checks for the command-line tool: exit codes, artifact
// shapes, rerun determinism, and agreement between the ensemble evaluator and
// the plain pretrained network. The binary under test is located through the
// SMCSGHMC_CLI_PATH environment variable (set by the ctest entry).

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "smcsghmc/mlp.hpp"
#include "smcsghmc/rng.hpp"
#include "smcsghmc/serialize.hpp"
#include "smcsghmc/sgd.hpp"

namespace fs = std::filesystem;
using namespace smcsghmc;

namespace {

std::string cli_path() {
    const char* path = std::getenv("SMCSGHMC_CLI_PATH");
    REQUIRE_MESSAGE(path != nullptr,
                    "SMCSGHMC_CLI_PATH must point at the smcsghmc binary");
    return path;
}

struct CliScratch {
    fs::path dir;
    CliScratch() {
        static int counter = 0;
        dir = fs::temp_directory_path() /
              ("smcsghmc_cli_" + std::to_string(::getpid()) + "_" +
               std::to_string(counter++));
        fs::create_directories(dir);
    }
    ~CliScratch() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    fs::path operator/(const std::string& name) const { return dir / name; }
};

// Runs the tool with the given arguments, captures stdout+stderr into a log
// file inside the scratch directory, and returns the process exit code.
int run_cli(const CliScratch& scratch, const std::string& arguments) {
    const std::string command = "\"" + cli_path() + "\" " + arguments + " > \"" +
                                (scratch / "cli.log").string() + "\" 2>&1";
    const int status = std::system(command.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << content;
}

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot open " << path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE_MESSAGE(in.good(), "cannot open " << path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_row(const std::string& row) {
    std::vector<std::string> fields;
    std::stringstream stream(row);
    std::string field;
    while (std::getline(stream, field, ',')) fields.push_back(field);
    return fields;
}

// Parses a "metric,value" table into a name -> value map.
std::map<std::string, double> read_metrics(const fs::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    REQUIRE(!lines.empty());
    CHECK(lines[0] == "metric,value");
    std::map<std::string, double> metrics;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::vector<std::string> fields = split_row(lines[i]);
        REQUIRE(fields.size() == 2);
        metrics[fields[0]] = std::stod(fields[1]);
    }
    return metrics;
}

// A small interleaved-arcs run: fast to pretrain and to sample.
std::string moons_config(Eigen::Index particles, int epochs, int warmup) {
    std::ostringstream out;
    out << "schema_version = 1\n"
        << "layer_sizes = 2,8,2\n"
        << "dataset = two_moons\n"
        << "train_size = 256\n"
        << "val_size = 64\n"
        << "test_size = 64\n"
        << "particles = " << particles << "\n"
        << "epochs = " << epochs << "\n"
        << "warmup_epochs = " << warmup << "\n"
        << "batch_size = 64\n"
        << "step_size = 0.001\n"
        << "pretrain_epochs = 40\n"
        << "pretrain_lr = 0.1\n"
        << "pretrain_batch_size = 32\n";
    return out.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("tiny mixture demo writes one row per retained draw") {
    CliScratch scratch;
    const fs::path out = scratch / "gmm";
    const int code = run_cli(scratch, "gmm-demo --out \"" + out.string() +
                                          "\" --seed 5 --particles 10 --epochs 3 --warmup 2");
    CHECK(code == 0);

    // 10 particles collected over the single post-warmup epoch.
    const SampleArchive archive = load_samples((out / "gmm_samples.bin").string());
    CHECK(archive.params.rows() == 10);
    CHECK(archive.params.cols() == 2);
    CHECK(archive.total_epochs == 3);
    for (int epoch : archive.epochs) CHECK(epoch == 3);

    CHECK(read_lines(out / "gmm_samples.csv").size() == 11);      // header + 10
    CHECK(read_lines(out / "gmm_mode_masses.csv").size() == 26);  // header + 25
    CHECK(read_lines(out / "gmm_diagnostics.csv").size() == 4);   // header + 3
}

TEST_CASE("configuration errors abort before any output is created") {
    CliScratch scratch;
    write_text(scratch / "bad.cfg", "schema_version = 1\nbogus_key = 1\n");
    const fs::path out = scratch / "run";

    const int code = run_cli(scratch, "sample --config \"" + (scratch / "bad.cfg").string() +
                                          "\" --out \"" + out.string() + "\"");
    CHECK(code == 2);
    CHECK(!fs::exists(out));

    // Usage errors from the argument parser map to the same exit code.
    CHECK(run_cli(scratch, "sample") == 2);
}

TEST_CASE("sampler reruns are byte-identical and bookkeeping adds up") {
    CliScratch scratch;
    write_text(scratch / "run.cfg", moons_config(5, 3, 2));
    const std::string base = "sample --config \"" + (scratch / "run.cfg").string() +
                             "\" --init prior --seed 13 --out \"";

    const fs::path first = scratch / "r1";
    const fs::path second = scratch / "r2";
    CHECK(run_cli(scratch, base + first.string() + "\"") == 0);
    CHECK(run_cli(scratch, base + second.string() + "\"") == 0);

    CHECK(read_bytes(first / "samples.bin") == read_bytes(second / "samples.bin"));
    CHECK(read_bytes(first / "checkpoint.bin") == read_bytes(second / "checkpoint.bin"));
    CHECK(fs::exists(first / "effective_config.txt"));

    // Warmup covers all but the last epoch, so the archive holds exactly one
    // population's worth of draws.
    const SampleArchive archive = load_samples((first / "samples.bin").string());
    CHECK(archive.params.rows() == 5);
    CHECK(archive.model.layer_sizes == std::vector<int>{2, 8, 2});

    // One diagnostics row per epoch, with the effective sample size inside
    // [1, population size].
    const std::vector<std::string> rows = read_lines(first / "sample_diagnostics.csv");
    REQUIRE(rows.size() == 4);
    CHECK(split_row(rows[0])[1] == "ess");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double ess = std::stod(split_row(rows[i])[1]);
        CHECK(ess >= 1.0 - 1e-9);
        CHECK(ess <= 5.0 + 1e-9);
    }
}

TEST_CASE("zero pretraining epochs returns the untouched initialization") {
    CliScratch scratch;
    write_text(scratch / "run.cfg", moons_config(4, 2, 1));
    const fs::path out = scratch / "p0";
    const int code =
        run_cli(scratch, "pretrain --config \"" + (scratch / "run.cfg").string() +
                             "\" --epochs 0 --seed 4242 --out \"" + out.string() + "\"");
    CHECK(code == 0);

    const Checkpoint checkpoint = load_checkpoint((out / "pretrained.bin").string());
    const MlpModel model({2, 8, 2}, Activation::relu);
    RngStream init_rng(4242, 0);
    const Eigen::VectorXd expected = init_params(model, init_rng);
    REQUIRE(checkpoint.particles.dim() == expected.size());
    CHECK((checkpoint.particles.params.row(0).transpose().array() == expected.array()).all());

    CHECK(read_lines(out / "pretrain_history.csv").size() == 1);  // header only
}

TEST_CASE("pretraining separates the interleaved half-circles") {
    CliScratch scratch;
    write_text(scratch / "run.cfg", moons_config(4, 2, 1));
    const fs::path out = scratch / "fit";
    CHECK(run_cli(scratch, "pretrain --config \"" + (scratch / "run.cfg").string() +
                               "\" --seed 7 --out \"" + out.string() + "\"") == 0);

    const std::vector<std::string> history = read_lines(out / "pretrain_history.csv");
    REQUIRE(history.size() == 41);  // header + 40 epochs
    CHECK(split_row(history[0])[3] == "val_accuracy");
    const double val_accuracy = std::stod(split_row(history.back())[3]);
    CHECK(val_accuracy >= 0.95);
}

TEST_CASE("singleton and duplicated archives score like the plain network") {
    CliScratch scratch;
    write_text(scratch / "run.cfg", moons_config(4, 2, 1));
    const std::string config_arg = " --config \"" + (scratch / "run.cfg").string() + "\"";
    const fs::path fit = scratch / "fit";
    REQUIRE(run_cli(scratch, "pretrain" + config_arg + " --seed 7 --out \"" +
                                 fit.string() + "\"") == 0);

    // Wrap the pretrained point estimate as a one-member sample archive.
    const Checkpoint checkpoint = load_checkpoint((fit / "pretrained.bin").string());
    SampleArchive single;
    single.model = checkpoint.model;
    single.params = checkpoint.particles.params;
    single.log_weights = Eigen::VectorXd::Zero(1);
    single.epochs = {1};
    single.particle_ids = {0};
    single.seed = checkpoint.seed;
    single.total_epochs = 1;
    save_samples(single, (scratch / "single.bin").string());

    const fs::path eval_dir = scratch / "eval1";
    REQUIRE(run_cli(scratch, "eval" + config_arg + " --samples \"" +
                                 (scratch / "single.bin").string() + "\" --checkpoint \"" +
                                 (fit / "pretrained.bin").string() + "\" --out \"" +
                                 eval_dir.string() + "\"") == 0);
    const std::map<std::string, double> one = read_metrics(eval_dir / "eval_metrics.csv");
    CHECK(one.at("ensemble_members") == 1.0);
    CHECK(one.at("ensemble_accuracy") == doctest::Approx(one.at("pretrained_accuracy")).epsilon(1e-12));
    CHECK(one.at("ensemble_nll") == doctest::Approx(one.at("pretrained_nll")).epsilon(1e-12));
    CHECK(one.at("ensemble_ece") == doctest::Approx(one.at("pretrained_ece")).epsilon(1e-12));

    // Duplicating the member with equal weights must not move any metric.
    SampleArchive doubled = single;
    doubled.params = RowMajorMatrix(2, single.params.cols());
    doubled.params.row(0) = single.params.row(0);
    doubled.params.row(1) = single.params.row(0);
    doubled.log_weights = Eigen::VectorXd::Constant(2, -0.7);
    doubled.epochs = {1, 1};
    doubled.particle_ids = {0, 1};
    save_samples(doubled, (scratch / "double.bin").string());

    const fs::path eval_two = scratch / "eval2";
    REQUIRE(run_cli(scratch, "eval" + config_arg + " --samples \"" +
                                 (scratch / "double.bin").string() + "\" --out \"" +
                                 eval_two.string() + "\"") == 0);
    const std::map<std::string, double> two = read_metrics(eval_two / "eval_metrics.csv");
    CHECK(two.at("ensemble_members") == 2.0);
    CHECK(two.at("ensemble_accuracy") == doctest::Approx(one.at("ensemble_accuracy")).epsilon(1e-12));
    CHECK(two.at("ensemble_nll") == doctest::Approx(one.at("ensemble_nll")).epsilon(1e-12));
    CHECK(two.at("ensemble_ece") == doctest::Approx(one.at("ensemble_ece")).epsilon(1e-12));
}

TEST_CASE("foil detection runs end to end on a tiny ensemble") {
    CliScratch scratch;
    write_text(scratch / "run.cfg", moons_config(4, 2, 1));
    const std::string config_arg = " --config \"" + (scratch / "run.cfg").string() + "\"";
    const fs::path fit = scratch / "fit";
    REQUIRE(run_cli(scratch, "pretrain" + config_arg + " --seed 7 --out \"" +
                                 fit.string() + "\"") == 0);

    const Checkpoint checkpoint = load_checkpoint((fit / "pretrained.bin").string());
    SampleArchive single;
    single.model = checkpoint.model;
    single.params = checkpoint.particles.params;
    single.log_weights = Eigen::VectorXd::Zero(1);
    single.epochs = {1};
    single.particle_ids = {0};
    single.seed = checkpoint.seed;
    single.total_epochs = 1;
    save_samples(single, (scratch / "single.bin").string());

    const fs::path ood_dir = scratch / "ood";
    REQUIRE(run_cli(scratch, "ood" + config_arg + " --samples \"" +
                                 (scratch / "single.bin").string() + "\" --out \"" +
                                 ood_dir.string() + "\"") == 0);
    const std::map<std::string, double> report = read_metrics(ood_dir / "ood_metrics.csv");
    CHECK(report.at("id_count") == 64.0);
    CHECK(report.at("ood_count") == 64.0);
    CHECK(std::isfinite(report.at("energy_threshold")));
    for (const char* name : {"accuracy", "precision", "recall", "f1", "specificity", "auroc"}) {
        CHECK(report.at(name) >= 0.0);
        CHECK(report.at(name) <= 1.0);
    }
}

TEST_CASE("missing checkpoint paths surface as i/o failures") {
    CliScratch scratch;
    write_text(scratch / "run.cfg", moons_config(4, 2, 1));
    const int code =
        run_cli(scratch, "sample --config \"" + (scratch / "run.cfg").string() +
                             "\" --init \"" + (scratch / "no_such.bin").string() +
                             "\" --out \"" + (scratch / "run").string() + "\"");
    CHECK(code == 4);
}

}  // TEST_SUITE

#include "smcsghmc/run_config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "smcsghmc/errors.hpp"

namespace smcsghmc {

namespace {

std::string trim(const std::string& s) {
    const std::size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const std::size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

long long parse_int(const std::string& key, const std::string& value) {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t consumed = 0;
        const double out = std::stod(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("key '" + key + "': expected true/false, got '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::stringstream stream(value);
    std::string item;
    while (std::getline(stream, item, ',')) out.push_back(int(parse_int(key, trim(item))));
    if (out.empty()) throw ConfigError("key '" + key + "': expected a comma-separated list");
    return out;
}

std::string join_ints(const std::vector<int>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(values[i]);
    }
    return out;
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

}  // namespace

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig config;
    std::set<std::string> seen;
    std::istringstream stream(text);
    std::string raw_line;
    int line_number = 0;

    while (std::getline(stream, raw_line)) {
        ++line_number;
        std::string line = raw_line;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_number) +
                              ": expected 'key = value', got '" + trim(raw_line) + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(line_number) + ": empty key or value");
        if (!seen.insert(key).second)
            throw ConfigError("key '" + key + "' appears more than once");

        if (key == "schema_version") config.schema_version = int(parse_int(key, value));
        else if (key == "layer_sizes") config.layer_sizes = parse_int_list(key, value);
        else if (key == "activation") config.activation = value;
        else if (key == "prior_variance") config.prior_variance = parse_double(key, value);
        else if (key == "particles") config.particles = parse_int(key, value);
        else if (key == "epochs") config.epochs = int(parse_int(key, value));
        else if (key == "warmup_epochs") config.warmup_epochs = int(parse_int(key, value));
        else if (key == "step_size") config.step_size = parse_double(key, value);
        else if (key == "batch_size") config.batch_size = parse_int(key, value);
        else if (key == "temperature") config.temperature = parse_double(key, value);
        else if (key == "warmup_temperature")
            config.warmup_temperature = parse_double(key, value);
        else if (key == "ess_threshold") config.ess_threshold = parse_double(key, value);
        else if (key == "resample_every_epoch")
            config.resample_every_epoch = parse_bool(key, value);
        else if (key == "resample_scheme") config.resample_scheme = value;
        else if (key == "init_jitter_sd") config.init_jitter_sd = parse_double(key, value);
        else if (key == "pretrain_epochs") config.pretrain_epochs = int(parse_int(key, value));
        else if (key == "pretrain_lr") config.pretrain_lr = parse_double(key, value);
        else if (key == "pretrain_momentum") config.pretrain_momentum = parse_double(key, value);
        else if (key == "pretrain_weight_decay")
            config.pretrain_weight_decay = parse_double(key, value);
        else if (key == "pretrain_batch_size") config.pretrain_batch_size = parse_int(key, value);
        else if (key == "pretrain_lr_decay") config.pretrain_lr_decay = value;
        else if (key == "dataset") config.dataset = value;
        else if (key == "data_dir") config.data_dir = value;
        else if (key == "train_size") config.train_size = parse_int(key, value);
        else if (key == "val_size") config.val_size = parse_int(key, value);
        else if (key == "test_size") config.test_size = parse_int(key, value);
        else throw ConfigError("unknown configuration key '" + key + "'");
    }

    config.validate();
    return config;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open configuration file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_text(buffer.str());
}

void RunConfig::validate() const {
    if (schema_version != 1)
        throw ConfigError("unsupported schema_version " + std::to_string(schema_version));
    if (layer_sizes.size() < 2) throw ConfigError("layer_sizes needs at least two entries");
    for (int size : layer_sizes)
        if (size <= 0) throw ConfigError("layer_sizes entries must be positive");
    if (!(prior_variance > 0.0)) throw ConfigError("prior_variance must be positive");
    if (temperature < 0.0) throw ConfigError("temperature must be non-negative (0 = auto)");
    if (warmup_temperature < 0.0)
        throw ConfigError("warmup_temperature must be non-negative (0 = auto)");
    if (dataset != "digits" && dataset != "two_moons")
        throw ConfigError("dataset must be 'digits' or 'two_moons', got '" + dataset + "'");
    if (step_size < 0.0) throw ConfigError("step_size must be non-negative");
    if (batch_size <= 0) throw ConfigError("batch_size must be positive");
    if (init_jitter_sd < 0.0) throw ConfigError("init_jitter_sd must be non-negative");
    if (train_size <= 0 || val_size < 0 || test_size < 0)
        throw ConfigError("split sizes must be positive (train) or non-negative");
    activation_kind();
    scheme_kind();
    lr_decay_kind();
    sampler_config(1);
    optimizer_config();
}

Activation RunConfig::activation_kind() const {
    if (activation == "relu") return Activation::relu;
    if (activation == "tanh") return Activation::tanh_;
    throw ConfigError("activation must be 'relu' or 'tanh', got '" + activation + "'");
}

ResampleScheme RunConfig::scheme_kind() const {
    if (resample_scheme == "systematic") return ResampleScheme::systematic;
    if (resample_scheme == "multinomial") return ResampleScheme::multinomial;
    throw ConfigError("resample_scheme must be 'systematic' or 'multinomial', got '" +
                      resample_scheme + "'");
}

LrDecay RunConfig::lr_decay_kind() const {
    if (pretrain_lr_decay == "none") return LrDecay::none;
    if (pretrain_lr_decay == "cosine") return LrDecay::cosine;
    throw ConfigError("pretrain_lr_decay must be 'none' or 'cosine', got '" +
                      pretrain_lr_decay + "'");
}

SamplerConfig RunConfig::sampler_config(int threads) const {
    SamplerConfig out;
    out.particles = particles;
    out.epochs = epochs;
    out.warmup_epochs = warmup_epochs;
    out.ess_threshold = ess_threshold;
    out.resample_every_epoch = resample_every_epoch;
    out.scheme = scheme_kind();
    out.threads = threads;
    out.validate();
    return out;
}

OptimizerConfig RunConfig::optimizer_config() const {
    OptimizerConfig out;
    out.learning_rate = pretrain_lr;
    out.momentum = pretrain_momentum;
    out.weight_decay = pretrain_weight_decay;
    out.batch_size = pretrain_batch_size;
    out.epochs = pretrain_epochs;
    out.lr_decay = lr_decay_kind();
    out.validate();
    return out;
}

std::string RunConfig::to_text() const {
    std::ostringstream out;
    out << "schema_version = " << schema_version << "\n\n";
    out << "# model\n";
    out << "layer_sizes = " << join_ints(layer_sizes) << "\n";
    out << "activation = " << activation << "\n";
    out << "prior_variance = " << fmt(prior_variance) << "\n\n";
    out << "# sampler\n";
    out << "particles = " << particles << "\n";
    out << "epochs = " << epochs << "\n";
    out << "warmup_epochs = " << warmup_epochs << "\n";
    out << "step_size = " << fmt(step_size) << "\n";
    out << "batch_size = " << batch_size << "\n";
    out << "temperature = " << fmt(temperature) << "\n";
    out << "warmup_temperature = " << fmt(warmup_temperature) << "\n";
    out << "ess_threshold = " << fmt(ess_threshold) << "\n";
    out << "resample_every_epoch = " << (resample_every_epoch ? "true" : "false") << "\n";
    out << "resample_scheme = " << resample_scheme << "\n";
    out << "init_jitter_sd = " << fmt(init_jitter_sd) << "\n\n";
    out << "# pretraining\n";
    out << "pretrain_epochs = " << pretrain_epochs << "\n";
    out << "pretrain_lr = " << fmt(pretrain_lr) << "\n";
    out << "pretrain_momentum = " << fmt(pretrain_momentum) << "\n";
    out << "pretrain_weight_decay = " << fmt(pretrain_weight_decay) << "\n";
    out << "pretrain_batch_size = " << pretrain_batch_size << "\n";
    out << "pretrain_lr_decay = " << pretrain_lr_decay << "\n\n";
    out << "# data\n";
    out << "dataset = " << dataset << "\n";
    if (!data_dir.empty()) out << "data_dir = " << data_dir << "\n";
    out << "train_size = " << train_size << "\n";
    out << "val_size = " << val_size << "\n";
    out << "test_size = " << test_size << "\n";
    return out.str();
}

}  // namespace smcsghmc

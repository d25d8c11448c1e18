#include "smcsghmc/serialize.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "smcsghmc/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "serialized files are little-endian; big-endian hosts are not supported");

namespace smcsghmc {

namespace {

constexpr char kMagic[9] = {'S', 'M', 'C', 'S', 'G', 'H', 'M', 'C', '1'};
constexpr std::uint8_t kKindCheckpoint = 0;
constexpr std::uint8_t kKindSamples = 1;

class Writer {
public:
    explicit Writer(const std::string& path) : path_(path), tmp_(path + ".tmp") {
        out_.open(tmp_, std::ios::binary | std::ios::trunc);
        if (!out_) throw IoError("cannot open " + tmp_ + " for writing");
    }

    void bytes(const void* data, std::size_t count) {
        out_.write(static_cast<const char*>(data), std::streamsize(count));
        written_ += count;
    }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u32(std::uint32_t v) { bytes(&v, 4); }
    void u64(std::uint64_t v) { bytes(&v, 8); }
    void f64(double v) { bytes(&v, 8); }
    void f64_array(const double* data, std::size_t count) { bytes(data, count * 8); }
    void i32_array(const std::vector<int>& values) {
        for (int v : values) {
            const std::int32_t w = v;
            bytes(&w, 4);
        }
    }

    std::size_t written() const { return written_; }

    // Close the stream and move the finished file into place.
    void commit() {
        out_.flush();
        if (!out_) throw IoError("write to " + tmp_ + " failed");
        out_.close();
        if (std::rename(tmp_.c_str(), path_.c_str()) != 0)
            throw IoError("cannot move " + tmp_ + " to " + path_);
    }

private:
    std::string path_;
    std::string tmp_;
    std::ofstream out_;
    std::size_t written_ = 0;
};

class Reader {
public:
    explicit Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw IoError("cannot open " + path + " for reading");
        in_.seekg(0, std::ios::end);
        file_size_ = std::size_t(in_.tellg());
        in_.seekg(0, std::ios::beg);
    }

    void bytes(void* data, std::size_t count) {
        if (!in_.read(static_cast<char*>(data), std::streamsize(count)))
            throw FormatError("truncated file: " + path_);
    }
    std::uint8_t u8() {
        std::uint8_t v;
        bytes(&v, 1);
        return v;
    }
    std::uint32_t u32() {
        std::uint32_t v;
        bytes(&v, 4);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v;
        bytes(&v, 8);
        return v;
    }
    void f64_array(double* data, std::size_t count) { bytes(data, count * 8); }
    std::vector<int> i32_array(std::size_t count) {
        std::vector<int> values(count);
        for (std::size_t i = 0; i < count; ++i) {
            std::int32_t v;
            bytes(&v, 4);
            values[i] = v;
        }
        return values;
    }

    std::size_t file_size() const { return file_size_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ifstream in_;
    std::size_t file_size_ = 0;
};

constexpr std::size_t kHeaderFixedBytes = 9 + 1 + 8;  // magic + kind + declared size

std::size_t model_spec_bytes(const ModelSpec& model) {
    return 1 + 4 + 4 * model.layer_sizes.size();
}

void write_model_spec(Writer& w, const ModelSpec& model) {
    w.u8(model.activation == Activation::relu ? 0 : 1);
    w.u32(std::uint32_t(model.layer_sizes.size()));
    for (int size : model.layer_sizes) w.u32(std::uint32_t(size));
}

ModelSpec read_model_spec(Reader& r) {
    ModelSpec model;
    const std::uint8_t activation = r.u8();
    if (activation > 1) throw FormatError("unknown activation code in " + r.path());
    model.activation = activation == 0 ? Activation::relu : Activation::tanh_;
    const std::uint32_t count = r.u32();
    if (count > 64) throw FormatError("implausible layer count in " + r.path());
    model.layer_sizes.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) model.layer_sizes[i] = int(r.u32());
    return model;
}

void write_header(Writer& w, std::uint8_t kind, std::uint64_t declared_size,
                  const ModelSpec& model, std::uint64_t dim, std::uint64_t count,
                  std::uint64_t seed, std::uint32_t epoch) {
    w.bytes(kMagic, sizeof(kMagic));
    w.u8(kind);
    w.u64(declared_size);
    write_model_spec(w, model);
    w.u64(dim);
    w.u64(count);
    w.u64(seed);
    w.u32(epoch);
}

struct Header {
    ModelSpec model;
    std::uint64_t dim = 0;
    std::uint64_t count = 0;
    std::uint64_t seed = 0;
    std::uint32_t epoch = 0;
};

Header read_header(Reader& r, std::uint8_t expected_kind) {
    char magic[sizeof(kMagic)];
    r.bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw FormatError("bad magic in " + r.path());
    const std::uint8_t kind = r.u8();
    if (kind != expected_kind)
        throw FormatError("wrong file kind in " + r.path() + ": expected " +
                          std::to_string(expected_kind) + ", found " + std::to_string(kind));
    const std::uint64_t declared = r.u64();
    if (declared != r.file_size())
        throw FormatError("declared size " + std::to_string(declared) +
                          " does not match actual size " + std::to_string(r.file_size()) +
                          " in " + r.path());
    Header h;
    h.model = read_model_spec(r);
    h.dim = r.u64();
    h.count = r.u64();
    h.seed = r.u64();
    h.epoch = r.u32();
    return h;
}

std::size_t header_bytes(const ModelSpec& model) {
    return kHeaderFixedBytes + model_spec_bytes(model) + 8 + 8 + 8 + 4;
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
    const ParticleSet& p = checkpoint.particles;
    const std::size_t total = header_bytes(checkpoint.model) +
                              8 * std::size_t(p.count()) * std::size_t(p.dim()) +
                              8 * std::size_t(p.count());
    Writer w(path);
    write_header(w, kKindCheckpoint, total, checkpoint.model, std::uint64_t(p.dim()),
                 std::uint64_t(p.count()), checkpoint.seed, std::uint32_t(checkpoint.epoch));
    w.f64_array(p.params.data(), std::size_t(p.count()) * std::size_t(p.dim()));
    w.f64_array(p.log_weights.data(), std::size_t(p.count()));
    if (w.written() != total) throw IoError("checkpoint size accounting bug");
    w.commit();
}

Checkpoint load_checkpoint(const std::string& path) {
    Reader r(path);
    const Header h = read_header(r, kKindCheckpoint);
    Checkpoint checkpoint;
    checkpoint.model = h.model;
    checkpoint.seed = h.seed;
    checkpoint.epoch = int(h.epoch);
    checkpoint.particles = ParticleSet(Eigen::Index(h.count), Eigen::Index(h.dim));
    r.f64_array(checkpoint.particles.params.data(), std::size_t(h.count * h.dim));
    r.f64_array(checkpoint.particles.log_weights.data(), std::size_t(h.count));
    return checkpoint;
}

void save_samples(const SampleArchive& archive, const std::string& path) {
    const std::size_t n = std::size_t(archive.params.rows());
    const std::size_t d = std::size_t(archive.params.cols());
    if (std::size_t(archive.log_weights.size()) != n || archive.epochs.size() != n ||
        archive.particle_ids.size() != n)
        throw ShapeError("sample archive arrays disagree on the entry count");

    const std::size_t total = header_bytes(archive.model) + 8 * n * d + 8 * n + 4 * n + 4 * n;
    Writer w(path);
    write_header(w, kKindSamples, total, archive.model, d, n, archive.seed,
                 std::uint32_t(archive.total_epochs));
    w.f64_array(archive.params.data(), n * d);
    w.f64_array(archive.log_weights.data(), n);
    w.i32_array(archive.epochs);
    w.i32_array(archive.particle_ids);
    if (w.written() != total) throw IoError("sample archive size accounting bug");
    w.commit();
}

SampleArchive load_samples(const std::string& path) {
    Reader r(path);
    const Header h = read_header(r, kKindSamples);
    SampleArchive archive;
    archive.model = h.model;
    archive.seed = h.seed;
    archive.total_epochs = int(h.epoch);
    archive.params.resize(Eigen::Index(h.count), Eigen::Index(h.dim));
    archive.log_weights.resize(Eigen::Index(h.count));
    r.f64_array(archive.params.data(), std::size_t(h.count * h.dim));
    r.f64_array(archive.log_weights.data(), std::size_t(h.count));
    archive.epochs = r.i32_array(std::size_t(h.count));
    archive.particle_ids = r.i32_array(std::size_t(h.count));
    return archive;
}

SampleArchive make_archive(const ModelSpec& model, const SampleStore& store,
                           std::uint64_t seed, int total_epochs) {
    SampleArchive archive;
    archive.model = model;
    archive.params = store.params();
    archive.log_weights = store.log_weights();
    archive.epochs = store.epochs();
    archive.particle_ids = store.particle_ids();
    archive.seed = seed;
    archive.total_epochs = total_epochs;
    return archive;
}

namespace {

class CsvFile {
public:
    explicit CsvFile(const std::string& path) : path_(path), out_(path, std::ios::trunc) {
        if (!out_) throw IoError("cannot open " + path + " for writing");
    }
    void line(const std::string& text) { out_ << text << '\n'; }
    void close() {
        out_.flush();
        if (!out_) throw IoError("write to " + path_ + " failed");
    }

private:
    std::string path_;
    std::ofstream out_;
};

std::string fmt(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

}  // namespace

void write_diagnostics_csv(const std::vector<EpochDiagnostics>& rows,
                           const std::string& path) {
    CsvFile csv(path);
    csv.line(
        "epoch,ess,resampled,mean_loglik,mean_log_weight,max_log_weight,degenerate_updates,"
        "validation_loss,wall_seconds");
    for (const EpochDiagnostics& d : rows)
        csv.line(std::to_string(d.epoch) + "," + fmt(d.ess) + "," +
                 (d.resampled ? "1" : "0") + "," + fmt(d.mean_loglik) + "," +
                 fmt(d.mean_log_weight) + "," + fmt(d.max_log_weight) + "," +
                 std::to_string(d.degenerate_updates) + "," + fmt(d.validation_loss) + "," +
                 fmt(d.wall_seconds));
    csv.close();
}

void write_history_csv(const std::vector<TrainHistoryRow>& rows, const std::string& path) {
    CsvFile csv(path);
    csv.line("epoch,train_loss,val_loss,val_accuracy");
    for (const TrainHistoryRow& row : rows)
        csv.line(std::to_string(row.epoch) + "," + fmt(row.train_loss) + "," +
                 fmt(row.val_loss) + "," + fmt(row.val_accuracy));
    csv.close();
}

void write_metrics_csv(const std::vector<std::pair<std::string, double>>& rows,
                       const std::string& path) {
    CsvFile csv(path);
    csv.line("metric,value");
    for (const auto& [name, value] : rows) csv.line(name + "," + fmt(value));
    csv.close();
}

}  // namespace smcsghmc

#include "smcsghmc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <vector>

#include "smcsghmc/errors.hpp"
#include "smcsghmc/gmm.hpp"

namespace smcsghmc {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be_u32(std::istream& in, const std::string& path) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4))
        throw FormatError("truncated IDX header in " + path);
    return (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
           (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
}

void write_be_u32(std::ostream& out, std::uint32_t value) {
    unsigned char bytes[4] = {static_cast<unsigned char>(value >> 24),
                              static_cast<unsigned char>(value >> 16),
                              static_cast<unsigned char>(value >> 8),
                              static_cast<unsigned char>(value)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

Dataset take_rows(const Dataset& src, const std::vector<Eigen::Index>& order,
                  Eigen::Index begin, Eigen::Index count) {
    Dataset out;
    out.class_count = src.class_count;
    out.features.resize(count, src.dim());
    out.labels.resize(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        out.features.row(i) = src.features.row(order[begin + i]);
        out.labels[i] = src.labels[order[begin + i]];
    }
    return out;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw IoError("cannot open " + images_path);
    if (read_be_u32(img, images_path) != kImageMagic)
        throw FormatError("bad image magic in " + images_path);
    const std::uint32_t n = read_be_u32(img, images_path);
    const std::uint32_t rows = read_be_u32(img, images_path);
    const std::uint32_t cols = read_be_u32(img, images_path);
    const std::size_t pixel_count = std::size_t(n) * rows * cols;
    std::vector<unsigned char> pixels(pixel_count);
    if (!img.read(reinterpret_cast<char*>(pixels.data()),
                  static_cast<std::streamsize>(pixel_count)))
        throw FormatError("truncated image data in " + images_path);

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw IoError("cannot open " + labels_path);
    if (read_be_u32(lab, labels_path) != kLabelMagic)
        throw FormatError("bad label magic in " + labels_path);
    const std::uint32_t n_labels = read_be_u32(lab, labels_path);
    if (n_labels != n)
        throw FormatError("image/label count mismatch: " + std::to_string(n) + " vs " +
                          std::to_string(n_labels));
    std::vector<unsigned char> labels(n);
    if (!lab.read(reinterpret_cast<char*>(labels.data()), n))
        throw FormatError("truncated label data in " + labels_path);

    Dataset out;
    out.features.resize(n, Eigen::Index(rows) * cols);
    out.labels.resize(n);
    int max_label = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t p = 0; p < rows * cols; ++p)
            out.features(i, p) = pixels[std::size_t(i) * rows * cols + p] / 255.0;
        out.labels[i] = labels[i];
        max_label = std::max(max_label, int(labels[i]));
    }
    out.class_count = max_label + 1;
    return out;
}

void save_idx(const Dataset& dataset, const std::string& images_path,
              const std::string& labels_path, int rows, int cols) {
    if (Eigen::Index(rows) * cols != dataset.dim())
        throw ShapeError("save_idx: rows*cols does not match feature dimension");

    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw IoError("cannot write " + images_path);
    write_be_u32(img, kImageMagic);
    write_be_u32(img, std::uint32_t(dataset.n()));
    write_be_u32(img, std::uint32_t(rows));
    write_be_u32(img, std::uint32_t(cols));
    std::vector<unsigned char> pixels(std::size_t(dataset.n()) * dataset.dim());
    for (Eigen::Index i = 0; i < dataset.n(); ++i)
        for (Eigen::Index p = 0; p < dataset.dim(); ++p)
            pixels[std::size_t(i) * dataset.dim() + p] = static_cast<unsigned char>(
                std::lround(std::clamp(dataset.features(i, p), 0.0, 1.0) * 255.0));
    img.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));

    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw IoError("cannot write " + labels_path);
    write_be_u32(lab, kLabelMagic);
    write_be_u32(lab, std::uint32_t(dataset.n()));
    std::vector<unsigned char> labels(dataset.n());
    for (Eigen::Index i = 0; i < dataset.n(); ++i)
        labels[i] = static_cast<unsigned char>(dataset.labels[i]);
    lab.write(reinterpret_cast<const char*>(labels.data()),
              static_cast<std::streamsize>(labels.size()));
}

SplitResult split(const Dataset& dataset, Eigen::Index train_n, Eigen::Index val_n,
                  Eigen::Index test_n, std::uint64_t seed) {
    if (train_n + val_n + test_n > dataset.n())
        throw ConfigError("split: requested sizes exceed dataset size");
    std::vector<Eigen::Index> order(dataset.n());
    std::iota(order.begin(), order.end(), 0);
    RngStream rng(seed, 0);
    rng.shuffle(std::span<Eigen::Index>(order));

    SplitResult out;
    out.train = take_rows(dataset, order, 0, train_n);
    out.validation = take_rows(dataset, order, train_n, val_n);
    out.test = take_rows(dataset, order, train_n + val_n, test_n);
    return out;
}

Dataset make_two_moons(Eigen::Index n, double noise_sd, std::uint64_t seed) {
    if (n < 2) throw ConfigError("make_two_moons: n must be >= 2");
    const Eigen::Index n_outer = n / 2 + n % 2;
    const Eigen::Index n_inner = n / 2;

    Dataset out;
    out.class_count = 2;
    out.features.resize(n, 2);
    out.labels.resize(n);
    RngStream rng(seed, 0);

    for (Eigen::Index i = 0; i < n_outer; ++i) {
        const double t = std::numbers::pi * double(i) / double(std::max<Eigen::Index>(n_outer - 1, 1));
        out.features(i, 0) = std::cos(t) + noise_sd * rng.normal();
        out.features(i, 1) = std::sin(t) + noise_sd * rng.normal();
        out.labels[i] = 0;
    }
    for (Eigen::Index i = 0; i < n_inner; ++i) {
        const double t = std::numbers::pi * double(i) / double(std::max<Eigen::Index>(n_inner - 1, 1));
        out.features(n_outer + i, 0) = 1.0 - std::cos(t) + noise_sd * rng.normal();
        out.features(n_outer + i, 1) = 0.5 - std::sin(t) + noise_sd * rng.normal();
        out.labels[n_outer + i] = 1;
    }
    return out;
}

RowMajorMatrix make_grid_gmm_points(Eigen::Index n, std::uint64_t seed) {
    GmmTarget target;
    RngStream rng(seed, 0);
    RowMajorMatrix points(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) points.row(i) = target.sample(rng);
    return points;
}

namespace {

constexpr int kDigitSide = 28;

// Renders a soft stroke between two control points into a 28x28 canvas.
void draw_stroke(Eigen::VectorXd& canvas, double x0, double y0, double x1, double y1,
                 double width) {
    const int steps = 24;
    for (int s = 0; s <= steps; ++s) {
        const double t = double(s) / steps;
        const double cx = x0 + t * (x1 - x0);
        const double cy = y0 + t * (y1 - y0);
        const int lo_x = std::max(0, int(cx - 3 * width));
        const int hi_x = std::min(kDigitSide - 1, int(cx + 3 * width));
        const int lo_y = std::max(0, int(cy - 3 * width));
        const int hi_y = std::min(kDigitSide - 1, int(cy + 3 * width));
        for (int y = lo_y; y <= hi_y; ++y)
            for (int x = lo_x; x <= hi_x; ++x) {
                const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                const double v = std::exp(-0.5 * d2 / (width * width));
                double& pixel = canvas[y * kDigitSide + x];
                pixel = std::max(pixel, v);
            }
    }
}

// Class templates are fixed constants of the generator: they come from a
// hard-coded internal seed so that sets generated with different user seeds
// share the same class definitions. Classes 2k and 2k+1 share most of their
// strokes, which makes those pairs genuinely confusable.
std::vector<Eigen::VectorXd> digit_templates() {
    std::vector<Eigen::VectorXd> templates;
    templates.reserve(10);
    RngStream rng(0xD161757u, 0);
    for (int pair = 0; pair < 5; ++pair) {
        std::vector<std::pair<double, double>> shared(5);
        for (auto& p : shared) {
            p.first = 5.0 + 18.0 * rng.uniform();
            p.second = 5.0 + 18.0 * rng.uniform();
        }
        for (int member = 0; member < 2; ++member) {
            Eigen::VectorXd canvas = Eigen::VectorXd::Zero(kDigitSide * kDigitSide);
            for (std::size_t s = 0; s + 1 < shared.size(); ++s)
                draw_stroke(canvas, shared[s].first, shared[s].second,
                            shared[s + 1].first, shared[s + 1].second, 1.4);
            // Two strokes unique to the class distinguish it from its twin.
            for (int extra = 0; extra < 2; ++extra) {
                const double x0 = 5.0 + 18.0 * rng.uniform();
                const double y0 = 5.0 + 18.0 * rng.uniform();
                const double x1 = 5.0 + 18.0 * rng.uniform();
                const double y1 = 5.0 + 18.0 * rng.uniform();
                draw_stroke(canvas, x0, y0, x1, y1, 1.4);
            }
            templates.push_back(canvas);
        }
    }
    return templates;
}

}  // namespace

Dataset make_synthetic_digits(Eigen::Index n, std::uint64_t seed) {
    static const std::vector<Eigen::VectorXd> templates = digit_templates();

    Dataset out;
    out.class_count = 10;
    out.features.resize(n, kDigitSide * kDigitSide);
    out.labels.resize(n);
    RngStream rng(seed, 1);

    for (Eigen::Index i = 0; i < n; ++i) {
        const int label = int(rng.uniform_below(10));
        const Eigen::VectorXd& base = templates[label];
        const int dx = int(rng.uniform_below(5)) - 2;
        const int dy = int(rng.uniform_below(5)) - 2;
        const double gain = 0.75 + 0.5 * rng.uniform();

        for (int y = 0; y < kDigitSide; ++y)
            for (int x = 0; x < kDigitSide; ++x) {
                const int sx = x - dx;
                const int sy = y - dy;
                double v = 0.0;
                if (sx >= 0 && sx < kDigitSide && sy >= 0 && sy < kDigitSide)
                    v = gain * base[sy * kDigitSide + sx];
                v += 0.18 * rng.normal();
                out.features(i, y * kDigitSide + x) = std::clamp(v, 0.0, 1.0);
            }
        out.labels[i] = label;
    }
    return out;
}

}  // namespace smcsghmc

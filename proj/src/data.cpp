#include "wf/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace wf {

LabeledDataset make_labeled_dataset(DenseMatrix inputs, std::vector<std::uint8_t> labels,
                                    std::size_t num_classes, std::string name) {
    if (inputs.rows != labels.size()) {
        throw ShapeError("dataset '" + name + "': " + std::to_string(inputs.rows) +
                         " inputs vs " + std::to_string(labels.size()) + " labels");
    }
    for (std::uint8_t label : labels) {
        if (label >= num_classes) {
            throw LabelError("dataset '" + name + "': label " + std::to_string(label) +
                             " out of range for " + std::to_string(num_classes) + " classes");
        }
    }
    LabeledDataset ds;
    ds.inputs = std::move(inputs);
    ds.labels = std::move(labels);
    ds.num_classes = num_classes;
    ds.name = std::move(name);
    return ds;
}

namespace {

std::vector<unsigned char> read_all_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const unsigned char* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void write_be32(std::ofstream& out, std::uint32_t v) {
    const unsigned char bytes[4] = {
        static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

} // namespace

DenseMatrix load_idx_images(const std::string& path) {
    const auto bytes = read_all_bytes(path);
    if (bytes.size() < 4) {
        throw LengthError("'" + path + "': too short for an IDX magic");
    }
    const std::uint32_t magic = read_be32(bytes.data());
    if (magic != kIdxImageMagic) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "0x%08X", magic);
        throw FormatError("'" + path + "': magic " + buf + " is not an IDX image file");
    }
    if (bytes.size() < 16) {
        throw LengthError("'" + path + "': truncated IDX image header");
    }
    const std::size_t n = read_be32(bytes.data() + 4);
    const std::size_t rows = read_be32(bytes.data() + 8);
    const std::size_t cols = read_be32(bytes.data() + 12);
    const std::size_t expected = 16 + n * rows * cols;
    if (bytes.size() != expected) {
        throw LengthError("'" + path + "': payload is " + std::to_string(bytes.size() - 16) +
                          " bytes, header declares " + std::to_string(n * rows * cols));
    }
    if (n == 0 || rows == 0 || cols == 0) {
        throw FormatError("'" + path + "': zero-sized IDX image dimensions");
    }
    DenseMatrix out(n, rows * cols, 0.0);
    for (std::size_t i = 0; i < n * rows * cols; ++i) {
        out.data[i] = static_cast<double>(bytes[16 + i]) / 255.0;
    }
    return out;
}

std::vector<std::uint8_t> load_idx_labels(const std::string& path) {
    const auto bytes = read_all_bytes(path);
    if (bytes.size() < 4) {
        throw LengthError("'" + path + "': too short for an IDX magic");
    }
    const std::uint32_t magic = read_be32(bytes.data());
    if (magic != kIdxLabelMagic) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "0x%08X", magic);
        throw FormatError("'" + path + "': magic " + buf + " is not an IDX label file");
    }
    if (bytes.size() < 8) {
        throw LengthError("'" + path + "': truncated IDX label header");
    }
    const std::size_t n = read_be32(bytes.data() + 4);
    if (bytes.size() != 8 + n) {
        throw LengthError("'" + path + "': payload is " + std::to_string(bytes.size() - 8) +
                          " bytes, header declares " + std::to_string(n));
    }
    return {bytes.begin() + 8, bytes.end()};
}

void write_idx_images(const DenseMatrix& images, std::size_t img_rows, std::size_t img_cols,
                      const std::string& path) {
    if (images.cols != img_rows * img_cols) {
        throw ShapeError("write_idx_images: " + std::to_string(images.cols) +
                         " pixels per row, expected " + std::to_string(img_rows * img_cols));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path + "'");
    }
    write_be32(out, kIdxImageMagic);
    write_be32(out, static_cast<std::uint32_t>(images.rows));
    write_be32(out, static_cast<std::uint32_t>(img_rows));
    write_be32(out, static_cast<std::uint32_t>(img_cols));
    for (double v : images.data) {
        const long byte = std::lround(v * 255.0);
        if (byte < 0 || byte > 255) {
            throw ArgumentError("write_idx_images: value " + std::to_string(v) +
                                " is outside [0,1]");
        }
        out.put(static_cast<char>(static_cast<unsigned char>(byte)));
    }
}

void write_idx_labels(const std::vector<std::uint8_t>& labels, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path + "'");
    }
    write_be32(out, kIdxLabelMagic);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()),
              static_cast<std::streamsize>(labels.size()));
}

std::pair<LabeledDataset, LabeledDataset> split_train_validation(const LabeledDataset& ds,
                                                                 const SplitSpec& spec) {
    if (ds.size() == 0) {
        throw ArgumentError("split_train_validation: empty dataset");
    }
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw ArgumentError("split_train_validation: train_fraction must be in (0,1)");
    }
    Prng rng(spec.seed);
    const auto order = fisher_yates_permutation(rng, ds.size());
    const std::size_t n_train =
        static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(ds.size())));
    if (n_train == 0 || n_train == ds.size()) {
        throw ArgumentError("split_train_validation: split leaves an empty side");
    }

    auto take = [&](std::size_t begin, std::size_t count, const char* suffix) {
        DenseMatrix inputs(count, ds.dim(), 0.0);
        std::vector<std::uint8_t> labels(count);
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t src = order[begin + i];
            std::copy(ds.inputs.row_ptr(src), ds.inputs.row_ptr(src) + ds.dim(),
                      inputs.row_ptr(i));
            labels[i] = ds.labels[src];
        }
        return make_labeled_dataset(std::move(inputs), std::move(labels), ds.num_classes,
                                    ds.name + suffix);
    };
    return {take(0, n_train, "/train"), take(n_train, ds.size() - n_train, "/validation")};
}

PermutationTask make_permuted_task(const LabeledDataset& base, std::uint64_t task_seed) {
    PermutationTask task;
    task.base = &base;
    task.task_seed = task_seed;
    if (task_seed != kIdentityPermutationSeed) {
        Prng rng(task_seed);
        task.pixel_permutation = fisher_yates_permutation(rng, base.dim());
    }
    return task;
}

DenseMatrix assemble_batch(const LabeledDataset& base,
                           const std::vector<std::uint32_t>& pixel_permutation,
                           const std::uint32_t* indices, std::size_t count) {
    if (!pixel_permutation.empty() && pixel_permutation.size() != base.dim()) {
        throw ShapeError("assemble_batch: permutation length " +
                         std::to_string(pixel_permutation.size()) + " vs input dim " +
                         std::to_string(base.dim()));
    }
    DenseMatrix batch(count, base.dim(), 0.0);
    for (std::size_t i = 0; i < count; ++i) {
        const double* src = base.inputs.row_ptr(indices[i]);
        double* dst = batch.row_ptr(i);
        if (pixel_permutation.empty()) {
            std::copy(src, src + base.dim(), dst);
        } else {
            for (std::size_t j = 0; j < base.dim(); ++j) {
                dst[j] = src[pixel_permutation[j]];
            }
        }
    }
    return batch;
}

DenseMatrix apply_permutation(const DenseMatrix& inputs,
                              const std::vector<std::uint32_t>& pixel_permutation) {
    if (pixel_permutation.empty()) {
        return inputs;
    }
    if (pixel_permutation.size() != inputs.cols) {
        throw ShapeError("apply_permutation: permutation length " +
                         std::to_string(pixel_permutation.size()) + " vs input dim " +
                         std::to_string(inputs.cols));
    }
    DenseMatrix out(inputs.rows, inputs.cols, 0.0);
    for (std::size_t i = 0; i < inputs.rows; ++i) {
        const double* src = inputs.row_ptr(i);
        double* dst = out.row_ptr(i);
        for (std::size_t j = 0; j < inputs.cols; ++j) {
            dst[j] = src[pixel_permutation[j]];
        }
    }
    return out;
}

LabeledDataset synthetic_gaussians(std::size_t num_classes, std::size_t per_class,
                                   std::size_t dim, double noise_stddev, Prng& rng,
                                   std::string name) {
    if (num_classes == 0 || per_class == 0 || dim == 0) {
        throw ArgumentError("synthetic_gaussians: all counts must be positive");
    }
    if (noise_stddev < 0.0) {
        throw ArgumentError("synthetic_gaussians: noise must be >= 0");
    }
    std::vector<std::vector<double>> means(num_classes, std::vector<double>(dim));
    for (auto& mean : means) {
        for (double& v : mean) {
            v = rng.uniform(0.25, 0.75);
        }
    }
    DenseMatrix inputs(num_classes * per_class, dim, 0.0);
    std::vector<std::uint8_t> labels(num_classes * per_class);
    std::size_t row = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        for (std::size_t k = 0; k < per_class; ++k, ++row) {
            double* dst = inputs.row_ptr(row);
            for (std::size_t j = 0; j < dim; ++j) {
                double v = means[c][j];
                if (noise_stddev > 0.0) {
                    v += rng.normal(0.0, noise_stddev);
                }
                dst[j] = std::clamp(v, 0.0, 1.0);
            }
            labels[row] = static_cast<std::uint8_t>(c);
        }
    }
    return make_labeled_dataset(std::move(inputs), std::move(labels), num_classes,
                                std::move(name));
}

} // namespace wf

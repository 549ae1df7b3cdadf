#include "wf/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wf {

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& spec : specs) {
        n += spec.in_dim * spec.out_dim + spec.out_dim;
    }
    return n;
}

void validate_specs(const std::vector<LayerSpec>& specs) {
    if (specs.empty()) {
        throw SpecError("model needs at least one layer");
    }
    for (std::size_t k = 0; k < specs.size(); ++k) {
        if (specs[k].in_dim == 0 || specs[k].out_dim == 0) {
            throw SpecError("layer " + std::to_string(k) + " has a zero dimension");
        }
        if (k + 1 < specs.size()) {
            if (specs[k].activation == Activation::softmax_output) {
                throw SpecError("softmax_output is only allowed on the final layer");
            }
            if (specs[k].out_dim != specs[k + 1].in_dim) {
                throw SpecError("layer " + std::to_string(k) + " out_dim " +
                                std::to_string(specs[k].out_dim) + " does not chain into layer " +
                                std::to_string(k + 1) + " in_dim " +
                                std::to_string(specs[k + 1].in_dim));
            }
        }
    }
    if (specs.back().activation != Activation::softmax_output) {
        throw SpecError("final layer must be softmax_output");
    }
}

std::vector<LayerSpec> make_mlp_specs(std::size_t input_dim,
                                      const std::vector<std::size_t>& hidden,
                                      std::size_t num_classes) {
    std::vector<LayerSpec> specs;
    std::size_t prev = input_dim;
    for (std::size_t width : hidden) {
        specs.push_back({prev, width, Activation::relu});
        prev = width;
    }
    specs.push_back({prev, num_classes, Activation::softmax_output});
    return specs;
}

Mlp xavier_init(const std::vector<LayerSpec>& specs, Prng& rng) {
    validate_specs(specs);
    Mlp model;
    model.specs = specs;
    for (const auto& spec : specs) {
        const double bound = std::sqrt(6.0 / static_cast<double>(spec.in_dim + spec.out_dim));
        DenseMatrix w(spec.in_dim, spec.out_dim, 0.0);
        for (double& v : w.data) {
            v = rng.uniform(-bound, bound);
        }
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(spec.out_dim, 0.0);
    }
    return model;
}

namespace {

// batch (B x in) * W (in x out) + bias, with the bias broadcast over rows.
DenseMatrix affine(const DenseMatrix& batch, const DenseMatrix& w, const std::vector<double>& b) {
    DenseMatrix z = matmul(batch, w);
    for (std::size_t i = 0; i < z.rows; ++i) {
        double* row = z.row_ptr(i);
        for (std::size_t j = 0; j < z.cols; ++j) {
            row[j] += b[j];
        }
    }
    return z;
}

DenseMatrix relu(const DenseMatrix& z) {
    DenseMatrix a = z;
    for (double& v : a.data) {
        if (v < 0.0) v = 0.0;
    }
    return a;
}

} // namespace

std::pair<DenseMatrix, ForwardCache> forward(const Mlp& model, const DenseMatrix& batch) {
    if (batch.cols != model.input_dim()) {
        throw ShapeError("forward: batch dim " + std::to_string(batch.cols) +
                         " does not match model input dim " + std::to_string(model.input_dim()));
    }
    ForwardCache cache;
    cache.input = batch;
    cache.specs = model.specs;
    const DenseMatrix* current = &batch;
    for (std::size_t k = 0; k < model.num_layers(); ++k) {
        DenseMatrix z = affine(*current, model.weights[k], model.biases[k]);
        cache.pre_activations.push_back(z);
        if (model.specs[k].activation == Activation::relu) {
            cache.post_activations.push_back(relu(z));
        } else {
            cache.post_activations.push_back(std::move(z)); // logits pass through
        }
        current = &cache.post_activations.back();
    }
    return {cache.post_activations.back(), std::move(cache)};
}

DenseMatrix forward_logits(const Mlp& model, const DenseMatrix& batch) {
    if (batch.cols != model.input_dim()) {
        throw ShapeError("forward: batch dim " + std::to_string(batch.cols) +
                         " does not match model input dim " + std::to_string(model.input_dim()));
    }
    DenseMatrix current = batch;
    for (std::size_t k = 0; k < model.num_layers(); ++k) {
        DenseMatrix z = affine(current, model.weights[k], model.biases[k]);
        if (model.specs[k].activation == Activation::relu) {
            for (double& v : z.data) {
                if (v < 0.0) v = 0.0;
            }
        }
        current = std::move(z);
    }
    return current;
}

std::pair<double, DenseMatrix> softmax_cross_entropy(const DenseMatrix& logits,
                                                     const std::vector<std::uint8_t>& labels) {
    if (labels.size() != logits.rows) {
        throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(logits.rows) + " rows");
    }
    const std::size_t batch = logits.rows;
    const std::size_t classes = logits.cols;
    DenseMatrix dlogits(batch, classes, 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
        if (labels[i] >= classes) {
            throw LabelError("label " + std::to_string(labels[i]) + " out of range for " +
                             std::to_string(classes) + " classes");
        }
        const double* row = logits.row_ptr(i);
        double maxv = row[0];
        for (std::size_t j = 1; j < classes; ++j) {
            maxv = std::max(maxv, row[j]);
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < classes; ++j) {
            sum += std::exp(row[j] - maxv);
        }
        const double log_sum = maxv + std::log(sum);
        loss += log_sum - row[labels[i]];
        double* drow = dlogits.row_ptr(i);
        const double inv_batch = 1.0 / static_cast<double>(batch);
        for (std::size_t j = 0; j < classes; ++j) {
            drow[j] = std::exp(row[j] - maxv) / sum * inv_batch;
        }
        drow[labels[i]] -= inv_batch;
    }
    loss /= static_cast<double>(batch);
    if (!std::isfinite(loss)) {
        throw NumericError("softmax_cross_entropy produced a non-finite loss");
    }
    return {loss, std::move(dlogits)};
}

Gradients zero_gradients(const Mlp& model) {
    Gradients g;
    for (std::size_t k = 0; k < model.num_layers(); ++k) {
        g.weights.emplace_back(model.specs[k].in_dim, model.specs[k].out_dim, 0.0);
        g.biases.emplace_back(model.specs[k].out_dim, 0.0);
    }
    return g;
}

Gradients backward(const Mlp& model, const ForwardCache& cache, const DenseMatrix& dlogits) {
    if (cache.specs.size() != model.specs.size()) {
        throw CacheError("backward: cache built for a different model depth");
    }
    for (std::size_t k = 0; k < model.specs.size(); ++k) {
        if (cache.specs[k].in_dim != model.specs[k].in_dim ||
            cache.specs[k].out_dim != model.specs[k].out_dim) {
            throw CacheError("backward: cache layer " + std::to_string(k) +
                             " does not match the model");
        }
    }
    if (dlogits.rows != cache.input.rows || dlogits.cols != model.output_dim()) {
        throw CacheError("backward: dlogits shape " + dlogits.shape_string() +
                         " does not match cache batch");
    }

    Gradients grads = zero_gradients(model);
    DenseMatrix delta = dlogits;
    for (std::size_t k = model.num_layers(); k-- > 0;) {
        const DenseMatrix& layer_input = (k == 0) ? cache.input : cache.post_activations[k - 1];
        grads.weights[k] = matmul(transpose(layer_input), delta);
        auto& db = grads.biases[k];
        for (std::size_t i = 0; i < delta.rows; ++i) {
            const double* row = delta.row_ptr(i);
            for (std::size_t j = 0; j < delta.cols; ++j) {
                db[j] += row[j];
            }
        }
        if (k > 0) {
            DenseMatrix next = matmul(delta, transpose(model.weights[k]));
            const DenseMatrix& pre = cache.pre_activations[k - 1];
            for (std::size_t i = 0; i < next.data.size(); ++i) {
                if (pre.data[i] <= 0.0) next.data[i] = 0.0; // ReLU gate
            }
            delta = std::move(next);
        }
    }
    return grads;
}

double evaluate_accuracy(const Mlp& model, const DenseMatrix& inputs,
                         const std::vector<std::uint8_t>& labels) {
    if (labels.size() != inputs.rows) {
        throw ShapeError("evaluate_accuracy: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(inputs.rows) + " rows");
    }
    constexpr std::size_t kSlice = 512;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < inputs.rows; start += kSlice) {
        const std::size_t n = std::min(kSlice, inputs.rows - start);
        DenseMatrix slice(n, inputs.cols, 0.0);
        std::copy(inputs.row_ptr(start), inputs.row_ptr(start) + n * inputs.cols,
                  slice.data.begin());
        DenseMatrix logits = forward_logits(model, slice);
        for (std::size_t i = 0; i < n; ++i) {
            if (argmax_row(logits, i) == labels[start + i]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(inputs.rows);
}

} // namespace wf

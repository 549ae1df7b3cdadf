#ifndef WF_NN_HPP
#define WF_NN_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "wf/matrix.hpp"
#include "wf/rng.hpp"

namespace wf {

enum class Activation { relu, softmax_output };

struct LayerSpec {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    Activation activation = Activation::relu;
};

/// Feedforward MLP: ReLU hidden layers, linear final layer whose logits feed
/// the fused softmax-cross-entropy loss.
struct Mlp {
    std::vector<LayerSpec> specs;
    std::vector<DenseMatrix> weights;           // per layer, in_dim x out_dim
    std::vector<std::vector<double>> biases;    // per layer, out_dim

    std::size_t num_layers() const { return specs.size(); }
    std::size_t input_dim() const { return specs.front().in_dim; }
    std::size_t output_dim() const { return specs.back().out_dim; }
    std::size_t parameter_count() const;
};

/// Validates layer chaining and activation placement. Throws SpecError.
void validate_specs(const std::vector<LayerSpec>& specs);

/// Convenience: hidden widths + output classes -> spec list (ReLU hidden,
/// softmax_output on the final layer).
std::vector<LayerSpec> make_mlp_specs(std::size_t input_dim,
                                      const std::vector<std::size_t>& hidden,
                                      std::size_t num_classes);

/// Weights ~ Uniform(-sqrt(6/(fan_in+fan_out)), +sqrt(...)), biases zero.
Mlp xavier_init(const std::vector<LayerSpec>& specs, Prng& rng);

struct ForwardCache {
    DenseMatrix input;
    std::vector<DenseMatrix> pre_activations;   // per layer
    std::vector<DenseMatrix> post_activations;  // per layer (post[last] == logits)
    std::vector<LayerSpec> specs;               // stamp used by backward()
};

/// Returns pre-softmax logits plus the intermediates backward() needs.
std::pair<DenseMatrix, ForwardCache> forward(const Mlp& model, const DenseMatrix& batch);

/// Logits only, no cache (evaluation path).
DenseMatrix forward_logits(const Mlp& model, const DenseMatrix& batch);

/// Mean batch cross-entropy with log-sum-exp stabilization.
/// dlogits = (softmax - onehot) / batch_size.
std::pair<double, DenseMatrix> softmax_cross_entropy(const DenseMatrix& logits,
                                                     const std::vector<std::uint8_t>& labels);

struct Gradients {
    std::vector<DenseMatrix> weights;
    std::vector<std::vector<double>> biases;
};

Gradients zero_gradients(const Mlp& model);

/// Exact reverse-mode gradients. The cache must come from forward() on this
/// model and batch; a stale cache raises CacheError.
Gradients backward(const Mlp& model, const ForwardCache& cache, const DenseMatrix& dlogits);

/// Fraction of rows whose argmax logit equals the label. Evaluates in slices
/// so large test sets never materialize a huge cache.
double evaluate_accuracy(const Mlp& model, const DenseMatrix& inputs,
                         const std::vector<std::uint8_t>& labels);

} // namespace wf

#endif // WF_NN_HPP

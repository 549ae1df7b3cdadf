#ifndef WF_DATA_HPP
#define WF_DATA_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wf/matrix.hpp"
#include "wf/rng.hpp"

namespace wf {

struct LabeledDataset {
    DenseMatrix inputs;                 // num_examples x dim, values in [0,1]
    std::vector<std::uint8_t> labels;   // class indices
    std::size_t num_classes = 0;
    std::string name;

    std::size_t size() const { return inputs.rows; }
    std::size_t dim() const { return inputs.cols; }
};

/// Checks label range and row/label agreement; throws LabelError/ShapeError.
LabeledDataset make_labeled_dataset(DenseMatrix inputs, std::vector<std::uint8_t> labels,
                                    std::size_t num_classes, std::string name);

// ---------------------------------------------------------------------------
// IDX files (the distribution format of MNIST/Fashion-MNIST).
// Layout, bit-exact: 4-byte big-endian magic (0x00000803 images, 0x00000801
// labels), big-endian 4-byte dimension sizes, raw unsigned-byte payload.
// ---------------------------------------------------------------------------

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// n x (rows*cols) matrix with every byte divided by 255.
DenseMatrix load_idx_images(const std::string& path);

std::vector<std::uint8_t> load_idx_labels(const std::string& path);

/// Re-encoders used for fixtures and round-trip checks. Values must be k/255.
void write_idx_images(const DenseMatrix& images, std::size_t img_rows, std::size_t img_cols,
                      const std::string& path);
void write_idx_labels(const std::vector<std::uint8_t>& labels, const std::string& path);

// ---------------------------------------------------------------------------
// Splits and tasks
// ---------------------------------------------------------------------------

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
};

/// Seeded shuffle, then floor(train_fraction*n) examples to train and the
/// remainder to validation. Deterministic per seed.
std::pair<LabeledDataset, LabeledDataset> split_train_validation(const LabeledDataset& ds,
                                                                 const SplitSpec& spec);

/// Pixel-permutation task over a base dataset. Images are stored once; the
/// permutation is applied lazily at batch assembly.
struct PermutationTask {
    const LabeledDataset* base = nullptr;
    std::vector<std::uint32_t> pixel_permutation; // empty means identity
    std::uint64_t task_seed = 0;
};

/// Reserved task_seed for "task 0 is the unpermuted original".
constexpr std::uint64_t kIdentityPermutationSeed = 0;

PermutationTask make_permuted_task(const LabeledDataset& base, std::uint64_t task_seed);

/// Gathers `indices` rows of `base` into a batch, permuting pixels on read.
DenseMatrix assemble_batch(const LabeledDataset& base,
                           const std::vector<std::uint32_t>& pixel_permutation,
                           const std::uint32_t* indices, std::size_t count);

/// Applies a permutation to every row of a dataset (evaluation convenience).
DenseMatrix apply_permutation(const DenseMatrix& inputs,
                              const std::vector<std::uint32_t>& pixel_permutation);

// ---------------------------------------------------------------------------
// Synthetic data: fast stand-in for MNIST-scale experiments in tests/CI.
// ---------------------------------------------------------------------------

/// Per class, points around a distinct mean (drawn from rng in [0.25, 0.75])
/// with isotropic gaussian noise, clipped to [0,1]. Linearly separable for
/// small noise.
LabeledDataset synthetic_gaussians(std::size_t num_classes, std::size_t per_class,
                                   std::size_t dim, double noise_stddev, Prng& rng,
                                   std::string name = "synthetic");

} // namespace wf

#endif // WF_DATA_HPP

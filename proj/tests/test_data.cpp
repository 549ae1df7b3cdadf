#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <unistd.h>
#include <vector>

#include "wf/data.hpp"
#include "wf/nn.hpp"
#include "wf/optim.hpp"

using namespace wf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("wf_data_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void push_be32(std::vector<unsigned char>& bytes, std::uint32_t v) {
    bytes.push_back(static_cast<unsigned char>(v >> 24));
    bytes.push_back(static_cast<unsigned char>(v >> 16));
    bytes.push_back(static_cast<unsigned char>(v >> 8));
    bytes.push_back(static_cast<unsigned char>(v));
}

} // namespace

TEST_CASE("idx image fixture decodes to byte/255") {
    TempDir tmp;
    std::vector<unsigned char> bytes;
    push_be32(bytes, 0x00000803);
    push_be32(bytes, 1); // one image
    push_be32(bytes, 2);
    push_be32(bytes, 2);
    bytes.insert(bytes.end(), {0, 255, 128, 64});
    write_bytes(tmp.file("img.idx"), bytes);

    DenseMatrix m = load_idx_images(tmp.file("img.idx"));
    REQUIRE(m.rows == 1);
    REQUIRE(m.cols == 4);
    CHECK(m.data[0] == 0.0);
    CHECK(m.data[1] == 1.0);
    CHECK(m.data[2] == doctest::Approx(128.0 / 255.0).epsilon(1e-15));
    CHECK(m.data[3] == doctest::Approx(64.0 / 255.0).epsilon(1e-15));
}

TEST_CASE("idx loaders reject the wrong magic and truncation") {
    TempDir tmp;
    std::vector<unsigned char> labels_as_images;
    push_be32(labels_as_images, 0x00000801);
    push_be32(labels_as_images, 1);
    labels_as_images.push_back(3);
    write_bytes(tmp.file("labels.idx"), labels_as_images);
    CHECK_THROWS_AS(load_idx_images(tmp.file("labels.idx")), FormatError);

    std::vector<unsigned char> image_bytes;
    push_be32(image_bytes, 0x00000803);
    push_be32(image_bytes, 1);
    push_be32(image_bytes, 2);
    push_be32(image_bytes, 2);
    image_bytes.insert(image_bytes.end(), {9, 9, 9}); // one byte short
    write_bytes(tmp.file("short.idx"), image_bytes);
    CHECK_THROWS_AS(load_idx_images(tmp.file("short.idx")), LengthError);

    image_bytes.insert(image_bytes.end(), {9, 9}); // now one byte long
    write_bytes(tmp.file("long.idx"), image_bytes);
    CHECK_THROWS_AS(load_idx_images(tmp.file("long.idx")), LengthError);

    CHECK_THROWS_AS(load_idx_images(tmp.file("missing.idx")), DataError);
}

TEST_CASE("idx label fixtures") {
    TempDir tmp;
    std::vector<unsigned char> bytes;
    push_be32(bytes, 0x00000801);
    push_be32(bytes, 3);
    bytes.insert(bytes.end(), {7, 0, 9});
    write_bytes(tmp.file("l.idx"), bytes);
    CHECK(load_idx_labels(tmp.file("l.idx")) == std::vector<std::uint8_t>{7, 0, 9});

    std::vector<unsigned char> empty;
    push_be32(empty, 0x00000801);
    push_be32(empty, 0);
    write_bytes(tmp.file("empty.idx"), empty);
    CHECK(load_idx_labels(tmp.file("empty.idx")).empty());

    std::vector<unsigned char> truncated;
    push_be32(truncated, 0x00000801);
    push_be32(truncated, 5);
    truncated.insert(truncated.end(), {1, 2});
    write_bytes(tmp.file("trunc.idx"), truncated);
    CHECK_THROWS_AS(load_idx_labels(tmp.file("trunc.idx")), LengthError);

    std::vector<unsigned char> image_magic;
    push_be32(image_magic, 0x00000803);
    push_be32(image_magic, 0);
    write_bytes(tmp.file("img_magic.idx"), image_magic);
    CHECK_THROWS_AS(load_idx_labels(tmp.file("img_magic.idx")), FormatError);
}

TEST_CASE("idx round-trip re-encodes byte-identically") {
    TempDir tmp;
    Prng rng(1357);
    DenseMatrix images(7, 9, 0.0);
    for (double& v : images.data) {
        v = static_cast<double>(rng.below(256)) / 255.0;
    }
    std::vector<std::uint8_t> labels(7);
    for (auto& l : labels) l = static_cast<std::uint8_t>(rng.below(10));

    write_idx_images(images, 3, 3, tmp.file("a.idx"));
    write_idx_labels(labels, tmp.file("b.idx"));

    DenseMatrix loaded = load_idx_images(tmp.file("a.idx"));
    auto loaded_labels = load_idx_labels(tmp.file("b.idx"));
    write_idx_images(loaded, 3, 3, tmp.file("a2.idx"));
    write_idx_labels(loaded_labels, tmp.file("b2.idx"));

    CHECK(read_bytes(tmp.file("a.idx")) == read_bytes(tmp.file("a2.idx")));
    CHECK(read_bytes(tmp.file("b.idx")) == read_bytes(tmp.file("b2.idx")));
}

TEST_CASE("dataset assembly validates labels") {
    DenseMatrix inputs(2, 3, 0.5);
    CHECK_THROWS_AS(make_labeled_dataset(inputs, {1, 10}, 10, "bad"), LabelError);
    CHECK_THROWS_AS(make_labeled_dataset(inputs, {1}, 10, "bad"), ShapeError);
}

TEST_CASE("split_train_validation partitions deterministically") {
    Prng rng(2);
    LabeledDataset ds = synthetic_gaussians(2, 5, 4, 0.05, rng, "s");
    REQUIRE(ds.size() == 10);

    SplitSpec spec{0.8, 99};
    auto [train, validation] = split_train_validation(ds, spec);
    CHECK(train.size() == 8);
    CHECK(validation.size() == 2);

    // the union of rows is exactly the original multiset of rows
    std::map<std::vector<double>, int> seen;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        seen[std::vector<double>(ds.inputs.row_ptr(i), ds.inputs.row_ptr(i) + 4)] += 1;
    }
    for (const LabeledDataset* part : {&train, &validation}) {
        for (std::size_t i = 0; i < part->size(); ++i) {
            seen[std::vector<double>(part->inputs.row_ptr(i), part->inputs.row_ptr(i) + 4)] -= 1;
        }
    }
    for (const auto& [row, count] : seen) CHECK(count == 0);

    auto [train2, validation2] = split_train_validation(ds, spec);
    CHECK(train.inputs.data == train2.inputs.data);
    CHECK(validation.labels == validation2.labels);

    CHECK_THROWS_AS(split_train_validation(ds, SplitSpec{1.5, 0}), ArgumentError);
}

TEST_CASE("different split seeds assign differently on n=1000") {
    Prng rng(3);
    LabeledDataset ds = synthetic_gaussians(4, 250, 3, 0.05, rng, "big");
    auto [a_train, a_val] = split_train_validation(ds, SplitSpec{0.8, 1});
    auto [b_train, b_val] = split_train_validation(ds, SplitSpec{0.8, 2});
    (void)a_val;
    (void)b_val;
    CHECK(a_train.inputs.data != b_train.inputs.data);
}

TEST_CASE("permuted tasks: identity convention, round-trip, distinct seeds") {
    Prng rng(4);
    LabeledDataset base = synthetic_gaussians(3, 4, 784, 0.02, rng, "base");

    PermutationTask identity = make_permuted_task(base, kIdentityPermutationSeed);
    CHECK(identity.pixel_permutation.empty());
    std::uint32_t row0 = 0;
    DenseMatrix batch = assemble_batch(base, identity.pixel_permutation, &row0, 1);
    CHECK(std::vector<double>(batch.data) ==
          std::vector<double>(base.inputs.row_ptr(0), base.inputs.row_ptr(0) + 784));

    PermutationTask task = make_permuted_task(base, 17);
    REQUIRE(task.pixel_permutation.size() == 784);
    // applying the permutation then its inverse restores the image
    std::vector<std::uint32_t> inverse(784);
    for (std::uint32_t j = 0; j < 784; ++j) inverse[task.pixel_permutation[j]] = j;
    DenseMatrix permuted = apply_permutation(base.inputs, task.pixel_permutation);
    DenseMatrix restored = apply_permutation(permuted, inverse);
    CHECK(restored.data == base.inputs.data);

    // permuting preserves each image's multiset of pixel values
    std::vector<double> orig(base.inputs.row_ptr(1), base.inputs.row_ptr(1) + 784);
    std::vector<double> perm(permuted.row_ptr(1), permuted.row_ptr(1) + 784);
    std::sort(orig.begin(), orig.end());
    std::sort(perm.begin(), perm.end());
    CHECK(orig == perm);

    PermutationTask other = make_permuted_task(base, 18);
    CHECK(task.pixel_permutation != other.pixel_permutation);

    PermutationTask same = make_permuted_task(base, 17);
    CHECK(task.pixel_permutation == same.pixel_permutation);
}

TEST_CASE("synthetic gaussians: zero noise, histogram, separability") {
    Prng rng(5);
    LabeledDataset ds = synthetic_gaussians(2, 6, 2, 0.0, rng, "degenerate");
    for (std::size_t i = 1; i < 6; ++i) {
        CHECK(std::vector<double>(ds.inputs.row_ptr(i), ds.inputs.row_ptr(i) + 2) ==
              std::vector<double>(ds.inputs.row_ptr(0), ds.inputs.row_ptr(0) + 2));
    }

    Prng rng2(6);
    LabeledDataset big = synthetic_gaussians(5, 40, 3, 0.04, rng2, "hist");
    std::vector<int> histogram(5, 0);
    for (auto l : big.labels) histogram[l] += 1;
    for (int count : histogram) CHECK(count == 40);
    for (double v : big.inputs.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }

    // a linear softmax classifier reaches 100% train accuracy on two
    // low-noise classes
    Prng rng3(7);
    LabeledDataset two = synthetic_gaussians(2, 50, 2, 0.01, rng3, "sep");
    Prng init(8);
    Mlp model = xavier_init(make_mlp_specs(2, {}, 2), init);
    OptimizerConfig cfg;
    cfg.method = OptimMethod::adam;
    cfg.learning_rate = 0.05;
    AdamState state = make_adam_state(model);
    for (int step = 0; step < 400; ++step) {
        auto [logits, cache] = forward(model, two.inputs);
        auto [loss, dlogits] = softmax_cross_entropy(logits, two.labels);
        (void)loss;
        Gradients grads = backward(model, cache, dlogits);
        adam_step(model, grads, state, cfg);
    }
    CHECK(evaluate_accuracy(model, two.inputs, two.labels) == doctest::Approx(1.0));

    CHECK_THROWS_AS(synthetic_gaussians(0, 1, 1, 0.1, rng3), ArgumentError);
    CHECK_THROWS_AS(synthetic_gaussians(2, 1, 1, -0.1, rng3), ArgumentError);
}

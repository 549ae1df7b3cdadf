#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "wf/checkpoint.hpp"
#include "wf/data.hpp"

using namespace wf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("wf_ckpt_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("checkpoint round-trip reproduces bit-identical evaluation") {
    TempDir tmp;
    Prng rng(321);
    Mlp model = xavier_init(make_mlp_specs(9, {7, 5}, 4), rng);
    // a few optimizer-free nudges so parameters are not pristine init values
    model.weights[1].data[3] = 0x1.fedcba987654p-3;
    model.biases[0][2] = -0x1.23456789abcdp-7;

    CheckpointMeta meta;
    meta.prng_seed = 321;
    save_checkpoint(model, meta, tmp.file("m.ckpt"));
    auto [loaded, loaded_meta] = load_checkpoint(tmp.file("m.ckpt"));

    CHECK(loaded_meta.prng_seed == 321);
    CHECK(loaded_meta.prng_algorithm == Prng::kAlgorithmId);
    REQUIRE(loaded.num_layers() == model.num_layers());
    for (std::size_t k = 0; k < model.num_layers(); ++k) {
        CHECK(loaded.weights[k].data == model.weights[k].data);
        CHECK(loaded.biases[k] == model.biases[k]);
    }

    Prng data_rng(5);
    DenseMatrix batch(6, 9, 0.0);
    for (double& v : batch.data) v = data_rng.uniform(0.0, 1.0);
    CHECK(forward_logits(model, batch).data == forward_logits(loaded, batch).data);
}

TEST_CASE("checkpoint loader rejects damaged files") {
    TempDir tmp;
    {
        std::ofstream out(tmp.file("bad.ckpt"));
        out << "not a checkpoint\n";
    }
    CHECK_THROWS_AS(load_checkpoint(tmp.file("bad.ckpt")), FormatError);

    Prng rng(2);
    Mlp model = xavier_init(make_mlp_specs(3, {2}, 2), rng);
    save_checkpoint(model, CheckpointMeta{}, tmp.file("ok.ckpt"));
    // drop the tail: parameters go missing
    std::ifstream in(tmp.file("ok.ckpt"));
    std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    {
        std::ofstream out(tmp.file("trunc.ckpt"));
        out << contents.substr(0, contents.size() / 2);
    }
    CHECK_THROWS(load_checkpoint(tmp.file("trunc.ckpt")));

    CHECK_THROWS_AS(load_checkpoint(tmp.file("absent.ckpt")), DataError);
}

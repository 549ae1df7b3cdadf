#include "wf/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace wf {

namespace {

constexpr const char* kHeader = "wf-checkpoint v1";

std::string activation_tag(Activation a) {
    return a == Activation::relu ? "relu" : "softmax_output";
}

Activation parse_activation(const std::string& tag) {
    if (tag == "relu") return Activation::relu;
    if (tag == "softmax_output") return Activation::softmax_output;
    throw FormatError("checkpoint: unknown activation tag '" + tag + "'");
}

std::string hex_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

} // namespace

void save_checkpoint(const Mlp& model, const CheckpointMeta& meta, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write checkpoint '" + path + "'");
    }
    out << kHeader << "\n";
    out << "prng_algorithm " << meta.prng_algorithm << "\n";
    out << "prng_seed " << meta.prng_seed << "\n";
    out << "layers " << model.num_layers() << "\n";
    for (std::size_t k = 0; k < model.num_layers(); ++k) {
        out << "layer " << k << " " << model.specs[k].in_dim << " " << model.specs[k].out_dim
            << " " << activation_tag(model.specs[k].activation) << "\n";
    }
    for (std::size_t k = 0; k < model.num_layers(); ++k) {
        out << "weights " << k << "\n";
        const auto& w = model.weights[k];
        for (std::size_t i = 0; i < w.rows; ++i) {
            const double* row = w.row_ptr(i);
            for (std::size_t j = 0; j < w.cols; ++j) {
                out << (j ? " " : "") << hex_double(row[j]);
            }
            out << "\n";
        }
        out << "biases " << k << "\n";
        const auto& b = model.biases[k];
        for (std::size_t j = 0; j < b.size(); ++j) {
            out << (j ? " " : "") << hex_double(b[j]);
        }
        out << "\n";
    }
    if (!out) {
        throw DataError("checkpoint write to '" + path + "' failed");
    }
}

std::pair<Mlp, CheckpointMeta> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open checkpoint '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line) || line != kHeader) {
        throw FormatError("checkpoint '" + path + "': bad or missing header");
    }

    CheckpointMeta meta;
    std::string key;
    in >> key >> meta.prng_algorithm;
    if (key != "prng_algorithm") throw FormatError("checkpoint: expected prng_algorithm");
    in >> key >> meta.prng_seed;
    if (key != "prng_seed") throw FormatError("checkpoint: expected prng_seed");

    std::size_t layers = 0;
    in >> key >> layers;
    if (key != "layers" || layers == 0) throw FormatError("checkpoint: expected layer count");

    Mlp model;
    for (std::size_t k = 0; k < layers; ++k) {
        std::size_t idx = 0, in_dim = 0, out_dim = 0;
        std::string act;
        in >> key >> idx >> in_dim >> out_dim >> act;
        if (key != "layer" || idx != k) throw FormatError("checkpoint: malformed layer line");
        model.specs.push_back({in_dim, out_dim, parse_activation(act)});
    }
    validate_specs(model.specs);

    auto read_value = [&](double& v) {
        std::string token;
        if (!(in >> token)) throw LengthError("checkpoint '" + path + "': truncated parameters");
        v = std::strtod(token.c_str(), nullptr); // hexfloat round-trips exactly
    };
    for (std::size_t k = 0; k < layers; ++k) {
        std::size_t idx = 0;
        in >> key >> idx;
        if (key != "weights" || idx != k) throw FormatError("checkpoint: expected weights block");
        DenseMatrix w(model.specs[k].in_dim, model.specs[k].out_dim, 0.0);
        for (double& v : w.data) read_value(v);
        model.weights.push_back(std::move(w));

        in >> key >> idx;
        if (key != "biases" || idx != k) throw FormatError("checkpoint: expected biases block");
        std::vector<double> b(model.specs[k].out_dim, 0.0);
        for (double& v : b) read_value(v);
        model.biases.push_back(std::move(b));
    }
    return {std::move(model), std::move(meta)};
}

} // namespace wf

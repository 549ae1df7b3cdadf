#include "wf/optim.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace wf {

double friction_factor(const FrictionFunction& f, double w) {
    if (!std::isfinite(w)) {
        throw ArgumentError("friction_factor: weight is not finite");
    }
    double g = 1.0;
    switch (f.kind) {
    case FrictionKind::identity:
        return 1.0;
    case FrictionKind::logistic_bell: {
        // 4 e^{mu w}/(1+e^{mu w})^2 is even in w; evaluating at -|mu w| keeps
        // the exponential in [0,1] so nothing overflows.
        const double x = std::fabs(f.mu * w);
        const double e = std::exp(-x);
        const double denom = 1.0 + e;
        g = 4.0 * e / (denom * denom);
        break;
    }
    case FrictionKind::gaussian_bell:
        g = std::exp(-f.mu * w * w);
        break;
    }
    // exp underflows to 0 far in the tail; the clamp must sit below every
    // representable positive value exp can return, or monotonicity breaks
    if (g <= 0.0) g = std::numeric_limits<double>::denorm_min();
    return g;
}

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ArgumentError("learning_rate must be positive");
    }
    if (method == OptimMethod::weight_friction) {
        if (friction.mu < 0.0 || !std::isfinite(friction.mu)) {
            throw ArgumentError("friction mu must be >= 0");
        }
    }
    if (mu_schedule) {
        for (double m : *mu_schedule) {
            if (m < 0.0 || !std::isfinite(m)) {
                throw ArgumentError("mu_schedule multipliers must be >= 0");
            }
        }
    }
}

AdamState make_adam_state(const Mlp& model) {
    AdamState state;
    for (std::size_t k = 0; k < model.num_layers(); ++k) {
        state.m_weights.emplace_back(model.specs[k].in_dim, model.specs[k].out_dim, 0.0);
        state.v_weights.emplace_back(model.specs[k].in_dim, model.specs[k].out_dim, 0.0);
        state.m_biases.emplace_back(model.specs[k].out_dim, 0.0);
        state.v_biases.emplace_back(model.specs[k].out_dim, 0.0);
    }
    return state;
}

namespace {

void check_congruent(const Mlp& model, const Gradients& grads) {
    if (grads.weights.size() != model.num_layers() || grads.biases.size() != model.num_layers()) {
        throw ShapeError("optimizer step: gradient layer count does not match model");
    }
    for (std::size_t k = 0; k < model.num_layers(); ++k) {
        if (!grads.weights[k].same_shape(model.weights[k]) ||
            grads.biases[k].size() != model.biases[k].size()) {
            throw ShapeError("optimizer step: gradient shapes do not match model at layer " +
                             std::to_string(k));
        }
        ensure_finite(grads.weights[k], "optimizer step gradient");
        ensure_finite(grads.biases[k], "optimizer step gradient");
    }
}

} // namespace

void wf_step(Mlp& model, const Gradients& grads, const OptimizerConfig& cfg) {
    if (cfg.method != OptimMethod::weight_friction) {
        throw ArgumentError("wf_step requires method == weight_friction");
    }
    check_congruent(model, grads);
    const double alpha = cfg.learning_rate;
    const FrictionFunction& f = cfg.friction;
    for (std::size_t k = 0; k < model.num_layers(); ++k) {
        double* w = model.weights[k].data.data();
        const double* gw = grads.weights[k].data.data();
        const std::size_t n = model.weights[k].data.size();
        for (std::size_t i = 0; i < n; ++i) {
            w[i] -= alpha * friction_factor(f, w[i]) * gw[i];
        }
        auto& b = model.biases[k];
        const auto& gb = grads.biases[k];
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double g = cfg.apply_friction_to_biases ? friction_factor(f, b[j]) : 1.0;
            b[j] -= alpha * g * gb[j];
        }
    }
}

void sgd_step(Mlp& model, const Gradients& grads, const OptimizerConfig& cfg) {
    if (cfg.method != OptimMethod::sgd) {
        throw ArgumentError("sgd_step requires method == sgd");
    }
    check_congruent(model, grads);
    const double alpha = cfg.learning_rate;
    for (std::size_t k = 0; k < model.num_layers(); ++k) {
        double* w = model.weights[k].data.data();
        const double* gw = grads.weights[k].data.data();
        const std::size_t n = model.weights[k].data.size();
        for (std::size_t i = 0; i < n; ++i) {
            w[i] -= alpha * 1.0 * gw[i]; // same expression shape as wf_step with g == 1
        }
        auto& b = model.biases[k];
        const auto& gb = grads.biases[k];
        for (std::size_t j = 0; j < b.size(); ++j) {
            b[j] -= alpha * 1.0 * gb[j];
        }
    }
}

void adam_step(Mlp& model, const Gradients& grads, AdamState& state, const OptimizerConfig& cfg) {
    if (cfg.method != OptimMethod::adam) {
        throw ArgumentError("adam_step requires method == adam");
    }
    check_congruent(model, grads);
    state.step += 1;
    const double b1 = cfg.adam_beta1;
    const double b2 = cfg.adam_beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    const double alpha = cfg.learning_rate;
    const double eps = cfg.adam_epsilon;

    auto update = [&](double* w, const double* g, double* m, double* v, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double mhat = m[i] / corr1;
            const double vhat = v[i] / corr2;
            w[i] -= alpha * mhat / (std::sqrt(vhat) + eps);
        }
    };

    for (std::size_t k = 0; k < model.num_layers(); ++k) {
        update(model.weights[k].data.data(), grads.weights[k].data.data(),
               state.m_weights[k].data.data(), state.v_weights[k].data.data(),
               model.weights[k].data.size());
        update(model.biases[k].data(), grads.biases[k].data(),
               state.m_biases[k].data(), state.v_biases[k].data(),
               model.biases[k].size());
    }
}

FrictionFunction apply_mu_schedule(const OptimizerConfig& cfg, std::size_t epoch) {
    FrictionFunction f = cfg.friction;
    if (!cfg.mu_schedule) {
        return f;
    }
    if (epoch >= cfg.mu_schedule->size()) {
        throw ArgumentError("mu_schedule has no entry for epoch " + std::to_string(epoch));
    }
    f.mu *= (*cfg.mu_schedule)[epoch];
    return f;
}

} // namespace wf

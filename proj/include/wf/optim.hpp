#ifndef WF_OPTIM_HPP
#define WF_OPTIM_HPP

#include <optional>
#include <vector>

#include "wf/nn.hpp"

namespace wf {

enum class FrictionKind { logistic_bell, gaussian_bell, identity };

/// Even, unimodal gradient-scaling factor: g(0)=1, 0 < g <= 1, non-increasing
/// in |w|. mu sets the magnitude at which a weight counts as "large".
struct FrictionFunction {
    FrictionKind kind = FrictionKind::logistic_bell;
    double mu = 1.0;
};

/// g evaluated at a single weight. logistic_bell uses the overflow-safe form
/// 4 e^{-|mu w|} / (1 + e^{-|mu w|})^2; the result is clamped away from zero
/// so it stays inside (0, 1] even when exp underflows.
double friction_factor(const FrictionFunction& f, double w);

enum class OptimMethod { sgd, adam, weight_friction };

struct OptimizerConfig {
    OptimMethod method = OptimMethod::sgd;
    double learning_rate = 0.01;
    FrictionFunction friction;                       // weight_friction only
    bool apply_friction_to_biases = false;
    std::optional<std::vector<double>> mu_schedule;  // per-epoch multiplier on mu
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;

    void validate() const; // throws ArgumentError on bad fields
};

struct AdamState {
    std::vector<DenseMatrix> m_weights, v_weights;
    std::vector<std::vector<double>> m_biases, v_biases;
    std::uint64_t step = 0;
};

AdamState make_adam_state(const Mlp& model);

/// w <- w - alpha * g(w) * grad, with g evaluated elementwise at the
/// pre-update weight. Biases use g(b) only when apply_friction_to_biases.
void wf_step(Mlp& model, const Gradients& grads, const OptimizerConfig& cfg);

/// Plain w <- w - alpha * grad.
void sgd_step(Mlp& model, const Gradients& grads, const OptimizerConfig& cfg);

/// Standard Adam with bias-corrected moments.
void adam_step(Mlp& model, const Gradients& grads, AdamState& state, const OptimizerConfig& cfg);

/// Friction with mu scaled by the schedule entry for this epoch; no schedule
/// means the multiplier is 1. A schedule that exists but lacks the epoch is
/// an ArgumentError (configs are validated against epoch budgets upfront).
FrictionFunction apply_mu_schedule(const OptimizerConfig& cfg, std::size_t epoch);

} // namespace wf

#endif // WF_OPTIM_HPP

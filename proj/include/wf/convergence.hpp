#ifndef WF_CONVERGENCE_HPP
#define WF_CONVERGENCE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "wf/matrix.hpp"
#include "wf/optim.hpp"
#include "wf/rng.hpp"

namespace wf {

// Empirical lab for the convergence claims: descent per step, bounded regret,
// and the mu=0 reduction to plain gradient descent, on convex problems whose
// optimum and gradient-Lipschitz constant are known.

enum class ConvexKind { quadratic, logistic };

struct ConvexProblem {
    ConvexKind kind = ConvexKind::quadratic;
    std::string name;
    std::size_t dim = 0;

    // quadratic: loss = 0.5 (w - w*)' A (w - w*)
    DenseMatrix quad_a;

    // logistic: mean over rows of log(1+e^{x'w}) - y x'w
    DenseMatrix logit_x;
    std::vector<double> logit_y;

    std::vector<double> w_star;   // quadratic: exact; logistic: Newton-solved
    double optimum_value = 0.0;
    double lipschitz = 0.0;       // quadratic: lambda_max(A); logistic: lambda_max(X'X)/(4n)

    double loss(const std::vector<double>& w) const;
    std::vector<double> gradient(const std::vector<double>& w) const;
};

/// Quadratic with eigenvalues `eigenvalues` under a seeded random rotation.
ConvexProblem make_quadratic_problem(std::string name, const std::vector<double>& eigenvalues,
                                     const std::vector<double>& w_star, std::uint64_t rotation_seed);

/// Non-separable logistic regression on seeded synthetic rows; the optimum is
/// solved with damped Newton to gradient norm below 1e-10.
ConvexProblem make_logistic_problem(std::string name, std::size_t dim, std::size_t num_rows,
                                    std::uint64_t seed);

/// How g is applied along the trace: per coordinate (the update rule as run
/// everywhere else) or one shared factor evaluated at the mean |w|.
enum class GMode { elementwise, scalar_mean_abs };

struct RegretTrace {
    std::vector<double> losses;      // L(w_t) for t = 1..T+1 (last = final iterate)
    std::vector<double> regret;      // prefix sums over t = 1..T
    std::vector<double> g_min_step;  // min elementwise g applied at step t
    double optimum_value = 0.0;
    std::vector<double> w_start;
    std::vector<double> w_final;
    std::size_t steps_taken = 0;

    double final_gap() const { return losses.back() - optimum_value; }
};

struct ConvexRunConfig {
    double alpha = 0.0;
    FrictionFunction friction;
    std::size_t max_steps = 1;
    GMode g_mode = GMode::elementwise;
    /// Stop once the gap drops below this (0 disables early stop).
    double stop_gap = 0.0;
    /// Permits alpha outside (0, 1/L] for exploratory runs.
    bool force_hypothesis_violation = false;
};

/// Iterates w <- w - alpha * g(w) (.) grad L(w), recording the full trace.
/// Rejects alpha outside (0, 1/L] unless forced.
RegretTrace run_wf_convex(const ConvexProblem& problem, const ConvexRunConfig& cfg,
                          const std::vector<double>& w_start);

struct DescentReport {
    bool ok = true;
    std::size_t first_violation = 0; // index t where L(w_{t+1}) > L(w_t) + tol
};

DescentReport check_descent(const RegretTrace& trace, double tolerance = 1e-12);

struct RegretBoundReport {
    bool holds_for_all_t = true;
    bool bound_unbounded = false;    // g_min underflowed to zero
    std::size_t first_violation = 0;
    double final_regret = 0.0;
    double final_bound = 0.0;
    double min_margin = 0.0;         // min over T of bound(T) - R(T)
};

/// Checks R(T) <= ||w1-w*||^2 / (2 alpha g_min(T)) for every logged T, where
/// g_min(T) is the smallest elementwise g observed through step T.
RegretBoundReport check_regret_bound(const RegretTrace& trace, double alpha,
                                     const std::vector<double>& w_start,
                                     const std::vector<double>& w_star);

struct PairedTraces {
    RegretTrace wf;
    RegretTrace sgd;
    double regret_ratio = 0.0;       // R_wf(T) / R_sgd(T)
    bool movement_dominated = true;  // |wf step| <= |sgd step| along the wf trace
};

PairedTraces compare_to_sgd(const ConvexProblem& problem, const ConvexRunConfig& cfg,
                            const std::vector<double>& w_start);

/// The fixed suite (dims 1, 2, 10; quadratic and logistic; pinned seeds).
struct SuiteEntry {
    ConvexProblem problem;
    std::vector<double> w_start;
    std::size_t max_steps = 0;
};

std::vector<SuiteEntry> convergence_suite();

} // namespace wf

#endif // WF_CONVERGENCE_HPP

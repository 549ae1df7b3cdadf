#include <doctest.h>

#include <cmath>
#include <vector>

#include "wf/convergence.hpp"

using namespace wf;

namespace {

ConvexRunConfig theorem_config(const ConvexProblem& p, double mu, std::size_t steps,
                               double stop_gap = 0.0) {
    ConvexRunConfig cfg;
    cfg.alpha = 1.0 / p.lipschitz;
    cfg.friction = {FrictionKind::logistic_bell, mu};
    cfg.max_steps = steps;
    cfg.stop_gap = stop_gap;
    return cfg;
}

} // namespace

TEST_CASE("starting at the optimum accumulates zero regret") {
    ConvexProblem p = make_quadratic_problem("q", {1.0, 3.0}, {0.25, -0.5}, 3);
    ConvexRunConfig cfg = theorem_config(p, 1.0, 50);
    RegretTrace trace = run_wf_convex(p, cfg, p.w_star);
    for (double r : trace.regret) CHECK(r == 0.0);
    CHECK(trace.final_gap() == 0.0);
}

TEST_CASE("1-D quadratic with alpha = 1/L solves in one identity-friction step") {
    ConvexProblem p = make_quadratic_problem("q1", {1.0}, {0.0}, 2);
    ConvexRunConfig cfg;
    cfg.alpha = 1.0;
    cfg.friction = {FrictionKind::identity, 0.0};
    cfg.max_steps = 3;
    RegretTrace trace = run_wf_convex(p, cfg, {1.0});
    CHECK(trace.losses[0] == 0.5);
    CHECK(trace.losses[1] == 0.0); // w2 = 1 - 1*1*1 = 0 exactly
}

TEST_CASE("hand-iterated friction step on the 1-D quadratic") {
    ConvexProblem p = make_quadratic_problem("q1", {1.0}, {0.0}, 2);
    ConvexRunConfig cfg;
    cfg.alpha = 0.5;
    cfg.friction = {FrictionKind::logistic_bell, 1.0};
    cfg.max_steps = 1;
    RegretTrace trace = run_wf_convex(p, cfg, {2.0});
    // w2 = 2 - 0.5 * g(2) * 2 with g(2) = 0.419974341614026...
    CHECK(trace.w_final[0] == doctest::Approx(1.5800256583859739).epsilon(1e-12));
}

TEST_CASE("alpha outside (0, 1/L] is refused unless forced") {
    ConvexProblem p = make_quadratic_problem("q", {2.0}, {0.0}, 2);
    ConvexRunConfig cfg;
    cfg.alpha = 0.6; // 1/L = 0.5
    cfg.friction = {FrictionKind::identity, 0.0};
    cfg.max_steps = 5;
    CHECK_THROWS_AS(run_wf_convex(p, cfg, {1.0}), ArgumentError);
    cfg.force_hypothesis_violation = true;
    CHECK_NOTHROW(run_wf_convex(p, cfg, {1.0}));
    cfg.alpha = -0.1;
    CHECK_THROWS_AS(run_wf_convex(p, cfg, {1.0}), ArgumentError);
}

TEST_CASE("descent detector flags an artificial increase at the right index") {
    ConvexProblem p = make_quadratic_problem("q", {1.0, 2.0}, {0.0, 0.0}, 5);
    ConvexRunConfig cfg = theorem_config(p, 1.0, 30);
    RegretTrace trace = run_wf_convex(p, cfg, {1.0, -1.0});
    CHECK(check_descent(trace).ok);

    RegretTrace tampered = trace;
    tampered.losses[10] = tampered.losses[9] + 1.0;
    DescentReport report = check_descent(tampered);
    CHECK_FALSE(report.ok);
    CHECK(report.first_violation == 10);
}

TEST_CASE("logistic descent holds for 10000 steps at alpha = 1/L") {
    ConvexProblem p = make_logistic_problem("lg", 2, 40, 11);
    ConvexRunConfig cfg = theorem_config(p, 1.0, 10000);
    RegretTrace trace = run_wf_convex(p, cfg, {0.0, 0.0});
    CHECK(check_descent(trace).ok);
}

TEST_CASE("identity-friction regret bound across alphas and dimensions") {
    for (std::size_t dim : {std::size_t{1}, std::size_t{10}}) {
        std::vector<double> eigs(dim), w_star(dim), w_start(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            eigs[i] = 0.5 + static_cast<double>(i) * 0.45;
            w_star[i] = (i % 2 == 0) ? 0.3 : -0.2;
            w_start[i] = w_star[i] + ((i % 2 == 0) ? 0.8 : -0.6);
        }
        ConvexProblem p = make_quadratic_problem("sweep", eigs, w_star, 21);
        for (double alpha : {0.1, 0.5, 1.0 / p.lipschitz}) {
            if (alpha > 1.0 / p.lipschitz) continue;
            ConvexRunConfig cfg;
            cfg.alpha = alpha;
            cfg.friction = {FrictionKind::identity, 0.0};
            cfg.max_steps = 5000;
            RegretTrace trace = run_wf_convex(p, cfg, w_start);
            RegretBoundReport report = check_regret_bound(trace, alpha, w_start, p.w_star);
            CHECK(report.holds_for_all_t);
        }
    }
}

TEST_CASE("bound degenerates gracefully when the start equals the optimum") {
    ConvexProblem p = make_quadratic_problem("q", {1.0}, {0.4}, 9);
    ConvexRunConfig cfg = theorem_config(p, 1.0, 10);
    RegretTrace trace = run_wf_convex(p, cfg, p.w_star);
    RegretBoundReport report = check_regret_bound(trace, cfg.alpha, p.w_star, p.w_star);
    CHECK(report.holds_for_all_t);
    CHECK(report.final_bound == 0.0);
    CHECK(report.final_regret == 0.0);
}

TEST_CASE("doubling the start distance quadruples the bound") {
    ConvexProblem p = make_quadratic_problem("q", {1.0}, {0.0}, 2);
    ConvexRunConfig cfg = theorem_config(p, 1.0, 20);
    RegretTrace t1 = run_wf_convex(p, cfg, {0.5});
    RegretTrace t2 = run_wf_convex(p, cfg, {1.0});
    RegretBoundReport r1 = check_regret_bound(t1, cfg.alpha, {0.5}, p.w_star);
    RegretBoundReport r2 = check_regret_bound(t2, cfg.alpha, {1.0}, p.w_star);
    // same g_min path shape, distance-squared scaling: compare pure formula
    const double b1 = 0.25 / (2.0 * cfg.alpha);
    const double b2 = 1.0 / (2.0 * cfg.alpha);
    CHECK(b2 == doctest::Approx(4.0 * b1));
    CHECK(r1.final_bound >= b1); // g_min <= 1 only enlarges the reported bound
    CHECK(r2.final_bound >= b2);
}

TEST_CASE("mu=0 comparison runs bit-identically to sgd") {
    ConvexProblem p = make_quadratic_problem("q", {1.0, 2.5}, {0.2, -0.3}, 13);
    ConvexRunConfig cfg = theorem_config(p, 0.0, 500);
    PairedTraces paired = compare_to_sgd(p, cfg, {1.0, 1.0});
    CHECK(paired.regret_ratio == 1.0);
    CHECK(paired.wf.losses == paired.sgd.losses);
    CHECK(paired.wf.w_final == paired.sgd.w_final);
    CHECK(paired.movement_dominated);
}

TEST_CASE("both methods reach the optimum gap on the default quadratic") {
    ConvexProblem p = make_quadratic_problem("q", {1.0, 3.0}, {0.3, -0.4}, 7);
    ConvexRunConfig cfg = theorem_config(p, 1.0, 100000, 1e-9);
    PairedTraces paired = compare_to_sgd(p, cfg, {1.1, 0.5});
    CHECK(paired.wf.final_gap() < 1e-6);
    CHECK(paired.sgd.final_gap() < 1e-6);
    CHECK(paired.movement_dominated);
}

TEST_CASE("scalar-g mode runs and still descends on a quadratic") {
    ConvexProblem p = make_quadratic_problem("q", {1.0, 2.0}, {0.1, 0.2}, 31);
    ConvexRunConfig cfg = theorem_config(p, 1.0, 2000);
    cfg.g_mode = GMode::scalar_mean_abs;
    RegretTrace trace = run_wf_convex(p, cfg, {1.0, -0.8});
    CHECK(check_descent(trace).ok);
    CHECK(trace.g_min_step[0] < 1.0);
}

TEST_CASE("the pinned suite satisfies the theorem at alpha = 1/L for all mu") {
    for (const SuiteEntry& entry : convergence_suite()) {
        // gradient at the stored optimum is genuinely tiny
        const auto grad_at_star = entry.problem.gradient(entry.problem.w_star);
        double norm = 0.0;
        for (double gi : grad_at_star) norm += gi * gi;
        CHECK(std::sqrt(norm) < 1e-8);

        for (double mu : {0.0, 0.5, 1.0, 5.0}) {
            CAPTURE(entry.problem.name);
            CAPTURE(mu);
            ConvexRunConfig cfg = theorem_config(entry.problem, mu, entry.max_steps, 1e-9);
            RegretTrace trace = run_wf_convex(entry.problem, cfg, entry.w_start);
            CHECK(check_descent(trace).ok);
            RegretBoundReport bound =
                check_regret_bound(trace, cfg.alpha, entry.w_start, entry.problem.w_star);
            CHECK(bound.holds_for_all_t);
            CHECK_FALSE(bound.bound_unbounded);
            CHECK(trace.final_gap() < 1e-6);
            // every regret summand is non-negative: the optimum really is optimal
            for (std::size_t t = 0; t + 1 < trace.losses.size(); ++t) {
                CHECK(trace.losses[t] >= trace.optimum_value);
            }
        }
    }
}

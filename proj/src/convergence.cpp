#include "wf/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wf {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return dot(a, a); }

/// log(1 + e^z) without overflow.
double log1p_exp(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// Columns of a seeded random matrix, orthonormalized (modified Gram-Schmidt).
DenseMatrix random_rotation(std::size_t dim, std::uint64_t seed) {
    Prng rng(seed);
    DenseMatrix q(dim, dim, 0.0);
    for (double& v : q.data) v = rng.uniform(-1.0, 1.0);
    for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t prev = 0; prev < j; ++prev) {
            double proj = 0.0;
            for (std::size_t i = 0; i < dim; ++i) proj += q.at(i, j) * q.at(i, prev);
            for (std::size_t i = 0; i < dim; ++i) q.at(i, j) -= proj * q.at(i, prev);
        }
        double len = 0.0;
        for (std::size_t i = 0; i < dim; ++i) len += q.at(i, j) * q.at(i, j);
        len = std::sqrt(len);
        if (len < 1e-8) {
            // re-draw a degenerate column; deterministic because rng continues
            for (std::size_t i = 0; i < dim; ++i) q.at(i, j) = rng.uniform(-1.0, 1.0);
            --j;
            continue;
        }
        for (std::size_t i = 0; i < dim; ++i) q.at(i, j) /= len;
    }
    return q;
}

/// Solves H x = b in place for small symmetric positive definite H.
std::vector<double> solve_spd(DenseMatrix h, std::vector<double> b) {
    const std::size_t n = h.rows;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(h.at(r, col)) > std::fabs(h.at(pivot, col))) pivot = r;
        }
        if (std::fabs(h.at(pivot, col)) < 1e-14) {
            throw NumericError("solve_spd: singular system");
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(h.at(pivot, c), h.at(col, c));
            std::swap(b[pivot], b[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = h.at(r, col) / h.at(col, col);
            for (std::size_t c = col; c < n; ++c) h.at(r, c) -= factor * h.at(col, c);
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t c = r + 1; c < n; ++c) s -= h.at(r, c) * x[c];
        x[r] = s / h.at(r, r);
    }
    return x;
}

double power_iteration_lambda_max(const DenseMatrix& x, std::uint64_t seed) {
    const std::size_t d = x.cols;
    Prng rng(seed);
    std::vector<double> v(d);
    for (double& e : v) e = rng.uniform(-1.0, 1.0);
    std::vector<double> xv(x.rows), xtxv(d);
    double lambda = 0.0;
    for (int iter = 0; iter < 20000; ++iter) {
        for (std::size_t i = 0; i < x.rows; ++i) {
            double s = 0.0;
            const double* row = x.row_ptr(i);
            for (std::size_t j = 0; j < d; ++j) s += row[j] * v[j];
            xv[i] = s;
        }
        std::fill(xtxv.begin(), xtxv.end(), 0.0);
        for (std::size_t i = 0; i < x.rows; ++i) {
            const double* row = x.row_ptr(i);
            for (std::size_t j = 0; j < d; ++j) xtxv[j] += row[j] * xv[i];
        }
        const double len = std::sqrt(norm2(xtxv));
        if (len == 0.0) break;
        for (std::size_t j = 0; j < d; ++j) v[j] = xtxv[j] / len;
        lambda = len;
    }
    return lambda;
}

} // namespace

double ConvexProblem::loss(const std::vector<double>& w) const {
    if (w.size() != dim) {
        throw ShapeError("ConvexProblem::loss: dimension mismatch");
    }
    if (kind == ConvexKind::quadratic) {
        std::vector<double> d(dim);
        for (std::size_t i = 0; i < dim; ++i) d[i] = w[i] - w_star[i];
        double value = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double* row = quad_a.row_ptr(i);
            for (std::size_t j = 0; j < dim; ++j) value += d[i] * row[j] * d[j];
        }
        return 0.5 * value;
    }
    const std::size_t n = logit_x.rows;
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = logit_x.row_ptr(i);
        double z = 0.0;
        for (std::size_t j = 0; j < dim; ++j) z += row[j] * w[j];
        value += log1p_exp(z) - logit_y[i] * z;
    }
    return value / static_cast<double>(n);
}

std::vector<double> ConvexProblem::gradient(const std::vector<double>& w) const {
    if (w.size() != dim) {
        throw ShapeError("ConvexProblem::gradient: dimension mismatch");
    }
    std::vector<double> g(dim, 0.0);
    if (kind == ConvexKind::quadratic) {
        for (std::size_t i = 0; i < dim; ++i) {
            const double* row = quad_a.row_ptr(i);
            double s = 0.0;
            for (std::size_t j = 0; j < dim; ++j) s += row[j] * (w[j] - w_star[j]);
            g[i] = s;
        }
        return g;
    }
    const std::size_t n = logit_x.rows;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = logit_x.row_ptr(i);
        double z = 0.0;
        for (std::size_t j = 0; j < dim; ++j) z += row[j] * w[j];
        const double r = sigmoid(z) - logit_y[i];
        for (std::size_t j = 0; j < dim; ++j) g[j] += r * row[j];
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (double& v : g) v *= inv;
    return g;
}

ConvexProblem make_quadratic_problem(std::string name, const std::vector<double>& eigenvalues,
                                     const std::vector<double>& w_star,
                                     std::uint64_t rotation_seed) {
    if (eigenvalues.empty() || eigenvalues.size() != w_star.size()) {
        throw ArgumentError("make_quadratic_problem: eigenvalues/w_star size mismatch");
    }
    for (double e : eigenvalues) {
        if (!(e > 0.0)) throw ArgumentError("make_quadratic_problem: eigenvalues must be > 0");
    }
    const std::size_t dim = eigenvalues.size();
    ConvexProblem p;
    p.kind = ConvexKind::quadratic;
    p.name = std::move(name);
    p.dim = dim;
    const DenseMatrix q = random_rotation(dim, rotation_seed);
    // A = Q diag(lambda) Q'
    p.quad_a = DenseMatrix(dim, dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                s += q.at(i, k) * eigenvalues[k] * q.at(j, k);
            }
            p.quad_a.at(i, j) = s;
        }
    }
    p.w_star = w_star;
    p.optimum_value = 0.0;
    p.lipschitz = *std::max_element(eigenvalues.begin(), eigenvalues.end());
    return p;
}

ConvexProblem make_logistic_problem(std::string name, std::size_t dim, std::size_t num_rows,
                                    std::uint64_t seed) {
    if (dim == 0 || num_rows < 2 * dim) {
        throw ArgumentError("make_logistic_problem: need at least 2*dim rows");
    }
    ConvexProblem p;
    p.kind = ConvexKind::logistic;
    p.name = std::move(name);
    p.dim = dim;

    Prng rng(seed);
    p.logit_x = DenseMatrix(num_rows, dim, 0.0);
    for (double& v : p.logit_x.data) v = rng.uniform(-1.0, 1.0);
    std::vector<double> w_true(dim);
    for (double& v : w_true) v = rng.uniform(-1.0, 1.0);
    p.logit_y.resize(num_rows);
    for (std::size_t i = 0; i < num_rows; ++i) {
        const double* row = p.logit_x.row_ptr(i);
        double z = 0.0;
        for (std::size_t j = 0; j < dim; ++j) z += row[j] * w_true[j];
        // probabilistic labels keep the classes overlapping, so the optimum
        // is finite and the loss strictly convex on full-rank data
        p.logit_y[i] = (rng.uniform(0.0, 1.0) < sigmoid(z)) ? 1.0 : 0.0;
    }

    const double lambda_max = power_iteration_lambda_max(p.logit_x, seed ^ 0xABCDEF);
    p.lipschitz = lambda_max / (4.0 * static_cast<double>(num_rows)) * (1.0 + 1e-9);

    // Damped Newton for w*
    std::vector<double> w(dim, 0.0);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<double> g = p.gradient(w);
        if (std::sqrt(norm2(g)) < 1e-12) break;
        DenseMatrix h(dim, dim, 0.0);
        for (std::size_t i = 0; i < num_rows; ++i) {
            const double* row = p.logit_x.row_ptr(i);
            double z = 0.0;
            for (std::size_t j = 0; j < dim; ++j) z += row[j] * w[j];
            const double s = sigmoid(z);
            const double d = s * (1.0 - s);
            for (std::size_t a = 0; a < dim; ++a) {
                for (std::size_t b = 0; b < dim; ++b) {
                    h.at(a, b) += d * row[a] * row[b];
                }
            }
        }
        const double inv = 1.0 / static_cast<double>(num_rows);
        for (double& v : h.data) v *= inv;
        std::vector<double> step = solve_spd(std::move(h), g);
        const double base_loss = p.loss(w);
        double scale = 1.0;
        for (int halving = 0; halving < 60; ++halving) {
            std::vector<double> cand(dim);
            for (std::size_t j = 0; j < dim; ++j) cand[j] = w[j] - scale * step[j];
            if (p.loss(cand) <= base_loss) {
                w = std::move(cand);
                break;
            }
            scale *= 0.5;
        }
    }
    if (std::sqrt(norm2(p.gradient(w))) >= 1e-8) {
        throw NumericError("make_logistic_problem: Newton did not reach gradient norm < 1e-8");
    }
    p.w_star = std::move(w);
    p.optimum_value = p.loss(p.w_star);
    return p;
}

RegretTrace run_wf_convex(const ConvexProblem& problem, const ConvexRunConfig& cfg,
                          const std::vector<double>& w_start) {
    if (w_start.size() != problem.dim) {
        throw ShapeError("run_wf_convex: w_start dimension mismatch");
    }
    if (cfg.max_steps == 0) {
        throw ArgumentError("run_wf_convex: need at least one step");
    }
    const double alpha_cap = 1.0 / problem.lipschitz;
    if (!cfg.force_hypothesis_violation) {
        if (!(cfg.alpha > 0.0) || cfg.alpha > alpha_cap * (1.0 + 1e-12)) {
            throw ArgumentError("run_wf_convex: alpha must lie in (0, 1/L]; pass "
                                "force_hypothesis_violation to explore outside the theorem");
        }
    } else if (!(cfg.alpha > 0.0)) {
        throw ArgumentError("run_wf_convex: alpha must be positive");
    }

    RegretTrace trace;
    trace.optimum_value = problem.optimum_value;
    trace.w_start = w_start;

    std::vector<double> w = w_start;
    double regret = 0.0;
    for (std::size_t t = 1; t <= cfg.max_steps; ++t) {
        const double loss_t = problem.loss(w);
        trace.losses.push_back(loss_t);
        regret += loss_t - problem.optimum_value;
        trace.regret.push_back(regret);

        const std::vector<double> grad = problem.gradient(w);
        double g_min = 1.0;
        if (cfg.g_mode == GMode::scalar_mean_abs) {
            double mean_abs = 0.0;
            for (double v : w) mean_abs += std::fabs(v);
            mean_abs /= static_cast<double>(w.size());
            const double g = friction_factor(cfg.friction, mean_abs);
            g_min = g;
            for (std::size_t i = 0; i < w.size(); ++i) {
                w[i] -= cfg.alpha * g * grad[i];
            }
        } else {
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double g = friction_factor(cfg.friction, w[i]);
                g_min = std::min(g_min, g);
                w[i] -= cfg.alpha * g * grad[i];
            }
        }
        trace.g_min_step.push_back(g_min);
        trace.steps_taken = t;

        if (cfg.stop_gap > 0.0 && problem.loss(w) - problem.optimum_value <= cfg.stop_gap) {
            break;
        }
    }
    trace.losses.push_back(problem.loss(w)); // final iterate
    trace.w_final = std::move(w);
    return trace;
}

DescentReport check_descent(const RegretTrace& trace, double tolerance) {
    DescentReport report;
    for (std::size_t i = 0; i + 1 < trace.losses.size(); ++i) {
        if (trace.losses[i + 1] > trace.losses[i] + tolerance) {
            report.ok = false;
            report.first_violation = i + 1; // step t whose update increased the loss
            return report;
        }
    }
    return report;
}

RegretBoundReport check_regret_bound(const RegretTrace& trace, double alpha,
                                     const std::vector<double>& w_start,
                                     const std::vector<double>& w_star) {
    if (w_start.size() != w_star.size()) {
        throw ShapeError("check_regret_bound: w_start/w_star dimension mismatch");
    }
    double dist2 = 0.0;
    for (std::size_t i = 0; i < w_start.size(); ++i) {
        const double d = w_start[i] - w_star[i];
        dist2 += d * d;
    }

    RegretBoundReport report;
    report.min_margin = std::numeric_limits<double>::infinity();
    double g_min = 1.0;
    for (std::size_t t = 0; t < trace.steps_taken; ++t) {
        g_min = std::min(g_min, trace.g_min_step[t]);
        if (g_min <= 0.0) {
            report.bound_unbounded = true;
            continue; // bound degenerates; nothing to compare against
        }
        const double bound = dist2 / (2.0 * alpha * g_min);
        const double margin = bound - trace.regret[t];
        report.min_margin = std::min(report.min_margin, margin);
        if (trace.regret[t] > bound && report.holds_for_all_t) {
            report.holds_for_all_t = false;
            report.first_violation = t + 1;
        }
        if (t + 1 == trace.steps_taken) {
            report.final_bound = bound;
        }
    }
    report.final_regret = trace.regret.empty() ? 0.0 : trace.regret.back();
    return report;
}

PairedTraces compare_to_sgd(const ConvexProblem& problem, const ConvexRunConfig& cfg,
                            const std::vector<double>& w_start) {
    PairedTraces paired;
    paired.wf = run_wf_convex(problem, cfg, w_start);

    ConvexRunConfig sgd_cfg = cfg;
    sgd_cfg.friction = FrictionFunction{FrictionKind::identity, 0.0};
    paired.sgd = run_wf_convex(problem, sgd_cfg, w_start);

    // Replay the wf trajectory: at every iterate the friction step must not
    // move farther than the plain gradient step from the same point.
    std::vector<double> w = w_start;
    paired.movement_dominated = true;
    for (std::size_t t = 0; t < paired.wf.steps_taken; ++t) {
        const std::vector<double> grad = problem.gradient(w);
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double g = friction_factor(cfg.friction, w[i]);
            const double wf_move = std::fabs(cfg.alpha * g * grad[i]);
            const double sgd_move = std::fabs(cfg.alpha * grad[i]);
            if (wf_move > sgd_move) paired.movement_dominated = false;
            w[i] -= cfg.alpha * g * grad[i];
        }
    }

    const double wf_regret = paired.wf.regret.empty() ? 0.0 : paired.wf.regret.back();
    const double sgd_regret = paired.sgd.regret.empty() ? 0.0 : paired.sgd.regret.back();
    if (sgd_regret == 0.0) {
        paired.regret_ratio = (wf_regret == 0.0) ? 1.0 : std::numeric_limits<double>::infinity();
    } else {
        paired.regret_ratio = wf_regret / sgd_regret;
    }
    return paired;
}

std::vector<SuiteEntry> convergence_suite() {
    std::vector<SuiteEntry> suite;
    {
        // 1-D exact case: alpha = 1/L solves it in one identity-friction step.
        SuiteEntry e;
        e.problem = make_quadratic_problem("quad-1d", {1.0}, {0.0}, 2);
        e.w_start = {1.0};
        e.max_steps = 200000;
        suite.push_back(std::move(e));
    }
    {
        SuiteEntry e;
        e.problem = make_quadratic_problem("quad-2d", {1.0, 3.0}, {0.3, -0.4}, 7);
        e.w_start = {1.1, 0.5};
        e.max_steps = 200000;
        suite.push_back(std::move(e));
    }
    {
        SuiteEntry e;
        e.problem = make_quadratic_problem(
            "quad-10d", {0.5, 0.8, 1.0, 1.4, 1.9, 2.4, 3.0, 3.6, 4.2, 5.0},
            {0.5, -0.4, 0.3, -0.2, 0.6, -0.5, 0.2, -0.3, 0.4, -0.6}, 17);
        e.w_start = {1.2, 0.3, -0.5, 0.6, -0.2, 0.4, 0.9, 0.5, -0.4, 0.1};
        e.max_steps = 300000;
        suite.push_back(std::move(e));
    }
    {
        SuiteEntry e;
        e.problem = make_logistic_problem("logistic-2d", 2, 40, 11);
        e.w_start = {0.0, 0.0};
        e.max_steps = 400000;
        suite.push_back(std::move(e));
    }
    {
        SuiteEntry e;
        e.problem = make_logistic_problem("logistic-10d", 10, 80, 13);
        e.w_start = std::vector<double>(10, 0.0);
        e.max_steps = 400000;
        suite.push_back(std::move(e));
    }
    return suite;
}

} // namespace wf

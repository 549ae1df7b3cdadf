#include "wf/continual.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include <json.hpp>

namespace wf {

using nlohmann::json;

std::string method_name(MethodTag tag) {
    switch (tag) {
    case MethodTag::vanilla: return "vanilla";
    case MethodTag::weight_friction: return "weight_friction";
    case MethodTag::ewc: return "ewc";
    }
    return "unknown";
}

double average_accuracy(const std::vector<double>& row_after_task) {
    if (row_after_task.empty()) {
        throw ArgumentError("average_accuracy: empty accuracy row");
    }
    double sum = 0.0;
    for (double a : row_after_task) sum += a;
    return sum / static_cast<double>(row_after_task.size());
}

void ContinualRunConfig::validate() const {
    if (!sequence || sequence->tasks.empty()) {
        throw ArgumentError("continual run: empty task sequence");
    }
    if (seeds.empty()) {
        throw ArgumentError("continual run: need at least one seed");
    }
    if (batch_size == 0) {
        throw ArgumentError("continual run: batch_size must be positive");
    }
    validate_specs(model_spec);
    first_task_optimizer.validate();
    subsequent_optimizer.validate();
    if (first_task_optimizer.method == OptimMethod::weight_friction) {
        throw ArgumentError("continual run: friction applies only to tasks after the first");
    }
    switch (method) {
    case MethodTag::weight_friction:
        if (subsequent_optimizer.method != OptimMethod::weight_friction) {
            throw ArgumentError("method weight_friction requires a weight_friction optimizer "
                                "for subsequent tasks");
        }
        break;
    case MethodTag::vanilla:
    case MethodTag::ewc:
        if (subsequent_optimizer.method == OptimMethod::weight_friction) {
            throw ArgumentError(method_name(method) +
                                " runs must not use the weight_friction optimizer");
        }
        break;
    }

    const std::size_t input_dim = model_spec.front().in_dim;
    const std::size_t classes = model_spec.back().out_dim;
    std::size_t max_later_epochs = 0;
    for (std::size_t i = 0; i < sequence->tasks.size(); ++i) {
        const TaskView& t = sequence->tasks[i];
        if (!t.train || !t.test) {
            throw ArgumentError("task " + std::to_string(i) + ": train/test dataset missing");
        }
        if (t.epochs == 0) {
            throw ArgumentError("task " + std::to_string(i) + ": epoch budget must be >= 1");
        }
        if (t.train->dim() != input_dim || t.test->dim() != input_dim) {
            throw ShapeError("task " + std::to_string(i) + ": dataset dim does not match model");
        }
        if (t.train->num_classes != classes || t.test->num_classes != classes) {
            throw ShapeError("task " + std::to_string(i) +
                             ": dataset classes do not match model output");
        }
        if (!t.pixel_permutation.empty() && t.pixel_permutation.size() != input_dim) {
            throw ShapeError("task " + std::to_string(i) + ": permutation length mismatch");
        }
        if (t.validation && t.validation->dim() != input_dim) {
            throw ShapeError("task " + std::to_string(i) + ": validation dim mismatch");
        }
        if (i > 0) max_later_epochs = std::max(max_later_epochs, t.epochs);
    }
    if (method == MethodTag::weight_friction && subsequent_optimizer.mu_schedule &&
        subsequent_optimizer.mu_schedule->size() < max_later_epochs) {
        throw ArgumentError("mu_schedule shorter than the largest later-task epoch budget");
    }
}

// ---------------------------------------------------------------------------
// EWC
// ---------------------------------------------------------------------------

Gradients ewc_estimate_fisher(const Mlp& model, const LabeledDataset& ds,
                              const std::vector<std::uint32_t>& pixel_permutation,
                              std::size_t sample_count, Prng& rng, bool* clamped) {
    if (sample_count == 0) {
        throw ArgumentError("ewc_estimate_fisher: sample_count must be >= 1");
    }
    std::size_t samples = sample_count;
    if (clamped) *clamped = false;
    if (samples > ds.size()) {
        samples = ds.size();
        if (clamped) *clamped = true;
    }
    auto order = fisher_yates_permutation(rng, ds.size());

    Gradients fisher = zero_gradients(model);
    const std::size_t classes = model.output_dim();
    for (std::size_t s = 0; s < samples; ++s) {
        const std::uint32_t idx = order[s];
        DenseMatrix x = assemble_batch(ds, pixel_permutation, &idx, 1);
        auto [logits, cache] = forward(model, x);
        // predictive distribution for this example
        const double* row = logits.row_ptr(0);
        double maxv = row[0];
        for (std::size_t j = 1; j < classes; ++j) maxv = std::max(maxv, row[j]);
        std::vector<double> probs(classes);
        double sum = 0.0;
        for (std::size_t j = 0; j < classes; ++j) {
            probs[j] = std::exp(row[j] - maxv);
            sum += probs[j];
        }
        for (double& p : probs) p /= sum;

        for (std::size_t y = 0; y < classes; ++y) {
            if (probs[y] == 0.0) continue; // saturated class: no mass, no contribution
            const std::vector<std::uint8_t> label{static_cast<std::uint8_t>(y)};
            auto [loss, dlogits] = softmax_cross_entropy(logits, label);
            (void)loss;
            Gradients g = backward(model, cache, dlogits);
            for (std::size_t k = 0; k < g.weights.size(); ++k) {
                const double* gw = g.weights[k].data.data();
                double* fw = fisher.weights[k].data.data();
                for (std::size_t i = 0; i < g.weights[k].data.size(); ++i) {
                    fw[i] += probs[y] * gw[i] * gw[i];
                }
                const auto& gb = g.biases[k];
                auto& fb = fisher.biases[k];
                for (std::size_t i = 0; i < gb.size(); ++i) {
                    fb[i] += probs[y] * gb[i] * gb[i];
                }
            }
        }
    }
    const double inv = 1.0 / static_cast<double>(samples);
    for (auto& w : fisher.weights) {
        for (double& v : w.data) v *= inv;
    }
    for (auto& b : fisher.biases) {
        for (double& v : b) v *= inv;
    }
    return fisher;
}

Gradients ewc_penalized_gradients(Gradients grads, const Mlp& model, const EwcState& ewc) {
    for (const EwcAnchor& anchor : ewc.anchors) {
        if (anchor.weights.size() != model.num_layers()) {
            throw ShapeError("ewc anchor layer count does not match model");
        }
        for (std::size_t k = 0; k < model.num_layers(); ++k) {
            if (!anchor.weights[k].same_shape(model.weights[k])) {
                throw ShapeError("ewc anchor shape mismatch at layer " + std::to_string(k));
            }
            const double* w = model.weights[k].data.data();
            const double* wk = anchor.weights[k].data.data();
            const double* fk = anchor.fisher.weights[k].data.data();
            double* g = grads.weights[k].data.data();
            for (std::size_t i = 0; i < model.weights[k].data.size(); ++i) {
                g[i] += ewc.lambda * fk[i] * (w[i] - wk[i]);
            }
            const auto& b = model.biases[k];
            const auto& bk = anchor.biases[k];
            const auto& fbk = anchor.fisher.biases[k];
            auto& gb = grads.biases[k];
            for (std::size_t i = 0; i < b.size(); ++i) {
                gb[i] += ewc.lambda * fbk[i] * (b[i] - bk[i]);
            }
        }
    }
    return grads;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kStreamInit = 101;
constexpr std::uint64_t kStreamShuffleBase = 201;
constexpr std::uint64_t kStreamFisherBase = 301;

double now_unix_seconds() {
    return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

class LogSink {
public:
    explicit LogSink(std::ostream* out) : out_(out) {}
    void write(const json& record) {
        if (!out_) return;
        const std::string line = record.dump();
        std::lock_guard<std::mutex> guard(mutex_);
        *out_ << line << "\n";
    }

private:
    std::ostream* out_;
    std::mutex mutex_;
};

double evaluate_task_accuracy(const Mlp& model, const TaskView& task, const LabeledDataset& ds) {
    const DenseMatrix inputs = apply_permutation(ds.inputs, task.pixel_permutation);
    return evaluate_accuracy(model, inputs, ds.labels);
}

SeedRunResult train_one_seed(const ContinualRunConfig& cfg, std::uint64_t seed, LogSink& log) {
    SeedRunResult result;
    result.seed = seed;
    const auto t_start = std::chrono::steady_clock::now();

    try {
        Prng init_rng = Prng::substream(seed, kStreamInit);
        Mlp model = xavier_init(cfg.model_spec, init_rng);
        EwcState ewc;
        ewc.lambda = cfg.ewc.lambda;
        ewc.fisher_sample_count = cfg.ewc.fisher_sample_count;

        const auto& tasks = cfg.sequence->tasks;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            const TaskView& task = tasks[i];
            const OptimizerConfig& opt = (i == 0) ? cfg.first_task_optimizer
                                                  : cfg.subsequent_optimizer;
            AdamState adam;
            if (opt.method == OptimMethod::adam) {
                adam = make_adam_state(model); // fresh per task; nothing persists across tasks
            }
            Prng shuffle_rng = Prng::substream(seed, kStreamShuffleBase + i);
            const std::size_t n = task.train->size();
            const bool use_penalty = (cfg.method == MethodTag::ewc && i > 0);

            for (std::size_t epoch = 0; epoch < task.epochs; ++epoch) {
                OptimizerConfig epoch_opt = opt;
                if (opt.method == OptimMethod::weight_friction) {
                    epoch_opt.friction = apply_mu_schedule(opt, epoch);
                }
                const auto order = fisher_yates_permutation(shuffle_rng, n);
                double loss_sum = 0.0;
                std::size_t batches = 0;
                for (std::size_t start = 0; start < n; start += cfg.batch_size) {
                    const std::size_t count = std::min(cfg.batch_size, n - start);
                    DenseMatrix batch = assemble_batch(*task.train, task.pixel_permutation,
                                                       order.data() + start, count);
                    std::vector<std::uint8_t> labels(count);
                    for (std::size_t r = 0; r < count; ++r) {
                        labels[r] = task.train->labels[order[start + r]];
                    }
                    auto [logits, cache] = forward(model, batch);
                    auto [loss, dlogits] = softmax_cross_entropy(logits, labels);
                    Gradients grads = backward(model, cache, dlogits);
                    if (use_penalty) {
                        grads = ewc_penalized_gradients(std::move(grads), model, ewc);
                    }
                    switch (epoch_opt.method) {
                    case OptimMethod::sgd: sgd_step(model, grads, epoch_opt); break;
                    case OptimMethod::adam: adam_step(model, grads, adam, epoch_opt); break;
                    case OptimMethod::weight_friction: wf_step(model, grads, epoch_opt); break;
                    }
                    loss_sum += loss;
                    ++batches;
                }
                json record{{"record", "epoch"},
                            {"run_id", cfg.run_id},
                            {"method", method_name(cfg.method)},
                            {"seed", seed},
                            {"task", i},
                            {"epoch", epoch},
                            {"train_loss", loss_sum / static_cast<double>(batches)},
                            {"ts", now_unix_seconds()}};
                if (epoch_opt.method == OptimMethod::weight_friction) {
                    record["effective_mu"] = epoch_opt.friction.mu;
                }
                log.write(record);
            }

            std::vector<double> row;
            for (std::size_t j = 0; j <= i; ++j) {
                row.push_back(evaluate_task_accuracy(model, tasks[j], *tasks[j].test));
            }
            log.write(json{{"record", "task_eval"},
                           {"run_id", cfg.run_id},
                           {"method", method_name(cfg.method)},
                           {"seed", seed},
                           {"task", i},
                           {"test_accuracies", row},
                           {"ts", now_unix_seconds()}});
            result.test_matrix.rows.push_back(std::move(row));

            if (cfg.method == MethodTag::ewc && i + 1 < tasks.size()) {
                Prng fisher_rng = Prng::substream(seed, kStreamFisherBase + i);
                bool clamped = false;
                Gradients fisher = ewc_estimate_fisher(model, *task.train, task.pixel_permutation,
                                                       ewc.fisher_sample_count, fisher_rng,
                                                       &clamped);
                if (clamped) {
                    log.write(json{{"record", "warning"},
                                   {"run_id", cfg.run_id},
                                   {"seed", seed},
                                   {"message", "fisher_sample_count clamped to dataset size"}});
                }
                EwcAnchor anchor;
                anchor.weights = model.weights;
                anchor.biases = model.biases;
                anchor.fisher = std::move(fisher);
                ewc.anchors.push_back(std::move(anchor));
            }
        }

        bool have_validation = true;
        for (const TaskView& task : cfg.sequence->tasks) {
            if (!task.validation) {
                have_validation = false;
                break;
            }
        }
        if (have_validation) {
            Mlp& model_ref = model;
            for (const TaskView& task : cfg.sequence->tasks) {
                result.validation_after_final.push_back(
                    evaluate_task_accuracy(model_ref, task, *task.validation));
            }
        }
    } catch (const NumericError& e) {
        result.aborted = true;
        result.abort_reason = e.what();
        log.write(json{{"record", "abort"},
                       {"run_id", cfg.run_id},
                       {"seed", seed},
                       {"reason", e.what()},
                       {"ts", now_unix_seconds()}});
    }

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

} // namespace

ContinualResult run_continual(const ContinualRunConfig& cfg, std::ostream* log_stream) {
    cfg.validate();
    LogSink log(log_stream);

    ContinualResult result;
    result.method = cfg.method;
    result.per_seed.resize(cfg.seeds.size());

    const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, cfg.seeds.size()));
    if (jobs == 1) {
        for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
            result.per_seed[s] = train_one_seed(cfg, cfg.seeds[s], log);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(jobs);
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&]() {
                while (true) {
                    const std::size_t s = next.fetch_add(1);
                    if (s >= cfg.seeds.size()) break;
                    result.per_seed[s] = train_one_seed(cfg, cfg.seeds[s], log);
                }
            });
        }
        for (auto& t : workers) t.join();
    }

    // Deterministic reduce in seed order.
    const std::size_t num_tasks = cfg.sequence->tasks.size();
    std::size_t completed = 0;
    AccuracyMatrix& mean = result.mean_test_matrix;
    for (const SeedRunResult& seed_result : result.per_seed) {
        result.wall_seconds += seed_result.wall_seconds;
        if (seed_result.aborted || seed_result.test_matrix.tasks() != num_tasks) {
            ++result.aborted_seeds;
            continue;
        }
        if (mean.empty()) {
            mean.rows.assign(num_tasks, {});
            for (std::size_t i = 0; i < num_tasks; ++i) {
                mean.rows[i].assign(i + 1, 0.0);
            }
        }
        for (std::size_t i = 0; i < num_tasks; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                mean.rows[i][j] += seed_result.test_matrix.rows[i][j];
            }
        }
        if (!seed_result.validation_after_final.empty()) {
            if (result.mean_validation_after_final.empty()) {
                result.mean_validation_after_final.assign(num_tasks, 0.0);
            }
            for (std::size_t j = 0; j < num_tasks; ++j) {
                result.mean_validation_after_final[j] += seed_result.validation_after_final[j];
            }
        }
        ++completed;
    }
    if (completed > 0) {
        const double inv = 1.0 / static_cast<double>(completed);
        for (auto& row : mean.rows) {
            for (double& v : row) v *= inv;
        }
        for (double& v : result.mean_validation_after_final) v *= inv;
    }

    Mlp probe;
    probe.specs = cfg.model_spec;
    result.parameter_count = probe.parameter_count();
    // Persistent slots held across task boundaries: the model itself, plus
    // EWC's anchor snapshot and Fisher diagonal per completed task. Optimizer
    // state is rebuilt per task and therefore does not persist.
    result.memory_slots = result.parameter_count;
    if (cfg.method == MethodTag::ewc && num_tasks >= 2) {
        result.memory_slots += 2 * result.parameter_count * (num_tasks - 1);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Gridsearch
// ---------------------------------------------------------------------------

std::size_t select_best_mu(const std::vector<std::pair<double, double>>& scores) {
    if (scores.empty()) {
        throw ArgumentError("select_best_mu: empty score table");
    }
    std::size_t best = scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (std::isnan(scores[i].second)) continue;
        if (best == scores.size() || scores[i].second > scores[best].second) {
            best = i; // strict: ties keep the earlier (smaller) mu
        }
    }
    if (best == scores.size()) {
        throw ArgumentError("select_best_mu: no mu produced a usable score");
    }
    return best;
}

GridsearchResult gridsearch_mu(const std::vector<ContinualRunConfig>& fold_configs,
                               const std::vector<double>& grid, std::ostream* log) {
    if (grid.empty()) {
        throw ArgumentError("gridsearch_mu: empty grid");
    }
    if (fold_configs.empty()) {
        throw ArgumentError("gridsearch_mu: no fold configs");
    }
    for (const ContinualRunConfig& cfg : fold_configs) {
        if (cfg.method != MethodTag::weight_friction) {
            throw ArgumentError("gridsearch_mu: configs must use method weight_friction");
        }
        for (const TaskView& task : cfg.sequence->tasks) {
            if (!task.validation) {
                throw ArgumentError("gridsearch_mu: every task needs validation data "
                                    "(use cross-validation folds when no split exists)");
            }
        }
    }
    std::vector<double> mus = grid;
    std::sort(mus.begin(), mus.end());
    mus.erase(std::unique(mus.begin(), mus.end()), mus.end());

    GridsearchResult result;
    for (double mu : mus) {
        double fold_score_sum = 0.0;
        std::size_t fold_count = 0;
        ContinualResult first_fold;
        for (std::size_t f = 0; f < fold_configs.size(); ++f) {
            ContinualRunConfig cfg = fold_configs[f];
            cfg.subsequent_optimizer.friction.mu = mu;
            cfg.run_id = cfg.run_id + "/mu=" + std::to_string(mu);
            ContinualResult run = run_continual(cfg, log);
            if (!run.mean_validation_after_final.empty()) {
                fold_score_sum += average_accuracy(run.mean_validation_after_final);
                ++fold_count;
            }
            if (f == 0) first_fold = std::move(run);
        }
        const double score = fold_count
                                 ? fold_score_sum / static_cast<double>(fold_count)
                                 : std::numeric_limits<double>::quiet_NaN();
        result.scores.emplace_back(mu, score);
        result.per_mu.push_back(std::move(first_fold));
    }
    result.best_index = select_best_mu(result.scores);
    result.best_mu = result.scores[result.best_index].first;
    return result;
}

// ---------------------------------------------------------------------------
// Resource accounting
// ---------------------------------------------------------------------------

ResourceReport resource_report(const std::vector<MethodCost>& runs) {
    if (runs.empty()) {
        throw ArgumentError("resource_report: no runs");
    }
    ResourceReport report;
    report.absolute = runs;
    if (runs.size() < 2) {
        report.relative_valid = false;
        return report;
    }
    double max_time = 0.0;
    std::size_t max_mem = 0;
    for (const MethodCost& run : runs) {
        max_time = std::max(max_time, run.wall_seconds);
        max_mem = std::max(max_mem, run.memory_slots);
    }
    report.relative_valid = true;
    for (const MethodCost& run : runs) {
        report.relative_time.push_back(max_time > 0.0 ? run.wall_seconds / max_time : 1.0);
        report.relative_memory.push_back(
            max_mem > 0 ? static_cast<double>(run.memory_slots) / static_cast<double>(max_mem)
                        : 1.0);
    }
    return report;
}

} // namespace wf

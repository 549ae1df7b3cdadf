#ifndef WF_CONTINUAL_HPP
#define WF_CONTINUAL_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wf/data.hpp"
#include "wf/nn.hpp"
#include "wf/optim.hpp"

namespace wf {

enum class MethodTag { vanilla, weight_friction, ewc };

std::string method_name(MethodTag tag);

/// One task of a sequence. Datasets are borrowed; the optional pixel
/// permutation applies to train/validation/test alike and is resolved lazily
/// at batch assembly, so permuted tasks share one stored copy of the base.
struct TaskView {
    const LabeledDataset* train = nullptr;
    const LabeledDataset* validation = nullptr; // may be null (no validation data)
    const LabeledDataset* test = nullptr;
    std::vector<std::uint32_t> pixel_permutation; // empty = identity
    std::size_t epochs = 1;
    std::string name;
};

struct TaskSequence {
    std::vector<TaskView> tasks;
    std::string name;
};

struct EwcOptions {
    double lambda = 100.0;
    std::size_t fisher_sample_count = 1000;
};

struct ContinualRunConfig {
    const TaskSequence* sequence = nullptr;
    std::vector<LayerSpec> model_spec;
    OptimizerConfig first_task_optimizer;  // task 0, every method (no friction there)
    OptimizerConfig subsequent_optimizer;  // tasks 1.., method-specific
    MethodTag method = MethodTag::vanilla;
    std::vector<std::uint64_t> seeds;
    std::size_t batch_size = 64;
    EwcOptions ewc;
    std::size_t jobs = 1;
    std::string run_id = "run";

    void validate() const; // method/optimizer consistency, non-empty seeds, ...
};

/// Lower-triangular grid: rows[i][j] = test accuracy on task j after
/// finishing training on task i.
struct AccuracyMatrix {
    std::vector<std::vector<double>> rows;

    bool empty() const { return rows.empty(); }
    std::size_t tasks() const { return rows.size(); }
};

/// Arithmetic mean of one matrix row (the Fig-5-style metric).
double average_accuracy(const std::vector<double>& row_after_task);

// ---------------------------------------------------------------------------
// EWC baseline
// ---------------------------------------------------------------------------

struct EwcAnchor {
    std::vector<DenseMatrix> weights;        // parameter snapshot w*_k
    std::vector<std::vector<double>> biases;
    Gradients fisher;                        // diagonal importance, same shapes
};

struct EwcState {
    std::vector<EwcAnchor> anchors;
    double lambda = 100.0;
    std::size_t fisher_sample_count = 1000;
};

/// Diagonal empirical Fisher: mean over `sample_count` drawn examples of the
/// expectation, under the model's own predictive distribution, of squared
/// per-parameter log-likelihood gradients. `rng` picks the example subset;
/// a sample_count above the dataset size is clamped with a warning flag.
Gradients ewc_estimate_fisher(const Mlp& model, const LabeledDataset& ds,
                              const std::vector<std::uint32_t>& pixel_permutation,
                              std::size_t sample_count, Prng& rng,
                              bool* clamped = nullptr);

/// grad' = grad + lambda * sum_k F_k (.) (w - w*_k), elementwise.
Gradients ewc_penalized_gradients(Gradients grads, const Mlp& model, const EwcState& ewc);

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

struct SeedRunResult {
    std::uint64_t seed = 0;
    AccuracyMatrix test_matrix;
    /// Validation accuracy per task, measured after the final task; empty
    /// when any task lacks validation data.
    std::vector<double> validation_after_final;
    double wall_seconds = 0.0;
    bool aborted = false;
    std::string abort_reason;
};

struct ContinualResult {
    MethodTag method = MethodTag::vanilla;
    std::vector<SeedRunResult> per_seed;
    AccuracyMatrix mean_test_matrix;               // over non-aborted seeds
    std::vector<double> mean_validation_after_final;
    double wall_seconds = 0.0;                     // summed over seeds
    std::size_t parameter_count = 0;
    std::size_t memory_slots = 0;                  // persistent 64-bit slots across tasks
    std::size_t aborted_seeds = 0;
};

/// Full protocol, per seed: Xavier init; task 0 with the first-task
/// optimizer; later tasks with the method's optimizer; after each task,
/// test accuracy on every task seen so far. Seeds average into
/// mean_test_matrix. A NaN loss aborts that seed with a diagnostic and the
/// remaining seeds continue. Optional JSONL records go to `log`.
ContinualResult run_continual(const ContinualRunConfig& cfg, std::ostream* log = nullptr);

// ---------------------------------------------------------------------------
// mu gridsearch
// ---------------------------------------------------------------------------

struct GridsearchResult {
    double best_mu = 0.0;
    std::vector<std::pair<double, double>> scores;       // (mu, mean validation score)
    std::vector<ContinualResult> per_mu;                 // aligned with scores
    std::size_t best_index = 0;
};

/// Selection rule: highest score wins, exact ties go to the smaller mu.
std::size_t select_best_mu(const std::vector<std::pair<double, double>>& scores);

/// Runs the sequence once per grid value on every fold config (settings with
/// validation splits pass a single fold; cross-validation passes one config
/// per fold) and scores each mu by the average validation accuracy over all
/// tasks after the final task, averaged over folds and seeds.
GridsearchResult gridsearch_mu(const std::vector<ContinualRunConfig>& fold_configs,
                               const std::vector<double>& grid, std::ostream* log = nullptr);

// ---------------------------------------------------------------------------
// Resource accounting
// ---------------------------------------------------------------------------

struct MethodCost {
    std::string method;
    double wall_seconds = 0.0;
    std::size_t memory_slots = 0;
};

struct ResourceReport {
    std::vector<MethodCost> absolute;
    std::vector<double> relative_time;    // normalized so the max method is 1
    std::vector<double> relative_memory;
    bool relative_valid = false;          // false when only one method measured
};

ResourceReport resource_report(const std::vector<MethodCost>& runs);

/// Published reference costs for baselines this project does not reimplement
/// (shipped in reports for context, never measured here).
struct ReferenceRelativeCosts {
    double time_speedup_vs_agem = 2.16;
    double time_speedup_vs_pnn = 1.98;
    double time_speedup_vs_ewc = 1.29;
    double memory_reduction_vs_pnn = 35.71;
    double memory_reduction_vs_agem = 3.57;
    double memory_reduction_vs_ewc = 3.04;
};

} // namespace wf

#endif // WF_CONTINUAL_HPP

#include "wf/experiment.hpp"

#include <cmath>

namespace wf {

namespace {

// Substream ids for dataset construction; training streams (100/200/300
// ranges) live in continual.cpp.
constexpr std::uint64_t kStreamFirstTask = 1;
constexpr std::uint64_t kStreamSecondTask = 2;
constexpr std::uint64_t kStreamTestSplit = 11;
constexpr std::uint64_t kStreamValidationSplit = 21;
constexpr std::uint64_t kStreamTaskPermBase = 31;
constexpr std::uint64_t kStreamFoldSplit = 41;

const LabeledDataset* keep(ContinualExperiment& e, LabeledDataset ds) {
    e.storage.push_back(std::make_unique<LabeledDataset>(std::move(ds)));
    return e.storage.back().get();
}

/// Synthetic pool sized train+test, then carved deterministically.
std::pair<const LabeledDataset*, const LabeledDataset*>
synthetic_train_test(ContinualExperiment& e, const ExperimentConfig& cfg,
                     std::uint64_t task_stream, const std::string& name) {
    const std::size_t total = cfg.train_per_task + cfg.test_per_task;
    const std::size_t per_class = (total + cfg.classes - 1) / cfg.classes;
    Prng rng = Prng::substream(cfg.data_seed, task_stream);
    LabeledDataset pool =
        synthetic_gaussians(cfg.classes, per_class, cfg.dim, cfg.noise, rng, name);
    const double fraction =
        static_cast<double>(cfg.train_per_task) / static_cast<double>(pool.size());
    Prng split_rng = Prng::substream(cfg.data_seed, kStreamTestSplit + task_stream);
    auto [train, test] = split_train_validation(pool, SplitSpec{fraction, split_rng.seed()});
    return {keep(e, std::move(train)), keep(e, std::move(test))};
}

LabeledDataset load_idx_dataset(const std::string& images_path, const std::string& labels_path,
                                std::size_t classes, const std::string& name) {
    if (images_path.empty() || labels_path.empty()) {
        throw DataError("dataset '" + name + "': image/label paths not configured");
    }
    DenseMatrix images = load_idx_images(images_path);
    std::vector<std::uint8_t> labels = load_idx_labels(labels_path);
    return make_labeled_dataset(std::move(images), std::move(labels), classes, name);
}

struct TaskDatasets {
    const LabeledDataset* train = nullptr;
    const LabeledDataset* validation = nullptr;
    const LabeledDataset* test = nullptr;
};

/// Train pool -> train/validation split (settings 1-2 keep validation data).
TaskDatasets with_validation_split(ContinualExperiment& e, const ExperimentConfig& cfg,
                                   const LabeledDataset* pool, const LabeledDataset* test,
                                   std::uint64_t task_stream) {
    Prng vrng = Prng::substream(cfg.split_seed, kStreamValidationSplit + task_stream);
    auto [train, validation] =
        split_train_validation(*pool, SplitSpec{cfg.train_fraction, vrng.seed()});
    TaskDatasets out;
    out.train = keep(e, std::move(train));
    out.validation = keep(e, std::move(validation));
    out.test = test;
    return out;
}

std::uint64_t permutation_seed(const ExperimentConfig& cfg, std::size_t task_index) {
    if (task_index == 0) return kIdentityPermutationSeed;
    Prng rng = Prng::substream(cfg.data_seed, kStreamTaskPermBase + task_index);
    std::uint64_t seed = rng.next_u64();
    if (seed == kIdentityPermutationSeed) seed = 1;
    return seed;
}

OptimizerConfig make_first_optimizer(const ExperimentConfig& cfg) {
    OptimizerConfig opt;
    opt.method = OptimMethod::adam;
    opt.learning_rate = cfg.alpha;
    return opt;
}

OptimizerConfig make_subsequent_optimizer(const ExperimentConfig& cfg) {
    OptimizerConfig opt;
    if (cfg.method == MethodTag::weight_friction) {
        opt.method = OptimMethod::weight_friction;
        opt.learning_rate = cfg.effective_alpha_wf();
        opt.friction = {cfg.friction, cfg.mu};
        opt.apply_friction_to_biases = cfg.friction_on_biases;
        opt.mu_schedule = cfg.mu_schedule;
    } else {
        opt.method = OptimMethod::adam;
        opt.learning_rate = cfg.alpha;
    }
    return opt;
}

} // namespace

std::unique_ptr<ContinualExperiment> build_continual_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    if (cfg.setting == Setting::convex) {
        throw ArgumentError("build_continual_experiment: convex setting has no task sequence");
    }
    auto experiment = std::make_unique<ContinualExperiment>();
    ContinualExperiment& e = *experiment;
    const auto epochs = cfg.epochs_per_task();

    if (cfg.setting == Setting::setting1 || cfg.setting == Setting::setting2) {
        TaskDatasets first, second;
        if (cfg.source == DataSource::synthetic) {
            // setting2 swaps which synthetic distribution is learned first
            const std::uint64_t stream_a =
                cfg.setting == Setting::setting1 ? kStreamFirstTask : kStreamSecondTask;
            const std::uint64_t stream_b =
                cfg.setting == Setting::setting1 ? kStreamSecondTask : kStreamFirstTask;
            auto [pool_a, test_a] = synthetic_train_test(e, cfg, stream_a, "synthetic-a");
            auto [pool_b, test_b] = synthetic_train_test(e, cfg, stream_b, "synthetic-b");
            first = with_validation_split(e, cfg, pool_a, test_a, 0);
            second = with_validation_split(e, cfg, pool_b, test_b, 1);
        } else {
            const LabeledDataset* pool_a = keep(
                e, load_idx_dataset(cfg.first_images, cfg.first_labels, cfg.classes, "first"));
            const LabeledDataset* test_a = keep(
                e, load_idx_dataset(cfg.first_test_images, cfg.first_test_labels, cfg.classes,
                                    "first-test"));
            const LabeledDataset* pool_b = keep(
                e, load_idx_dataset(cfg.second_images, cfg.second_labels, cfg.classes, "second"));
            const LabeledDataset* test_b = keep(
                e, load_idx_dataset(cfg.second_test_images, cfg.second_test_labels, cfg.classes,
                                    "second-test"));
            first = with_validation_split(e, cfg, pool_a, test_a, 0);
            second = with_validation_split(e, cfg, pool_b, test_b, 1);
        }
        const TaskDatasets task_data[2] = {first, second};
        for (std::size_t i = 0; i < 2; ++i) {
            TaskView view;
            view.train = task_data[i].train;
            view.validation = task_data[i].validation;
            view.test = task_data[i].test;
            view.epochs = epochs[i];
            view.name = "task" + std::to_string(i + 1);
            e.sequence.tasks.push_back(std::move(view));
        }
    } else {
        // setting3: one base dataset, permuted per task; no validation data
        const LabeledDataset* base_train = nullptr;
        const LabeledDataset* base_test = nullptr;
        if (cfg.source == DataSource::synthetic) {
            auto [train, test] = synthetic_train_test(e, cfg, kStreamFirstTask, "synthetic-base");
            base_train = train;
            base_test = test;
        } else {
            base_train = keep(
                e, load_idx_dataset(cfg.first_images, cfg.first_labels, cfg.classes, "base"));
            base_test = keep(e, load_idx_dataset(cfg.first_test_images, cfg.first_test_labels,
                                                 cfg.classes, "base-test"));
        }
        for (std::size_t i = 0; i < cfg.num_tasks; ++i) {
            PermutationTask task = make_permuted_task(*base_train, permutation_seed(cfg, i));
            TaskView view;
            view.train = base_train;
            view.validation = nullptr;
            view.test = base_test;
            view.pixel_permutation = std::move(task.pixel_permutation);
            view.epochs = epochs[i];
            view.name = "perm" + std::to_string(i + 1);
            e.sequence.tasks.push_back(std::move(view));
        }
    }
    e.sequence.name = setting_name(cfg.setting);

    ContinualRunConfig& run = e.run;
    run.sequence = &e.sequence;
    run.model_spec = make_mlp_specs(cfg.dim, cfg.hidden, cfg.classes);
    run.first_task_optimizer = make_first_optimizer(cfg);
    run.subsequent_optimizer = make_subsequent_optimizer(cfg);
    run.method = cfg.method;
    run.seeds = cfg.seeds;
    run.batch_size = cfg.batch_size;
    run.ewc.lambda = cfg.ewc_lambda;
    run.ewc.fisher_sample_count = cfg.ewc_samples;
    run.jobs = cfg.jobs;
    run.run_id = cfg.effective_run_id();
    run.validate();
    return experiment;
}

void build_cv_folds(ContinualExperiment& e, const ExperimentConfig& cfg) {
    if (!e.fold_sequences.empty()) return;
    const std::size_t folds = cfg.cv_folds;
    const LabeledDataset& base = *e.sequence.tasks.front().train;
    const std::size_t n = base.size();
    if (folds > n) {
        throw ArgumentError("cv_folds exceeds the training set size");
    }
    Prng rng = Prng::substream(cfg.data_seed, kStreamFoldSplit);
    const auto order = fisher_yates_permutation(rng, n);

    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t begin = f * n / folds;
        const std::size_t end = (f + 1) * n / folds;
        auto gather = [&](std::size_t from, std::size_t to, bool inside_fold,
                          const std::string& name) {
            std::size_t count = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const bool in_fold = (i >= from && i < to);
                if (in_fold == inside_fold) ++count;
            }
            DenseMatrix inputs(count, base.dim(), 0.0);
            std::vector<std::uint8_t> labels(count);
            std::size_t row = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const bool in_fold = (i >= from && i < to);
                if (in_fold != inside_fold) continue;
                const std::size_t src = order[i];
                std::copy(base.inputs.row_ptr(src), base.inputs.row_ptr(src) + base.dim(),
                          inputs.row_ptr(row));
                labels[row] = base.labels[src];
                ++row;
            }
            return make_labeled_dataset(std::move(inputs), std::move(labels), base.num_classes,
                                        name);
        };
        const LabeledDataset* fold_train =
            keep(e, gather(begin, end, false, "fold" + std::to_string(f) + "/train"));
        const LabeledDataset* fold_validation =
            keep(e, gather(begin, end, true, "fold" + std::to_string(f) + "/validation"));

        TaskSequence seq;
        seq.name = e.sequence.name + "/fold" + std::to_string(f);
        for (const TaskView& task : e.sequence.tasks) {
            TaskView view = task;
            view.train = fold_train;
            view.validation = fold_validation;
            seq.tasks.push_back(std::move(view));
        }
        e.fold_sequences.push_back(std::move(seq));
    }
}

std::vector<ContinualRunConfig> gridsearch_fold_configs(ContinualExperiment& e,
                                                        const ExperimentConfig& cfg) {
    if (cfg.method != MethodTag::weight_friction) {
        throw ConfigError("gridsearch requires method = weight_friction");
    }
    std::vector<ContinualRunConfig> configs;
    bool have_validation = true;
    for (const TaskView& task : e.sequence.tasks) {
        if (!task.validation) have_validation = false;
    }
    if (have_validation) {
        configs.push_back(e.run);
        return configs;
    }
    build_cv_folds(e, cfg);
    for (const TaskSequence& seq : e.fold_sequences) {
        ContinualRunConfig fold_cfg = e.run;
        fold_cfg.sequence = &seq;
        fold_cfg.run_id = e.run.run_id + "/" + seq.name;
        configs.push_back(std::move(fold_cfg));
    }
    return configs;
}

} // namespace wf

#ifndef WF_EXPERIMENT_HPP
#define WF_EXPERIMENT_HPP

#include <memory>

#include "wf/config.hpp"

namespace wf {

/// A continual run materialized from a config: owns every dataset the task
/// views borrow, so it must stay put once built.
struct ContinualExperiment {
    std::vector<std::unique_ptr<LabeledDataset>> storage;
    TaskSequence sequence;
    ContinualRunConfig run;

    // setting3 gridsearch: one sequence per cross-validation fold, with the
    // fold carved out of the training data as validation.
    std::vector<TaskSequence> fold_sequences;

    ContinualExperiment() = default;
    ContinualExperiment(const ContinualExperiment&) = delete;
    ContinualExperiment& operator=(const ContinualExperiment&) = delete;
};

/// Builds datasets (synthetic or IDX by path) and the task sequence for a
/// continual setting. Throws DataError when a required file is missing.
std::unique_ptr<ContinualExperiment> build_continual_experiment(const ExperimentConfig& cfg);

/// Adds fold_sequences (cv_folds of them) for tuning when tasks lack
/// validation splits; settings 1-2 already carry validation and do not
/// need folds.
void build_cv_folds(ContinualExperiment& experiment, const ExperimentConfig& cfg);

/// Fold run configs for gridsearch_mu: settings 1-2 give one config (their
/// own validation splits); setting3 gives one per carved fold.
std::vector<ContinualRunConfig> gridsearch_fold_configs(ContinualExperiment& experiment,
                                                        const ExperimentConfig& cfg);

} // namespace wf

#endif // WF_EXPERIMENT_HPP

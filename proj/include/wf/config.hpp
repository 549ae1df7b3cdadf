#ifndef WF_CONFIG_HPP
#define WF_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wf/continual.hpp"

namespace wf {

enum class Setting { setting1, setting2, setting3, convex };
enum class DataSource { synthetic, idx };

std::string setting_name(Setting s);

/// Everything a run needs, resolvable from a preset plus explicit keys.
/// The file format is line-oriented `key = value` under `[section]` headers;
/// `#` starts a comment. Unknown keys are rejected with their line number.
struct ExperimentConfig {
    // [experiment]
    std::string preset;
    Setting setting = Setting::setting1;
    MethodTag method = MethodTag::vanilla;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::string output = "runs/out";
    std::size_t jobs = 1;
    std::string run_id; // empty -> "<setting>-<method>"

    // [data]
    DataSource source = DataSource::synthetic;
    std::size_t classes = 10;
    std::size_t dim = 784;
    std::size_t train_per_task = 2000;
    std::size_t test_per_task = 1000;
    double noise = 0.07;
    std::uint64_t data_seed = 9001;
    std::size_t num_tasks = 5; // setting3
    double train_fraction = 0.8;
    std::uint64_t split_seed = 4242;
    std::string first_images, first_labels, first_test_images, first_test_labels;
    std::string second_images, second_labels, second_test_images, second_test_labels;

    // [model]
    std::vector<std::size_t> hidden{64};

    // [training]
    std::vector<std::size_t> epochs{10, 20}; // one value replicates across tasks
    std::size_t batch_size = 64;

    // [optimizer]
    double alpha = 0.01;                   // Adam rate: task 1 always, later tasks for
                                           // vanilla/ewc
    std::optional<double> alpha_wf;        // friction-step rate on later tasks; default alpha
    FrictionKind friction = FrictionKind::logistic_bell;
    double mu = 5.0;
    std::vector<double> mu_grid{0.5, 1, 2, 5, 10, 20};
    std::optional<std::vector<double>> mu_schedule;
    bool friction_on_biases = false;
    double ewc_lambda = 100.0;
    std::size_t ewc_samples = 1000;
    std::size_t cv_folds = 2; // setting3 gridsearch

    // [convergence]
    std::size_t conv_max_steps = 0; // 0 keeps per-problem suite defaults
    double conv_stop_gap = 1e-9;
    std::vector<double> conv_mu_values{0, 0.5, 1, 5};
    double conv_alpha_scale = 1.0; // alpha = scale / L
    bool conv_force = false;

    double effective_alpha_wf() const { return alpha_wf ? *alpha_wf : alpha; }
    std::string effective_run_id() const;
    std::size_t task_count() const;
    std::vector<std::size_t> epochs_per_task() const; // replicated/validated
};

std::vector<std::string> preset_names();

/// Parses and validates; total — returns a complete config or throws
/// ConfigError naming the offending line and key.
ExperimentConfig parse_config(const std::string& text);

/// Applies one `section.key = value` assignment (CLI overrides reuse the
/// same machinery as the file parser).
void apply_config_key(ExperimentConfig& cfg, const std::string& section, const std::string& key,
                      const std::string& value);

void apply_preset(ExperimentConfig& cfg, const std::string& name);

/// Cross-field validation; parse_config calls this, CLI overrides re-call it.
void validate_config(const ExperimentConfig& cfg);

/// Echo-back with every effective value materialized; re-parsing the
/// snapshot reproduces the config exactly.
std::string config_snapshot(const ExperimentConfig& cfg);

} // namespace wf

#endif // WF_CONFIG_HPP

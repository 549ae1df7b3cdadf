#include "wf/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "wf/convergence.hpp"
#include "wf/experiment.hpp"

namespace wf {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << contents;
}

std::string accuracy_matrix_csv(const ContinualResult& result) {
    std::string csv = "seed,after_task,task,accuracy\n";
    for (const SeedRunResult& seed_run : result.per_seed) {
        for (std::size_t i = 0; i < seed_run.test_matrix.tasks(); ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                csv += std::to_string(seed_run.seed) + "," + std::to_string(i + 1) + "," +
                       std::to_string(j + 1) + "," + num(seed_run.test_matrix.rows[i][j]) + "\n";
            }
        }
    }
    for (std::size_t i = 0; i < result.mean_test_matrix.tasks(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            csv += "mean," + std::to_string(i + 1) + "," + std::to_string(j + 1) + "," +
                   num(result.mean_test_matrix.rows[i][j]) + "\n";
        }
    }
    return csv;
}

std::string resource_csv(const std::string& method, const ContinualResult& result) {
    std::string csv = "method,wall_seconds,memory_slots,relative_time,relative_memory\n";
    csv += method + "," + num(result.wall_seconds) + "," + std::to_string(result.memory_slots) +
           ",,\n"; // relative columns need >= 2 methods; cmd_report fills them
    return csv;
}

ordered_json reference_costs_json() {
    const ReferenceRelativeCosts ref;
    return ordered_json{
        {"note", "published reference costs for baselines not reimplemented here; "
                 "reported values, never measured by this harness"},
        {"time_speedup_vs_agem", ref.time_speedup_vs_agem},
        {"time_speedup_vs_pnn", ref.time_speedup_vs_pnn},
        {"time_speedup_vs_ewc", ref.time_speedup_vs_ewc},
        {"memory_reduction_vs_pnn", ref.memory_reduction_vs_pnn},
        {"memory_reduction_vs_agem", ref.memory_reduction_vs_agem},
        {"memory_reduction_vs_ewc", ref.memory_reduction_vs_ewc}};
}

ordered_json summary_json(const ExperimentConfig& cfg, const ContinualResult& result) {
    ordered_json summary;
    summary["run_id"] = cfg.effective_run_id();
    summary["setting"] = setting_name(cfg.setting);
    summary["method"] = method_name(result.method);
    summary["prng_algorithm"] = Prng::kAlgorithmId;
    summary["seeds"] = cfg.seeds;
    ordered_json aborted = ordered_json::array();
    for (const SeedRunResult& seed_run : result.per_seed) {
        if (seed_run.aborted) {
            aborted.push_back({{"seed", seed_run.seed}, {"reason", seed_run.abort_reason}});
        }
    }
    summary["aborted_seeds"] = aborted;
    summary["parameter_count"] = result.parameter_count;
    summary["memory_slots"] = result.memory_slots;
    summary["wall_seconds"] = result.wall_seconds;
    summary["mean_accuracy_matrix"] = result.mean_test_matrix.rows;
    ordered_json averages = ordered_json::array();
    for (const auto& row : result.mean_test_matrix.rows) {
        averages.push_back(average_accuracy(row));
    }
    summary["average_accuracy_after_each_task"] = averages;
    if (!result.mean_validation_after_final.empty()) {
        summary["mean_validation_after_final"] = result.mean_validation_after_final;
    }
    summary["reference_relative_costs"] = reference_costs_json();
    return summary;
}

void write_run_artifacts(const ExperimentConfig& cfg, const ContinualResult& result,
                         const ordered_json& summary) {
    const fs::path dir(cfg.output);
    write_file((dir / "accuracy_matrix.csv").string(), accuracy_matrix_csv(result));
    write_file((dir / "resource_report.csv").string(),
               resource_csv(method_name(result.method), result));
    write_file((dir / "summary.json").string(), summary.dump(2) + "\n");
}

int run_convergence_suite(const ExperimentConfig& cfg, std::ostream& out) {
    const fs::path dir(cfg.output);
    fs::create_directories(dir);
    write_file((dir / "config_snapshot.cfg").string(), config_snapshot(cfg));

    bool all_ok = true;
    ordered_json problems = ordered_json::array();
    out << "convergence suite: alpha = " << cfg.conv_alpha_scale << "/L, stop gap "
        << cfg.conv_stop_gap << "\n";
    for (const SuiteEntry& entry : convergence_suite()) {
        for (double mu : cfg.conv_mu_values) {
            ConvexRunConfig run_cfg;
            run_cfg.alpha = cfg.conv_alpha_scale / entry.problem.lipschitz;
            run_cfg.friction = {FrictionKind::logistic_bell, mu};
            run_cfg.max_steps = cfg.conv_max_steps ? cfg.conv_max_steps : entry.max_steps;
            run_cfg.stop_gap = cfg.conv_stop_gap;
            run_cfg.force_hypothesis_violation = cfg.conv_force;

            RegretTrace trace = run_wf_convex(entry.problem, run_cfg, entry.w_start);
            const DescentReport descent = check_descent(trace);
            const RegretBoundReport bound =
                check_regret_bound(trace, run_cfg.alpha, entry.w_start, entry.problem.w_star);

            bool identical_to_sgd = true;
            if (mu == 0.0) {
                PairedTraces paired = compare_to_sgd(entry.problem, run_cfg, entry.w_start);
                identical_to_sgd = paired.wf.losses == paired.sgd.losses &&
                                   paired.wf.w_final == paired.sgd.w_final;
            }

            std::string csv = "step,loss,regret,g_min\n";
            for (std::size_t t = 0; t < trace.steps_taken; ++t) {
                csv += std::to_string(t + 1) + "," + num(trace.losses[t]) + "," +
                       num(trace.regret[t]) + "," + num(trace.g_min_step[t]) + "\n";
            }
            char mu_buf[32];
            std::snprintf(mu_buf, sizeof mu_buf, "%g", mu);
            write_file((dir / ("trace_" + entry.problem.name + "_mu" + mu_buf + ".csv")).string(),
                       csv);

            const bool ok = descent.ok && bound.holds_for_all_t && !bound.bound_unbounded &&
                            trace.final_gap() < 1e-6 && identical_to_sgd;
            all_ok = all_ok && ok;
            char line[256];
            std::snprintf(line, sizeof line,
                          "%-14s mu=%-4g steps=%-7zu gap=%.3e regret=%.6g bound=%.6g "
                          "margin=%.6g %s\n",
                          entry.problem.name.c_str(), mu, trace.steps_taken, trace.final_gap(),
                          bound.final_regret, bound.final_bound, bound.min_margin,
                          ok ? "ok" : "VIOLATION");
            out << line;

            problems.push_back({{"problem", entry.problem.name},
                                {"mu", mu},
                                {"alpha", run_cfg.alpha},
                                {"lipschitz", entry.problem.lipschitz},
                                {"steps", trace.steps_taken},
                                {"final_gap", trace.final_gap()},
                                {"final_regret", bound.final_regret},
                                {"final_bound", bound.final_bound},
                                {"min_margin", bound.min_margin},
                                {"descent_ok", descent.ok},
                                {"bound_holds", bound.holds_for_all_t},
                                {"identical_to_sgd_at_mu0", identical_to_sgd}});
        }
    }
    ordered_json summary;
    summary["suite"] = "convergence";
    summary["prng_algorithm"] = Prng::kAlgorithmId;
    summary["alpha_scale"] = cfg.conv_alpha_scale;
    summary["stop_gap"] = cfg.conv_stop_gap;
    summary["all_checks_pass"] = all_ok;
    summary["problems"] = problems;
    write_file((dir / "summary.json").string(), summary.dump(2) + "\n");
    out << (all_ok ? "all bound checks pass\n" : "bound checks FAILED\n");
    return all_ok ? 0 : 1;
}

} // namespace

int cmd_run(const ExperimentConfig& cfg, std::ostream& out) {
    validate_config(cfg);
    if (cfg.setting == Setting::convex) {
        return run_convergence_suite(cfg, out);
    }
    const fs::path dir(cfg.output);
    fs::create_directories(dir);
    write_file((dir / "config_snapshot.cfg").string(), config_snapshot(cfg));

    auto experiment = build_continual_experiment(cfg);
    std::ofstream log((dir / "run_log.jsonl").string());
    if (!log) throw DataError("cannot write run log under '" + cfg.output + "'");

    ContinualResult result = run_continual(experiment->run, &log);
    write_run_artifacts(cfg, result, summary_json(cfg, result));

    out << "run " << cfg.effective_run_id() << ": " << result.per_seed.size() << " seeds, "
        << result.aborted_seeds << " aborted\n";
    if (!result.mean_test_matrix.empty()) {
        const auto& last = result.mean_test_matrix.rows.back();
        out << "mean test accuracy after final task:";
        for (double a : last) {
            char buf[16];
            std::snprintf(buf, sizeof buf, " %.4f", a);
            out << buf;
        }
        out << "\n";
    }
    return result.aborted_seeds > 0 ? 4 : 0;
}

int cmd_convergence(const ExperimentConfig& cfg, std::ostream& out) {
    ExperimentConfig convex_cfg = cfg;
    convex_cfg.setting = Setting::convex;
    validate_config(convex_cfg);
    return run_convergence_suite(convex_cfg, out);
}

int cmd_gridsearch(const ExperimentConfig& cfg, std::ostream& out) {
    validate_config(cfg);
    if (cfg.setting == Setting::convex) {
        throw ConfigError("gridsearch applies to continual settings, not convex");
    }
    ExperimentConfig wf_cfg = cfg;
    wf_cfg.method = MethodTag::weight_friction; // the grid tunes friction only

    const fs::path dir(wf_cfg.output);
    fs::create_directories(dir);
    write_file((dir / "config_snapshot.cfg").string(), config_snapshot(wf_cfg));

    auto experiment = build_continual_experiment(wf_cfg);
    const auto fold_configs = gridsearch_fold_configs(*experiment, wf_cfg);

    std::ofstream log((dir / "run_log.jsonl").string());
    GridsearchResult result = gridsearch_mu(fold_configs, wf_cfg.mu_grid, &log);

    std::string csv = "mu,validation_score,selected\n";
    for (std::size_t i = 0; i < result.scores.size(); ++i) {
        csv += num(result.scores[i].first) + "," + num(result.scores[i].second) + "," +
               (i == result.best_index ? "1" : "0") + "\n";
    }
    write_file((dir / "mu_scores.csv").string(), csv);

    const ContinualResult& best = result.per_mu[result.best_index];
    write_file((dir / "accuracy_matrix.csv").string(), accuracy_matrix_csv(best));
    write_file((dir / "resource_report.csv").string(),
               resource_csv(method_name(best.method), best));

    ordered_json summary = summary_json(wf_cfg, best);
    summary["selected_mu"] = result.best_mu;
    ordered_json scores = ordered_json::array();
    for (const auto& [mu, score] : result.scores) {
        scores.push_back({{"mu", mu}, {"validation_score", score}});
    }
    summary["mu_scores"] = scores;
    write_file((dir / "summary.json").string(), summary.dump(2) + "\n");

    out << "gridsearch over " << result.scores.size() << " mu values\n";
    for (std::size_t i = 0; i < result.scores.size(); ++i) {
        char line[96];
        std::snprintf(line, sizeof line, "  mu=%-6g score=%.4f%s\n", result.scores[i].first,
                      result.scores[i].second, i == result.best_index ? "  <- selected" : "");
        out << line;
    }
    return best.aborted_seeds > 0 ? 4 : 0;
}

int cmd_report(const std::string& run_dir, std::ostream& out) {
    if (!fs::exists(run_dir)) {
        out << "report: directory '" << run_dir << "' does not exist\n";
        return 1;
    }
    std::vector<fs::path> summaries;
    for (const auto& entry : fs::recursive_directory_iterator(run_dir)) {
        if (entry.is_regular_file() && entry.path().filename() == "summary.json") {
            summaries.push_back(entry.path());
        }
    }
    std::sort(summaries.begin(), summaries.end());
    // newest per method wins when a method appears in several run directories
    std::map<std::string, ordered_json> by_method;
    for (const fs::path& path : summaries) {
        std::ifstream in(path);
        ordered_json summary = ordered_json::parse(in, nullptr, false);
        if (summary.is_discarded() || !summary.contains("method") ||
            !summary.contains("mean_accuracy_matrix")) {
            continue; // convergence summaries and foreign files are skipped
        }
        by_method[summary["method"].get<std::string>()] = std::move(summary);
    }
    if (by_method.empty()) {
        out << "report: no run summaries under '" << run_dir << "'\n";
        return 1;
    }

    out << "average accuracy after each task (mean over seeds)\n";
    std::string csv = "method,after_task,average_accuracy,retained_task1_accuracy\n";
    for (const auto& [method, summary] : by_method) {
        out << "  " << method << ":";
        const auto& matrix = summary["mean_accuracy_matrix"];
        for (std::size_t i = 0; i < matrix.size(); ++i) {
            const auto row = matrix[i].get<std::vector<double>>();
            const double avg = average_accuracy(row);
            char buf[32];
            std::snprintf(buf, sizeof buf, " %.4f", avg);
            out << buf;
            csv += method + "," + std::to_string(i + 1) + "," + num(avg) + "," +
                   num(row.front()) + "\n";
        }
        out << "\n";
    }
    write_file((fs::path(run_dir) / "report.csv").string(), csv);

    if (by_method.count("vanilla") && by_method.count("weight_friction")) {
        const auto v_row =
            by_method["vanilla"]["mean_accuracy_matrix"].back().get<std::vector<double>>();
        const auto w_row = by_method["weight_friction"]["mean_accuracy_matrix"].back()
                               .get<std::vector<double>>();
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "retained task-1 accuracy: vanilla %.4f, weight_friction %.4f "
                      "(delta %+.4f)\n",
                      v_row.front(), w_row.front(), w_row.front() - v_row.front());
        out << buf;
    }

    if (by_method.size() >= 2) {
        std::vector<MethodCost> costs;
        for (const auto& [method, summary] : by_method) {
            costs.push_back({method, summary["wall_seconds"].get<double>(),
                             summary["memory_slots"].get<std::size_t>()});
        }
        const ResourceReport resources = resource_report(costs);
        out << "relative costs (costliest method = 1)\n";
        for (std::size_t i = 0; i < costs.size(); ++i) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "  %-16s time %.3f  memory %.3f\n",
                          costs[i].method.c_str(), resources.relative_time[i],
                          resources.relative_memory[i]);
            out << buf;
        }
    }
    return 0;
}

} // namespace wf

// Experiment front end: continual-learning runs, mu gridsearch, the convex
// convergence suite, and report aggregation over finished runs.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wf/commands.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string preset;
    std::string seed_list;
    std::string mu;
    std::string out_dir;
    std::string jobs;
    bool force_hypothesis_violation = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "experiment config file");
    cmd->add_option("--preset", flags.preset, "named preset (see --list-presets)");
    cmd->add_option("--seed-list", flags.seed_list, "comma-separated seed override");
    cmd->add_option("--mu", flags.mu, "friction spread override");
    cmd->add_option("--out", flags.out_dir, "output directory override");
    cmd->add_option("--jobs", flags.jobs, "parallel seed runs");
    cmd->add_flag("--force-hypothesis-violation", flags.force_hypothesis_violation,
                  "allow alpha outside (0, 1/L] in convergence runs");
}

wf::ExperimentConfig resolve_config(const CommonFlags& flags) {
    std::string text;
    if (!flags.preset.empty()) {
        text += "[experiment]\npreset = " + flags.preset + "\n";
    }
    if (!flags.config_path.empty()) {
        std::ifstream in(flags.config_path);
        if (!in) {
            throw wf::ConfigError("cannot open config file '" + flags.config_path + "'");
        }
        std::stringstream buffer;
        buffer << in.rdbuf();
        text += buffer.str();
    }
    wf::ExperimentConfig cfg = wf::parse_config(text);
    if (!flags.seed_list.empty()) wf::apply_config_key(cfg, "experiment", "seeds", flags.seed_list);
    if (!flags.mu.empty()) wf::apply_config_key(cfg, "optimizer", "mu", flags.mu);
    if (!flags.out_dir.empty()) wf::apply_config_key(cfg, "experiment", "output", flags.out_dir);
    if (!flags.jobs.empty()) wf::apply_config_key(cfg, "experiment", "jobs", flags.jobs);
    if (flags.force_hypothesis_violation) {
        wf::apply_config_key(cfg, "convergence", "force_hypothesis_violation", "true");
    }
    wf::validate_config(cfg);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weight-friction optimization lab"};
    app.require_subcommand(1);

    bool list_presets = false;
    app.add_flag("--list-presets", list_presets, "print known presets and exit");

    CommonFlags run_flags, convergence_flags, gridsearch_flags;
    CLI::App* run_cmd = app.add_subcommand("run", "execute a configured experiment");
    add_common_flags(run_cmd, run_flags);
    CLI::App* conv_cmd = app.add_subcommand("convergence", "run the convex verification suite");
    add_common_flags(conv_cmd, convergence_flags);
    CLI::App* grid_cmd = app.add_subcommand("gridsearch", "tune mu over the configured grid");
    add_common_flags(grid_cmd, gridsearch_flags);

    std::string report_dir;
    CLI::App* report_cmd = app.add_subcommand("report", "summarize finished runs");
    report_cmd->add_option("dir", report_dir, "directory holding run outputs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (list_presets) {
        for (const auto& name : wf::preset_names()) std::cout << name << "\n";
        return 0;
    }

    try {
        if (run_cmd->parsed()) {
            return wf::cmd_run(resolve_config(run_flags), std::cout);
        }
        if (conv_cmd->parsed()) {
            return wf::cmd_convergence(resolve_config(convergence_flags), std::cout);
        }
        if (grid_cmd->parsed()) {
            return wf::cmd_gridsearch(resolve_config(gridsearch_flags), std::cout);
        }
        if (report_cmd->parsed()) {
            return wf::cmd_report(report_dir, std::cout);
        }
    } catch (const wf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const wf::ArgumentError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const wf::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const wf::FormatError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const wf::LengthError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const wf::LabelError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const wf::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

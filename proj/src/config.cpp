#include "wf/config.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <sstream>

namespace wf {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + value +
                          "'");
    }
}

std::size_t parse_size(const std::string& key, const std::string& value) {
    return static_cast<std::size_t>(parse_u64(key, value));
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("key '" + key + "': expected true/false, got '" + value + "'");
}

std::vector<std::string> split_commas(const std::string& value) {
    std::vector<std::string> parts;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) parts.push_back(t);
    }
    return parts;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& part : split_commas(value)) out.push_back(parse_double(key, part));
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& value) {
    std::vector<std::size_t> out;
    for (const auto& part : split_commas(value)) out.push_back(parse_size(key, part));
    return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& key, const std::string& value) {
    std::vector<std::uint64_t> out;
    for (const auto& part : split_commas(value)) out.push_back(parse_u64(key, part));
    return out;
}

template <typename T, typename Fmt>
std::string join_list(const std::vector<T>& values, Fmt fmt) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += fmt(values[i]);
    }
    return out;
}

Setting parse_setting(const std::string& value) {
    if (value == "setting1") return Setting::setting1;
    if (value == "setting2") return Setting::setting2;
    if (value == "setting3") return Setting::setting3;
    if (value == "convex") return Setting::convex;
    throw ConfigError("unknown setting '" + value + "'");
}

MethodTag parse_method(const std::string& value) {
    if (value == "vanilla") return MethodTag::vanilla;
    if (value == "weight_friction") return MethodTag::weight_friction;
    if (value == "ewc") return MethodTag::ewc;
    throw ConfigError("unknown method '" + value + "'");
}

FrictionKind parse_friction(const std::string& value) {
    if (value == "logistic_bell") return FrictionKind::logistic_bell;
    if (value == "gaussian_bell") return FrictionKind::gaussian_bell;
    if (value == "identity") return FrictionKind::identity;
    throw ConfigError("unknown friction kind '" + value + "'");
}

std::string friction_name(FrictionKind kind) {
    switch (kind) {
    case FrictionKind::logistic_bell: return "logistic_bell";
    case FrictionKind::gaussian_bell: return "gaussian_bell";
    case FrictionKind::identity: return "identity";
    }
    return "unknown";
}

struct KeyHandler {
    const char* section;
    const char* name;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<KeyHandler>& key_registry() {
    static const std::vector<KeyHandler> registry = [] {
        std::vector<KeyHandler> keys;
        auto add = [&](const char* section, const char* name, auto set, auto get) {
            keys.push_back({section, name, set, get});
        };

        add("experiment", "preset",
            [](ExperimentConfig& c, const std::string& v) { apply_preset(c, v); },
            [](const ExperimentConfig& c) { return c.preset; });
        add("experiment", "setting",
            [](ExperimentConfig& c, const std::string& v) { c.setting = parse_setting(v); },
            [](const ExperimentConfig& c) { return setting_name(c.setting); });
        add("experiment", "method",
            [](ExperimentConfig& c, const std::string& v) { c.method = parse_method(v); },
            [](const ExperimentConfig& c) { return method_name(c.method); });
        add("experiment", "seeds",
            [](ExperimentConfig& c, const std::string& v) { c.seeds = parse_u64_list("seeds", v); },
            [](const ExperimentConfig& c) {
                return join_list(c.seeds, [](std::uint64_t s) { return std::to_string(s); });
            });
        add("experiment", "output",
            [](ExperimentConfig& c, const std::string& v) { c.output = v; },
            [](const ExperimentConfig& c) { return c.output; });
        add("experiment", "jobs",
            [](ExperimentConfig& c, const std::string& v) { c.jobs = parse_size("jobs", v); },
            [](const ExperimentConfig& c) { return std::to_string(c.jobs); });
        add("experiment", "run_id",
            [](ExperimentConfig& c, const std::string& v) { c.run_id = v; },
            [](const ExperimentConfig& c) { return c.effective_run_id(); });

        add("data", "source",
            [](ExperimentConfig& c, const std::string& v) {
                if (v == "synthetic") c.source = DataSource::synthetic;
                else if (v == "idx") c.source = DataSource::idx;
                else throw ConfigError("unknown data source '" + v + "'");
            },
            [](const ExperimentConfig& c) {
                return c.source == DataSource::synthetic ? "synthetic" : "idx";
            });
        add("data", "classes",
            [](ExperimentConfig& c, const std::string& v) { c.classes = parse_size("classes", v); },
            [](const ExperimentConfig& c) { return std::to_string(c.classes); });
        add("data", "dim",
            [](ExperimentConfig& c, const std::string& v) { c.dim = parse_size("dim", v); },
            [](const ExperimentConfig& c) { return std::to_string(c.dim); });
        add("data", "train_per_task",
            [](ExperimentConfig& c, const std::string& v) {
                c.train_per_task = parse_size("train_per_task", v);
            },
            [](const ExperimentConfig& c) { return std::to_string(c.train_per_task); });
        add("data", "test_per_task",
            [](ExperimentConfig& c, const std::string& v) {
                c.test_per_task = parse_size("test_per_task", v);
            },
            [](const ExperimentConfig& c) { return std::to_string(c.test_per_task); });
        add("data", "noise",
            [](ExperimentConfig& c, const std::string& v) { c.noise = parse_double("noise", v); },
            [](const ExperimentConfig& c) { return format_double(c.noise); });
        add("data", "data_seed",
            [](ExperimentConfig& c, const std::string& v) { c.data_seed = parse_u64("data_seed", v); },
            [](const ExperimentConfig& c) { return std::to_string(c.data_seed); });
        add("data", "num_tasks",
            [](ExperimentConfig& c, const std::string& v) {
                c.num_tasks = parse_size("num_tasks", v);
            },
            [](const ExperimentConfig& c) { return std::to_string(c.num_tasks); });
        add("data", "train_fraction",
            [](ExperimentConfig& c, const std::string& v) {
                c.train_fraction = parse_double("train_fraction", v);
            },
            [](const ExperimentConfig& c) { return format_double(c.train_fraction); });
        add("data", "split_seed",
            [](ExperimentConfig& c, const std::string& v) {
                c.split_seed = parse_u64("split_seed", v);
            },
            [](const ExperimentConfig& c) { return std::to_string(c.split_seed); });
        auto add_path = [&](const char* name, std::string ExperimentConfig::* field) {
            add("data", name,
                [field](ExperimentConfig& c, const std::string& v) { c.*field = v; },
                [field](const ExperimentConfig& c) { return c.*field; });
        };
        add_path("first_images", &ExperimentConfig::first_images);
        add_path("first_labels", &ExperimentConfig::first_labels);
        add_path("first_test_images", &ExperimentConfig::first_test_images);
        add_path("first_test_labels", &ExperimentConfig::first_test_labels);
        add_path("second_images", &ExperimentConfig::second_images);
        add_path("second_labels", &ExperimentConfig::second_labels);
        add_path("second_test_images", &ExperimentConfig::second_test_images);
        add_path("second_test_labels", &ExperimentConfig::second_test_labels);

        add("model", "hidden",
            [](ExperimentConfig& c, const std::string& v) {
                c.hidden = parse_size_list("hidden", v);
            },
            [](const ExperimentConfig& c) {
                return join_list(c.hidden, [](std::size_t h) { return std::to_string(h); });
            });

        add("training", "epochs",
            [](ExperimentConfig& c, const std::string& v) {
                c.epochs = parse_size_list("epochs", v);
            },
            [](const ExperimentConfig& c) {
                return join_list(c.epochs, [](std::size_t e) { return std::to_string(e); });
            });
        add("training", "batch_size",
            [](ExperimentConfig& c, const std::string& v) {
                c.batch_size = parse_size("batch_size", v);
            },
            [](const ExperimentConfig& c) { return std::to_string(c.batch_size); });

        add("optimizer", "alpha",
            [](ExperimentConfig& c, const std::string& v) { c.alpha = parse_double("alpha", v); },
            [](const ExperimentConfig& c) { return format_double(c.alpha); });
        add("optimizer", "alpha_wf",
            [](ExperimentConfig& c, const std::string& v) {
                c.alpha_wf = parse_double("alpha_wf", v);
            },
            [](const ExperimentConfig& c) { return format_double(c.effective_alpha_wf()); });
        add("optimizer", "friction",
            [](ExperimentConfig& c, const std::string& v) { c.friction = parse_friction(v); },
            [](const ExperimentConfig& c) { return friction_name(c.friction); });
        add("optimizer", "mu",
            [](ExperimentConfig& c, const std::string& v) { c.mu = parse_double("mu", v); },
            [](const ExperimentConfig& c) { return format_double(c.mu); });
        add("optimizer", "mu_grid",
            [](ExperimentConfig& c, const std::string& v) {
                c.mu_grid = parse_double_list("mu_grid", v);
            },
            [](const ExperimentConfig& c) { return join_list(c.mu_grid, format_double); });
        add("optimizer", "mu_schedule",
            [](ExperimentConfig& c, const std::string& v) {
                if (trim(v).empty()) c.mu_schedule.reset();
                else c.mu_schedule = parse_double_list("mu_schedule", v);
            },
            [](const ExperimentConfig& c) {
                return c.mu_schedule ? join_list(*c.mu_schedule, format_double) : std::string();
            });
        add("optimizer", "friction_on_biases",
            [](ExperimentConfig& c, const std::string& v) {
                c.friction_on_biases = parse_bool("friction_on_biases", v);
            },
            [](const ExperimentConfig& c) {
                return c.friction_on_biases ? "true" : "false";
            });
        add("optimizer", "ewc_lambda",
            [](ExperimentConfig& c, const std::string& v) {
                c.ewc_lambda = parse_double("ewc_lambda", v);
            },
            [](const ExperimentConfig& c) { return format_double(c.ewc_lambda); });
        add("optimizer", "ewc_samples",
            [](ExperimentConfig& c, const std::string& v) {
                c.ewc_samples = parse_size("ewc_samples", v);
            },
            [](const ExperimentConfig& c) { return std::to_string(c.ewc_samples); });
        add("optimizer", "cv_folds",
            [](ExperimentConfig& c, const std::string& v) {
                c.cv_folds = parse_size("cv_folds", v);
            },
            [](const ExperimentConfig& c) { return std::to_string(c.cv_folds); });

        add("convergence", "max_steps",
            [](ExperimentConfig& c, const std::string& v) {
                c.conv_max_steps = parse_size("max_steps", v);
            },
            [](const ExperimentConfig& c) { return std::to_string(c.conv_max_steps); });
        add("convergence", "stop_gap",
            [](ExperimentConfig& c, const std::string& v) {
                c.conv_stop_gap = parse_double("stop_gap", v);
            },
            [](const ExperimentConfig& c) { return format_double(c.conv_stop_gap); });
        add("convergence", "mu_values",
            [](ExperimentConfig& c, const std::string& v) {
                c.conv_mu_values = parse_double_list("mu_values", v);
            },
            [](const ExperimentConfig& c) { return join_list(c.conv_mu_values, format_double); });
        add("convergence", "alpha_scale",
            [](ExperimentConfig& c, const std::string& v) {
                c.conv_alpha_scale = parse_double("alpha_scale", v);
            },
            [](const ExperimentConfig& c) { return format_double(c.conv_alpha_scale); });
        add("convergence", "force_hypothesis_violation",
            [](ExperimentConfig& c, const std::string& v) {
                c.conv_force = parse_bool("force_hypothesis_violation", v);
            },
            [](const ExperimentConfig& c) { return c.conv_force ? "true" : "false"; });
        return keys;
    }();
    return registry;
}

struct PresetEntry {
    const char* key; // "section.name"
    const char* value;
};

const std::vector<std::pair<std::string, std::vector<PresetEntry>>>& preset_table() {
    // Paper-scale presets mirror the published protocol (IDX datasets are
    // supplied by path). Desk presets are CI-scale synthetic stand-ins.
    static const std::vector<std::pair<std::string, std::vector<PresetEntry>>> presets = {
        {"paper1",
         {{"experiment.setting", "setting1"},
          {"experiment.seeds", "1,2,3,4,5,6,7,8,9,10"},
          {"data.source", "idx"},
          {"data.train_fraction", "0.8"},
          {"model.hidden", "256,256,256"},
          {"training.epochs", "50,100"},
          {"training.batch_size", "64"},
          {"optimizer.alpha", "0.01"},
          {"optimizer.alpha_wf", "0.01"},
          {"optimizer.mu_grid", "0.5,1,2,5,10,20"}}},
        {"paper2",
         {{"experiment.preset", "paper1"}, {"experiment.setting", "setting2"}}},
        {"paper3",
         {{"experiment.setting", "setting3"},
          {"experiment.seeds", "1,2,3,4,5,6,7,8,9,10"},
          {"data.source", "idx"},
          {"data.num_tasks", "10"},
          {"model.hidden", "256,256"},
          {"training.epochs", "5000"},
          {"training.batch_size", "64"},
          {"optimizer.alpha", "0.001"},
          {"optimizer.alpha_wf", "0.001"},
          {"optimizer.mu_grid", "0.5,1,2,5,10,20"}}},
        {"desk1",
         {{"experiment.setting", "setting1"},
          {"experiment.seeds", "101,102,103,104,105"},
          {"data.source", "synthetic"},
          {"data.classes", "10"},
          {"data.dim", "784"},
          {"data.train_per_task", "2000"},
          {"data.test_per_task", "1000"},
          {"data.noise", "0.07"},
          {"data.data_seed", "7001"},
          {"data.split_seed", "4242"},
          {"data.train_fraction", "0.8"},
          {"model.hidden", "64"},
          {"training.epochs", "10,20"},
          {"training.batch_size", "64"},
          {"optimizer.alpha", "0.01"},
          {"optimizer.alpha_wf", "0.1"},
          {"optimizer.mu", "5"},
          {"optimizer.mu_grid", "0.5,1,2,5,10,20"}}},
        {"desk2",
         {{"experiment.preset", "desk1"}, {"experiment.setting", "setting2"}}},
        {"desk3",
         {{"experiment.preset", "desk1"},
          {"experiment.setting", "setting3"},
          {"data.num_tasks", "5"},
          {"data.data_seed", "7003"},
          {"model.hidden", "64,64"},
          {"training.epochs", "10"}}},
        {"convex", {{"experiment.setting", "convex"}}},
    };
    return presets;
}

} // namespace

std::string setting_name(Setting s) {
    switch (s) {
    case Setting::setting1: return "setting1";
    case Setting::setting2: return "setting2";
    case Setting::setting3: return "setting3";
    case Setting::convex: return "convex";
    }
    return "unknown";
}

std::string ExperimentConfig::effective_run_id() const {
    if (!run_id.empty()) return run_id;
    return setting_name(setting) + "-" + method_name(method);
}

std::size_t ExperimentConfig::task_count() const {
    switch (setting) {
    case Setting::setting1:
    case Setting::setting2: return 2;
    case Setting::setting3: return num_tasks;
    case Setting::convex: return 0;
    }
    return 0;
}

std::vector<std::size_t> ExperimentConfig::epochs_per_task() const {
    const std::size_t tasks = task_count();
    if (epochs.size() == tasks) return epochs;
    if (epochs.size() == 1) return std::vector<std::size_t>(tasks, epochs[0]);
    throw ConfigError("epochs: expected 1 or " + std::to_string(tasks) + " values, got " +
                      std::to_string(epochs.size()));
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [name, entries] : preset_table()) names.push_back(name);
    return names;
}

void apply_preset(ExperimentConfig& cfg, const std::string& name) {
    for (const auto& [preset_name, entries] : preset_table()) {
        if (preset_name != name) continue;
        for (const PresetEntry& entry : entries) {
            const std::string qualified = entry.key;
            const auto dot = qualified.find('.');
            apply_config_key(cfg, qualified.substr(0, dot), qualified.substr(dot + 1),
                             entry.value);
        }
        cfg.preset = name;
        return;
    }
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
}

void apply_config_key(ExperimentConfig& cfg, const std::string& section, const std::string& key,
                      const std::string& value) {
    for (const KeyHandler& handler : key_registry()) {
        if (section == handler.section && key == handler.name) {
            handler.set(cfg, value);
            return;
        }
    }
    throw ConfigError("unknown key '" + section + "." + key + "'");
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.seeds.empty()) throw ConfigError("seeds: need at least one");
    if (cfg.output.empty()) throw ConfigError("output: must not be empty");
    if (cfg.jobs == 0) throw ConfigError("jobs: must be >= 1");
    if (cfg.classes < 2) throw ConfigError("classes: must be >= 2");
    if (cfg.classes > 256) throw ConfigError("classes: labels are bytes, max 256");
    if (cfg.dim == 0) throw ConfigError("dim: must be >= 1");
    if (cfg.train_per_task < cfg.classes || cfg.test_per_task < cfg.classes) {
        throw ConfigError("train_per_task/test_per_task: need at least one example per class");
    }
    if (cfg.noise < 0.0) throw ConfigError("noise: must be >= 0");
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
        throw ConfigError("train_fraction: must be in (0,1)");
    }
    if (cfg.setting == Setting::setting3 && cfg.num_tasks == 0) {
        throw ConfigError("num_tasks: must be >= 1");
    }
    if (cfg.batch_size == 0) throw ConfigError("batch_size: must be >= 1");
    if (!(cfg.alpha > 0.0)) throw ConfigError("alpha: must be > 0");
    if (cfg.alpha_wf && !(*cfg.alpha_wf > 0.0)) throw ConfigError("alpha_wf: must be > 0");
    if (cfg.mu < 0.0) throw ConfigError("mu: must be >= 0");
    if (cfg.mu_grid.empty()) throw ConfigError("mu_grid: must not be empty");
    for (double m : cfg.mu_grid) {
        if (m < 0.0) throw ConfigError("mu_grid: values must be >= 0");
    }
    if (cfg.mu_schedule) {
        for (double m : *cfg.mu_schedule) {
            if (m < 0.0) throw ConfigError("mu_schedule: multipliers must be >= 0");
        }
    }
    if (cfg.ewc_lambda < 0.0) throw ConfigError("ewc_lambda: must be >= 0");
    if (cfg.ewc_samples == 0) throw ConfigError("ewc_samples: must be >= 1");
    if (cfg.cv_folds < 2) throw ConfigError("cv_folds: must be >= 2");
    if (cfg.setting != Setting::convex) {
        (void)cfg.epochs_per_task(); // throws on a bad count
        for (std::size_t e : cfg.epochs) {
            if (e == 0) throw ConfigError("epochs: every budget must be >= 1");
        }
    }
    if (cfg.conv_stop_gap < 0.0) throw ConfigError("stop_gap: must be >= 0");
    if (!(cfg.conv_alpha_scale > 0.0)) throw ConfigError("alpha_scale: must be > 0");
    if (cfg.conv_mu_values.empty()) throw ConfigError("mu_values: must not be empty");
    for (double m : cfg.conv_mu_values) {
        if (m < 0.0) throw ConfigError("mu_values: values must be >= 0");
    }
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;

    struct Assignment {
        std::size_t line_no;
        std::string section, key, value;
    };
    std::vector<Assignment> assignments;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        if (section.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": key outside any [section]");
        }
        assignments.push_back(
            {line_no, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
    }

    // Preset lines expand first so explicit keys always win, wherever the
    // preset line sits in the file.
    for (const Assignment& a : assignments) {
        if (a.section == "experiment" && a.key == "preset") {
            try {
                apply_preset(cfg, a.value);
            } catch (const ConfigError& e) {
                throw ConfigError("line " + std::to_string(a.line_no) + ": " + e.what());
            }
        }
    }
    for (const Assignment& a : assignments) {
        if (a.section == "experiment" && a.key == "preset") continue;
        try {
            apply_config_key(cfg, a.section, a.key, a.value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(a.line_no) + ": " + e.what());
        }
    }
    validate_config(cfg);
    return cfg;
}

std::string config_snapshot(const ExperimentConfig& cfg) {
    std::string out;
    std::string current_section;
    for (const KeyHandler& handler : key_registry()) {
        if (handler.section != current_section) {
            if (!out.empty()) out += "\n";
            current_section = handler.section;
            out += "[" + current_section + "]\n";
        }
        if (std::string(handler.name) == "preset" && cfg.preset.empty()) {
            continue; // no preset applied; nothing to echo
        }
        out += std::string(handler.name) + " = " + handler.get(cfg) + "\n";
    }
    return out;
}

} // namespace wf

#include "config.hpp"

#include <functional>
#include <map>
#include <sstream>

#include "csv.hpp"

namespace mage {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : value) {
        if (c == ',') {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!trim(cur).empty() || !parts.empty()) parts.push_back(trim(cur));
    return parts;
}

// One settable key: how to assign from text and how to print the current value.
struct KeyHandler {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

std::map<std::string, KeyHandler> key_registry() {
    std::map<std::string, KeyHandler> reg;
    auto add = [&](const std::string& name, std::function<void(RunConfig&, const std::string&)> set,
                   std::function<std::string(const RunConfig&)> get) {
        reg[name] = {std::move(set), std::move(get)};
    };

    add("data.input", [](RunConfig& c, const std::string& v) { c.data.input = v; },
        [](const RunConfig& c) { return c.data.input; });
    add("data.oracle", [](RunConfig& c, const std::string& v) { c.data.oracle = v; },
        [](const RunConfig& c) { return c.data.oracle; });
    add("data.features", [](RunConfig& c, const std::string& v) { c.data.features = v; },
        [](const RunConfig& c) { return c.data.features; });
    add("data.scaler", [](RunConfig& c, const std::string& v) { c.data.scaler = v; },
        [](const RunConfig& c) { return c.data.scaler; });
    add("data.out_dir", [](RunConfig& c, const std::string& v) { c.data.out_dir = v; },
        [](const RunConfig& c) { return c.data.out_dir; });

    add("synth.seed",
        [](RunConfig& c, const std::string& v) { c.synth.seed = static_cast<std::uint64_t>(parse_long(v, "synth.seed")); },
        [](const RunConfig& c) { return std::to_string(c.synth.seed); });
    add("synth.n_traps",
        [](RunConfig& c, const std::string& v) { c.synth.n_traps = static_cast<int>(parse_long(v, "synth.n_traps")); },
        [](const RunConfig& c) { return std::to_string(c.synth.n_traps); });
    add("synth.n_weeks",
        [](RunConfig& c, const std::string& v) { c.synth.n_weeks = static_cast<int>(parse_long(v, "synth.n_weeks")); },
        [](const RunConfig& c) { return std::to_string(c.synth.n_weeks); });
    add("synth.missing_rate",
        [](RunConfig& c, const std::string& v) { c.synth.missing_rate = parse_double(v, "synth.missing_rate"); },
        [](const RunConfig& c) { return format_double(c.synth.missing_rate); });

    add("graph.k",
        [](RunConfig& c, const std::string& v) { c.graph.k = static_cast<std::size_t>(parse_long(v, "graph.k")); },
        [](const RunConfig& c) { return std::to_string(c.graph.k); });
    add("graph.radius_km",
        [](RunConfig& c, const std::string& v) { c.graph.radius_km = parse_double(v, "graph.radius_km"); },
        [](const RunConfig& c) { return format_double(c.graph.radius_km); });

    add("split.train_end_week",
        [](RunConfig& c, const std::string& v) {
            c.split.train_end_week = static_cast<int>(parse_long(v, "split.train_end_week"));
        },
        [](const RunConfig& c) { return std::to_string(c.split.train_end_week); });
    add("split.validation_frac",
        [](RunConfig& c, const std::string& v) { c.split.validation_frac = parse_double(v, "split.validation_frac"); },
        [](const RunConfig& c) { return format_double(c.split.validation_frac); });
    add("split.calibration_frac",
        [](RunConfig& c, const std::string& v) { c.split.calibration_frac = parse_double(v, "split.calibration_frac"); },
        [](const RunConfig& c) { return format_double(c.split.calibration_frac); });

    add("model.variant", [](RunConfig& c, const std::string& v) { c.model.variant = parse_variant(v); },
        [](const RunConfig& c) { return variant_name(c.model.variant); });
    add("model.num_layers",
        [](RunConfig& c, const std::string& v) { c.model.num_layers = static_cast<int>(parse_long(v, "model.num_layers")); },
        [](const RunConfig& c) { return std::to_string(c.model.num_layers); });
    add("model.width",
        [](RunConfig& c, const std::string& v) { c.model.width = static_cast<int>(parse_long(v, "model.width")); },
        [](const RunConfig& c) { return std::to_string(c.model.width); });
    add("model.dropout",
        [](RunConfig& c, const std::string& v) { c.model.dropout_p = parse_double(v, "model.dropout"); },
        [](const RunConfig& c) { return format_double(c.model.dropout_p); });
    add("model.aggregator",
        [](RunConfig& c, const std::string& v) { c.model.aggregator = parse_aggregator(v); },
        [](const RunConfig& c) { return aggregator_name(c.model.aggregator); });

    add("train.regime", [](RunConfig& c, const std::string& v) { c.train.regime = parse_regime(v); },
        [](const RunConfig& c) { return regime_name(c.train.regime); });
    add("train.subset", [](RunConfig& c, const std::string& v) { c.train.subset = v; },
        [](const RunConfig& c) { return c.train.subset; });
    add("train.horizons",
        [](RunConfig& c, const std::string& v) {
            c.train.horizons.clear();
            for (const auto& part : split_list(v))
                c.train.horizons.push_back(static_cast<int>(parse_long(part, "train.horizons")));
        },
        [](const RunConfig& c) {
            std::string out;
            for (int h : c.train.horizons) out += (out.empty() ? "" : ",") + std::to_string(h);
            return out;
        });
    add("train.seeds",
        [](RunConfig& c, const std::string& v) {
            c.train.seeds.clear();
            for (const auto& part : split_list(v))
                c.train.seeds.push_back(static_cast<std::uint64_t>(parse_long(part, "train.seeds")));
        },
        [](const RunConfig& c) {
            std::string out;
            for (auto s : c.train.seeds) out += (out.empty() ? "" : ",") + std::to_string(s);
            return out;
        });
    add("train.epochs",
        [](RunConfig& c, const std::string& v) { c.train.epochs = static_cast<int>(parse_long(v, "train.epochs")); },
        [](const RunConfig& c) { return std::to_string(c.train.epochs); });
    add("train.base_lr", [](RunConfig& c, const std::string& v) { c.train.base_lr = parse_double(v, "train.base_lr"); },
        [](const RunConfig& c) { return format_double(c.train.base_lr); });
    add("train.min_lr", [](RunConfig& c, const std::string& v) { c.train.min_lr = parse_double(v, "train.min_lr"); },
        [](const RunConfig& c) { return format_double(c.train.min_lr); });
    add("train.weight_decay",
        [](RunConfig& c, const std::string& v) { c.train.weight_decay = parse_double(v, "train.weight_decay"); },
        [](const RunConfig& c) { return format_double(c.train.weight_decay); });
    add("train.agc_lambda",
        [](RunConfig& c, const std::string& v) { c.train.agc_lambda = parse_double(v, "train.agc_lambda"); },
        [](const RunConfig& c) { return format_double(c.train.agc_lambda); });
    add("train.patience",
        [](RunConfig& c, const std::string& v) { c.train.patience = static_cast<int>(parse_long(v, "train.patience")); },
        [](const RunConfig& c) { return std::to_string(c.train.patience); });

    add("evaluate.subsets",
        [](RunConfig& c, const std::string& v) { c.evaluate.subsets = split_list(v); },
        [](const RunConfig& c) {
            std::string out;
            for (const auto& s : c.evaluate.subsets) out += (out.empty() ? "" : ",") + s;
            return out;
        });
    add("evaluate.baseline", [](RunConfig& c, const std::string& v) { c.evaluate.baseline = v; },
        [](const RunConfig& c) { return c.evaluate.baseline; });
    add("evaluate.plot", [](RunConfig& c, const std::string& v) { c.evaluate.plot = v; },
        [](const RunConfig& c) { return c.evaluate.plot; });

    add("calibrate.lambda",
        [](RunConfig& c, const std::string& v) { c.calibrate.lambda = parse_double(v, "calibrate.lambda"); },
        [](const RunConfig& c) { return format_double(c.calibrate.lambda); });

    add("entropy.subsets", [](RunConfig& c, const std::string& v) { c.entropy.subsets = split_list(v); },
        [](const RunConfig& c) {
            std::string out;
            for (const auto& s : c.entropy.subsets) out += (out.empty() ? "" : ",") + s;
            return out;
        });

    return reg;
}

void validate_subset_name(const std::string& name, const char* what) {
    if (name != "all" && name != "upper80" && name != "lower80" && name != "upper20" && name != "lower20")
        throw_config(std::string(what) + ": unknown subset '" + name + "'");
}

}  // namespace

void RunConfig::validate() const {
    synth.validate();
    if (graph.k < 1) throw_config("graph.k must be >= 1");
    if (!(graph.radius_km > 0.0)) throw_config("graph.radius_km must be positive");
    if (split.train_end_week < 0) throw_config("split.train_end_week must be >= 0");
    if (!(split.validation_frac > 0.0 && split.validation_frac < 1.0))
        throw_config("split.validation_frac must lie in (0, 1)");
    if (!(split.calibration_frac >= 0.0 && split.calibration_frac < 1.0))
        throw_config("split.calibration_frac must lie in [0, 1)");

    ModelConfig probe = model;
    probe.input_dim = 1;  // the real width comes from the feature table
    probe.validate();

    if (train.subset != "all" && train.subset != "upper80" && train.subset != "lower80")
        throw_config("train.subset must be all, upper80, or lower80");
    if (train.horizons.empty()) throw_config("train.horizons must not be empty");
    for (int h : train.horizons)
        if (h < 0 || h > 7) throw_config("train.horizons entries must lie in 0..7");
    if (train.seeds.empty()) throw_config("train.seeds must not be empty");

    TrainConfig probe_train;
    probe_train.epochs = train.epochs;
    probe_train.base_lr = train.base_lr;
    probe_train.min_lr = train.min_lr;
    probe_train.weight_decay = train.weight_decay;
    probe_train.agc_lambda = train.agc_lambda;
    probe_train.patience = train.patience;
    probe_train.validate();

    if (evaluate.subsets.empty()) throw_config("evaluate.subsets must not be empty");
    for (const auto& s : evaluate.subsets) {
        if (s != "all" && s != "upper20" && s != "lower20")
            throw_config("evaluate.subsets entries must be all, upper20, or lower20");
    }
    if (evaluate.baseline != "none" && evaluate.baseline != "logistic")
        throw_config("evaluate.baseline must be none or logistic");
    if (!(calibrate.lambda >= 0.0 && calibrate.lambda <= 1.0))
        throw_config("calibrate.lambda must lie in [0, 1]");
    for (const auto& s : entropy.subsets) validate_subset_name(s, "entropy.subsets");
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
    RunConfig config;
    const auto registry = key_registry();

    std::istringstream in(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw_config(origin + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        const std::string dotted = section.empty() ? key : section + "." + key;
        const auto it = registry.find(dotted);
        if (it == registry.end())
            throw_config(origin + ":" + std::to_string(line_no) + ": unknown key '" + dotted + "'");
        it->second.set(config, value);
    }
    return config;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_file(path), path); }

std::string serialize_run_config(const RunConfig& config) {
    const auto registry = key_registry();
    std::string out;
    std::string last_section;
    for (const auto& [dotted, handler] : registry) {
        const auto dot = dotted.find('.');
        const std::string section = dotted.substr(0, dot);
        const std::string key = dotted.substr(dot + 1);
        if (section != last_section) {
            if (!out.empty()) out += "\n";
            out += "[" + section + "]\n";
            last_section = section;
        }
        out += key + " = " + handler.get(config) + "\n";
    }
    return out;
}

void apply_override(RunConfig& config, const std::string& dotted_key, const std::string& value) {
    const auto registry = key_registry();
    const auto it = registry.find(dotted_key);
    if (it == registry.end()) throw_config("unknown config key '" + dotted_key + "'");
    it->second.set(config, value);
}

}  // namespace mage

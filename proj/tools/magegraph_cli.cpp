// magegraph command-line interface. Links the C API only.

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "magegraph/magegraph.h"

namespace {

const char* kUsage =
    "usage: magegraph <command> [--config <path>] [--set section.key=value]...\n"
    "\n"
    "commands:\n"
    "  synth           generate a synthetic trap/covariate dataset + oracle\n"
    "  preprocess      raw covariate CSV -> feature CSV + scaler file\n"
    "  build-graph     export per-week spatial graphs as an edge list\n"
    "  train           train one checkpoint per (horizon, seed)\n"
    "  evaluate        metrics report over the evaluation weeks\n"
    "  calibrate       isotonic-calibrated per-node predictions\n"
    "  entropy-report  mean node entropy by covariate group\n"
    "\n"
    "options:\n"
    "  --config <path>          run-config file (built-in defaults otherwise)\n"
    "  --set key=value          override one config entry (repeatable)\n"
    "  --version                print the library version\n"
    "\n"
    "exit codes: 0 success, 2 usage/config/data error, 3 numeric failure\n";

int fail_usage(const char* message) {
    std::fprintf(stderr, "magegraph: %s\n\n%s", message, kUsage);
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) return fail_usage("missing command");
    if (args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
        std::fputs(kUsage, stdout);
        return 0;
    }
    if (args[0] == "--version") {
        std::printf("magegraph %s\n", mg_version());
        return 0;
    }

    const std::string command = args[0];
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) return fail_usage("--config needs a path");
            config_path = args[++i];
        } else if (args[i] == "--set") {
            if (i + 1 >= args.size()) return fail_usage("--set needs key=value");
            const std::string kv = args[++i];
            const auto eq = kv.find('=');
            if (eq == std::string::npos) return fail_usage("--set expects section.key=value");
            overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
        } else {
            return fail_usage(("unknown option '" + args[i] + "'").c_str());
        }
    }

    mg_run* run = mg_run_new();
    if (!run) {
        std::fprintf(stderr, "magegraph: out of memory\n");
        return 2;
    }

    mg_status status = MG_OK;
    if (!config_path.empty()) status = mg_run_load_config(run, config_path.c_str());
    for (const auto& [key, value] : overrides) {
        if (status != MG_OK) break;
        status = mg_run_set(run, key.c_str(), value.c_str());
    }
    if (status == MG_OK) status = mg_run_exec(run, command.c_str());

    if (status != MG_OK) std::fprintf(stderr, "magegraph: %s\n", mg_run_last_error(run));
    mg_run_free(run);
    return static_cast<int>(status);
}

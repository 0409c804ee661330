// lrcone <subcommand> --config <path> [--out <dir>] [--workers k]
//
// Exit status: 0 all checks passed, 1 a check or fit precondition failed,
// 2 invalid config or plan, 3 other runtime error.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "lrcone/commands.hpp"
#include "lrcone/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Light-cone and transport experiments for XY chains in quasi-periodic fields"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    unsigned workers = 0;
    for (const auto& name : lrcone::command_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "key-value config file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides LRCONE_OUT and the config)");
        sub->add_option("--workers", workers, "worker threads (overrides LRCONE_WORKERS and the config)")
            ->check(CLI::Range(1u, 1024u));
    }
    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    lrcone::CommandOutcome outcome;
    try {
        auto config = lrcone::resolve_config(lrcone::load_config(config_path));
        lrcone::apply_environment(config);
        if (!out_dir.empty()) config.out_dir = out_dir;
        if (workers > 0) config.workers = workers;
        outcome = lrcone::run_command(command, config);
    } catch (const lrcone::InvalidArgument& e) {
        std::fprintf(stderr, "lrcone %s: %s\n", command.c_str(), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "lrcone %s: error: %s\n", command.c_str(), e.what());
        return 3;
    }
    for (const auto& f : outcome.files) std::printf("wrote %s\n", f.c_str());
    for (const auto& m : outcome.messages) std::fprintf(stderr, "%s\n", m.c_str());
    return outcome.exit_code;
}

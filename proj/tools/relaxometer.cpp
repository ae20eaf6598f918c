#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "relaxometer/experiment.hpp"

namespace {

using namespace relaxometer;

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kResource = 3, kMissing = 4 };

unsigned threads_from_env() {
    if (const char* env = std::getenv("RELAXOMETER_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring RELAXOMETER_THREADS='" << env << "'\n";
    }
    return 0;
}

int cmd_run(const std::string& config_path, std::optional<unsigned> threads, const std::string& output) {
    const auto config = load_config(config_path);
    RunOptions options;
    options.threads = threads.value_or(threads_from_env());
    if (!output.empty()) options.output = output;
    const auto summary = run_experiment(config, options);
    for (const auto& w : summary.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "wrote " << summary.files.size() << " file(s), " << summary.cells.size() << " cell(s) to "
              << summary.directory.string() << " in " << format_number(summary.wall_seconds) << " s\n";
    for (const auto& f : summary.files) std::cout << "  " << f << '\n';
    return kOk;
}

int cmd_figures(const std::string& dir, const std::string& figure) {
    for (const auto& p : emit_figure(dir, figure)) std::cout << p.string() << '\n';
    return kOk;
}

int cmd_verify(const std::string& dir, const std::string& rerun, std::optional<unsigned> threads) {
    const auto report = verify_results(dir, rerun.empty() ? std::nullopt : std::optional(rerun),
                                       threads.value_or(threads_from_env()));
    for (const auto& f : report.failures) std::cout << "FAIL " << f << '\n';
    std::cout << report.checked.size() - report.failures.size() << "/" << report.checked.size() << " checks passed\n";
    return report.ok() ? kOk : kFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relaxation fluctuations of quantum and random-matrix systems"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::string config_path, output, dir, figure, rerun;
    std::optional<unsigned> threads;

    auto* run = app.add_subcommand("run", "Run an experiment from a JSON configuration");
    run->add_option("config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
    run->add_option("--threads", threads, "Worker threads (0 = all cores; default $RELAXOMETER_THREADS or 0)");
    run->add_option("--output", output, "Override the configured output directory");

    auto* figures = app.add_subcommand("figures", "Write plot data for one figure from a results directory");
    figures->add_option("dir", dir, "Results directory")->required();
    figures->add_option("figure", figure, "fig1 .. fig12")->required();

    auto* verify = app.add_subcommand("verify", "Check a results directory against its invariants");
    verify->add_option("dir", dir, "Results directory")->required();
    verify->add_option("--rerun-cell", rerun, "Recompute one cell and compare it byte for byte");
    verify->add_option("--threads", threads, "Worker threads for --rerun-cell");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, threads, output);
        if (*figures) return cmd_figures(dir, figure);
        return cmd_verify(dir, rerun, threads);
    } catch (const ConfigurationError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfig;
    } catch (const ResourceLimit& e) {
        std::cerr << "resource limit: " << e.what() << '\n';
        return kResource;
    } catch (const MissingInputs& e) {
        std::cerr << "missing inputs: " << e.what() << '\n';
        return kMissing;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}

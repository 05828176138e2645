#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "qrm/errors.hpp"
#include "qrm/runner.hpp"
#include "qrm/scenario.hpp"

namespace fs = std::filesystem;

namespace {

#ifndef QRM_SCENARIO_DIR
#define QRM_SCENARIO_DIR "scenarios"
#endif

fs::path scenario_dir()
{
    if (const char* env = std::getenv("QRM_SCENARIO_DIR"))
        return env;
    return QRM_SCENARIO_DIR;
}

// A bare name resolves against the bundled scenario directory.
std::string resolve(const std::string& arg)
{
    if (fs::exists(arg))
        return arg;
    const fs::path bundled = scenario_dir() / (arg + ".scenario");
    if (fs::exists(bundled))
        return bundled.string();
    qrm::fail(qrm::ErrorKind::IoError, "no scenario file or bundled scenario named '" + arg + "'");
}

int exit_code(const qrm::Error& e) { return e.is_validation() ? 2 : 3; }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-photon bundle generation in the driven quantum Rabi model"};
    app.require_subcommand(1);

    std::string target;
    std::string kind;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> n_traj;
    std::optional<int> cycles;
    std::optional<int> threads;
    std::vector<std::string> overrides;

    auto* run = app.add_subcommand("run", "Run a scenario and write CSV/JSON artifacts");
    run->add_option("scenario", target, "Scenario file or bundled scenario name")->required();
    run->add_option("--kind", kind, "closed | master | trajectory | correlators | coeff-sweep");
    run->add_option("--out-dir", out_dir, "Output directory (default out/<name>-<kind>)");
    run->add_option("--seed", seed, "Base seed for trajectories");
    run->add_option("--n-traj", n_traj, "Number of trajectories");
    run->add_option("--cycles", cycles, "Pulse cycles to simulate");
    run->add_option("--threads", threads, "Worker threads for trajectory ensembles (0 = hardware)");
    run->add_option("--override", overrides, "section.key=value, repeatable");

    auto* show = app.add_subcommand("show", "Validate a scenario and print it in normalized form");
    show->add_option("scenario", target, "Scenario file or bundled scenario name")->required();
    show->add_option("--override", overrides, "section.key=value, repeatable");

    auto* list = app.add_subcommand("list", "List bundled scenarios");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        std::vector<std::string> names;
        if (fs::is_directory(scenario_dir()))
            for (const auto& e : fs::directory_iterator(scenario_dir()))
                if (e.path().extension() == ".scenario")
                    names.push_back(e.path().stem().string());
        std::sort(names.begin(), names.end());
        for (const auto& n : names)
            std::cout << n << '\n';
        return 0;
    }

    try {
        qrm::Scenario s = qrm::load_scenario(resolve(target));
        if (!kind.empty())
            s.kind = qrm::parse_run_kind(kind);
        // Correlator runs default to the first cycle only.
        if (!cycles && s.kind == qrm::RunKind::correlators && s.pulses.cycles != 1)
            cycles = 1;
        if (cycles)
            qrm::apply_override(s, "pulses.cycles=" + std::to_string(*cycles));
        if (seed)
            qrm::apply_override(s, "run.seed=" + std::to_string(*seed));
        if (n_traj)
            qrm::apply_override(s, "run.n_traj=" + std::to_string(*n_traj));
        if (threads)
            qrm::apply_override(s, "run.threads=" + std::to_string(*threads));
        for (const auto& o : overrides)
            qrm::apply_override(s, o);
        s.validate();

        if (show->parsed()) {
            std::cout << s.to_text();
            for (const auto& w : s.warnings())
                std::cerr << "warning: " << w << '\n';
            return 0;
        }

        for (const auto& w : s.warnings())
            std::cerr << "warning: " << w << '\n';
        if (out_dir.empty())
            out_dir = (fs::path("out") / (s.name + "-" + qrm::to_string(s.kind))).string();
        const nlohmann::json summary = qrm::run_scenario(s, out_dir);
        nlohmann::json brief = {{"kind", summary["kind"]}, {"out_dir", out_dir}};
        if (summary.contains("result"))
            brief["result"] = summary["result"];
        std::cout << brief.dump(2) << '\n';
        return 0;
    } catch (const qrm::Error& e) {
        std::cerr << "error [" << qrm::to_string(e.kind()) << "] " << target << ": " << e.what() << '\n';
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error " << target << ": " << e.what() << '\n';
        return 3;
    }
}

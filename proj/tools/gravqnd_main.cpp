// Command-line scenario runner: `gravqnd run <config.json>` executes one
// scenario and writes summary.json + series.csv; `gravqnd sweep
// <config.json> --axis <name> --values v1,v2,...` repeats it along one
// axis. Exit status: 0 all checks pass, 1 assertion failure, 2 config
// parse error, 3 domain/precondition error.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gravqnd/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"restricted-path-integral continuous-measurement scenarios"};
    app.require_subcommand(1);

    std::string run_config_path;
    CLI::App* run = app.add_subcommand("run", "execute one scenario config");
    run->add_option("config", run_config_path, "JSON scenario config")->required();

    std::string sweep_config_path, axis;
    std::vector<double> values;
    CLI::App* sweep = app.add_subcommand("sweep", "repeat a scenario along one axis");
    sweep->add_option("config", sweep_config_path, "JSON scenario config")->required();
    sweep->add_option("--axis", axis, "delta_a_sq | n_slices | mass")->required();
    sweep->add_option("--values", values, "axis values")
        ->required()
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    gravqnd::RunResult rr;
    if (run->parsed()) {
        rr = gravqnd::run_file(run_config_path);
    } else {
        rr = gravqnd::sweep_file(sweep_config_path, axis, values);
    }

    if (rr.status >= 2) {
        std::cerr << "error: " << rr.summary.value("error", "unknown") << "\n";
    } else {
        if (!rr.summary_path.empty())
            std::cout << "summary: " << rr.summary_path << "\n"
                      << "series:  " << rr.series_path << "\n";
        if (rr.status == 1) {
            std::cerr << "assertion failure; residual report in summary\n";
            if (rr.summary.contains("assertions")) {
                for (const auto& [name, a] : rr.summary.at("assertions").items())
                    if (a.contains("pass") && !a.at("pass").get<bool>())
                        std::cerr << "  FAIL " << name << ": " << a.dump() << "\n";
            }
        }
    }
    return rr.status;
}

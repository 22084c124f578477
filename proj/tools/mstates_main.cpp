// mstates: market-state pipeline driver.
//
//   mstates <ingest|correlate|cluster|transitions|spectra|histograms|mds|report>
//           [--config FILE] [--<key> VALUE ...]
//   mstates compare --run-a DIR --run-b DIR [--kind pearson] [--k 5] [--k-b K]
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.

#include <iostream>
#include <map>
#include <memory>

#include <CLI11.hpp>

#include "mstates/compare.hpp"
#include "mstates/config.hpp"
#include "mstates/error.hpp"
#include "mstates/io.hpp"
#include "mstates/pipeline.hpp"

namespace {

struct StageCommand {
    CLI::App* app = nullptr;
    std::string config_file;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
};

std::unique_ptr<StageCommand> add_stage(CLI::App& root, const std::string& name, const std::string& help) {
    auto cmd = std::make_unique<StageCommand>();
    cmd->app = root.add_subcommand(name, help);
    cmd->app->add_option("--config", cmd->config_file, "key = value config file");
    for (const auto& key : mstates::config_keys()) {
        cmd->options[key] = cmd->app->add_option("--" + key, cmd->values[key], "override config key " + key);
    }
    return cmd;
}

mstates::RunConfig resolve(const StageCommand& cmd) {
    mstates::RunConfig cfg;
    if (!cmd.config_file.empty()) cfg = mstates::load_config(cmd.config_file);
    for (const auto& [key, opt] : cmd.options) {
        if (opt->count() > 0) mstates::apply_setting(cfg, key, cmd.values.at(key));
    }
    mstates::validate(cfg);
    return cfg;
}

void print_stages(const mstates::Pipeline& p) {
    for (const auto& s : p.stages()) {
        std::cerr << "  " << s.name << (s.cached ? " (cached)" : "") << "  " << s.seconds << " s\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Market-state analysis of correlation matrices"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> stage_names = {
        {"ingest", "load quotes, build the calendar, apply the gap filter"},
        {"correlate", "compute epoch correlation stores"},
        {"cluster", "k-means market states for every configured k"},
        {"transitions", "transition matrices and Markov diagnostics"},
        {"spectra", "participation ratios and period moments"},
        {"histograms", "per-epoch distributions of matrix elements"},
        {"mds", "3D classical MDS of the epoch matrices"},
        {"report", "run every stage and write manifest.json"},
    };
    std::vector<std::unique_ptr<StageCommand>> stages;
    for (const auto& [name, help] : stage_names) stages.push_back(add_stage(app, name, help));

    auto* compare = app.add_subcommand("compare", "detect states of run B unmatched in run A");
    std::string run_a, run_b, kind = "pearson", out_file;
    int k = 5, k_b = 0;
    std::size_t merge_gap = 20;
    compare->add_option("--run-a", run_a, "bundle directory of the reference run")->required();
    compare->add_option("--run-b", run_b, "bundle directory of the compared run")->required();
    compare->add_option("--kind", kind, "pearson or relative");
    compare->add_option("--k", k, "number of states in run A (and B unless --k-b)");
    compare->add_option("--k-b", k_b, "number of states in run B");
    compare->add_option("--merge-gap", merge_gap, "merge runs separated by at most this many epochs");
    compare->add_option("--out", out_file, "write the JSON report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (compare->parsed()) {
            const auto kind_dir = mstates::to_string(mstates::parse_kind(kind));
            const auto a = mstates::load_states(std::filesystem::path(run_a) / kind_dir / ("k" + std::to_string(k)));
            const auto b = mstates::load_states(std::filesystem::path(run_b) / kind_dir /
                                                ("k" + std::to_string(k_b > 0 ? k_b : k)));
            const auto report = mstates::compare_states(a, b, {merge_gap});
            const auto text = mstates::to_json(report).dump(2) + "\n";
            if (out_file.empty()) {
                std::cout << text;
            } else {
                mstates::write_text(out_file, text);
            }
            return 0;
        }

        for (std::size_t i = 0; i < stages.size(); ++i) {
            if (!stages[i]->app->parsed()) continue;
            mstates::Pipeline pipeline(resolve(*stages[i]));
            const auto& name = stage_names[i].first;
            if (name == "ingest") pipeline.ingest();
            else if (name == "correlate") pipeline.correlate();
            else if (name == "cluster") pipeline.cluster();
            else if (name == "transitions") pipeline.transitions();
            else if (name == "spectra") pipeline.spectra();
            else if (name == "histograms") pipeline.histograms();
            else if (name == "mds") pipeline.mds();
            const auto rep = name == "report" ? pipeline.report() : pipeline.finish();
            print_stages(pipeline);
            std::cerr << "wrote " << rep.checksums.size() << " files to " << rep.output_dir.string() << "\n";
        }
    } catch (const mstates::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return mstates::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

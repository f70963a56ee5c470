// Experiment runner CLI: run / validate / sweep over structured text configs.

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hermflow/config.hpp"
#include "hermflow/experiments.hpp"

namespace fs = std::filesystem;
using namespace hermflow;

namespace {

int do_run(const std::string& config_path, const std::string& out_override,
           const std::string& seed_override) {
    ExperimentConfig cfg;
    try {
        IniFile ini = IniFile::parse_file(config_path);
        if (!out_override.empty()) ini.set("output", "dir", out_override);
        if (!seed_override.empty()) ini.set("experiment", "seed", seed_override);
        cfg = load_config(ini);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    }
    const auto res = run_experiment(cfg, std::cout);
    if (res.exit_code != 0) std::cerr << "run failed: " << res.message << "\n";
    return res.exit_code;
}

int do_validate(const std::string& config_path) {
    const auto rep = validate_config_file(config_path);
    if (rep.ok) {
        std::cout << "ok: " << config_path << "\n";
        return 0;
    }
    for (const auto& issue : rep.issues)
        std::cerr << config_path << ": " << issue.where << ": " << issue.message << "\n";
    return 3;
}

int do_sweep(const std::string& config_path, int jobs) {
    IniFile base;
    try {
        base = IniFile::parse_file(config_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    }
    const std::string key = base.get("sweep", "key");
    const std::string values = base.get("sweep", "values");
    if (key.empty() || values.empty()) {
        std::cerr << "config error: sweep requires [sweep] key and values\n";
        return 3;
    }
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
        std::cerr << "config error: sweep key must be section.key\n";
        return 3;
    }
    std::vector<std::string> vals;
    {
        std::string tok;
        std::istringstream is(values);
        while (std::getline(is, tok, ',')) vals.push_back(tok);
    }
    const std::string base_dir = base.get("output", "dir", "out");

    std::vector<std::future<int>> running;
    std::vector<int> codes(vals.size(), 0);
    std::size_t next = 0;
    while (next < vals.size() || !running.empty()) {
        while (next < vals.size() && static_cast<int>(running.size()) < std::max(jobs, 1)) {
            IniFile ini = base;
            ini.sections.erase("sweep");
            ini.set(key.substr(0, dot), key.substr(dot + 1), vals[next]);
            ini.set("output", "dir", base_dir + "/sweep_" + std::to_string(next));
            const std::size_t idx = next++;
            running.push_back(std::async(std::launch::async, [ini, idx, &codes]() {
                try {
                    const ExperimentConfig cfg = load_config(ini);
                    std::ostringstream sink;
                    const auto res = run_experiment(cfg, sink);
                    codes[idx] = res.exit_code;
                    return res.exit_code;
                } catch (const std::exception&) {
                    codes[idx] = 3;
                    return 3;
                }
            }));
        }
        running.front().wait();
        running.erase(running.begin());
    }
    int worst = 0;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        std::cout << "sweep_" << i << " (" << key << " = " << vals[i] << "): exit " << codes[i] << "\n";
        worst = std::max(worst, codes[i]);
    }
    return worst;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hermflow: Monge-Ampere, envelope, and Chern-Ricci flow experiments on model Hermitian geometries"};
    app.require_subcommand(1);

    std::string config_path, out_override, seed_override;
    int jobs = 1;

    auto* run = app.add_subcommand("run", "run the experiment described by a config");
    run->add_option("--config", config_path, "config file")->required();
    run->add_option("--out", out_override, "override output directory");
    run->add_option("--seed", seed_override, "override the run seed");

    auto* validate = app.add_subcommand("validate", "schema/range checks only");
    validate->add_option("--config", config_path, "config file")->required();

    auto* sweep = app.add_subcommand("sweep", "run a one-key parameter sweep");
    sweep->add_option("--config", config_path, "config file with a [sweep] block")->required();
    sweep->add_option("--jobs", jobs, "concurrent runs");

    CLI11_PARSE(app, argc, argv);

    if (app.got_subcommand(run)) return do_run(config_path, out_override, seed_override);
    if (app.got_subcommand(validate)) return do_validate(config_path);
    return do_sweep(config_path, jobs);
}

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lbsim/config.hpp"
#include "lbsim/presets.hpp"
#include "lbsim/runner.hpp"

namespace {

std::string output_root() {
    const char* env = std::getenv("LBSIM_OUTPUT_ROOT");
    return env ? env : "out";
}

int run_and_report(const lbsim::ExperimentConfig& cfg, const std::string& out_dir) {
    const auto res = lbsim::run_experiment(cfg, out_dir);
    for (const auto& v : res.variants) {
        std::cout << v.label << ": " << v.slowdown.count << " flows";
        if (v.slowdown.count > 0)
            std::cout << ", mean slowdown " << v.slowdown.mean << ", p99 "
                      << v.slowdown.p99;
        std::cout << ", drops " << v.drops << ", reorder retx " << v.reorder_retx
                  << "\n";
    }
    for (const auto& row : res.ooo_rows)
        std::cout << "ooo " << row.size_bytes << "B: base " << row.fct_base
                  << "ns delayed " << row.fct_delayed << "ns ratio " << row.ratio
                  << "\n";
    for (const auto& row : res.census_rows)
        std::cout << "census " << row.threshold_us << "us: " << row.flowlet_bytes.size()
                  << " flowlets\n";
    std::cout << "outputs in " << out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"packet-level datacenter fabric simulator for RoCE load balancing"};
    app.require_subcommand(1);

    std::string config_path, preset_name, out_dir;
    std::vector<std::string> overrides;

    auto* run_cmd = app.add_subcommand("run", "run an experiment config file");
    run_cmd->add_option("config", config_path, "config file")->required();
    run_cmd->add_option("--override", overrides, "section.key=value")->take_all();
    run_cmd->add_option("--out", out_dir, "output directory");

    auto* preset_cmd = app.add_subcommand("preset", "run a named preset");
    preset_cmd->add_option("name", preset_name, "preset name")->required();
    preset_cmd->add_option("--override", overrides, "section.key=value")->take_all();
    preset_cmd->add_option("--out", out_dir, "output directory");

    auto* list_cmd = app.add_subcommand("list-presets", "print preset names");

    auto* validate_cmd = app.add_subcommand("validate", "check a config file");
    validate_cmd->add_option("config", config_path, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (list_cmd->parsed()) {
            for (const auto& name : lbsim::list_presets()) std::cout << name << "\n";
            return 0;
        }
        if (validate_cmd->parsed()) {
            lbsim::config_from_raw(lbsim::parse_ini_file(config_path));
            std::cout << "ok\n";
            return 0;
        }

        lbsim::RawConfig raw;
        std::string label;
        if (run_cmd->parsed()) {
            raw = lbsim::parse_ini_file(config_path);
            label = "run";
        } else {
            if (!lbsim::is_preset(preset_name)) {
                std::cerr << "unknown preset: " << preset_name << "\n";
                return 1;
            }
            raw = lbsim::raw_from_config(lbsim::preset_config(preset_name));
            label = preset_name;
        }
        for (const auto& ov : overrides) lbsim::apply_override(raw, ov);
        const auto cfg = lbsim::config_from_raw(raw);
        if (out_dir.empty()) out_dir = output_root() + "/" + label;
        return run_and_report(cfg, out_dir);
    } catch (const lbsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const lbsim::SimAbort& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 2;
    }
}

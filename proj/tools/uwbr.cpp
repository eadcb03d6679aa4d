// uwbr: command-line driver for the space/time Radon pipeline.
//
// Exit codes: 0 success, 2 config error, 3 stage error, 4 I/O error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "uwbr/io/config.hpp"
#include "uwbr/io/grid_file.hpp"
#include "uwbr/io/pipeline.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kStage = 3, kIo = 4 };

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::string format = "csv";
    std::string stage_input;
};

uwbr::io::ScenarioConfig load(const Options& o) {
    auto cfg = uwbr::io::load_config(o.config);
    if (o.seed) uwbr::io::override_seed(cfg, *o.seed);
    return cfg;
}

void print_summary(const uwbr::io::json& manifest) {
    if (manifest.contains("detections")) {
        std::cout << "detected " << manifest["detections"].size() << " slowness band(s)\n";
        for (const auto& b : manifest["detections"])
            std::cout << "  sin(theta) in [" << b["sin_low"].get<double>() << ", " << b["sin_high"].get<double>()
                      << "]\n";
    }
    if (manifest.contains("position")) {
        const auto& p = manifest["position"];
        std::cout << "near-field source at x = " << p["x"].get<double>() << " m, z = " << p["z"].get<double>()
                  << " m (k = " << p["k"].get<std::size_t>() << ", residual " << p["residual"].get<double>()
                  << " m)\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    using namespace uwbr::io;
    CLI::App app{"Ultra-wideband space/time Radon processing: plane-wave removal and near-field localisation"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", o.config, "Scenario file");
        if (needs_config) c->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "Output directory")->capture_default_str();
        sub->add_option("--seed", o.seed, "Override the noise seed");
    };

    auto* pipeline = app.add_subcommand("pipeline", "Run every stage into --out");
    add_common(pipeline, true);

    struct StageCmd {
        const char* name;
        const char* help;
        Stage stage;
    };
    const StageCmd stage_cmds[] = {
        {"synth", "Synthesize the space/time grid", Stage::synth},
        {"radon", "Forward Radon transform of spacetime.grid", Stage::radon},
        {"semblance", "Windowed semblance of spacetime.grid", Stage::semblance},
        {"filter", "Detect plane waves and mask radon.grid", Stage::filter},
        {"invert", "Inverse Radon transform of radon_filtered.grid", Stage::invert},
        {"localize", "Locate the near-field source and stack its pulse", Stage::localize},
    };
    std::vector<std::pair<CLI::App*, Stage>> stage_apps;
    for (const auto& s : stage_cmds) {
        auto* sub = app.add_subcommand(s.name, s.help);
        add_common(sub, true);
        if (s.stage != Stage::synth)
            sub->add_option("--stage-input", o.stage_input, "Primary input file (default: the file in --out)");
        stage_apps.emplace_back(sub, s.stage);
    }

    auto* exp = app.add_subcommand("export", "Convert a grid file to CSV or raw binary for plotting");
    exp->add_option("--stage-input", o.stage_input, "Grid file to export")->required();
    exp->add_option("--out", o.out, "Output file")->required();
    exp->add_option("--format", o.format, "csv or binary")
        ->check(CLI::IsMember({"csv", "binary"}))
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (pipeline->parsed()) {
            const auto manifest = run_pipeline(load(o), o.out);
            print_summary(manifest.doc());
        } else if (exp->parsed()) {
            export_plot_data(o.stage_input, o.out, o.format == "csv" ? ExportFormat::csv : ExportFormat::binary);
        } else {
            for (const auto& [sub, stage] : stage_apps) {
                if (!sub->parsed()) continue;
                std::optional<std::filesystem::path> input;
                if (!o.stage_input.empty()) input = o.stage_input;
                run_single_stage(stage, load(o), o.out, input);
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << o.config << ":" << e.what() << "\n";
        return kConfig;
    } catch (const StageError& e) {
        std::cerr << "stage error: " << e.what() << "\n";
        return kStage;
    } catch (const uwbr::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kIo;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "stage error: " << e.what() << "\n";
        return kStage;
    }
    return kOk;
}

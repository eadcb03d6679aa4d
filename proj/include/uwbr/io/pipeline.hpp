#pragma once

// File-level pipeline stages. Each stage reads the files written by the
// previous one, so running the stages one by one and running the whole
// pipeline produce identical outputs.
//
//   synth      -> spacetime.grid
//   radon      spacetime.grid -> radon.grid
//   semblance  spacetime.grid -> semblance.grid
//   filter     radon.grid + semblance.grid -> detections.json, radon_filtered.grid
//   invert     radon_filtered.grid -> inverse.grid
//   localize   inverse.grid + spacetime.grid -> localization.json, envelope.csv
//
// manifest.json lists every file written, per-stage timings, the detected
// bands and the position estimate.

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uwbr/io/config.hpp"
#include "uwbr/io/grid_file.hpp"
#include "uwbr/localization.hpp"
#include "uwbr/radon.hpp"
#include "uwbr/semblance.hpp"
#include "uwbr/slowness_filter.hpp"
#include "uwbr/wavefield.hpp"

namespace uwbr::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what) : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

namespace files {
inline constexpr const char* spacetime = "spacetime.grid";
inline constexpr const char* radon = "radon.grid";
inline constexpr const char* semblance = "semblance.grid";
inline constexpr const char* detections = "detections.json";
inline constexpr const char* filtered = "radon_filtered.grid";
inline constexpr const char* inverse = "inverse.grid";
inline constexpr const char* localization = "localization.json";
inline constexpr const char* envelope = "envelope.csv";
inline constexpr const char* manifest = "manifest.json";
}  // namespace files

/// Folds a seed override into the config and its hash.
inline void override_seed(ScenarioConfig& cfg, std::uint64_t seed) {
    cfg.sampling.seed = seed;
    cfg.hash = fnv1a_hex(cfg.hash + ":seed=" + std::to_string(seed));
}

class Manifest {
public:
    explicit Manifest(fs::path out_dir, const ScenarioConfig& cfg, bool fresh) : dir_(std::move(out_dir)) {
        const auto path = dir_ / files::manifest;
        if (!fresh && fs::exists(path)) {
            try {
                doc_ = json::parse(read_bytes(path));
            } catch (const json::exception& e) {
                throw IoError("malformed " + path.string() + ": " + e.what());
            }
        }
        doc_["producer"] = kProducer;
        doc_["scenario_hash"] = cfg.hash;
        if (!doc_.contains("files")) doc_["files"] = json::array();
        if (!doc_.contains("timings")) doc_["timings"] = json::object();
    }

    void file(const std::string& name) {
        auto& list = doc_["files"];
        for (const auto& f : list)
            if (f == name) return;
        list.push_back(name);
        std::vector<std::string> sorted = list.get<std::vector<std::string>>();
        std::sort(sorted.begin(), sorted.end());
        list = sorted;
    }

    void timing(const std::string& stage, double seconds) { doc_["timings"][stage] = seconds; }
    json& operator[](const std::string& key) { return doc_[key]; }
    const json& doc() const { return doc_; }

    void save() {
        file(files::manifest);
        write_bytes(dir_ / files::manifest, doc_.dump(2) + "\n");
    }

private:
    fs::path dir_;
    json doc_ = json::object();
};

struct StageContext {
    const ScenarioConfig& config;
    fs::path out_dir;
    std::optional<fs::path> stage_input;  // overrides the primary input file
    Manifest& manifest;

    fs::path input(const char* default_name) const { return stage_input.value_or(out_dir / default_name); }
    fs::path output(const char* name) const { return out_dir / name; }

    void write(const char* name, const std::string& bytes) const {
        write_bytes(output(name), bytes);
        manifest.file(name);
    }
};

namespace detail {

/// Runs a stage body, timing it and labelling any compute failure with
/// the stage name. I/O and parse errors pass through unchanged.
inline void run_stage(const std::string& name, StageContext& ctx, const std::function<void()>& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
        body();
    } catch (const IoError&) {
        throw;
    } catch (const ParseError&) {
        throw;
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
    ctx.manifest.timing(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

inline json band_json(const SlownessBand& b) {
    return {{"p_low", b.p_low},
            {"p_high", b.p_high},
            {"sin_low", b.p_low * kSpeedOfLight},
            {"sin_high", b.p_high * kSpeedOfLight},
            {"first_cell", b.first},
            {"last_cell", b.last}};
}

inline const UniformAxis& record_of(const GridFile& g, const std::string& what) {
    if (!g.record) throw IoError(what + " lacks record.* keys");
    return *g.record;
}

inline const ArrayGeometry& geometry_of_file(const GridFile& g, const std::string& what) {
    if (!g.geometry) throw IoError(what + " lacks geometry.* keys");
    return *g.geometry;
}

}  // namespace detail

inline void stage_synth(StageContext& ctx) {
    detail::run_stage("synth", ctx, [&] {
        const auto& cfg = ctx.config;
        const auto data = synthesize(geometry_of(cfg), cfg.sources, time_axis_of(cfg), cfg.sampling.noise_std,
                                     cfg.sampling.seed);
        ctx.write(files::spacetime, encode(to_file(data, cfg.hash)));
    });
}

inline void stage_radon(StageContext& ctx) {
    const auto data = to_spacetime(read_grid(ctx.input(files::spacetime)));
    detail::run_stage("radon", ctx, [&] {
        const auto& cfg = ctx.config;
        const auto r = forward_radon(data, slowness_axis_of(cfg), tau_axis_of(cfg, data), cfg.radon.upsample);
        ctx.write(files::radon, encode(to_file(r, data.geometry, data.time, cfg.hash)));
    });
}

inline void stage_semblance(StageContext& ctx) {
    const auto data = to_spacetime(read_grid(ctx.input(files::spacetime)));
    detail::run_stage("semblance", ctx, [&] {
        const auto& cfg = ctx.config;
        const auto s = semblance(data, slowness_axis_of(cfg), tau_axis_of(cfg, data), window_of(cfg, data.dt()),
                                 cfg.radon.upsample);
        ctx.write(files::semblance, encode(to_file(s, data.geometry, data.time, cfg.hash)));
    });
}

inline void stage_filter(StageContext& ctx) {
    const auto radon_file = read_grid(ctx.input(files::radon));
    const auto semb_file = read_grid(ctx.output(files::semblance));
    const auto radon = to_radon(radon_file);
    const auto semb = to_semblance(semb_file);
    detail::run_stage("filter", ctx, [&] {
        const auto& cfg = ctx.config;
        if (!(radon.slowness == semb.slowness))
            throw std::invalid_argument("radon and semblance grids use different slowness axes");
        const auto profile = slowness_profile(semb);
        const auto bands = detect_plane_waves(profile, cfg.semblance.epsilon);
        const auto mask = build_mask(bands, radon.slowness, cfg.filter.guard_cells, cfg.filter.taper_cells);
        const auto filtered = apply_mask(radon, mask);

        json det;
        det["epsilon"] = cfg.semblance.epsilon;
        det["bands"] = json::array();
        for (const auto& b : bands) det["bands"].push_back(detail::band_json(b));
        det["profile"] = {{"slowness", profile.slowness.values()}, {"values", profile.values}};
        det["mask"] = {{"guard_cells", mask.guard_cells}, {"taper_cells", mask.taper_cells}, {"gains", mask.gains}};
        det["mask"]["stopped"] = json::array();
        for (const auto& b : mask.stopped) det["mask"]["stopped"].push_back(detail::band_json(b));

        ctx.write(files::detections, det.dump(2) + "\n");
        ctx.write(files::filtered,
                  encode(to_file(filtered, detail::geometry_of_file(radon_file, "radon grid"),
                                 detail::record_of(radon_file, "radon grid"), cfg.hash)));
        ctx.manifest["detections"] = det["bands"];
    });
}

inline void stage_invert(StageContext& ctx) {
    const auto file = read_grid(ctx.input(files::filtered));
    const auto radon = to_radon(file);
    const auto geometry = detail::geometry_of_file(file, "radon grid");
    const auto record = detail::record_of(file, "radon grid");
    detail::run_stage("invert", ctx, [&] {
        const auto& cfg = ctx.config;
        const auto inv = inverse_radon(radon, geometry, record, {cfg.radon.upsample, kInverseRadonScale});
        ctx.write(files::inverse, encode(to_file(inv, cfg.hash)));
    });
}

inline void stage_localize(StageContext& ctx) {
    const auto filtered = to_spacetime(read_grid(ctx.input(files::inverse)));
    const auto original = to_spacetime(read_grid(ctx.output(files::spacetime)));
    detail::run_stage("localize", ctx, [&] {
        const auto& cfg = ctx.config;
        LocalizationConfig lc;
        lc.far_field_threshold = cfg.localization.far_field_threshold;
        lc.k_max = cfg.localization.k_max;
        lc.aoa.slowness_count = cfg.radon.n_p;
        lc.aoa.window = window_of(cfg, filtered.dt());
        lc.aoa.upsample = cfg.radon.upsample;
        lc.aoa.coherent_gate = cfg.localization.coherent_gate;
        const auto ex = localize_and_extract(filtered, original, lc);

        json rays = json::array();
        for (const auto& e : ex.position.rays)
            rays.push_back({{"center", e.center},
                            {"slowness", e.slowness},
                            {"sin_angle", e.slowness * kSpeedOfLight},
                            {"delay", e.delay},
                            {"peak_semblance", e.peak_semblance}});
        json subs = json::array();
        for (const auto& s : ex.partition.subarrays)
            subs.push_back({{"first", s.first},
                            {"count", s.count},
                            {"center", s.center},
                            {"length", s.length},
                            {"fraunhofer_distance", fraunhofer_distance(s.length, original.geometry.carrier_wavelength)}});
        json position = {{"x", ex.position.x}, {"z", ex.position.z}, {"residual", ex.position.residual}};
        json loc = {{"k", ex.partition.k},
                    {"position", position},
                    {"rays", rays},
                    {"subarrays", subs},
                    {"peak_time", ex.peak_time},
                    {"peak_value", ex.peak_value}};

        std::string csv = "t,stack\n";
        for (std::size_t i = 0; i < ex.envelope.size(); ++i)
            csv += format_double(ex.emission[i]) + "," + format_double(ex.envelope[i]) + "\n";

        ctx.write(files::localization, loc.dump(2) + "\n");
        ctx.write(files::envelope, csv);
        ctx.manifest["position"] = position;
        ctx.manifest["position"]["k"] = ex.partition.k;
        ctx.manifest["position"]["peak_time"] = ex.peak_time;
    });
}

enum class Stage { synth, radon, semblance, filter, invert, localize };

inline void run_single_stage(Stage stage, const ScenarioConfig& cfg, const fs::path& out_dir,
                             const std::optional<fs::path>& stage_input) {
    fs::create_directories(out_dir);
    Manifest manifest(out_dir, cfg, stage == Stage::synth);
    StageContext ctx{cfg, out_dir, stage_input, manifest};
    try {
        switch (stage) {
            case Stage::synth: stage_synth(ctx); break;
            case Stage::radon: stage_radon(ctx); break;
            case Stage::semblance: stage_semblance(ctx); break;
            case Stage::filter: stage_filter(ctx); break;
            case Stage::invert: stage_invert(ctx); break;
            case Stage::localize: stage_localize(ctx); break;
        }
    } catch (...) {
        manifest.save();
        throw;
    }
    manifest.save();
}

/// Runs every stage in order into out_dir, starting from a fresh manifest.
inline Manifest run_pipeline(const ScenarioConfig& cfg, const fs::path& out_dir) {
    try {
        fs::create_directories(out_dir);
    } catch (const fs::filesystem_error& e) {
        throw IoError(std::string("cannot create output directory: ") + e.what());
    }
    Manifest manifest(out_dir, cfg, true);
    StageContext ctx{cfg, out_dir, std::nullopt, manifest};
    try {
        stage_synth(ctx);
        stage_radon(ctx);
        stage_semblance(ctx);
        stage_filter(ctx);
        stage_invert(ctx);
        stage_localize(ctx);
    } catch (...) {
        manifest.save();
        throw;
    }
    manifest.save();
    return manifest;
}

}  // namespace uwbr::io

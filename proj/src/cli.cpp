#include "patchpoison/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "patchpoison/dataset_io.hpp"
#include "patchpoison/error.hpp"
#include "patchpoison/fs_util.hpp"
#include "patchpoison/image_codec.hpp"
#include "patchpoison/log.hpp"
#include "patchpoison/poison.hpp"
#include "patchpoison/render.hpp"

namespace fs = std::filesystem;

namespace patchpoison {

namespace {

std::optional<BackgroundPolicy> resolve_background(const std::string& name, bool nerf_layout) {
    if (name == "auto") return nerf_layout ? BackgroundPolicy::Black : BackgroundPolicy::Keep;
    return parse_background(name);
}

std::string fmt(double v, int digits) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v, int digits) { return v ? fmt(*v, digits) : ""; }

std::string short_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

bool same_dir(const fs::path& a, const fs::path& b) {
    std::error_code ec1, ec2;
    return fs::weakly_canonical(a, ec1) == fs::weakly_canonical(b, ec2) && !ec1 && !ec2;
}

// Usage error: message plus the subcommand's help on the error stream.
int usage_error(std::ostream& err, const CLI::App* cmd, const std::string& msg) {
    err << "error: " << msg << "\n\n" << cmd->help();
    return 1;
}

int fatal(std::ostream& err, const std::string& msg) {
    err << "error: " << msg << "\n";
    return 1;
}

// ---------------------------------------------------------------------------
// poison

struct PoisonArgs {
    std::string input, output;
    std::string pattern = "checkerboard";
    std::string corner = "top_left";
    std::string background = "auto";
    int size = 12, block = 4, contrast = 255, dark = 0, margin = 0;
    double alpha = 1.0, ratio = 1.0;
    std::uint64_t seed = 0;
};

int cmd_poison(const PoisonArgs& a, const CLI::App* cmd, std::ostream& out, std::ostream& err) {
    PatchSpec spec;
    const auto kind = parse_pattern_kind(a.pattern);
    if (!kind) return usage_error(err, cmd, "unknown pattern '" + a.pattern + "'");
    const auto corner = parse_corner(a.corner);
    if (!corner) return usage_error(err, cmd, "unknown corner '" + a.corner + "'");
    spec.kind = *kind;
    spec.corner = *corner;
    spec.size_px = a.size;
    spec.block_px = a.block;
    spec.alpha = a.alpha;
    spec.bright_level = a.contrast;
    spec.dark_level = a.dark;
    spec.margin_px = a.margin;
    try {
        validate(spec);
    } catch (const Error& e) {
        return usage_error(err, cmd, e.what());
    }
    if (!(a.ratio > 0.0 && a.ratio <= 1.0)) return usage_error(err, cmd, "--ratio must lie in (0,1]");
    if (same_dir(a.input, a.output)) return usage_error(err, cmd, "--output must differ from --input");

    try {
        const SceneDataset ds = load_scene(a.input);
        const auto bg = resolve_background(a.background, ds.nerf_layout);
        if (!bg) return usage_error(err, cmd, "unknown background '" + a.background + "'");
        const PoisonManifest m = poison_dataset(ds.image_paths, spec, a.ratio, a.seed, a.output, PoisonOptions{*bg});
        const fs::path manifest = fs::path(a.output) / kManifestFileName;
        out << manifest.string() << "\n";
        out << "poisoned " << m.poisoned_count() << " of " << m.entries.size() << " images";
        if (m.error_count()) out << ", " << m.error_count() << " failed";
        out << "\n";
        for (const auto& e : m.entries)
            if (e.error) err << "failed: " << e.source << ": " << *e.error << "\n";
        return m.error_count() ? 2 : 0;
    } catch (const Error& e) {
        return fatal(err, e.what());
    }
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string a, b, output;
    std::string direction = "poisoned_vs_original";
    std::string lpips;
    std::string background = "auto";
};

std::map<std::string, double> read_lpips_sidecar(const fs::path& path) {
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidInput, path.string() + ": " + e.what());
    }
    if (j.is_object() && j.contains("lpips")) j = j["lpips"];
    if (!j.is_object()) throw Error(ErrorKind::InvalidInput, path.string() + ": expected an object of name -> value");
    std::map<std::string, double> out;
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = number_from_json(it.value());
    return out;
}

int cmd_evaluate(const EvaluateArgs& a, const CLI::App* cmd, std::ostream& out, std::ostream& err) {
    const auto direction = parse_direction(a.direction);
    if (!direction) return usage_error(err, cmd, "unknown direction '" + a.direction + "'");
    try {
        SceneDataset da = load_scene(a.a);
        SceneDataset db = load_scene(a.b);
        const auto bg = resolve_background(a.background, da.nerf_layout || db.nerf_layout);
        if (!bg) return usage_error(err, cmd, "unknown background '" + a.background + "'");
        da.background = db.background = *bg;
        if (da.image_paths.size() != db.image_paths.size())
            return fatal(err, "image count mismatch: " + std::to_string(da.image_paths.size()) + " in " + a.a + ", " +
                                  std::to_string(db.image_paths.size()) + " in " + a.b);
        ensure_writable_dir(a.output);

        std::vector<MetricPair> pairs;
        for (std::size_t i = 0; i < da.image_paths.size(); ++i) {
            ImageBuffer ia, ib;
            try {
                ia = da.load_image(i);
            } catch (const Error& e) {
                return fatal(err, "cannot read " + da.image_paths[i].string() + ": " + e.what());
            }
            try {
                ib = db.load_image(i);
            } catch (const Error& e) {
                return fatal(err, "cannot read " + db.image_paths[i].string() + ": " + e.what());
            }
            if (!ia.same_shape(ib))
                return fatal(err, "shape mismatch: " + da.image_paths[i].string() + " vs " + db.image_paths[i].string());
            MetricPair m;
            m.name = da.image_paths[i].filename().string();
            m.ssim = ssim(ia, ib);
            m.psnr_db = psnr(ia, ib);
            pairs.push_back(std::move(m));
        }
        AggregateReport report = aggregate(std::move(pairs), *direction);
        if (!a.lpips.empty()) attach_lpips(report, read_lpips_sidecar(a.lpips));

        write_text_atomic(fs::path(a.output) / "report.json", to_json(report).dump(2) + "\n");
        write_text_atomic(fs::path(a.output) / "report.csv", to_csv({report}));
        out << format_table(report);
        return 0;
    } catch (const Error& e) {
        return fatal(err, e.what());
    }
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseArgs {
    std::string input, output, gt, region, manifest;
    std::string background = "auto";
    int pairs = 0;  // 0 = all
    bool dump_features = false;
};

std::optional<Region> parse_region(const std::string& text) {
    Region r;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%d,%d,%d,%d%c", &r.x, &r.y, &r.w, &r.h, &extra) != 4) return std::nullopt;
    if (r.x < 0 || r.y < 0 || r.w <= 0 || r.h <= 0) return std::nullopt;
    return r;
}

// Region per output filename for poisoned entries.
std::map<std::string, Region> manifest_regions(const fs::path& path) {
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidInput, path.string() + ": " + e.what());
    }
    const PoisonManifest m = manifest_from_json(j);
    std::map<std::string, Region> out;
    for (const auto& e : m.entries)
        if (e.poisoned && e.region) out[fs::path(e.output).filename().string()] = *e.region;
    return out;
}

int cmd_diagnose(const DiagnoseArgs& a, const CLI::App* cmd, std::ostream& out, std::ostream& err) {
    std::optional<Region> fixed_region;
    if (!a.region.empty()) {
        fixed_region = parse_region(a.region);
        if (!fixed_region) return usage_error(err, cmd, "--region expects x,y,w,h with positive size");
    }
    if (a.pairs < 0) return usage_error(err, cmd, "--pairs must be >= 1");
    try {
        SceneDataset ds = load_scene(a.input);
        const auto bg = resolve_background(a.background, ds.nerf_layout);
        if (!bg) return usage_error(err, cmd, "unknown background '" + a.background + "'");
        ds.background = *bg;
        const std::size_t n = ds.image_paths.size();
        if (n < 2) return fatal(err, "diagnose needs at least two images, found " + std::to_string(n));

        std::optional<CameraMetadata> cameras = ds.cameras;
        if (!a.gt.empty()) cameras = match_transforms(a.gt, ds.image_paths);

        std::map<std::string, Region> regions;
        fs::path manifest = a.manifest;
        if (manifest.empty() && !fixed_region && fs::exists(fs::path(a.input) / kManifestFileName))
            manifest = fs::path(a.input) / kManifestFileName;
        if (!manifest.empty() && !fixed_region) regions = manifest_regions(manifest);

        ensure_writable_dir(a.output);

        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
        if (a.pairs > 0 && static_cast<std::size_t>(a.pairs) < pairs.size()) pairs.resize(static_cast<std::size_t>(a.pairs));

        Json listing = Json::array();
        double sum_fraction = 0.0, sum_area = 0.0;
        std::vector<double> ransac_rot, direct_rot;
        std::size_t failed = 0;
        for (const auto& [i, j] : pairs) {
            ImageBuffer ia, ib;
            try {
                ia = ds.load_image(i);
                ib = ds.load_image(j);
            } catch (const Error& e) {
                return fatal(err, "cannot read pair " + ds.image_paths[i].string() + ", " + ds.image_paths[j].string() +
                                      ": " + e.what());
            }
            std::optional<Region> region = fixed_region;
            if (!region) {
                const auto ra = regions.find(ds.image_paths[i].filename().string());
                const auto rb = regions.find(ds.image_paths[j].filename().string());
                if (ra != regions.end() && rb != regions.end() && ra->second == rb->second) region = ra->second;
            }
            std::optional<PoseTruth> truth;
            if (cameras) truth = relative_pose(*cameras, i, j, ia.width, ia.height);

            PairFeatures pf;
            const DiagnosticReport rep = diagnose_pair(ia, ib, region, truth, {}, a.dump_features ? &pf : nullptr);
            const std::string stem = ds.image_paths[i].stem().string() + "__" + ds.image_paths[j].stem().string();
            Json jr = to_json(rep);
            jr["image_a"] = ds.image_paths[i].filename().string();
            jr["image_b"] = ds.image_paths[j].filename().string();
            write_text_atomic(fs::path(a.output) / ("pair_" + stem + ".json"), jr.dump(2) + "\n");
            if (a.dump_features)
                write_text_atomic(fs::path(a.output) / ("features_" + stem + ".json"), features_debug_json(pf).dump() + "\n");

            sum_fraction += rep.patch_match_fraction;
            sum_area += rep.patch_area_fraction;
            if (rep.ransac.rotation_error_deg) ransac_rot.push_back(*rep.ransac.rotation_error_deg);
            if (rep.direct.rotation_error_deg) direct_rot.push_back(*rep.direct.rotation_error_deg);
            if (!rep.ransac.ok() || !rep.direct.ok()) ++failed;

            listing.push_back(Json{{"image_a", jr["image_a"]},
                                   {"image_b", jr["image_b"]},
                                   {"report", "pair_" + stem + ".json"},
                                   {"total_matches", rep.total_matches},
                                   {"patch_match_fraction", rep.patch_match_fraction},
                                   {"patch_area_fraction", rep.patch_area_fraction},
                                   {"ransac_status", to_string(rep.ransac.status)},
                                   {"no_ransac_status", to_string(rep.direct.status)},
                                   {"ransac_rotation_error_deg", jr["ransac"]["rotation_error_deg"]},
                                   {"no_ransac_rotation_error_deg", jr["no_ransac"]["rotation_error_deg"]}});
            out << stem << ": matches " << rep.total_matches << ", patch fraction " << fmt(rep.patch_match_fraction, 4)
                << " (area " << fmt(rep.patch_area_fraction, 4) << ")";
            if (rep.ransac.rotation_error_deg) out << ", rotation error " << fmt(*rep.ransac.rotation_error_deg, 3) << " deg";
            if (rep.direct.rotation_error_deg) out << " / " << fmt(*rep.direct.rotation_error_deg, 3) << " deg without RANSAC";
            if (!rep.ransac.ok()) out << ", RANSAC: " << to_string(rep.ransac.status);
            out << "\n";
        }
        const Summary rs = summarize(ransac_rot), ds_ = summarize(direct_rot);
        const double np = static_cast<double>(pairs.size());
        Json aggregate{{"schema_version", kSchemaVersion},
                       {"pairs", listing.size()},
                       {"ground_truth", cameras.has_value()},
                       {"mean_patch_match_fraction", sum_fraction / np},
                       {"mean_patch_area_fraction", sum_area / np},
                       {"mean_ransac_rotation_error_deg", rs.mean ? Json(*rs.mean) : Json(nullptr)},
                       {"mean_no_ransac_rotation_error_deg", ds_.mean ? Json(*ds_.mean) : Json(nullptr)},
                       {"failed_estimations", failed},
                       {"entries", std::move(listing)}};
        write_text_atomic(fs::path(a.output) / "diagnostics.json", aggregate.dump(2) + "\n");
        return 0;
    } catch (const Error& e) {
        return fatal(err, e.what());
    }
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    std::string output;
    std::uint64_t seed = 0;
    int size = 800;
    double baseline = 0.6;
};

int cmd_synth(const SynthArgs& a, const CLI::App* cmd, std::ostream& out, std::ostream& err) {
    if (a.size < 64) return usage_error(err, cmd, "--size must be >= 64");
    if (!(a.baseline > 0)) return usage_error(err, cmd, "--baseline must be positive");
    try {
        RenderOptions ro;
        ro.width = ro.height = a.size;
        ro.focal = a.size;
        ro.baseline = a.baseline;
        const RenderedTwoView rv = render_two_view(a.seed, ro);
        ensure_writable_dir(a.output);
        write_image(fs::path(a.output) / "view_a.png", rv.image_a);
        write_image(fs::path(a.output) / "view_b.png", rv.image_b);
        const Json t = transforms_json({rv.camera_a, rv.camera_b}, {"./view_a", "./view_b"}, a.size);
        write_text_atomic(fs::path(a.output) / "transforms.json", t.dump(2) + "\n");
        out << "wrote 2 views and transforms.json to " << a.output << "\n";
        return 0;
    } catch (const Error& e) {
        return fatal(err, e.what());
    }
}

// ---------------------------------------------------------------------------
// sweep

std::string cell_label(SweepAxis axis, const Json& v) {
    switch (axis) {
        case SweepAxis::PatchSize:
        case SweepAxis::BlockSize:
        case SweepAxis::Contrast: return std::to_string(v.get<int>());
        case SweepAxis::Alpha:
        case SweepAxis::PoisonRatio: return short_number(v.get<double>());
        case SweepAxis::PatternKind: return v.get<std::string>();
    }
    return "?";
}

// Applies one axis value; throws InvalidParameter when it does not fit the axis.
void apply_value(SweepAxis axis, const Json& v, PatchSpec& spec, double& ratio) {
    auto need_int = [&] {
        if (!v.is_number_integer()) throw Error(ErrorKind::InvalidParameter, "expected an integer, got " + v.dump());
        return v.get<int>();
    };
    auto need_real = [&] {
        if (!v.is_number()) throw Error(ErrorKind::InvalidParameter, "expected a number, got " + v.dump());
        return v.get<double>();
    };
    switch (axis) {
        case SweepAxis::PatchSize: spec.size_px = need_int(); break;
        case SweepAxis::BlockSize: spec.block_px = need_int(); break;
        case SweepAxis::Contrast: spec.bright_level = need_int(); break;
        case SweepAxis::Alpha: spec.alpha = need_real(); break;
        case SweepAxis::PoisonRatio:
            ratio = need_real();
            if (!(ratio > 0.0 && ratio <= 1.0))
                throw Error(ErrorKind::InvalidParameter, "poison ratio must lie in (0,1], got " + v.dump());
            break;
        case SweepAxis::PatternKind: {
            if (!v.is_string()) throw Error(ErrorKind::InvalidParameter, "expected a pattern name, got " + v.dump());
            const auto kind = parse_pattern_kind(v.get<std::string>());
            if (!kind) throw Error(ErrorKind::InvalidParameter, "unknown pattern " + v.dump());
            spec.kind = *kind;
            break;
        }
    }
    validate(spec);
}

void run_cell(const SweepConfig& c, const SceneDataset& ds, SweepCell& cell) {
    const fs::path dir = c.output / (std::string(to_string(c.axis)) + "_" + cell.label);
    const PoisonManifest m = poison_dataset(ds.image_paths, cell.spec, cell.ratio, c.seed, dir / "images",
                                            PoisonOptions{ds.background});
    cell.images = m.entries.size();
    cell.poisoned = m.poisoned_count();
    cell.failed_images = m.error_count();
    if (cell.failed_images == cell.images) throw Error(ErrorKind::InvalidInput, "every image failed: " + *m.entries[0].error);

    std::vector<MetricPair> pairs;
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        if (m.entries[i].error) continue;
        const ImageBuffer original = ds.load_image(i);
        const ImageBuffer poisoned = read_image(m.entries[i].output);
        MetricPair p;
        p.name = ds.image_paths[i].filename().string();
        p.ssim = ssim(poisoned, original);
        p.psnr_db = psnr(poisoned, original);
        pairs.push_back(std::move(p));
    }
    cell.evaluation = aggregate(std::move(pairs));
    write_text_atomic(dir / "report.json", to_json(*cell.evaluation).dump(2) + "\n");

    if (m.entries.size() >= 2 && !m.entries[0].error && !m.entries[1].error) {
        const ImageBuffer a = read_image(m.entries[0].output);
        const ImageBuffer b = read_image(m.entries[1].output);
        std::optional<Region> region;
        if (m.entries[0].region && m.entries[0].region == m.entries[1].region) region = m.entries[0].region;
        std::optional<PoseTruth> truth;
        if (ds.cameras) truth = relative_pose(*ds.cameras, 0, 1, a.width, a.height);
        cell.diagnostic = diagnose_pair(a, b, region, truth);
        write_text_atomic(dir / "diagnostic.json", to_json(*cell.diagnostic).dump(2) + "\n");
    }
    cell.ok = true;
}

int cmd_sweep(const std::string& config_path, std::ostream& out, std::ostream& err) {
    SweepConfig config;
    try {
        Json j;
        try {
            j = Json::parse(read_text_file(config_path));
        } catch (const nlohmann::json::exception& e) {
            return fatal(err, config_path + ": " + e.what());
        }
        config = parse_sweep_config(j, fs::path(config_path).parent_path());
    } catch (const Error& e) {
        return fatal(err, e.what());
    }
    try {
        const auto cells = run_sweep(config);
        const std::string csv = sweep_csv(config, cells);
        write_text_atomic(config.output / "sweep.csv", csv);
        out << csv;
        std::size_t ok = 0;
        for (const auto& c : cells) {
            if (c.ok) ++ok;
            else err << "cell " << c.label << " failed: " << c.error << "\n";
        }
        return ok == 0 ? 1 : 0;
    } catch (const Error& e) {
        return fatal(err, e.what());
    }
}

}  // namespace

std::string_view to_string(SweepAxis axis) noexcept {
    switch (axis) {
        case SweepAxis::PatchSize: return "patch_size";
        case SweepAxis::BlockSize: return "block_size";
        case SweepAxis::Contrast: return "contrast";
        case SweepAxis::Alpha: return "alpha";
        case SweepAxis::PatternKind: return "pattern_kind";
        case SweepAxis::PoisonRatio: return "poison_ratio";
    }
    return "unknown";
}

std::optional<SweepAxis> parse_sweep_axis(std::string_view name) {
    for (auto a : {SweepAxis::PatchSize, SweepAxis::BlockSize, SweepAxis::Contrast, SweepAxis::Alpha,
                   SweepAxis::PatternKind, SweepAxis::PoisonRatio})
        if (to_string(a) == name) return a;
    return std::nullopt;
}

SweepConfig parse_sweep_config(const Json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw Error(ErrorKind::InvalidParameter, "sweep config must be a JSON object");
    SweepConfig c;
    try {
        const auto axis = parse_sweep_axis(j.at("axis").get<std::string>());
        if (!axis) throw Error(ErrorKind::InvalidParameter, "unknown sweep axis " + j.at("axis").dump());
        c.axis = *axis;
        const Json& values = j.at("values");
        if (!values.is_array() || values.empty()) throw Error(ErrorKind::InvalidParameter, "sweep values must be a non-empty list");
        c.values.assign(values.begin(), values.end());
        if (j.contains("base")) c.base = patch_spec_from_json(j.at("base"));
        c.ratio = j.value("ratio", 1.0);
        c.seed = j.value("seed", std::uint64_t{0});
        c.background = j.value("background", std::string("auto"));
        c.parallel = j.value("parallel", false);
        auto resolve = [&](const std::string& p) {
            const fs::path path(p);
            return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
        };
        c.input = resolve(j.at("input").get<std::string>());
        c.output = resolve(j.at("output").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidParameter, std::string("sweep config: ") + e.what());
    } catch (const Error& e) {
        throw Error(ErrorKind::InvalidParameter, e.what());
    }
    if (c.background != "auto" && !parse_background(c.background))
        throw Error(ErrorKind::InvalidParameter, "unknown background '" + c.background + "'");
    if (!(c.ratio > 0.0 && c.ratio <= 1.0)) throw Error(ErrorKind::InvalidParameter, "ratio must lie in (0,1]");
    for (const auto& v : c.values) {
        PatchSpec spec = c.base;
        double ratio = c.ratio;
        try {
            apply_value(c.axis, v, spec, ratio);
        } catch (const Error& e) {
            throw Error(ErrorKind::InvalidParameter,
                        "invalid " + std::string(to_string(c.axis)) + " value " + v.dump() + ": " + e.what());
        }
    }
    return c;
}

std::vector<SweepCell> run_sweep(const SweepConfig& config) {
    SceneDataset ds = load_scene(config.input);
    const auto bg = resolve_background(config.background, ds.nerf_layout);
    if (!bg) throw Error(ErrorKind::InvalidParameter, "unknown background '" + config.background + "'");
    ds.background = *bg;
    ensure_writable_dir(config.output);

    std::vector<SweepCell> cells(config.values.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        cells[i].spec = config.base;
        cells[i].ratio = config.ratio;
        apply_value(config.axis, config.values[i], cells[i].spec, cells[i].ratio);
        cells[i].label = cell_label(config.axis, config.values[i]);
    }
    auto run = [&](SweepCell& cell) {
        try {
            run_cell(config, ds, cell);
        } catch (const Error& e) {
            cell.ok = false;
            cell.error = e.what();
        }
    };
    if (config.parallel) {
        std::vector<std::thread> workers;
        for (auto& cell : cells) workers.emplace_back(run, std::ref(cell));
        for (auto& w : workers) w.join();
    } else {
        for (auto& cell : cells) run(cell);
    }
    return cells;
}

std::string sweep_csv(const SweepConfig& config, const std::vector<SweepCell>& cells) {
    std::ostringstream csv;
    csv << to_string(config.axis)
        << ",ssim,psnr,lpips,images,poisoned,failed_images,patch_match_fraction,patch_area_fraction,"
           "ransac_rotation_error_deg,no_ransac_rotation_error_deg,status\n";
    for (const auto& c : cells) {
        csv << c.label << ',';
        if (c.evaluation)
            csv << fmt_opt(c.evaluation->ssim.mean, 6) << ',' << fmt_opt(c.evaluation->psnr.mean, 4) << ','
                << fmt_opt(c.evaluation->lpips.mean, 6);
        else
            csv << ",,";
        csv << ',' << c.images << ',' << c.poisoned << ',' << c.failed_images << ',';
        if (c.diagnostic)
            csv << fmt(c.diagnostic->patch_match_fraction, 6) << ',' << fmt(c.diagnostic->patch_area_fraction, 6) << ','
                << fmt_opt(c.diagnostic->ransac.rotation_error_deg, 4) << ','
                << fmt_opt(c.diagnostic->direct.rotation_error_deg, 4);
        else
            csv << ",,,";
        csv << ',' << (c.ok ? "ok" : "failed") << '\n';
    }
    return csv.str();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Poison multi-view image sets with high-frequency patches and measure the effect", "patchpoison"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    PoisonArgs pa;
    auto* poison = app.add_subcommand("poison", "Embed a patch into a fraction of the images in a directory");
    poison->add_option("--input", pa.input, "Input image directory")->required();
    poison->add_option("--output", pa.output, "Output directory")->required();
    poison->add_option("--pattern", pa.pattern, "Pattern kind")->capture_default_str();
    poison->add_option("--size", pa.size, "Patch edge length P in pixels")->capture_default_str();
    poison->add_option("--block", pa.block, "Cell size b in pixels")->capture_default_str();
    poison->add_option("--alpha", pa.alpha, "Blend opacity in [0,1]")->capture_default_str();
    poison->add_option("--contrast", pa.contrast, "Bright cell level (0-255)")->capture_default_str();
    poison->add_option("--dark", pa.dark, "Dark cell level (0-255)")->capture_default_str();
    poison->add_option("--corner", pa.corner, "top_left|top_right|bottom_left|bottom_right")->capture_default_str();
    poison->add_option("--margin", pa.margin, "Offset from the corner in pixels")->capture_default_str();
    poison->add_option("--ratio", pa.ratio, "Fraction of images to poison, (0,1]")->capture_default_str();
    poison->add_option("--seed", pa.seed, "Seed for the poisoned subset")->capture_default_str();
    poison->add_option("--background", pa.background, "auto|black|white|keep (RGBA compositing)")->capture_default_str();

    EvaluateArgs ea;
    auto* evaluate = app.add_subcommand("evaluate", "SSIM/PSNR between two aligned image directories");
    evaluate->add_option("--a", ea.a, "Poisoned images")->required();
    evaluate->add_option("--b", ea.b, "Reference images (originals or renders)")->required();
    evaluate->add_option("--output", ea.output, "Report directory")->required();
    evaluate->add_option("--direction", ea.direction, "poisoned_vs_original|poisoned_vs_render")->capture_default_str();
    evaluate->add_option("--lpips", ea.lpips, "JSON object of externally computed LPIPS values by filename");
    evaluate->add_option("--background", ea.background, "auto|black|white|keep")->capture_default_str();

    DiagnoseArgs da;
    auto* diagnose = app.add_subcommand("diagnose", "Feature matching and two-view geometry diagnostics per image pair");
    diagnose->add_option("--input", da.input, "Image directory")->required();
    diagnose->add_option("--output", da.output, "Report directory")->required();
    diagnose->add_option("--gt", da.gt, "transforms.json with ground-truth cameras");
    diagnose->add_option("--pairs", da.pairs, "Diagnose only the first k pairs");
    diagnose->add_option("--region", da.region, "Patch region x,y,w,h");
    diagnose->add_option("--manifest", da.manifest, "Poison manifest giving the patch regions");
    diagnose->add_option("--background", da.background, "auto|black|white|keep")->capture_default_str();
    diagnose->add_flag("--dump-features", da.dump_features, "Write keypoints, descriptors and matches per pair");

    std::string sweep_config;
    auto* sweep = app.add_subcommand("sweep", "Run an ablation sweep described by a JSON config");
    sweep->add_option("config", sweep_config, "Sweep config file")->required();

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "Render a synthetic two-view scene with transforms.json");
    synth->add_option("--output", sa.output, "Output directory")->required();
    synth->add_option("--seed", sa.seed, "Scene seed")->capture_default_str();
    synth->add_option("--size", sa.size, "Image edge length")->capture_default_str();
    synth->add_option("--baseline", sa.baseline, "Camera B distance from camera A")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    if (poison->parsed()) return cmd_poison(pa, poison, out, err);
    if (evaluate->parsed()) return cmd_evaluate(ea, evaluate, out, err);
    if (diagnose->parsed()) return cmd_diagnose(da, diagnose, out, err);
    if (sweep->parsed()) return cmd_sweep(sweep_config, out, err);
    if (synth->parsed()) return cmd_synth(sa, synth, out, err);
    return 1;
}

}  // namespace patchpoison

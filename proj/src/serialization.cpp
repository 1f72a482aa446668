#include "patchpoison/serialization.hpp"

#include <cmath>
#include <limits>

#include "patchpoison/error.hpp"

namespace patchpoison {

namespace {

template <class T>
Json optional_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

Json optional_number(const std::optional<double>& v) { return v ? number_or_string(*v) : Json(nullptr); }

Json summary_json(const Summary& s) {
    return Json{{"mean", optional_number(s.mean)},
                {"std", optional_number(s.stddev)},
                {"finite_count", s.finite_count}};
}

Json matrix_json(const Mat3& m) {
    Json rows = Json::array();
    for (int r = 0; r < 3; ++r) rows.push_back(Json::array({m(r, 0), m(r, 1), m(r, 2)}));
    return rows;
}

Json estimator_json(const EstimatorResult& e) {
    Json j{{"status", to_string(e.status)}};
    if (!e.message.empty()) j["message"] = e.message;
    if (e.ok()) {
        j["inliers"] = e.inliers;
        j["median_sampson_px"] = e.median_sampson;
        j["F"] = matrix_json(e.F);
    }
    j["rotation_error_deg"] = optional_number(e.rotation_error_deg);
    j["translation_error_deg"] = optional_number(e.translation_error_deg);
    return j;
}

template <class F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string("malformed ") + what + ": " + e.what());
    }
}

}  // namespace

Json number_or_string(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double number_from_json(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw Error(ErrorKind::InvalidInput, "expected a number, got " + j.dump());
}

Json to_json(const PatchSpec& spec) {
    return Json{{"kind", to_string(spec.kind)},
                {"size_px", spec.size_px},
                {"block_px", spec.block_px},
                {"alpha", spec.alpha},
                {"bright_level", spec.bright_level},
                {"dark_level", spec.dark_level},
                {"corner", to_string(spec.corner)},
                {"margin_px", spec.margin_px}};
}

PatchSpec patch_spec_from_json(const Json& j) {
    return guarded("patch spec", [&] {
        PatchSpec s;
        if (!j.is_object()) throw Error(ErrorKind::InvalidInput, "patch spec must be a JSON object");
        if (j.contains("kind")) {
            const auto kind = parse_pattern_kind(j.at("kind").get<std::string>());
            if (!kind) throw Error(ErrorKind::InvalidInput, "unknown pattern kind " + j.at("kind").dump());
            s.kind = *kind;
        }
        if (j.contains("corner")) {
            const auto corner = parse_corner(j.at("corner").get<std::string>());
            if (!corner) throw Error(ErrorKind::InvalidInput, "unknown corner " + j.at("corner").dump());
            s.corner = *corner;
        }
        s.size_px = j.value("size_px", s.size_px);
        s.block_px = j.value("block_px", s.block_px);
        s.alpha = j.value("alpha", s.alpha);
        s.bright_level = j.value("bright_level", s.bright_level);
        s.dark_level = j.value("dark_level", s.dark_level);
        s.margin_px = j.value("margin_px", s.margin_px);
        return s;
    });
}

Json to_json(const Region& r) { return Json{{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

Region region_from_json(const Json& j) {
    return guarded("region", [&] {
        return Region{j.at("x").get<int>(), j.at("y").get<int>(), j.at("w").get<int>(), j.at("h").get<int>()};
    });
}

Json to_json(const PoisonManifest& m) {
    Json entries = Json::array();
    for (const auto& e : m.entries) {
        entries.push_back(Json{{"source", e.source},
                               {"output", e.output},
                               {"poisoned", e.poisoned},
                               {"region", e.region ? to_json(*e.region) : Json(nullptr)},
                               {"error", optional_json(e.error)}});
    }
    return Json{{"schema_version", kSchemaVersion},
                {"spec", to_json(m.spec)},
                {"ratio", m.ratio},
                {"seed", m.seed},
                {"background", to_string(m.background)},
                {"poisoned_count", m.poisoned_count()},
                {"entries", std::move(entries)}};
}

PoisonManifest manifest_from_json(const Json& j) {
    return guarded("manifest", [&] {
        PoisonManifest m;
        m.spec = patch_spec_from_json(j.at("spec"));
        m.ratio = j.at("ratio").get<double>();
        m.seed = j.at("seed").get<std::uint64_t>();
        const auto bg = parse_background(j.at("background").get<std::string>());
        if (!bg) throw Error(ErrorKind::InvalidInput, "unknown background " + j.at("background").dump());
        m.background = *bg;
        for (const auto& e : j.at("entries")) {
            ManifestEntry entry;
            entry.source = e.at("source").get<std::string>();
            entry.output = e.at("output").get<std::string>();
            entry.poisoned = e.at("poisoned").get<bool>();
            if (!e.at("region").is_null()) entry.region = region_from_json(e.at("region"));
            if (!e.at("error").is_null()) entry.error = e.at("error").get<std::string>();
            m.entries.push_back(std::move(entry));
        }
        return m;
    });
}

Json to_json(const AggregateReport& r) {
    Json pairs = Json::array();
    for (const auto& p : r.pairs) {
        pairs.push_back(Json{{"name", p.name},
                             {"ssim", number_or_string(p.ssim)},
                             {"psnr_db", number_or_string(p.psnr_db)},
                             {"lpips", optional_number(p.lpips)}});
    }
    const auto& sp = r.ssim_params;
    return Json{{"schema_version", kSchemaVersion},
                {"direction", to_string(r.direction)},
                {"ssim_params",
                 {{"window", sp.window}, {"sigma", sp.sigma}, {"k1", sp.k1}, {"k2", sp.k2}, {"L", sp.dynamic_range}}},
                {"pairs", std::move(pairs)},
                {"summary", {{"ssim", summary_json(r.ssim)}, {"psnr_db", summary_json(r.psnr)}, {"lpips", summary_json(r.lpips)}}}};
}

Json to_json(const DiagnosticReport& r) {
    return Json{{"schema_version", kSchemaVersion},
                {"width", r.width},
                {"height", r.height},
                {"keypoints_a", r.keypoints_a},
                {"keypoints_b", r.keypoints_b},
                {"total_matches", r.total_matches},
                {"patch_matches", r.patch_matches},
                {"patch_region", r.patch ? to_json(*r.patch) : Json(nullptr)},
                {"patch_area_fraction", r.patch_area_fraction},
                {"patch_match_fraction", r.patch_match_fraction},
                {"ransac_inlier_fraction", r.ransac_inlier_fraction},
                {"median_sampson_patch_px", optional_number(r.median_sampson_patch)},
                {"median_sampson_scene_px", optional_number(r.median_sampson_scene)},
                {"residual_reference", r.residual_reference},
                {"ground_truth", r.has_ground_truth},
                {"ransac", estimator_json(r.ransac)},
                {"no_ransac", estimator_json(r.direct)}};
}

Json features_debug_json(const PairFeatures& pf) {
    auto side = [](const FeatureSet& fs) {
        Json kps = Json::array();
        for (std::size_t i = 0; i < fs.keypoints.size(); ++i) {
            const auto& k = fs.keypoints[i];
            Json desc = Json::array();
            for (float v : fs.descriptors[i]) desc.push_back(v);
            kps.push_back(Json{{"x", k.x},
                               {"y", k.y},
                               {"scale", k.scale},
                               {"orientation", k.orientation},
                               {"response", k.response},
                               {"octave", k.octave},
                               {"layer", k.layer},
                               {"descriptor", std::move(desc)}});
        }
        return kps;
    };
    Json matches = Json::array();
    for (const auto& m : pf.matches)
        matches.push_back(Json{{"a", m.index_a}, {"b", m.index_b}, {"distance", m.distance}, {"ratio", m.ratio}});
    return Json{{"schema_version", kSchemaVersion},
                {"keypoints_a", side(pf.a)},
                {"keypoints_b", side(pf.b)},
                {"matches", std::move(matches)}};
}

}  // namespace patchpoison

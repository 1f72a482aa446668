#include "patchpoison/diagnose.hpp"

#include <algorithm>

#include "patchpoison/error.hpp"

namespace patchpoison {

namespace {

std::optional<double> median(std::vector<double> v) {
    if (v.empty()) return std::nullopt;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

EstimateStatus status_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InsufficientData: return EstimateStatus::InsufficientData;
        case ErrorKind::DegenerateConfiguration: return EstimateStatus::Degenerate;
        default: return EstimateStatus::EstimationFailure;
    }
}

void attach_pose_error(EstimatorResult& r, std::span<const PointMatch> matches, const FundamentalEstimate& est,
                       const PoseTruth& truth) {
    std::vector<PointMatch> used;
    used.reserve(est.inliers.size());
    for (auto i : est.inliers) used.push_back(matches[i]);
    try {
        const RelativePose pose = recover_pose(est.F, truth.K_a, truth.K_b, used);
        r.rotation_error_deg = rotation_error_deg(pose.R, truth.R);
        if (truth.t.norm() > 0) r.translation_error_deg = translation_direction_error_deg(pose.t, truth.t);
    } catch (const Error& e) {
        r.status = status_for(e.kind());
        r.message = std::string("pose: ") + e.what();
    }
}

EstimatorResult run_estimator(std::span<const PointMatch> matches, bool robust, const RansacParams& params,
                              const std::optional<PoseTruth>& truth) {
    EstimatorResult r;
    FundamentalEstimate est;
    try {
        est = robust ? ransac_fundamental(matches, params) : eight_point(matches);
    } catch (const Error& e) {
        r.status = status_for(e.kind());
        r.message = e.what();
        return r;
    }
    r.status = est.status;
    r.message = est.message;
    if (!est.ok()) return r;
    r.F = est.F;
    r.inliers = est.inliers.size();
    r.median_sampson = est.median_sampson;
    if (truth) attach_pose_error(r, matches, est, *truth);
    return r;
}

}  // namespace

DiagnosticReport diagnose_matches(std::span<const PointMatch> matches, int width, int height,
                                  const std::optional<Region>& patch, const std::optional<PoseTruth>& truth,
                                  const RansacParams& ransac) {
    if (width <= 0 || height <= 0) throw Error(ErrorKind::InvalidParameter, "image size must be positive");
    DiagnosticReport rep;
    rep.width = width;
    rep.height = height;
    rep.total_matches = matches.size();
    rep.has_ground_truth = truth.has_value();
    if (patch && !patch->empty()) {
        rep.patch = patch;
        rep.patch_area_fraction = static_cast<double>(patch->area()) / (static_cast<double>(width) * height);
    }

    std::vector<bool> in_patch(matches.size(), false);
    if (rep.patch) {
        for (std::size_t i = 0; i < matches.size(); ++i) {
            const auto& m = matches[i];
            in_patch[i] = rep.patch->contains(m.a.x(), m.a.y()) && rep.patch->contains(m.b.x(), m.b.y());
            if (in_patch[i]) ++rep.patch_matches;
        }
    }
    if (!matches.empty())
        rep.patch_match_fraction = static_cast<double>(rep.patch_matches) / static_cast<double>(matches.size());

    rep.ransac = run_estimator(matches, true, ransac, truth);
    rep.direct = run_estimator(matches, false, ransac, truth);
    if (rep.ransac.ok() && !matches.empty())
        rep.ransac_inlier_fraction = static_cast<double>(rep.ransac.inliers) / static_cast<double>(matches.size());

    std::optional<Mat3> reference;
    if (truth && truth->t.norm() > 0) {
        reference = fundamental_from_pose(truth->K_a, truth->K_b, truth->R, truth->t);
        rep.residual_reference = "ground_truth";
    } else if (rep.ransac.ok()) {
        reference = rep.ransac.F;
        rep.residual_reference = "ransac";
    }
    if (reference) {
        std::vector<double> patch_res, scene_res;
        for (std::size_t i = 0; i < matches.size(); ++i)
            (in_patch[i] ? patch_res : scene_res).push_back(sampson_distance(*reference, matches[i].a, matches[i].b));
        rep.median_sampson_patch = median(std::move(patch_res));
        rep.median_sampson_scene = median(std::move(scene_res));
    }
    return rep;
}

DiagnosticReport diagnose_pair(const ImageBuffer& a, const ImageBuffer& b, const std::optional<Region>& patch,
                               const std::optional<PoseTruth>& truth, const DiagnoseParams& params,
                               PairFeatures* features_out) {
    validate(a);
    validate(b);
    if (a.width != b.width || a.height != b.height)
        throw Error(ErrorKind::InvalidInput, "diagnosed images must have the same size");
    PairFeatures pf;
    pf.a = extract_features(a, params.features);
    pf.b = extract_features(b, params.features);
    pf.matches = match(pf.a.descriptors, pf.b.descriptors, params.matching);
    pf.points.reserve(pf.matches.size());
    for (const auto& m : pf.matches) {
        const Keypoint& ka = pf.a.keypoints[m.index_a];
        const Keypoint& kb = pf.b.keypoints[m.index_b];
        pf.points.push_back(PointMatch{Vec2(ka.x, ka.y), Vec2(kb.x, kb.y)});
    }
    DiagnosticReport rep = diagnose_matches(pf.points, a.width, a.height, patch, truth, params.ransac);
    rep.keypoints_a = pf.a.keypoints.size();
    rep.keypoints_b = pf.b.keypoints.size();
    if (features_out) *features_out = std::move(pf);
    return rep;
}

double rotation_error_or_max(const EstimatorResult& r) {
    return r.ok() && r.rotation_error_deg ? *r.rotation_error_deg : 180.0;
}

}  // namespace patchpoison

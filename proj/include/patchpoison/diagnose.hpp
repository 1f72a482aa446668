#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patchpoison/features.hpp"
#include "patchpoison/geometry.hpp"

namespace patchpoison {

struct DiagnoseParams {
    FeatureParams features;
    MatchParams matching;
    RansacParams ransac;
};

/// Outcome of one estimator (RANSAC or plain 8-point over every match).
struct EstimatorResult {
    EstimateStatus status = EstimateStatus::InsufficientData;
    std::string message;
    Mat3 F = Mat3::Zero();
    std::size_t inliers = 0;
    double median_sampson = 0.0;
    // Filled only with ground truth and a successful pose recovery.
    std::optional<double> rotation_error_deg;
    std::optional<double> translation_error_deg;

    bool ok() const noexcept { return status == EstimateStatus::Ok; }
};

struct DiagnosticReport {
    int width = 0;
    int height = 0;
    std::size_t keypoints_a = 0;
    std::size_t keypoints_b = 0;
    std::size_t total_matches = 0;
    std::size_t patch_matches = 0;  // both endpoints inside the patch region
    std::optional<Region> patch;
    double patch_area_fraction = 0.0;
    double patch_match_fraction = 0.0;
    double ransac_inlier_fraction = 0.0;
    // Median Sampson distance (px) of patch / non-patch matches under the
    // reference F: ground truth when known, else the RANSAC estimate.
    std::optional<double> median_sampson_patch;
    std::optional<double> median_sampson_scene;
    std::string residual_reference = "none";
    bool has_ground_truth = false;
    EstimatorResult ransac;
    EstimatorResult direct;
};

/// Estimation half of the diagnosis, on an explicit match list.
DiagnosticReport diagnose_matches(std::span<const PointMatch> matches, int width, int height,
                                  const std::optional<Region>& patch, const std::optional<PoseTruth>& truth,
                                  const RansacParams& ransac = {});

/// Everything the features stage produced for a pair, for debug dumps.
struct PairFeatures {
    FeatureSet a;
    FeatureSet b;
    std::vector<MatchPair> matches;
    std::vector<PointMatch> points;
};

/// detect -> describe -> match on two same-sized images, then diagnose_matches.
/// Fewer than 8 matches yields a report whose estimators carry failure status.
DiagnosticReport diagnose_pair(const ImageBuffer& a, const ImageBuffer& b, const std::optional<Region>& patch,
                               const std::optional<PoseTruth>& truth, const DiagnoseParams& params = {},
                               PairFeatures* features_out = nullptr);

/// Rotation error used when comparing runs: a failed estimate counts as 180 degrees.
double rotation_error_or_max(const EstimatorResult& r);

}  // namespace patchpoison

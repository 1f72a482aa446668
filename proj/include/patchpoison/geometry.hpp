#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patchpoison/poison.hpp"

namespace patchpoison {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// One correspondence: pixel position in view A and in view B.
struct PointMatch {
    Vec2 a;
    Vec2 b;
};

/// Pinhole camera, world-to-camera: X_cam = R * X_world + t.
struct CameraModel {
    Mat3 K = Mat3::Identity();
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3::Zero();

    Vec3 center() const { return -R.transpose() * t; }
};

/// Throws InvalidParameter unless R is orthonormal with det +1 (1e-9) and
/// K is upper triangular with zero skew and positive focal lengths.
void validate(const CameraModel& camera);

Mat3 intrinsics(double fx, double fy, double cx, double cy);

struct NormalizedPoints {
    std::vector<Vec2> points;
    Mat3 transform;  // maps input (homogeneous) to normalized points
};

/// Hartley normalization: centroid to the origin, mean distance sqrt(2).
/// Throws DegenerateConfiguration when all points coincide.
NormalizedPoints normalize_points(std::span<const Vec2> points);

enum class EstimateStatus { Ok, InsufficientData, Degenerate, EstimationFailure };

std::string_view to_string(EstimateStatus s) noexcept;

/// Rank-2 fundamental matrix with ||F||_F = 1 and x_b^T F x_a = 0.
struct FundamentalEstimate {
    Mat3 F = Mat3::Zero();
    std::vector<std::size_t> inliers;
    double median_sampson = 0.0;  // px, over inliers
    double max_sampson = 0.0;
    std::size_t iterations = 0;  // RANSAC only
    EstimateStatus status = EstimateStatus::Ok;
    std::string message;

    bool ok() const noexcept { return status == EstimateStatus::Ok; }
};

/// First-order geometric epipolar error in pixels. Invariant to the scale of F.
double sampson_distance(const Mat3& F, const Vec2& xa, const Vec2& xb);

/// Normalized linear 8-point fit over every match, rank 2 enforced by
/// zeroing the smallest singular value. All matches count as inliers.
/// Throws InsufficientData below 8 matches and DegenerateConfiguration when
/// the design matrix has a null space of dimension > 1.
FundamentalEstimate eight_point(std::span<const PointMatch> matches);

struct RansacParams {
    double threshold_px = 1.0;
    int max_iterations = 2000;
    std::uint64_t seed = 0;
    double confidence = 0.999;
};

/// RANSAC over 8-point samples with a Sampson inlier test, adaptive stopping
/// and a refit on the consensus set that is kept when it lowers the truncated
/// squared Sampson error. Deterministic for a given seed.
/// Throws InsufficientData below 8 matches; a run that never finds 8
/// inliers returns status EstimationFailure.
FundamentalEstimate ransac_fundamental(std::span<const PointMatch> matches, const RansacParams& params = {});

struct RelativePose {
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3::Zero();  // unit length
    std::size_t cheirality_votes = 0;
};

/// Essential-matrix factorization of K_b^T F K_a; the candidate with the most
/// points in front of both cameras wins. Throws AmbiguousPose on a tie and
/// DegenerateConfiguration for a vanishing E.
RelativePose recover_pose(const Mat3& F, const Mat3& K_a, const Mat3& K_b, std::span<const PointMatch> matches);
RelativePose recover_pose(const Mat3& F, const Mat3& K, std::span<const PointMatch> matches);

/// Geodesic angle between two rotations, degrees.
double rotation_error_deg(const Mat3& estimated, const Mat3& truth);
/// Angle between two direction vectors, degrees.
double translation_direction_error_deg(const Vec3& estimated, const Vec3& truth);

/// F = K_b^-T [t]x R K_a^-1, Frobenius-normalized.
Mat3 fundamental_from_pose(const Mat3& K_a, const Mat3& K_b, const Mat3& R, const Vec3& t);

/// Known relative pose between two views (X_b = R X_a + t).
struct PoseTruth {
    Mat3 K_a = Mat3::Identity();
    Mat3 K_b = Mat3::Identity();
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3::Zero();
};

struct SynthOptions {
    int width = 800;
    int height = 800;
    double focal = 800.0;
    double box_half_width = 1.5;  // points: |x|,|y| <= this, in camera A coordinates
    double depth_min = 4.0;
    double depth_max = 8.0;
    double max_rotation_deg = 8.0;
};

struct SyntheticTwoView {
    CameraModel camera_a;
    CameraModel camera_b;
    int width = 0;
    int height = 0;
    std::vector<Vec3> points;
    std::vector<PointMatch> matches;  // projections, noise included
    Mat3 R = Mat3::Identity();  // ground-truth relative pose
    Vec3 t = Vec3::Zero();  // unit length when the baseline is nonzero
    Mat3 F = Mat3::Zero();
    bool degenerate = false;  // coincident camera centers
    std::optional<Region> patch;
    std::vector<PointMatch> spurious;

    PoseTruth truth() const { return {camera_a.K, camera_b.K, R, t}; }
};

/// Seeded scene: points in a box in front of camera A (at the origin) and a
/// second camera displaced by `baseline` with a small random rotation.
SyntheticTwoView synth_two_view(int n_points, double baseline, double noise_px, std::uint64_t seed,
                                const SynthOptions& options = {});

/// Same, with an explicit relative rotation and camera-B center.
SyntheticTwoView synth_two_view_with_pose(int n_points, const Mat3& R, const Vec3& center_b, double noise_px,
                                          std::uint64_t seed, const SynthOptions& options = {});

/// Adds identical-coordinate pairs (p, p), p uniform in `region`, so they make
/// up `contamination` of the returned list. contamination must lie in [0,1).
std::vector<PointMatch> inject_spurious(std::span<const PointMatch> clean, double contamination,
                                        const Region& region, std::uint64_t seed);

}  // namespace patchpoison

#include "patchpoison/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "patchpoison/error.hpp"
#include "patchpoison/random.hpp"

namespace patchpoison {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
// Relative size of the second-smallest singular value of the design matrix
// below which the 8-point system has more than one solution.
constexpr double kNullspaceTolerance = 1e-10;

Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
    return m;
}

// Unit Frobenius norm with the largest-magnitude entry positive.
Mat3 canonical_scale(const Mat3& F) {
    Mat3 out = F / F.norm();
    Eigen::Index r = 0, c = 0;
    out.cwiseAbs().maxCoeff(&r, &c);
    if (out(r, c) < 0) out = -out;
    return out;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

void fill_residuals(FundamentalEstimate& est, std::span<const PointMatch> matches) {
    std::vector<double> r;
    r.reserve(est.inliers.size());
    for (auto i : est.inliers) r.push_back(sampson_distance(est.F, matches[i].a, matches[i].b));
    est.max_sampson = r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
    est.median_sampson = median_of(std::move(r));
}

Mat3 fit_fundamental(std::span<const PointMatch> matches) {
    if (matches.size() < 8)
        throw Error(ErrorKind::InsufficientData,
                    "8-point needs at least 8 matches, got " + std::to_string(matches.size()));
    std::vector<Vec2> pa, pb;
    pa.reserve(matches.size());
    pb.reserve(matches.size());
    for (const auto& m : matches) {
        pa.push_back(m.a);
        pb.push_back(m.b);
    }
    const NormalizedPoints na = normalize_points(pa);
    const NormalizedPoints nb = normalize_points(pb);

    Eigen::MatrixXd A(static_cast<Eigen::Index>(matches.size()), 9);
    for (std::size_t i = 0; i < matches.size(); ++i) {
        const double x = na.points[i].x(), y = na.points[i].y();
        const double u = nb.points[i].x(), v = nb.points[i].y();
        A.row(static_cast<Eigen::Index>(i)) << u * x, u * y, u, v * x, v * y, v, x, y, 1.0;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // With 8 rows the ninth singular value is implicitly zero; the eighth must not be.
    if (sv(0) <= 0.0 || sv(7) < kNullspaceTolerance * sv(0))
        throw Error(ErrorKind::DegenerateConfiguration, "8-point design matrix has a multi-dimensional null space");
    const Eigen::VectorXd f = svd.matrixV().col(8);
    Mat3 Fn;
    Fn << f(0), f(1), f(2), f(3), f(4), f(5), f(6), f(7), f(8);

    Eigen::JacobiSVD<Mat3> fsvd(Fn, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vec3 s = fsvd.singularValues();
    s(2) = 0.0;
    Fn = fsvd.matrixU() * s.asDiagonal() * fsvd.matrixV().transpose();
    return canonical_scale(nb.transform.transpose() * Fn * na.transform);
}

std::size_t count_inliers(const Mat3& F, std::span<const PointMatch> matches, double threshold,
                          std::vector<std::size_t>* inliers) {
    std::size_t count = 0;
    if (inliers) inliers->clear();
    for (std::size_t i = 0; i < matches.size(); ++i) {
        if (sampson_distance(F, matches[i].a, matches[i].b) <= threshold) {
            ++count;
            if (inliers) inliers->push_back(i);
        }
    }
    return count;
}

// Linear triangulation in normalized camera coordinates; returns the point in
// camera-A coordinates.
Vec3 triangulate(const Vec3& xa, const Vec3& xb, const Mat3& R, const Vec3& t) {
    Eigen::Matrix<double, 3, 4> Pa = Eigen::Matrix<double, 3, 4>::Zero();
    Pa.leftCols<3>() = Mat3::Identity();
    Eigen::Matrix<double, 3, 4> Pb;
    Pb.leftCols<3>() = R;
    Pb.col(3) = t;
    Eigen::Matrix4d A;
    A.row(0) = xa.x() * Pa.row(2) - Pa.row(0);
    A.row(1) = xa.y() * Pa.row(2) - Pa.row(1);
    A.row(2) = xb.x() * Pb.row(2) - Pb.row(0);
    A.row(3) = xb.y() * Pb.row(2) - Pb.row(1);
    const Eigen::JacobiSVD<Eigen::Matrix4d> svd(A, Eigen::ComputeFullV);
    const Eigen::Vector4d X = svd.matrixV().col(3);
    if (std::abs(X(3)) < 1e-300) return Vec3(0, 0, -1);
    return X.head<3>() / X(3);
}

Mat3 random_rotation(Rng& rng, double max_deg) {
    Vec3 axis(rng.normal(), rng.normal(), rng.normal());
    if (axis.norm() < 1e-12) axis = Vec3::UnitY();
    const double angle = rng.uniform(-max_deg, max_deg) / kRadToDeg;
    return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Vec2 project(const Mat3& K, const Vec3& Xc) {
    const Vec3 p = K * Xc;
    return p.head<2>() / p.z();
}

}  // namespace

void validate(const CameraModel& camera) {
    const Mat3& K = camera.K;
    if (!(K(0, 0) > 0 && K(1, 1) > 0) || K(1, 0) != 0 || K(2, 0) != 0 || K(2, 1) != 0 || K(0, 1) != 0 ||
        K(2, 2) != 1)
        throw Error(ErrorKind::InvalidParameter, "intrinsics must be upper triangular with zero skew and f > 0");
    if ((camera.R.transpose() * camera.R - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
        std::abs(camera.R.determinant() - 1.0) > 1e-9)
        throw Error(ErrorKind::InvalidParameter, "rotation must be orthonormal with det +1");
}

Mat3 intrinsics(double fx, double fy, double cx, double cy) {
    Mat3 K;
    K << fx, 0, cx, 0, fy, cy, 0, 0, 1;
    return K;
}

NormalizedPoints normalize_points(std::span<const Vec2> points) {
    if (points.size() < 2) throw Error(ErrorKind::DegenerateConfiguration, "normalization needs >= 2 points");
    Vec2 centroid = Vec2::Zero();
    for (const auto& p : points) centroid += p;
    centroid /= static_cast<double>(points.size());
    double mean_dist = 0.0;
    for (const auto& p : points) mean_dist += (p - centroid).norm();
    mean_dist /= static_cast<double>(points.size());
    if (!(mean_dist > 0.0)) throw Error(ErrorKind::DegenerateConfiguration, "all points coincide");

    const double scale = std::sqrt(2.0) / mean_dist;
    NormalizedPoints out;
    out.transform << scale, 0, -scale * centroid.x(), 0, scale, -scale * centroid.y(), 0, 0, 1;
    out.points.reserve(points.size());
    for (const auto& p : points) out.points.push_back(scale * (p - centroid));
    return out;
}

std::string_view to_string(EstimateStatus s) noexcept {
    switch (s) {
        case EstimateStatus::Ok: return "ok";
        case EstimateStatus::InsufficientData: return "insufficient_data";
        case EstimateStatus::Degenerate: return "degenerate";
        case EstimateStatus::EstimationFailure: return "estimation_failure";
    }
    return "unknown";
}

double sampson_distance(const Mat3& F, const Vec2& xa, const Vec2& xb) {
    const Vec3 a(xa.x(), xa.y(), 1.0), b(xb.x(), xb.y(), 1.0);
    const Vec3 Fa = F * a;
    const Vec3 Ftb = F.transpose() * b;
    const double e = b.dot(Fa);
    const double denom = Fa.x() * Fa.x() + Fa.y() * Fa.y() + Ftb.x() * Ftb.x() + Ftb.y() * Ftb.y();
    if (denom <= 0.0) return e == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(e) / std::sqrt(denom);
}

FundamentalEstimate eight_point(std::span<const PointMatch> matches) {
    FundamentalEstimate est;
    est.F = fit_fundamental(matches);
    est.inliers.resize(matches.size());
    for (std::size_t i = 0; i < matches.size(); ++i) est.inliers[i] = i;
    fill_residuals(est, matches);
    return est;
}

FundamentalEstimate ransac_fundamental(std::span<const PointMatch> matches, const RansacParams& params) {
    if (matches.size() < 8)
        throw Error(ErrorKind::InsufficientData, "RANSAC needs at least 8 matches, got " + std::to_string(matches.size()));
    if (!(params.threshold_px > 0.0) || params.max_iterations < 1)
        throw Error(ErrorKind::InvalidParameter, "RANSAC threshold and iteration count must be positive");

    const std::size_t n = matches.size();
    // MSAC score: inliers contribute their squared Sampson distance, the
    // rest the squared threshold. Among models that explain the same matches
    // the tighter one wins, which plain counting cannot tell apart.
    const double t2 = params.threshold_px * params.threshold_px;
    auto truncated_cost = [&](const Mat3& F, std::size_t* count) {
        double c = 0.0;
        std::size_t k = 0;
        for (const auto& m : matches) {
            const double d = sampson_distance(F, m.a, m.b);
            if (std::isfinite(d) && d <= params.threshold_px) {
                c += d * d;
                ++k;
            } else {
                c += t2;
            }
        }
        if (count) *count = k;
        return c;
    };

    Rng rng(params.seed);
    Mat3 best_F = Mat3::Zero();
    std::size_t best_count = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    std::size_t needed = static_cast<std::size_t>(params.max_iterations);
    std::size_t iter = 0;
    std::vector<std::size_t> sample(8);
    std::vector<PointMatch> subset(8);
    for (; iter < needed && iter < static_cast<std::size_t>(params.max_iterations); ++iter) {
        // Floyd's algorithm: 8 distinct indices.
        for (std::size_t k = 0; k < 8; ++k) {
            const std::size_t j = n - 8 + k;
            std::size_t r = static_cast<std::size_t>(rng.below(j + 1));
            if (std::find(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(k), r) !=
                sample.begin() + static_cast<std::ptrdiff_t>(k))
                r = j;
            sample[k] = r;
        }
        for (std::size_t k = 0; k < 8; ++k) subset[k] = matches[sample[k]];
        Mat3 F;
        try {
            F = fit_fundamental(subset);
        } catch (const Error&) {
            continue;
        }
        std::size_t count = 0;
        const double cost = truncated_cost(F, &count);
        if (cost < best_cost) {
            best_cost = cost;
            best_F = F;
        }
        if (count > best_count) {
            best_count = count;
            const double w = static_cast<double>(count) / static_cast<double>(n);
            const double p_good = std::pow(w, 8.0);
            if (p_good >= 1.0) {
                needed = iter + 1;
            } else if (p_good > 0.0) {
                const double k = std::log(1.0 - params.confidence) / std::log(1.0 - p_good);
                if (std::isfinite(k)) needed = std::min(needed, static_cast<std::size_t>(std::ceil(k)));
            }
        }
    }

    FundamentalEstimate est;
    est.iterations = iter;
    if (best_count < 8) {
        est.status = EstimateStatus::EstimationFailure;
        est.message = "no model reached 8 inliers";
        return est;
    }
    est.F = best_F;
    count_inliers(est.F, matches, params.threshold_px, &est.inliers);

    // Refit on the consensus set, kept only when it lowers the score:
    // near-threshold outliers in the set can otherwise drag F away from the
    // model that explained the true inliers exactly.
    double cost = best_cost;
    for (int round = 0; round < 3; ++round) {
        std::vector<PointMatch> inl;
        inl.reserve(est.inliers.size());
        for (auto i : est.inliers) inl.push_back(matches[i]);
        Mat3 refit;
        try {
            refit = fit_fundamental(inl);
        } catch (const Error&) {
            break;
        }
        const double refit_cost = truncated_cost(refit, nullptr);
        if (!(refit_cost < cost)) break;
        std::vector<std::size_t> refit_inliers;
        count_inliers(refit, matches, params.threshold_px, &refit_inliers);
        if (refit_inliers.size() < 8) break;
        const bool same = refit_inliers == est.inliers;
        est.F = refit;
        est.inliers = std::move(refit_inliers);
        cost = refit_cost;
        if (same) break;
    }
    fill_residuals(est, matches);
    return est;
}

RelativePose recover_pose(const Mat3& F, const Mat3& K_a, const Mat3& K_b, std::span<const PointMatch> matches) {
    if (matches.empty()) throw Error(ErrorKind::InsufficientData, "pose recovery needs at least one match");
    const Mat3 E = K_b.transpose() * F * K_a;
    Eigen::JacobiSVD<Mat3> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (!(svd.singularValues()(0) > 1e-12 * std::max(1.0, E.norm())) || !std::isfinite(E.norm()))
        throw Error(ErrorKind::DegenerateConfiguration, "essential matrix vanishes");
    Mat3 U = svd.matrixU(), V = svd.matrixV();
    if (U.determinant() < 0) U = -U;
    if (V.determinant() < 0) V = -V;
    Mat3 W;
    W << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    const Mat3 R1 = U * W * V.transpose();
    const Mat3 R2 = U * W.transpose() * V.transpose();
    const Vec3 t = U.col(2).normalized();

    const Mat3 Ka_inv = K_a.inverse(), Kb_inv = K_b.inverse();
    std::vector<Vec3> na, nb;
    na.reserve(matches.size());
    nb.reserve(matches.size());
    for (const auto& m : matches) {
        na.push_back(Ka_inv * Vec3(m.a.x(), m.a.y(), 1.0));
        nb.push_back(Kb_inv * Vec3(m.b.x(), m.b.y(), 1.0));
    }

    const std::pair<Mat3, Vec3> candidates[4] = {{R1, t}, {R1, -t}, {R2, t}, {R2, -t}};
    std::size_t votes[4] = {0, 0, 0, 0};
    for (int c = 0; c < 4; ++c) {
        const auto& [R, tc] = candidates[c];
        for (std::size_t i = 0; i < na.size(); ++i) {
            const Vec3 X = triangulate(na[i] / na[i].z(), nb[i] / nb[i].z(), R, tc);
            if (X.z() > 0 && (R * X + tc).z() > 0) ++votes[c];
        }
    }
    int best = 0;
    for (int c = 1; c < 4; ++c)
        if (votes[c] > votes[best]) best = c;
    for (int c = 0; c < 4; ++c)
        if (c != best && votes[c] == votes[best])
            throw Error(ErrorKind::AmbiguousPose, "cheirality vote is tied between pose candidates");
    if (votes[best] == 0) throw Error(ErrorKind::AmbiguousPose, "no pose candidate puts points in front of both cameras");
    return RelativePose{candidates[best].first, candidates[best].second, votes[best]};
}

RelativePose recover_pose(const Mat3& F, const Mat3& K, std::span<const PointMatch> matches) {
    return recover_pose(F, K, K, matches);
}

double rotation_error_deg(const Mat3& estimated, const Mat3& truth) {
    const Mat3 D = estimated.transpose() * truth;
    const Vec3 axis(D(2, 1) - D(1, 2), D(0, 2) - D(2, 0), D(1, 0) - D(0, 1));
    const double s = 0.5 * axis.norm();
    const double c = 0.5 * (D.trace() - 1.0);
    return std::atan2(s, c) * kRadToDeg;
}

double translation_direction_error_deg(const Vec3& estimated, const Vec3& truth) {
    return std::atan2(estimated.cross(truth).norm(), estimated.dot(truth)) * kRadToDeg;
}

Mat3 fundamental_from_pose(const Mat3& K_a, const Mat3& K_b, const Mat3& R, const Vec3& t) {
    const Mat3 F = K_b.inverse().transpose() * skew(t) * R * K_a.inverse();
    if (F.norm() == 0.0) return F;
    return canonical_scale(F);
}

SyntheticTwoView synth_two_view_with_pose(int n_points, const Mat3& R, const Vec3& center_b, double noise_px,
                                          std::uint64_t seed, const SynthOptions& opt) {
    if (n_points < 8) throw Error(ErrorKind::InvalidParameter, "synthetic scene needs at least 8 points");
    if (!(noise_px >= 0.0)) throw Error(ErrorKind::InvalidParameter, "noise must be non-negative");
    SyntheticTwoView scene;
    scene.width = opt.width;
    scene.height = opt.height;
    const Mat3 K = intrinsics(opt.focal, opt.focal, 0.5 * opt.width, 0.5 * opt.height);
    scene.camera_a = CameraModel{K, Mat3::Identity(), Vec3::Zero()};
    scene.camera_b = CameraModel{K, R, -R * center_b};
    validate(scene.camera_a);
    validate(scene.camera_b);
    scene.R = R;
    const Vec3 t = -R * center_b;
    scene.degenerate = center_b.norm() < 1e-12;
    scene.t = scene.degenerate ? Vec3::Zero() : Vec3(t.normalized());
    scene.F = fundamental_from_pose(K, K, R, t);

    Rng rng(seed);
    Rng noise(split_seed(seed, 1));
    const auto inside = [&](const Vec2& p) { return p.x() >= 0 && p.y() >= 0 && p.x() < opt.width && p.y() < opt.height; };
    const long max_attempts = 1000L * n_points;
    long attempts = 0;
    while (static_cast<int>(scene.points.size()) < n_points) {
        if (++attempts > max_attempts)
            throw Error(ErrorKind::DegenerateConfiguration, "cannot place synthetic points visible in both views");
        const Vec3 X(rng.uniform(-opt.box_half_width, opt.box_half_width),
                     rng.uniform(-opt.box_half_width, opt.box_half_width), rng.uniform(opt.depth_min, opt.depth_max));
        const Vec3 Xb = R * X + t;
        if (X.z() <= 0.1 || Xb.z() <= 0.1) continue;
        const Vec2 pa = project(K, X), pb = project(K, Xb);
        if (!inside(pa) || !inside(pb)) continue;
        scene.points.push_back(X);
        scene.matches.push_back(PointMatch{pa, pb});
    }
    if (noise_px > 0.0) {
        for (auto& m : scene.matches) {
            m.a += noise_px * Vec2(noise.normal(), noise.normal());
            m.b += noise_px * Vec2(noise.normal(), noise.normal());
        }
    }
    return scene;
}

SyntheticTwoView synth_two_view(int n_points, double baseline, double noise_px, std::uint64_t seed,
                                const SynthOptions& options) {
    if (!(baseline >= 0.0)) throw Error(ErrorKind::InvalidParameter, "baseline must be non-negative");
    Rng rng(split_seed(seed, 0));
    const Mat3 R = random_rotation(rng, options.max_rotation_deg);
    const Vec3 dir = Vec3(1.0, rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)).normalized();
    return synth_two_view_with_pose(n_points, R, baseline * dir, noise_px, seed, options);
}

std::vector<PointMatch> inject_spurious(std::span<const PointMatch> clean, double contamination, const Region& region,
                                        std::uint64_t seed) {
    if (!(contamination >= 0.0 && contamination < 1.0))
        throw Error(ErrorKind::InvalidParameter, "contamination must lie in [0,1)");
    std::vector<PointMatch> out(clean.begin(), clean.end());
    if (contamination == 0.0) return out;
    if (region.empty()) throw Error(ErrorKind::InvalidParameter, "spurious matches need a non-empty region");
    const auto extra = static_cast<std::size_t>(
        std::round(contamination * static_cast<double>(clean.size()) / (1.0 - contamination)));
    Rng rng(seed);
    for (std::size_t i = 0; i < extra; ++i) {
        const Vec2 p(region.x + rng.uniform() * region.w, region.y + rng.uniform() * region.h);
        out.push_back(PointMatch{p, p});
    }
    return out;
}

}  // namespace patchpoison

#include "patchpoison/features.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>

#include "patchpoison/error.hpp"

namespace patchpoison {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kOrientationBins = 36;
constexpr int kDescWidth = 4;  // spatial cells per side
constexpr int kDescBins = 8;
constexpr double kDescScale = 3.0;  // cell width in units of the keypoint sigma
constexpr double kDescClamp = 0.2;

int reflect101(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}

// Separable blur with reflect-101 borders. Weights and sums are double so a
// constant image comes back bit-identical.
GrayImage gaussian_blur(const GrayImage& src, double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i)
        sum += k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (auto& v : k) v /= sum;

    const int w = src.width, h = src.height;
    GrayImage tmp(w, h), out(w, h);
    for (int y = 0; y < h; ++y) {
        const float* row = &src.data[static_cast<std::size_t>(y) * w];
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            if (x >= radius && x < w - radius) {
                for (int i = -radius; i <= radius; ++i) acc += k[static_cast<std::size_t>(i + radius)] * row[x + i];
            } else {
                for (int i = -radius; i <= radius; ++i)
                    acc += k[static_cast<std::size_t>(i + radius)] * row[reflect101(x + i, w)];
            }
            tmp.at(x, y) = static_cast<float>(acc);
        }
    }
    std::vector<double> acc(static_cast<std::size_t>(w));
    for (int y = 0; y < h; ++y) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int i = -radius; i <= radius; ++i) {
            const double wi = k[static_cast<std::size_t>(i + radius)];
            const float* row = &tmp.data[static_cast<std::size_t>(reflect101(y + i, h)) * w];
            for (int x = 0; x < w; ++x) acc[static_cast<std::size_t>(x)] += wi * row[x];
        }
        for (int x = 0; x < w; ++x) out.at(x, y) = static_cast<float>(acc[static_cast<std::size_t>(x)]);
    }
    return out;
}

GrayImage downsample(const GrayImage& src) {
    GrayImage out((src.width + 1) / 2, (src.height + 1) / 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) out.at(x, y) = src.at(2 * x, 2 * y);
    return out;
}

// 2x bilinear upsampling; output pixel X samples input position X/2.
GrayImage upsample2(const GrayImage& src) {
    GrayImage out(2 * src.width, 2 * src.height);
    for (int y = 0; y < out.height; ++y) {
        const int y0 = y / 2, y1 = std::min(y0 + (y & 1), src.height - 1);
        for (int x = 0; x < out.width; ++x) {
            const int x0 = x / 2, x1 = std::min(x0 + (x & 1), src.width - 1);
            const double sum = double(src.at(x0, y0)) + src.at(x1, y0) + src.at(x0, y1) + src.at(x1, y1);
            out.at(x, y) = static_cast<float>(0.25 * sum);
        }
    }
    return out;
}

GrayImage subtract(const GrayImage& a, const GrayImage& b) {
    GrayImage out(a.width, a.height);
    for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] - b.data[i];
    return out;
}

struct Candidate {
    double xo;  // octave pixels
    double yo;
    double level;  // layer + offset
    int layer;
    double offset;
    double response;
};

// Quadratic refinement of a 3x3x3 extremum. Returns false when rejected.
bool refine(const Octave& oct, int s, const DetectorParams& p, int c, int r, int layer, Candidate& out) {
    const int w = oct.width, h = oct.height;
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();
    Eigen::Vector3d grad;
    int iter = 0;
    for (; iter < p.max_refine_iterations; ++iter) {
        const GrayImage& prev = oct.dogs[static_cast<std::size_t>(layer - 1)];
        const GrayImage& cur = oct.dogs[static_cast<std::size_t>(layer)];
        const GrayImage& next = oct.dogs[static_cast<std::size_t>(layer + 1)];
        const double v = cur.at(c, r);
        grad << 0.5 * (cur.at(c + 1, r) - cur.at(c - 1, r)), 0.5 * (cur.at(c, r + 1) - cur.at(c, r - 1)),
            0.5 * (next.at(c, r) - prev.at(c, r));
        const double dxx = cur.at(c + 1, r) + cur.at(c - 1, r) - 2 * v;
        const double dyy = cur.at(c, r + 1) + cur.at(c, r - 1) - 2 * v;
        const double dss = next.at(c, r) + prev.at(c, r) - 2 * v;
        const double dxy = 0.25 * (cur.at(c + 1, r + 1) - cur.at(c - 1, r + 1) - cur.at(c + 1, r - 1) +
                                   cur.at(c - 1, r - 1));
        const double dxs = 0.25 * (next.at(c + 1, r) - next.at(c - 1, r) - prev.at(c + 1, r) + prev.at(c - 1, r));
        const double dys = 0.25 * (next.at(c, r + 1) - next.at(c, r - 1) - prev.at(c, r + 1) + prev.at(c, r - 1));
        Eigen::Matrix3d hess;
        hess << dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss;
        const Eigen::FullPivLU<Eigen::Matrix3d> lu(hess);
        if (!lu.isInvertible()) return false;
        offset = -lu.solve(grad);
        if (offset.cwiseAbs().maxCoeff() < 0.5) break;
        if (offset.cwiseAbs().maxCoeff() > static_cast<double>(std::max(w, h))) return false;
        c += static_cast<int>(std::round(offset.x()));
        r += static_cast<int>(std::round(offset.y()));
        layer += static_cast<int>(std::round(offset.z()));
        if (layer < 1 || layer > s || c < p.border || c >= w - p.border || r < p.border || r >= h - p.border)
            return false;
    }
    if (iter >= p.max_refine_iterations) return false;

    const GrayImage& cur = oct.dogs[static_cast<std::size_t>(layer)];
    const double response = std::abs(cur.at(c, r) + 0.5 * grad.dot(offset));
    if (response < p.contrast_threshold) return false;

    const double v = cur.at(c, r);
    const double dxx = cur.at(c + 1, r) + cur.at(c - 1, r) - 2 * v;
    const double dyy = cur.at(c, r + 1) + cur.at(c, r - 1) - 2 * v;
    const double dxy =
        0.25 * (cur.at(c + 1, r + 1) - cur.at(c - 1, r + 1) - cur.at(c + 1, r - 1) + cur.at(c - 1, r - 1));
    const double tr = dxx + dyy;
    const double det = dxx * dyy - dxy * dxy;
    const double er = p.edge_ratio;
    if (det <= 0 || tr * tr * er >= (er + 1) * (er + 1) * det) return false;

    out = Candidate{c + offset.x(), r + offset.y(), layer + offset.z(), layer, offset.z(), response};
    return true;
}

bool is_extremum(const Octave& oct, int layer, int c, int r) {
    const float v = oct.dogs[static_cast<std::size_t>(layer)].at(c, r);
    const bool is_max = v > 0;
    for (int dl = -1; dl <= 1; ++dl) {
        const GrayImage& img = oct.dogs[static_cast<std::size_t>(layer + dl)];
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dl == 0 && dx == 0 && dy == 0) continue;
                const float n = img.at(c + dx, r + dy);
                if (is_max ? n > v : n < v) return false;
            }
        }
    }
    return true;
}

// Merges candidates whose refined positions coincide (plateau ties in
// symmetric patterns produce several seeds for one extremum).
std::vector<Candidate> merge_duplicates(std::vector<Candidate> cands) {
    std::vector<Candidate> kept;
    std::unordered_map<long long, std::vector<std::size_t>> grid;
    auto key = [](long long gx, long long gy) { return gx * 1000003LL + gy; };
    for (const auto& cand : cands) {
        const long long gx = static_cast<long long>(std::floor(cand.xo));
        const long long gy = static_cast<long long>(std::floor(cand.yo));
        std::size_t hit = std::numeric_limits<std::size_t>::max();
        for (long long dy = -1; dy <= 1 && hit == std::numeric_limits<std::size_t>::max(); ++dy) {
            for (long long dx = -1; dx <= 1; ++dx) {
                const auto it = grid.find(key(gx + dx, gy + dy));
                if (it == grid.end()) continue;
                for (auto idx : it->second) {
                    const Candidate& k = kept[idx];
                    if (std::abs(k.xo - cand.xo) < 0.5 && std::abs(k.yo - cand.yo) < 0.5 &&
                        std::abs(k.level - cand.level) < 0.5) {
                        hit = idx;
                        break;
                    }
                }
                if (hit != std::numeric_limits<std::size_t>::max()) break;
            }
        }
        if (hit == std::numeric_limits<std::size_t>::max()) {
            grid[key(gx, gy)].push_back(kept.size());
            kept.push_back(cand);
        } else if (cand.response > kept[hit].response) {
            kept[hit] = cand;
        }
    }
    return kept;
}

// Dominant gradient orientations (radians) around a keypoint.
std::vector<double> orientations(const GrayImage& img, double xo, double yo, double scl_oct, double peak_ratio) {
    const int cx = static_cast<int>(std::round(xo)), cy = static_cast<int>(std::round(yo));
    const double sigma_w = 1.5 * scl_oct;
    const int radius = static_cast<int>(std::round(3.0 * sigma_w));
    std::array<double, kOrientationBins> hist{};
    for (int dy = -radius; dy <= radius; ++dy) {
        const int y = cy + dy;
        if (y < 1 || y >= img.height - 1) continue;
        for (int dx = -radius; dx <= radius; ++dx) {
            const int x = cx + dx;
            if (x < 1 || x >= img.width - 1) continue;
            const double gx = img.at(x + 1, y) - img.at(x - 1, y);
            const double gy = img.at(x, y + 1) - img.at(x, y - 1);
            const double mag = std::sqrt(gx * gx + gy * gy);
            if (mag == 0.0) continue;
            const double wgt = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_w * sigma_w));
            double ang = std::atan2(gy, gx);
            if (ang < 0) ang += kTwoPi;
            int bin = static_cast<int>(std::round(kOrientationBins * ang / kTwoPi));
            bin = ((bin % kOrientationBins) + kOrientationBins) % kOrientationBins;
            hist[static_cast<std::size_t>(bin)] += wgt * mag;
        }
    }
    std::array<double, kOrientationBins> smooth{};
    for (int i = 0; i < kOrientationBins; ++i) {
        auto h = [&](int j) { return hist[static_cast<std::size_t>((j + kOrientationBins) % kOrientationBins)]; };
        smooth[static_cast<std::size_t>(i)] =
            (h(i - 2) + h(i + 2)) / 16.0 + (h(i - 1) + h(i + 1)) * 4.0 / 16.0 + h(i) * 6.0 / 16.0;
    }
    const double max_val = *std::max_element(smooth.begin(), smooth.end());
    std::vector<double> out;
    if (max_val <= 0.0) return out;
    for (int i = 0; i < kOrientationBins; ++i) {
        const double l = smooth[static_cast<std::size_t>((i + kOrientationBins - 1) % kOrientationBins)];
        const double r = smooth[static_cast<std::size_t>((i + 1) % kOrientationBins)];
        const double c = smooth[static_cast<std::size_t>(i)];
        if (c > l && c > r && c >= peak_ratio * max_val) {
            double bin = i + 0.5 * (l - r) / (l - 2 * c + r);
            if (bin < 0) bin += kOrientationBins;
            if (bin >= kOrientationBins) bin -= kOrientationBins;
            out.push_back(kTwoPi * bin / kOrientationBins);
        }
    }
    return out;
}

}  // namespace

double ScaleSpacePyramid::octave_scale(int octave) const { return std::ldexp(1.0, params.upsample ? octave - 1 : octave); }

double ScaleSpacePyramid::sigma(int octave, double level) const {
    return params.sigma0 * std::pow(2.0, level / params.scales_per_octave) * octave_scale(octave);
}

double ScaleSpacePyramid::dog_sigma(int octave, double level) const { return sigma(octave, level + 0.5); }

ScaleSpacePyramid build_pyramid(const GrayImage& image, const PyramidParams& params) {
    if (params.scales_per_octave < 2) throw Error(ErrorKind::InvalidParameter, "scales_per_octave must be >= 2");
    if (params.octaves < 1 || params.octaves > 20) throw Error(ErrorKind::InvalidParameter, "octaves must be in [1,20]");
    if (!(params.sigma0 > 0.0)) throw Error(ErrorKind::InvalidParameter, "sigma0 must be positive");
    const int min_dim = std::min(image.width, image.height);
    if (min_dim < (1 << params.octaves))
        throw Error(ErrorKind::InvalidInput, "image too small for " + std::to_string(params.octaves) + " octaves");

    ScaleSpacePyramid pyr;
    pyr.params = params;
    const int s = params.scales_per_octave;
    const double k = std::pow(2.0, 1.0 / s);
    for (int i = 0; i < s + 3; ++i) pyr.level_sigmas.push_back(params.sigma0 * std::pow(k, i));

    const double present = params.upsample ? 2.0 * params.input_blur : params.input_blur;
    const double base_extra = std::sqrt(std::max(params.sigma0 * params.sigma0 - present * present, 0.01));
    GrayImage base = gaussian_blur(params.upsample ? upsample2(image) : image, base_extra);
    for (int o = 0; o < params.octaves; ++o) {
        Octave oct;
        oct.width = base.width;
        oct.height = base.height;
        oct.gaussians.reserve(static_cast<std::size_t>(s + 3));
        oct.gaussians.push_back(std::move(base));
        for (int i = 1; i < s + 3; ++i) {
            const double prev = pyr.level_sigmas[static_cast<std::size_t>(i - 1)];
            const double cur = pyr.level_sigmas[static_cast<std::size_t>(i)];
            oct.gaussians.push_back(gaussian_blur(oct.gaussians.back(), std::sqrt(cur * cur - prev * prev)));
        }
        for (int i = 0; i < s + 2; ++i)
            oct.dogs.push_back(subtract(oct.gaussians[static_cast<std::size_t>(i + 1)], oct.gaussians[static_cast<std::size_t>(i)]));
        if (o + 1 < params.octaves) base = downsample(oct.gaussians[static_cast<std::size_t>(s)]);
        pyr.octaves.push_back(std::move(oct));
    }
    return pyr;
}

ScaleSpacePyramid build_pyramid(const ImageBuffer& image, const PyramidParams& params) {
    return build_pyramid(to_gray(image), params);
}

std::vector<Keypoint> detect_keypoints(const ScaleSpacePyramid& pyramid, const DetectorParams& params) {
    if (!(params.contrast_threshold > 0.0) || !(params.edge_ratio > 0.0))
        throw Error(ErrorKind::InvalidParameter, "detector thresholds must be positive");
    const int s = pyramid.params.scales_per_octave;
    const float prefilter = static_cast<float>(0.5 * params.contrast_threshold);
    std::vector<Keypoint> keypoints;
    for (int o = 0; o < static_cast<int>(pyramid.octaves.size()); ++o) {
        const Octave& oct = pyramid.octaves[static_cast<std::size_t>(o)];
        const int b = params.border;
        if (oct.width <= 2 * b || oct.height <= 2 * b) continue;
        std::vector<Candidate> cands;
        for (int layer = 1; layer <= s; ++layer) {
            const GrayImage& cur = oct.dogs[static_cast<std::size_t>(layer)];
            for (int r = b; r < oct.height - b; ++r) {
                for (int c = b; c < oct.width - b; ++c) {
                    const float v = cur.at(c, r);
                    if (std::abs(v) <= prefilter) continue;
                    if (!is_extremum(oct, layer, c, r)) continue;
                    Candidate cand{};
                    if (refine(oct, s, params, c, r, layer, cand)) cands.push_back(cand);
                }
            }
        }
        const double octave_scale = pyramid.octave_scale(o);
        for (const auto& cand : merge_duplicates(std::move(cands))) {
            const double scl_oct = pyramid.params.sigma0 * std::pow(2.0, cand.level / s);
            const auto level = static_cast<std::size_t>(std::clamp(static_cast<int>(std::round(cand.level)), 0, s + 2));
            const auto oris = orientations(oct.gaussians[level], cand.xo, cand.yo, scl_oct, params.orientation_peak_ratio);
            for (double ori : oris) {
                Keypoint kp;
                kp.x = cand.xo * octave_scale;
                kp.y = cand.yo * octave_scale;
                kp.scale = scl_oct * octave_scale;
                kp.orientation = ori;
                kp.response = cand.response;
                kp.octave = o;
                kp.layer = cand.layer;
                kp.layer_offset = cand.offset;
                keypoints.push_back(kp);
            }
        }
    }
    return keypoints;
}

std::vector<Keypoint> detect_keypoints(const ScaleSpacePyramid& pyramid, double contrast_threshold, double edge_ratio) {
    DetectorParams p;
    p.contrast_threshold = contrast_threshold;
    p.edge_ratio = edge_ratio;
    return detect_keypoints(pyramid, p);
}

DescribeResult describe(const ScaleSpacePyramid& pyramid, std::span<const Keypoint> keypoints) {
    DescribeResult result;
    const int s = pyramid.params.scales_per_octave;
    constexpr int d = kDescWidth, n = kDescBins;
    for (std::size_t ki = 0; ki < keypoints.size(); ++ki) {
        const Keypoint& kp = keypoints[ki];
        if (kp.octave < 0 || kp.octave >= static_cast<int>(pyramid.octaves.size())) continue;
        const Octave& oct = pyramid.octaves[static_cast<std::size_t>(kp.octave)];
        const double level = kp.layer + kp.layer_offset;
        const auto li = static_cast<std::size_t>(std::clamp(static_cast<int>(std::round(level)), 0, s + 2));
        const GrayImage& img = oct.gaussians[li];
        const double octave_scale = pyramid.octave_scale(kp.octave);
        const double xo = kp.x / octave_scale, yo = kp.y / octave_scale;
        const double scl_oct = kp.scale / octave_scale;
        const double hist_width = kDescScale * scl_oct;
        const int radius = static_cast<int>(std::round(hist_width * std::sqrt(2.0) * (d + 1) * 0.5));
        const int xr = static_cast<int>(std::round(xo)), yr = static_cast<int>(std::round(yo));
        if (xr - radius < 1 || yr - radius < 1 || xr + radius > img.width - 2 || yr + radius > img.height - 2)
            continue;

        const double cos_t = std::cos(kp.orientation), sin_t = std::sin(kp.orientation);
        std::array<double, (d + 2) * (d + 2) * (n + 2)> hist{};
        auto at = [&](int r, int c, int o) -> double& {
            return hist[static_cast<std::size_t>(((r + 1) * (d + 2) + (c + 1)) * (n + 2) + o)];
        };
        for (int dy = -radius; dy <= radius; ++dy) {
            for (int dx = -radius; dx <= radius; ++dx) {
                const int px = xr + dx, py = yr + dy;
                const double ox = px - xo, oy = py - yo;
                const double a = (ox * cos_t + oy * sin_t) / hist_width;
                const double b = (-ox * sin_t + oy * cos_t) / hist_width;
                const double rbin = b + d / 2.0 - 0.5;
                const double cbin = a + d / 2.0 - 0.5;
                if (rbin <= -1 || rbin >= d || cbin <= -1 || cbin >= d) continue;
                const double gx = img.at(px + 1, py) - img.at(px - 1, py);
                const double gy = img.at(px, py + 1) - img.at(px, py - 1);
                const double mag = std::sqrt(gx * gx + gy * gy);
                if (mag == 0.0) continue;
                double ang = std::atan2(gy, gx) - kp.orientation;
                ang = std::fmod(ang, kTwoPi);
                if (ang < 0) ang += kTwoPi;
                const double obin = ang * n / kTwoPi;
                const double wgt = std::exp(-(a * a + b * b) / (0.5 * d * d)) * mag;

                const int r0 = static_cast<int>(std::floor(rbin));
                const int c0 = static_cast<int>(std::floor(cbin));
                int o0 = static_cast<int>(std::floor(obin));
                const double fr = rbin - r0, fc = cbin - c0, fo = obin - o0;
                o0 %= n;
                for (int ir = 0; ir <= 1; ++ir) {
                    const double wr = ir ? fr : 1 - fr;
                    for (int ic = 0; ic <= 1; ++ic) {
                        const double wc = ic ? fc : 1 - fc;
                        for (int io = 0; io <= 1; ++io) {
                            const double wo = io ? fo : 1 - fo;
                            at(r0 + ir, c0 + ic, o0 + io) += wgt * wr * wc * wo;
                        }
                    }
                }
            }
        }

        std::array<double, kDescriptorSize> raw{};
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) {
                // Wrap the orientation overflow bins.
                at(r, c, 0) += at(r, c, n);
                at(r, c, 1) += at(r, c, n + 1);
                for (int o = 0; o < n; ++o) raw[static_cast<std::size_t>((r * d + c) * n + o)] = at(r, c, o);
            }
        }
        double norm = 0.0;
        for (double v : raw) norm += v * v;
        norm = std::sqrt(norm);
        if (norm <= 1e-12) continue;
        for (auto& v : raw) v = std::min(v / norm, kDescClamp);
        norm = 0.0;
        for (double v : raw) norm += v * v;
        norm = std::sqrt(norm);
        Descriptor desc{};
        for (std::size_t i = 0; i < kDescriptorSize; ++i) desc[i] = static_cast<float>(raw[i] / norm);
        result.descriptors.push_back(desc);
        result.keypoint_index.push_back(ki);
    }
    return result;
}

DescribeResult describe(const ImageBuffer& image, std::span<const Keypoint> keypoints, const PyramidParams& params) {
    return describe(build_pyramid(image, params), keypoints);
}

namespace {

double squared_distance(const Descriptor& a, const Descriptor& b) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < kDescriptorSize; ++i) {
        const float d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

struct Nearest {
    std::size_t best = std::numeric_limits<std::size_t>::max();
    double best_d2 = std::numeric_limits<double>::infinity();
    double second_d2 = std::numeric_limits<double>::infinity();
};

}  // namespace

std::vector<MatchPair> match(std::span<const Descriptor> a, std::span<const Descriptor> b, const MatchParams& params) {
    if (!(params.ratio_threshold > 0.0 && params.ratio_threshold <= 1.0))
        throw Error(ErrorKind::InvalidParameter, "ratio threshold must lie in (0,1]");
    std::vector<MatchPair> out;
    if (a.empty() || b.empty()) return out;

    std::vector<Nearest> from_a(a.size());
    std::vector<std::size_t> best_for_b(b.size(), std::numeric_limits<std::size_t>::max());
    std::vector<double> best_for_b_d2(b.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < a.size(); ++i) {
        Nearest& nn = from_a[i];
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double d2 = squared_distance(a[i], b[j]);
            if (d2 < nn.best_d2) {
                nn.second_d2 = nn.best_d2;
                nn.best_d2 = d2;
                nn.best = j;
            } else if (d2 < nn.second_d2) {
                nn.second_d2 = d2;
            }
            if (d2 < best_for_b_d2[j]) {
                best_for_b_d2[j] = d2;
                best_for_b[j] = i;
            }
        }
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Nearest& nn = from_a[i];
        const double dist = std::sqrt(nn.best_d2);
        double ratio = 0.0;
        if (std::isfinite(nn.second_d2)) {
            const double second = std::sqrt(nn.second_d2);
            ratio = second > 0.0 ? dist / second : 1.0;
        }
        // A zero-distance tie is ambiguous, never a confident match.
        if (!(ratio < params.ratio_threshold)) continue;
        if (params.cross_check && best_for_b[nn.best] != i) continue;
        out.push_back(MatchPair{i, nn.best, dist, ratio});
    }
    return out;
}

std::vector<MatchPair> match(std::span<const Descriptor> a, std::span<const Descriptor> b, double ratio_threshold,
                             bool cross_check) {
    return match(a, b, MatchParams{ratio_threshold, cross_check});
}

FeatureSet extract_features(const ImageBuffer& image, const FeatureParams& params) {
    PyramidParams pp = params.pyramid;
    const int min_dim = std::min(image.width, image.height) * (pp.upsample ? 2 : 1);
    const int needed = 2 * params.detector.border + 3;
    while (pp.octaves > 1 && (min_dim >> (pp.octaves - 1)) < needed) --pp.octaves;
    const auto pyr = build_pyramid(image, pp);
    const auto kps = detect_keypoints(pyr, params.detector);
    auto desc = describe(pyr, kps);
    FeatureSet fs;
    fs.descriptors = std::move(desc.descriptors);
    fs.keypoints.reserve(desc.keypoint_index.size());
    for (auto idx : desc.keypoint_index) fs.keypoints.push_back(kps[idx]);
    return fs;
}

}  // namespace patchpoison

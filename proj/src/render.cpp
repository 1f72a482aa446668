#include "patchpoison/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "patchpoison/error.hpp"
#include "patchpoison/random.hpp"

namespace patchpoison {

namespace {

constexpr int kTexSize = 256;

struct Tile {
    Vec3 center;
    Vec3 u, v, n;
    double hu = 0.5, hv = 0.5;
    std::vector<float> texels;  // kTexSize^2 RGB
};

std::vector<float> make_texture(Rng& rng, double contrast) {
    std::vector<float> tex(static_cast<std::size_t>(kTexSize) * kTexSize * 3);
    const std::array<double, 3> base{rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)};

    // Multi-octave value noise, one lattice per octave and channel.
    for (int octave = 0; octave < 4; ++octave) {
        const int grid = 5 << octave;
        const double amp = 0.25 / (1 << octave) * 2.0;
        for (int c = 0; c < 3; ++c) {
            std::vector<double> lattice(static_cast<std::size_t>((grid + 1) * (grid + 1)));
            for (auto& g : lattice) g = rng.uniform(-amp, amp);
            for (int y = 0; y < kTexSize; ++y) {
                for (int x = 0; x < kTexSize; ++x) {
                    const double gx = x * static_cast<double>(grid) / kTexSize, gy = y * static_cast<double>(grid) / kTexSize;
                    const int ix = static_cast<int>(gx), iy = static_cast<int>(gy);
                    const double fx = gx - ix, fy = gy - iy;
                    auto l = [&](int i, int j) { return lattice[static_cast<std::size_t>(j * (grid + 1) + i)]; };
                    const double n = (1 - fy) * ((1 - fx) * l(ix, iy) + fx * l(ix + 1, iy)) +
                                     fy * ((1 - fx) * l(ix, iy + 1) + fx * l(ix + 1, iy + 1));
                    tex[(static_cast<std::size_t>(y) * kTexSize + x) * 3 + c] += static_cast<float>(n + (octave == 0 ? base[c] : 0.0));
                }
            }
        }
    }

    // Discs of random size and color, antialiased by edge coverage.
    const int discs = 120;
    for (int d = 0; d < discs; ++d) {
        const double cx = rng.uniform(0, kTexSize), cy = rng.uniform(0, kTexSize);
        const double r = rng.uniform(4.0, 24.0);
        const std::array<double, 3> col{rng.uniform(), rng.uniform(), rng.uniform()};
        const int x0 = std::max(0, static_cast<int>(cx - r - 1)), x1 = std::min(kTexSize - 1, static_cast<int>(cx + r + 1));
        const int y0 = std::max(0, static_cast<int>(cy - r - 1)), y1 = std::min(kTexSize - 1, static_cast<int>(cy + r + 1));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double dist = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
                const double cover = std::clamp(r - dist + 0.5, 0.0, 1.0);
                if (cover <= 0) continue;
                for (int c = 0; c < 3; ++c) {
                    float& t = tex[(static_cast<std::size_t>(y) * kTexSize + x) * 3 + c];
                    t = static_cast<float>((1 - cover) * t + cover * col[c]);
                }
            }
        }
    }
    for (auto& t : tex) t = static_cast<float>(std::clamp(0.5 + contrast * (t - 0.5), 0.0, 1.0));
    return tex;
}

// A 3x3 grid of tilted elliptical tiles on a curved surface: depth grows
// with x and with |y|. Camera B moves towards +x, which only widens the gaps
// between horizontal neighbors, so no tile occludes another.
std::vector<Tile> make_scene(std::uint64_t seed, const RenderOptions& opt) {
    Rng rng(split_seed(seed, 0));
    std::vector<Tile> tiles;
    for (int gy = -1; gy <= 1; ++gy) {
        for (int gx = -1; gx <= 1; ++gx) {
            Tile tile;
            const double depth = 5.8 + 1.2 * gx + 0.8 * gy * gy + rng.uniform(-0.2, 0.2);
            tile.center = Vec3(1.5 * gx + rng.uniform(-0.05, 0.05), 1.5 * gy + rng.uniform(-0.05, 0.05), depth);
            const Vec3 n = Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), -1.0).normalized();
            Vec3 u = Vec3::UnitX() - n.x() * n;
            u.normalize();
            tile.n = n;
            tile.u = u;
            tile.v = n.cross(u);
            tile.hu = rng.uniform(0.4, 0.5);
            tile.hv = rng.uniform(0.4, 0.5);
            tile.texels = make_texture(rng, opt.texture_contrast);
            tiles.push_back(std::move(tile));
        }
    }
    return tiles;
}

void sample_texture(const Tile& tile, double a, double b, double out[3]) {
    const double tx = (a + tile.hu) / (2 * tile.hu) * kTexSize - 0.5;
    const double ty = (b + tile.hv) / (2 * tile.hv) * kTexSize - 0.5;
    const int x0 = std::clamp(static_cast<int>(std::floor(tx)), 0, kTexSize - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(ty)), 0, kTexSize - 1);
    const int x1 = std::min(x0 + 1, kTexSize - 1), y1 = std::min(y0 + 1, kTexSize - 1);
    const double fx = std::clamp(tx - x0, 0.0, 1.0), fy = std::clamp(ty - y0, 0.0, 1.0);
    auto at = [&](int x, int y, int c) { return tile.texels[(static_cast<std::size_t>(y) * kTexSize + x) * 3 + c]; };
    for (int c = 0; c < 3; ++c)
        out[c] = (1 - fy) * ((1 - fx) * at(x0, y0, c) + fx * at(x1, y0, c)) +
                 fy * ((1 - fx) * at(x0, y1, c) + fx * at(x1, y1, c));
}

ImageBuffer render(const std::vector<Tile>& tiles, const RenderOptions& opt, const CameraModel& cam) {
    if (opt.width < 1 || opt.height < 1 || opt.supersample < 1)
        throw Error(ErrorKind::InvalidParameter, "render size and supersampling must be positive");
    ImageBuffer img(opt.width, opt.height, 3);
    const Mat3 Kinv = cam.K.inverse();
    const Mat3 Rt = cam.R.transpose();
    const Vec3 origin = cam.center();
    const int s = opt.supersample;
    for (int y = 0; y < opt.height; ++y) {
        for (int x = 0; x < opt.width; ++x) {
            double acc[3] = {0, 0, 0};
            for (int j = 0; j < s; ++j) {
                for (int i = 0; i < s; ++i) {
                    const double px = x + (i + 0.5) / s - 0.5, py = y + (j + 0.5) / s - 0.5;
                    const Vec3 dir = Rt * (Kinv * Vec3(px, py, 1.0));
                    double best = std::numeric_limits<double>::infinity();
                    const Tile* hit = nullptr;
                    double ha = 0, hb = 0;
                    for (const auto& tile : tiles) {
                        const double denom = tile.n.dot(dir);
                        if (std::abs(denom) < 1e-12) continue;
                        const double t = tile.n.dot(tile.center - origin) / denom;
                        if (t <= 0 || t >= best) continue;
                        const Vec3 d = origin + t * dir - tile.center;
                        const double a = d.dot(tile.u), b = d.dot(tile.v);
                        if ((a * a) / (tile.hu * tile.hu) + (b * b) / (tile.hv * tile.hv) > 1.0) continue;
                        best = t;
                        hit = &tile;
                        ha = a;
                        hb = b;
                    }
                    if (!hit) continue;
                    double rgb[3];
                    sample_texture(*hit, ha, hb, rgb);
                    for (int c = 0; c < 3; ++c) acc[c] += rgb[c];
                }
            }
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = round_to_u8(255.0 * acc[c] / (s * s));
        }
    }
    return img;
}

}  // namespace

ImageBuffer render_view(std::uint64_t seed, const RenderOptions& options, const CameraModel& camera) {
    return render(make_scene(seed, options), options, camera);
}

RenderedTwoView render_two_view(std::uint64_t seed, const RenderOptions& opt) {
    if (!(opt.baseline > 0)) throw Error(ErrorKind::InvalidParameter, "baseline must be positive");
    Rng rng(split_seed(seed, 1));
    const Vec3 center = opt.baseline * Vec3(1.0, rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1)).normalized();

    // Camera B looks at the middle of the tile cluster, then gets a small
    // random rotation on top.
    const Vec3 target(0.0, 0.0, 6.3);
    const Vec3 z = (target - center).normalized();
    const Vec3 x = Vec3(0.0, 1.0, 0.0).cross(z).normalized();
    const Vec3 y = z.cross(x);
    Mat3 look;
    look.row(0) = x.transpose();
    look.row(1) = y.transpose();
    look.row(2) = z.transpose();
    Vec3 axis(rng.normal(), rng.normal(), rng.normal());
    if (axis.norm() < 1e-12) axis = Vec3::UnitY();
    const double angle = rng.uniform(-opt.max_rotation_deg, opt.max_rotation_deg) * std::numbers::pi / 180.0;
    const Mat3 R = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix() * look;

    RenderedTwoView out;
    const Mat3 K = intrinsics(opt.focal, opt.focal, 0.5 * opt.width, 0.5 * opt.height);
    out.camera_a = CameraModel{K, Mat3::Identity(), Vec3::Zero()};
    out.camera_b = CameraModel{K, R, -R * center};
    const auto tiles = make_scene(seed, opt);
    out.image_a = render(tiles, opt, out.camera_a);
    out.image_b = render(tiles, opt, out.camera_b);
    out.truth = PoseTruth{K, K, R, out.camera_b.t.normalized()};
    return out;
}

}  // namespace patchpoison

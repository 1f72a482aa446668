#pragma once

// Helpers shared by the test binaries: seeded images, temp dirs, file
// hashing and independent reference implementations.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "patchpoison/image.hpp"
#include "patchpoison/random.hpp"
#include "patchpoison/render.hpp"

namespace testsupport {

using patchpoison::ImageBuffer;

inline ImageBuffer random_image(int w, int h, int c, std::uint64_t seed) {
    patchpoison::Rng rng(seed);
    ImageBuffer img(w, h, c);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

// Smooth random texture: bilinear upsampling of a coarse random grid.
inline ImageBuffer smooth_texture(int w, int h, int cell, std::uint64_t seed) {
    patchpoison::Rng rng(seed);
    const int gw = w / cell + 2, gh = h / cell + 2;
    std::vector<double> grid(static_cast<std::size_t>(gw * gh));
    for (auto& g : grid) g = rng.uniform(0.0, 255.0);
    ImageBuffer img(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double gx = static_cast<double>(x) / cell, gy = static_cast<double>(y) / cell;
            const int x0 = static_cast<int>(gx), y0 = static_cast<int>(gy);
            const double fx = gx - x0, fy = gy - y0;
            auto g = [&](int i, int j) { return grid[static_cast<std::size_t>(j * gw + i)]; };
            const double v = (1 - fy) * ((1 - fx) * g(x0, y0) + fx * g(x0 + 1, y0)) +
                             fy * ((1 - fx) * g(x0, y0 + 1) + fx * g(x0 + 1, y0 + 1));
            img.at(x, y) = static_cast<std::uint8_t>(std::lround(v));
        }
    return img;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("pp_" + tag + "_" + std::to_string(getpid_wrapper()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    static long getpid_wrapper();
    std::filesystem::path path_;
};

// FNV-1a over a file's bytes.
std::uint64_t file_hash(const std::filesystem::path& p);

// Relative path -> hash for every regular file below dir.
std::map<std::string, std::uint64_t> tree_hashes(const std::filesystem::path& dir);

// Direct sliding-window SSIM: explicit Gaussian weights, explicit weighted
// moments per window, per channel, averaged.
double reference_ssim(const ImageBuffer& a, const ImageBuffer& b, int window = 11, double sigma = 1.5);

// Rendered two-view pair, memoized per (seed, size).
const patchpoison::RenderedTwoView& rendered_pair(std::uint64_t seed, int size = 800);

// Black-cornered textured test images for the imperceptibility checks.
ImageBuffer rendered_view(std::uint64_t seed, int size = 800);

}  // namespace testsupport

#include "support.hpp"

#include <fstream>
#include <iterator>

#include <unistd.h>

namespace testsupport {

long TempDir::getpid_wrapper() { return static_cast<long>(::getpid()); }

std::uint64_t file_hash(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
        h ^= static_cast<unsigned char>(*it);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::map<std::string, std::uint64_t> tree_hashes(const std::filesystem::path& dir) {
    std::map<std::string, std::uint64_t> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out[std::filesystem::relative(e.path(), dir).generic_string()] = file_hash(e.path());
    return out;
}

double reference_ssim(const ImageBuffer& a, const ImageBuffer& b, int window, double sigma) {
    std::vector<std::vector<double>> w(static_cast<std::size_t>(window), std::vector<double>(static_cast<std::size_t>(window)));
    const double c = (window - 1) / 2.0;
    double total = 0.0;
    for (int v = 0; v < window; ++v)
        for (int u = 0; u < window; ++u) {
            const double d2 = (u - c) * (u - c) + (v - c) * (v - c);
            total += w[v][u] = std::exp(-d2 / (2 * sigma * sigma));
        }
    for (auto& row : w)
        for (auto& x : row) x /= total;

    const double C1 = (0.01 * 255) * (0.01 * 255), C2 = (0.03 * 255) * (0.03 * 255);
    double per_channel = 0.0;
    for (int ch = 0; ch < a.channels; ++ch) {
        double sum = 0.0;
        int count = 0;
        for (int y0 = 0; y0 + window <= a.height; ++y0)
            for (int x0 = 0; x0 + window <= a.width; ++x0) {
                double mx = 0, my = 0;
                for (int v = 0; v < window; ++v)
                    for (int u = 0; u < window; ++u) {
                        mx += w[v][u] * a.at(x0 + u, y0 + v, ch);
                        my += w[v][u] * b.at(x0 + u, y0 + v, ch);
                    }
                double vx = 0, vy = 0, cxy = 0;
                for (int v = 0; v < window; ++v)
                    for (int u = 0; u < window; ++u) {
                        const double dx = a.at(x0 + u, y0 + v, ch) - mx;
                        const double dy = b.at(x0 + u, y0 + v, ch) - my;
                        vx += w[v][u] * dx * dx;
                        vy += w[v][u] * dy * dy;
                        cxy += w[v][u] * dx * dy;
                    }
                sum += ((2 * mx * my + C1) * (2 * cxy + C2)) / ((mx * mx + my * my + C1) * (vx + vy + C2));
                ++count;
            }
        per_channel += sum / count;
    }
    return per_channel / a.channels;
}

const patchpoison::RenderedTwoView& rendered_pair(std::uint64_t seed, int size) {
    static std::map<std::pair<std::uint64_t, int>, patchpoison::RenderedTwoView> cache;
    const auto key = std::make_pair(seed, size);
    auto it = cache.find(key);
    if (it == cache.end()) {
        patchpoison::RenderOptions ro;
        ro.width = ro.height = size;
        ro.focal = size;
        it = cache.emplace(key, patchpoison::render_two_view(seed, ro)).first;
    }
    return it->second;
}

ImageBuffer rendered_view(std::uint64_t seed, int size) { return rendered_pair(seed, size).image_a; }

}  // namespace testsupport

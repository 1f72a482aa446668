#include "patchpoison/poison.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "patchpoison/error.hpp"
#include "patchpoison/fs_util.hpp"
#include "patchpoison/image_codec.hpp"
#include "patchpoison/log.hpp"
#include "patchpoison/random.hpp"
#include "patchpoison/serialization.hpp"

namespace fs = std::filesystem;

namespace patchpoison {

Region patch_region(int width, int height, int size_px, Corner corner, int margin_px) {
    if (size_px < 1 || margin_px < 0)
        throw Error(ErrorKind::InvalidParameter, "patch size must be >= 1 and margin >= 0");
    if (width < size_px + margin_px || height < size_px + margin_px)
        throw Error(ErrorKind::PatchPlacement, "patch of " + std::to_string(size_px) + " px with margin " +
                                                   std::to_string(margin_px) + " does not fit a " +
                                                   std::to_string(width) + "x" + std::to_string(height) + " image");
    Region r{margin_px, margin_px, size_px, size_px};
    if (corner == Corner::TopRight || corner == Corner::BottomRight) r.x = width - size_px - margin_px;
    if (corner == Corner::BottomLeft || corner == Corner::BottomRight) r.y = height - size_px - margin_px;
    return r;
}

ImageBuffer embed_patch(const ImageBuffer& image, const PatternMask& mask, double alpha, Corner corner,
                        int margin_px) {
    validate(image);
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorKind::InvalidParameter, "alpha must lie in [0,1]");
    if (mask.size < 1 || mask.values.size() != static_cast<std::size_t>(mask.size) * mask.size)
        throw Error(ErrorKind::InvalidParameter, "malformed pattern mask");
    const Region r = patch_region(image.width, image.height, mask.size, corner, margin_px);

    ImageBuffer out = image;
    const int colors = image.color_channels();
    for (int py = 0; py < r.h; ++py) {
        for (int px = 0; px < r.w; ++px) {
            const double w = alpha * mask.at(px, py);
            for (int c = 0; c < colors; ++c) {
                auto& v = out.at(r.x + px, r.y + py, c);
                v = round_to_u8(v * (1.0 - w) + w * 255.0);
            }
        }
    }
    return out;
}

ImageBuffer embed_patch(const ImageBuffer& image, const PatchSpec& spec) {
    return embed_patch(image, generate_pattern(spec), spec.alpha, spec.corner, spec.margin_px);
}

std::string_view to_string(BackgroundPolicy policy) noexcept {
    switch (policy) {
        case BackgroundPolicy::Black: return "black";
        case BackgroundPolicy::White: return "white";
        case BackgroundPolicy::Keep: return "keep";
    }
    return "keep";
}

std::optional<BackgroundPolicy> parse_background(std::string_view name) {
    if (name == "black") return BackgroundPolicy::Black;
    if (name == "white") return BackgroundPolicy::White;
    if (name == "keep") return BackgroundPolicy::Keep;
    return std::nullopt;
}

ImageBuffer composite(const ImageBuffer& image, BackgroundPolicy policy) {
    validate(image);
    if (image.channels != 4 || policy == BackgroundPolicy::Keep) return image;
    const double bg = policy == BackgroundPolicy::White ? 255.0 : 0.0;
    ImageBuffer out(image.width, image.height, 3);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const double a = image.at(x, y, 3) / 255.0;
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = round_to_u8(image.at(x, y, c) * a + bg * (1.0 - a));
        }
    }
    return out;
}

std::size_t PoisonManifest::poisoned_count() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const ManifestEntry& e) { return e.poisoned; }));
}

std::size_t PoisonManifest::error_count() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const ManifestEntry& e) { return e.error.has_value(); }));
}

std::size_t poisoned_target(double ratio, std::size_t n) {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw Error(ErrorKind::InvalidParameter, "ratio must lie in (0,1]");
    return static_cast<std::size_t>(std::round(ratio * static_cast<double>(n)));
}

std::vector<std::size_t> select_poison_subset(std::size_t n, double ratio, std::uint64_t seed) {
    const std::size_t k = poisoned_target(ratio, n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

PoisonManifest poison_dataset(const std::vector<fs::path>& image_paths, const PatchSpec& spec, double ratio,
                              std::uint64_t seed, const fs::path& output_dir, const PoisonOptions& options) {
    validate(spec);
    const auto chosen = select_poison_subset(image_paths.size(), ratio, seed);
    ensure_writable_dir(output_dir);
    const PatternMask mask = generate_pattern(spec);

    PoisonManifest manifest;
    manifest.spec = spec;
    manifest.ratio = ratio;
    manifest.seed = seed;
    manifest.background = options.background;
    manifest.entries.resize(image_paths.size());

    std::vector<bool> poison_flag(image_paths.size(), false);
    for (auto i : chosen) poison_flag[i] = true;

    for (std::size_t i = 0; i < image_paths.size(); ++i) {
        const fs::path& src = image_paths[i];
        ManifestEntry& entry = manifest.entries[i];
        entry.source = src.string();
        entry.output = (output_dir / src.filename()).string();
        entry.poisoned = poison_flag[i];
        try {
            const auto format = format_from_path(src);
            if (!format) throw Error(ErrorKind::InvalidInput, "unsupported image extension: " + src.string());
            const bool recode = entry.poisoned || options.background != BackgroundPolicy::Keep;
            if (!recode) {
                write_file_atomic(entry.output, read_file_bytes(src));
                continue;
            }
            ImageBuffer img = composite(read_image(src), options.background);
            if (entry.poisoned) {
                const Region r = patch_region(img.width, img.height, spec.size_px, spec.corner, spec.margin_px);
                img = embed_patch(img, mask, spec.alpha, spec.corner, spec.margin_px);
                entry.region = r;
            }
            write_image(entry.output, img, *format);
        } catch (const Error& e) {
            entry.error = std::string(to_string(e.kind())) + ": " + e.what();
            log_warn("poison: " + src.string() + ": " + e.what());
        }
    }

    write_text_atomic(output_dir / kManifestFileName, to_json(manifest).dump(2) + "\n");
    return manifest;
}

// ---------------------------------------------------------------------------
// Baseline perturbations

double blur_sigma_for_kernel(int kernel) {
    if (kernel < 3 || kernel % 2 == 0)
        throw Error(ErrorKind::InvalidParameter, "blur kernel must be odd and >= 3");
    return 0.3 * ((kernel - 1) / 2.0 - 1.0) + 0.8;
}

namespace {

int reflect101(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}

ImageBuffer gaussian_blur(const ImageBuffer& image, int kernel) {
    const double sigma = blur_sigma_for_kernel(kernel);
    const int r = kernel / 2;
    std::vector<double> k(static_cast<std::size_t>(kernel));
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) sum += (k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma)));
    for (auto& v : k) v /= sum;

    const int w = image.width, h = image.height, colors = image.color_channels();
    std::vector<double> tmp(static_cast<std::size_t>(w) * h);
    ImageBuffer out = image;
    for (int c = 0; c < colors; ++c) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * image.at(reflect101(x + i, w), y, c);
                tmp[static_cast<std::size_t>(y) * w + x] = acc;
            }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int i = -r; i <= r; ++i)
                    acc += k[static_cast<std::size_t>(i + r)] * tmp[static_cast<std::size_t>(reflect101(y + i, h)) * w + x];
                out.at(x, y, c) = round_to_u8(acc);
            }
    }
    return out;
}

ImageBuffer gaussian_noise(const ImageBuffer& image, const GaussianNoise& p) {
    if (!(p.stddev >= 0.0)) throw Error(ErrorKind::InvalidParameter, "noise stddev must be >= 0");
    ImageBuffer out = image;
    if (p.stddev == 0.0) return out;
    Rng rng(p.seed);
    const int colors = image.color_channels();
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x)
            for (int c = 0; c < colors; ++c) out.at(x, y, c) = round_to_u8(image.at(x, y, c) + p.stddev * rng.normal());
    return out;
}

// Inverse-maps every output pixel through the 2x2 matrix inv about the center.
ImageBuffer warp_about_center(const ImageBuffer& image, const double inv[2][2]) {
    const int w = image.width, h = image.height;
    const double cx = 0.5 * (w - 1), cy = 0.5 * (h - 1);
    constexpr double kEps = 1e-9;
    ImageBuffer out(w, h, image.channels, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dx = x - cx, dy = y - cy;
            double sx = inv[0][0] * dx + inv[0][1] * dy + cx;
            double sy = inv[1][0] * dx + inv[1][1] * dy + cy;
            if (sx < -kEps || sy < -kEps || sx > w - 1 + kEps || sy > h - 1 + kEps) continue;
            sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
            sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
            int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
            double fx = sx - x0, fy = sy - y0;
            if (std::abs(fx) < kEps) fx = 0.0;
            if (std::abs(fy) < kEps) fy = 0.0;
            const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
            for (int c = 0; c < image.channels; ++c) {
                const double v = (1 - fx) * (1 - fy) * image.at(x0, y0, c) + fx * (1 - fy) * image.at(x1, y0, c) +
                                 (1 - fx) * fy * image.at(x0, y1, c) + fx * fy * image.at(x1, y1, c);
                out.at(x, y, c) = round_to_u8(v);
            }
        }
    }
    return out;
}

}  // namespace

ImageBuffer baseline_perturb(const ImageBuffer& image, const Perturbation& kind) {
    validate(image);
    return std::visit(
        [&](const auto& p) -> ImageBuffer {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, GaussianBlur>) {
                return gaussian_blur(image, p.kernel);
            } else if constexpr (std::is_same_v<T, GaussianNoise>) {
                return gaussian_noise(image, p);
            } else if constexpr (std::is_same_v<T, Rotate>) {
                const double a = p.degrees * std::numbers::pi / 180.0;
                // Rotating the content by +a means sampling the source at -a.
                const double inv[2][2] = {{std::cos(a), std::sin(a)}, {-std::sin(a), std::cos(a)}};
                return warp_about_center(image, inv);
            } else {
                const double det = 1.0 - p.x * p.y;
                if (std::abs(det) < 1e-12) throw Error(ErrorKind::InvalidParameter, "shear matrix is singular");
                const double inv[2][2] = {{1.0 / det, -p.x / det}, {-p.y / det, 1.0 / det}};
                return warp_about_center(image, inv);
            }
        },
        kind);
}

}  // namespace patchpoison

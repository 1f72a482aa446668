#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "patchpoison/image.hpp"
#include "patchpoison/pattern.hpp"

namespace patchpoison {

/// Axis-aligned pixel rectangle, the patch region.
struct Region {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool empty() const noexcept { return w <= 0 || h <= 0; }
    bool contains(double px, double py) const noexcept {
        return px >= x && py >= y && px < x + w && py < y + h;
    }
    long area() const noexcept { return empty() ? 0 : static_cast<long>(w) * h; }

    bool operator==(const Region&) const = default;
};

/// Where a P x P patch with the given corner/margin lands in a width x height
/// image. Throws PatchPlacement when it does not fit.
Region patch_region(int width, int height, int size_px, Corner corner, int margin_px);

/// Alpha-blends the mask into the color channels of the region:
/// out = round(in * (1 - alpha*m) + alpha*m*255). Alpha channels and pixels
/// outside the region are untouched. Nothing is written if the patch does not fit.
ImageBuffer embed_patch(const ImageBuffer& image, const PatternMask& mask, double alpha, Corner corner,
                        int margin_px);

/// generate_pattern + embed_patch with the spec's own placement.
ImageBuffer embed_patch(const ImageBuffer& image, const PatchSpec& spec);

enum class BackgroundPolicy { Black, White, Keep };

std::string_view to_string(BackgroundPolicy policy) noexcept;
std::optional<BackgroundPolicy> parse_background(std::string_view name);

/// Composites RGBA onto a solid background, giving RGB. Other layouts and
/// Keep pass through unchanged. out = round(fg*a + bg*(1-a)) with a = alpha/255.
ImageBuffer composite(const ImageBuffer& image, BackgroundPolicy policy);

struct ManifestEntry {
    std::string source;
    std::string output;
    bool poisoned = false;
    std::optional<Region> region;
    std::optional<std::string> error;

    bool operator==(const ManifestEntry&) const = default;
};

struct PoisonManifest {
    PatchSpec spec;
    double ratio = 1.0;
    std::uint64_t seed = 0;
    BackgroundPolicy background = BackgroundPolicy::Keep;
    std::vector<ManifestEntry> entries;

    std::size_t poisoned_count() const;
    std::size_t error_count() const;

    bool operator==(const PoisonManifest&) const = default;
};

/// round(ratio * n), half away from zero.
std::size_t poisoned_target(double ratio, std::size_t n);

/// Indices chosen for poisoning: a seeded shuffle of [0, n) truncated to
/// poisoned_target(ratio, n), returned in ascending order.
std::vector<std::size_t> select_poison_subset(std::size_t n, double ratio, std::uint64_t seed);

struct PoisonOptions {
    BackgroundPolicy background = BackgroundPolicy::Keep;
};

inline constexpr const char* kManifestFileName = "poison_manifest.json";

/// Poisons a dataset into output_dir. Selected images get the patch; the
/// rest are copied through (re-encoded only when compositing applies).
/// Per-image failures land in the manifest; an unwritable output_dir throws
/// Error{Io} before any image is touched. Writes poison_manifest.json.
PoisonManifest poison_dataset(const std::vector<std::filesystem::path>& image_paths, const PatchSpec& spec,
                              double ratio, std::uint64_t seed, const std::filesystem::path& output_dir,
                              const PoisonOptions& options = {});

struct GaussianBlur {
    int kernel = 3;
};
struct GaussianNoise {
    double stddev = 0.0;
    std::uint64_t seed = 0;
};
struct Rotate {
    double degrees = 0.0;
};
struct Shear {
    double x = 0.0;
    double y = 0.0;
};
using Perturbation = std::variant<GaussianBlur, GaussianNoise, Rotate, Shear>;

/// Blur sigma for an odd kernel size: 0.3*((k-1)/2 - 1) + 0.8.
double blur_sigma_for_kernel(int kernel);

/// Reference perturbations the patch is compared against. Blur and noise
/// touch color channels only; geometric transforms move every channel and
/// fill uncovered pixels with zero.
ImageBuffer baseline_perturb(const ImageBuffer& image, const Perturbation& kind);

}  // namespace patchpoison

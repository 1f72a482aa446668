#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace patchpoison {

enum class PatternKind {
    Checkerboard,
    Circles,
    DiagonalLines,
    ParallelLines,
    IntersectingLines,
    CheckerboardPlusCircles,
    CheckerboardPlusDiagonals,
    DiagonalsPlusCircles,
    AllPatterns,
};

enum class Corner { TopLeft, TopRight, BottomLeft, BottomRight };

std::string_view to_string(PatternKind kind) noexcept;
std::string_view to_string(Corner corner) noexcept;
std::optional<PatternKind> parse_pattern_kind(std::string_view name);
std::optional<Corner> parse_corner(std::string_view name);

/// Combination kinds are rendered as the pixel-wise max of these.
std::vector<PatternKind> constituents(PatternKind kind);

/// Full parameterization of a poisoning patch.
struct PatchSpec {
    PatternKind kind = PatternKind::Checkerboard;
    int size_px = 12;       // patch edge P
    int block_px = 4;       // cell edge b
    double alpha = 1.0;
    int bright_level = 255;  // contrast level
    int dark_level = 0;
    Corner corner = Corner::TopLeft;
    int margin_px = 0;

    bool operator==(const PatchSpec&) const = default;
};

/// Throws InvalidParameter when the spec breaks its invariants.
void validate(const PatchSpec& spec);

/// P x P mask of normalized intensities, row-major.
struct PatternMask {
    int size = 0;
    std::vector<double> values;

    double at(int x, int y) const noexcept { return values[static_cast<std::size_t>(y) * size + x]; }
    double& at(int x, int y) noexcept { return values[static_cast<std::size_t>(y) * size + x]; }

    bool operator==(const PatternMask&) const = default;
};

/// Cell (x,y) is bright iff floor(x/b) + floor(y/b) is even; the top-left cell is bright.
PatternMask generate_checkerboard(int size_px, int block_px, int bright_level = 255, int dark_level = 0);

/// Rasterizes any PatternKind. Stripes and rings share the block size b as
/// stroke width with period 2b.
PatternMask generate_pattern(const PatchSpec& spec);

}  // namespace patchpoison

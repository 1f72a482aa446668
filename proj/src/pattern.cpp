#include "patchpoison/pattern.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "patchpoison/error.hpp"

namespace patchpoison {

namespace {

constexpr std::array<std::pair<PatternKind, std::string_view>, 9> kKindNames{{
    {PatternKind::Checkerboard, "checkerboard"},
    {PatternKind::Circles, "circles"},
    {PatternKind::DiagonalLines, "diagonal_lines"},
    {PatternKind::ParallelLines, "parallel_lines"},
    {PatternKind::IntersectingLines, "intersecting_lines"},
    {PatternKind::CheckerboardPlusCircles, "checkerboard_plus_circles"},
    {PatternKind::CheckerboardPlusDiagonals, "checkerboard_plus_diagonals"},
    {PatternKind::DiagonalsPlusCircles, "diagonals_plus_circles"},
    {PatternKind::AllPatterns, "all_patterns"},
}};

constexpr std::array<std::pair<Corner, std::string_view>, 4> kCornerNames{{
    {Corner::TopLeft, "top_left"},
    {Corner::TopRight, "top_right"},
    {Corner::BottomLeft, "bottom_left"},
    {Corner::BottomRight, "bottom_right"},
}};

void check_geometry(int size_px, int block_px) {
    if (size_px < 1)
        throw Error(ErrorKind::InvalidParameter, "patch size must be >= 1");
    if (block_px < 1 || block_px > size_px)
        throw Error(ErrorKind::InvalidParameter,
                    "block size must satisfy 1 <= b <= P (b=" + std::to_string(block_px) +
                        ", P=" + std::to_string(size_px) + ")");
}

void check_levels(int bright, int dark) {
    if (dark < 0 || bright > 255 || dark > bright)
        throw Error(ErrorKind::InvalidParameter, "levels must satisfy 0 <= dark <= bright <= 255");
}

bool even_band(long v, int b) { return (v / b) % 2 == 0; }

// Returns true where the primitive kind is "on".
bool primitive_on(PatternKind kind, int x, int y, int size, int b) {
    switch (kind) {
        case PatternKind::Checkerboard:
            return (x / b + y / b) % 2 == 0;
        case PatternKind::ParallelLines:
            return even_band(y, b);
        case PatternKind::DiagonalLines:
            return even_band(static_cast<long>(x) + y, b);
        case PatternKind::IntersectingLines:
            return even_band(static_cast<long>(x) + y, b) ||
                   even_band(static_cast<long>(x) + (size - 1 - y), b);
        case PatternKind::Circles: {
            const double c = 0.5 * size;
            const double r = std::hypot(x + 0.5 - c, y + 0.5 - c);
            return static_cast<long>(std::floor(r / b)) % 2 == 0;
        }
        default:
            return false;
    }
}

}  // namespace

std::string_view to_string(PatternKind kind) noexcept {
    for (const auto& [k, n] : kKindNames)
        if (k == kind) return n;
    return "unknown";
}

std::string_view to_string(Corner corner) noexcept {
    for (const auto& [c, n] : kCornerNames)
        if (c == corner) return n;
    return "unknown";
}

std::optional<PatternKind> parse_pattern_kind(std::string_view name) {
    for (const auto& [k, n] : kKindNames)
        if (n == name) return k;
    return std::nullopt;
}

std::optional<Corner> parse_corner(std::string_view name) {
    for (const auto& [c, n] : kCornerNames)
        if (n == name) return c;
    return std::nullopt;
}

std::vector<PatternKind> constituents(PatternKind kind) {
    using K = PatternKind;
    switch (kind) {
        case K::CheckerboardPlusCircles: return {K::Checkerboard, K::Circles};
        case K::CheckerboardPlusDiagonals: return {K::Checkerboard, K::DiagonalLines};
        case K::DiagonalsPlusCircles: return {K::DiagonalLines, K::Circles};
        case K::AllPatterns:
            return {K::Checkerboard, K::Circles, K::DiagonalLines, K::ParallelLines, K::IntersectingLines};
        default: return {kind};
    }
}

void validate(const PatchSpec& spec) {
    check_geometry(spec.size_px, spec.block_px);
    check_levels(spec.bright_level, spec.dark_level);
    if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0))
        throw Error(ErrorKind::InvalidParameter, "alpha must lie in [0,1]");
    if (spec.margin_px < 0)
        throw Error(ErrorKind::InvalidParameter, "margin must be non-negative");
}

PatternMask generate_checkerboard(int size_px, int block_px, int bright_level, int dark_level) {
    check_geometry(size_px, block_px);
    check_levels(bright_level, dark_level);
    const double bright = bright_level / 255.0;
    const double dark = dark_level / 255.0;
    PatternMask mask{size_px, std::vector<double>(static_cast<std::size_t>(size_px) * size_px)};
    for (int y = 0; y < size_px; ++y)
        for (int x = 0; x < size_px; ++x)
            mask.at(x, y) = primitive_on(PatternKind::Checkerboard, x, y, size_px, block_px) ? bright : dark;
    return mask;
}

PatternMask generate_pattern(const PatchSpec& spec) {
    validate(spec);
    if (spec.kind == PatternKind::Checkerboard)
        return generate_checkerboard(spec.size_px, spec.block_px, spec.bright_level, spec.dark_level);

    const int p = spec.size_px;
    const double bright = spec.bright_level / 255.0;
    const double dark = spec.dark_level / 255.0;
    const auto parts = constituents(spec.kind);
    PatternMask mask{p, std::vector<double>(static_cast<std::size_t>(p) * p, dark)};
    for (int y = 0; y < p; ++y) {
        for (int x = 0; x < p; ++x) {
            const bool on = std::any_of(parts.begin(), parts.end(), [&](PatternKind k) {
                return primitive_on(k, x, y, p, spec.block_px);
            });
            if (on) mask.at(x, y) = bright;
        }
    }
    return mask;
}

}  // namespace patchpoison

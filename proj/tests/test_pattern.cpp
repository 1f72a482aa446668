#include <doctest.h>

#include <algorithm>

#include "patchpoison/error.hpp"
#include "patchpoison/pattern.hpp"

using namespace patchpoison;

namespace {

// Block rasterizer: walks whole cells and fills them, toggling the color
// per cell. Independent of the per-pixel parity formula.
std::vector<double> block_checkerboard(int p, int b, double bright, double dark) {
    std::vector<double> out(static_cast<std::size_t>(p * p), -1.0);
    bool row_starts_bright = true;
    for (int cy = 0; cy * b < p; ++cy) {
        bool on = row_starts_bright;
        for (int cx = 0; cx * b < p; ++cx) {
            for (int y = cy * b; y < std::min(p, (cy + 1) * b); ++y)
                for (int x = cx * b; x < std::min(p, (cx + 1) * b); ++x) out[static_cast<std::size_t>(y * p + x)] = on ? bright : dark;
            on = !on;
        }
        row_starts_bright = !row_starts_bright;
    }
    return out;
}

PatchSpec spec_of(PatternKind kind, int p, int b) {
    PatchSpec s;
    s.kind = kind;
    s.size_px = p;
    s.block_px = b;
    return s;
}

const PatternKind kAllKinds[] = {
    PatternKind::Checkerboard,         PatternKind::Circles,
    PatternKind::DiagonalLines,        PatternKind::ParallelLines,
    PatternKind::IntersectingLines,    PatternKind::CheckerboardPlusCircles,
    PatternKind::CheckerboardPlusDiagonals, PatternKind::DiagonalsPlusCircles,
    PatternKind::AllPatterns,
};

bool is_combination(PatternKind k) { return constituents(k).size() > 1; }

}  // namespace

TEST_CASE("checkerboard 2x2 with unit cells") {
    const auto m = generate_checkerboard(2, 1, 255, 0);
    CHECK(m.size == 2);
    CHECK(m.values == std::vector<double>{1, 0, 0, 1});
}

TEST_CASE("checkerboard 4x4 with 2px cells") {
    const auto m = generate_checkerboard(4, 2, 255, 0);
    CHECK(std::vector<double>(m.values.begin(), m.values.begin() + 4) == std::vector<double>{1, 1, 0, 0});
    CHECK(m.at(0, 2) == 0.0);
    CHECK(m.at(2, 2) == 1.0);
    CHECK(m.at(3, 3) == 1.0);
}

TEST_CASE("checkerboard matches the block rasterizer") {
    const auto m = generate_checkerboard(12, 4, 255, 0);
    CHECK(m.values == block_checkerboard(12, 4, 1.0, 0.0));
    for (int p = 1; p <= 40; ++p)
        for (int b = 1; b <= p; ++b) {
            const auto got = generate_checkerboard(p, b, 200, 30);
            REQUIRE(got.values == block_checkerboard(p, b, 200 / 255.0, 30 / 255.0));
        }
}

TEST_CASE("checkerboard kind delegates") {
    CHECK(generate_pattern(spec_of(PatternKind::Checkerboard, 12, 4)) == generate_checkerboard(12, 4, 255, 0));
}

TEST_CASE("parallel lines are horizontal stripes") {
    const auto m = generate_pattern(spec_of(PatternKind::ParallelLines, 4, 1));
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) CHECK(m.at(x, y) == (y % 2 == 0 ? 1.0 : 0.0));
}

TEST_CASE("combination equals pixel-wise max of its constituents") {
    const auto combo = generate_pattern(spec_of(PatternKind::CheckerboardPlusCircles, 48, 4));
    const auto cb = generate_pattern(spec_of(PatternKind::Checkerboard, 48, 4));
    const auto ci = generate_pattern(spec_of(PatternKind::Circles, 48, 4));
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 48; ++x) REQUIRE(combo.at(x, y) == std::max(cb.at(x, y), ci.at(x, y)));
}

TEST_CASE("invalid geometry and levels are rejected") {
    auto kind_of = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Io;
    };
    CHECK(kind_of([] { generate_checkerboard(4, 5); }) == ErrorKind::InvalidParameter);
    CHECK(kind_of([] { generate_checkerboard(4, 0); }) == ErrorKind::InvalidParameter);
    CHECK(kind_of([] { generate_checkerboard(0, 1); }) == ErrorKind::InvalidParameter);
    CHECK(kind_of([] { generate_checkerboard(4, 2, 10, 20); }) == ErrorKind::InvalidParameter);
    PatchSpec s;
    s.alpha = 1.5;
    CHECK(kind_of([&] { validate(s); }) == ErrorKind::InvalidParameter);
    s = {};
    s.margin_px = -1;
    CHECK(kind_of([&] { validate(s); }) == ErrorKind::InvalidParameter);
    s = {};
    s.kind = PatternKind::Circles;
    s.block_px = 13;
    CHECK(kind_of([&] { generate_pattern(s); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("names round trip") {
    for (auto k : kAllKinds) CHECK(parse_pattern_kind(to_string(k)) == k);
    for (auto c : {Corner::TopLeft, Corner::TopRight, Corner::BottomLeft, Corner::BottomRight})
        CHECK(parse_corner(to_string(c)) == c);
    CHECK_FALSE(parse_pattern_kind("zigzag"));
}

TEST_CASE("property: masks are P x P, deterministic and two-level") {
    for (auto kind : kAllKinds)
        for (int p : {1, 5, 12, 31, 64})
            for (int b : {1, 2, 3, 4, 7}) {
                if (b > p) continue;
                PatchSpec s = spec_of(kind, p, b);
                s.bright_level = 180;
                s.dark_level = 20;
                const auto m = generate_pattern(s);
                REQUIRE(m.size == p);
                REQUIRE(m.values.size() == static_cast<std::size_t>(p * p));
                REQUIRE(m == generate_pattern(s));
                if (!is_combination(kind))
                    for (double v : m.values) REQUIRE((v == 180 / 255.0 || v == 20 / 255.0));
            }
}

TEST_CASE("property: checkerboard balance when b divides P into an even cell count") {
    for (int b = 1; b <= 8; ++b)
        for (int cells = 2; cells <= 16; cells += 2) {
            const int p = b * cells;
            const auto m = generate_checkerboard(p, b);
            const auto bright = std::count(m.values.begin(), m.values.end(), 1.0);
            REQUIRE(bright * 2 == static_cast<long>(p) * p);
        }
}

TEST_CASE("property: every combination is the max of its constituents up to P=64") {
    for (auto kind : kAllKinds) {
        if (!is_combination(kind)) continue;
        for (int p = 1; p <= 64; p += 3)
            for (int b : {1, 2, 4, 8}) {
                if (b > p) continue;
                const auto combo = generate_pattern(spec_of(kind, p, b));
                std::vector<PatternMask> parts;
                for (auto c : constituents(kind)) parts.push_back(generate_pattern(spec_of(c, p, b)));
                for (std::size_t i = 0; i < combo.values.size(); ++i) {
                    double mx = 0.0;
                    for (const auto& part : parts) mx = std::max(mx, part.values[i]);
                    REQUIRE(combo.values[i] == mx);
                }
            }
    }
}

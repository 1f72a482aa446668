#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "patchpoison/error.hpp"
#include "patchpoison/image_codec.hpp"
#include "patchpoison/poison.hpp"
#include "support.hpp"

using namespace patchpoison;
using testsupport::random_image;

namespace {

// Eq. 3 evaluated in double precision with std::round (half away from zero).
ImageBuffer blend_oracle(const ImageBuffer& in, const PatternMask& mask, double alpha, const Region& r) {
    ImageBuffer out = in;
    for (int y = 0; y < r.h; ++y)
        for (int x = 0; x < r.w; ++x) {
            const double m = mask.at(x, y);
            for (int c = 0; c < in.color_channels(); ++c) {
                const double v = in.at(r.x + x, r.y + y, c) * (1 - alpha * m) + alpha * m * 255.0;
                out.at(r.x + x, r.y + y, c) = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
            }
        }
    return out;
}

bool outside_equal(const ImageBuffer& a, const ImageBuffer& b, const Region& r) {
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            if (r.contains(x, y)) continue;
            for (int c = 0; c < a.channels; ++c)
                if (a.at(x, y, c) != b.at(x, y, c)) return false;
        }
    return true;
}

ErrorKind error_kind(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::Io;
}

}  // namespace

TEST_CASE("alpha 0 leaves the image byte-identical") {
    const auto img = random_image(40, 30, 3, 1);
    CHECK(embed_patch(img, generate_checkerboard(12, 4), 0.0, Corner::BottomRight, 3) == img);
}

TEST_CASE("alpha 1 replaces bright cells with the contrast level") {
    ImageBuffer img(12, 12, 3, 37);
    const auto out = embed_patch(img, generate_checkerboard(12, 4), 1.0, Corner::TopLeft, 0);
    CHECK(out.at(0, 0, 0) == 255);
    CHECK(out.at(0, 0, 2) == 255);
    CHECK(out.at(4, 0, 1) == 37);  // dark cell, m = 0

    // On black pixels, which is where the corners of object-centric captures
    // sit, a bright cell at alpha 1 lands exactly on the contrast level.
    for (int level = 0; level <= 255; ++level) {
        PatchSpec s;
        s.bright_level = level;
        const auto out_black = embed_patch(ImageBuffer(12, 12, 3, 0), s);
        REQUIRE(out_black.at(0, 0, 0) == level);
        REQUIRE(out_black.at(4, 0, 0) == 0);
    }
}

TEST_CASE("alpha 0.5 on 100 rounds 177.5 away from zero") {
    ImageBuffer img(4, 4, 1, 100);
    const auto out = embed_patch(img, generate_checkerboard(4, 4), 0.5, Corner::TopLeft, 0);
    const double expected = std::round(100 * 0.5 + 0.5 * 255);
    CHECK(expected == 178.0);
    CHECK(out.at(0, 0) == 178);
}

TEST_CASE("embed matches the floating-point blend oracle") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int w = 16 + static_cast<int>(rng.below(40)), h = 16 + static_cast<int>(rng.below(40));
        const int ch = std::array{1, 3, 4}[rng.below(3)];
        const auto img = random_image(w, h, ch, 100 + trial);
        PatchSpec s;
        s.kind = static_cast<PatternKind>(rng.below(9));
        s.size_px = 1 + static_cast<int>(rng.below(14));
        s.block_px = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(s.size_px)));
        s.alpha = rng.uniform();
        s.dark_level = static_cast<int>(rng.below(100));
        s.bright_level = s.dark_level + static_cast<int>(rng.below(static_cast<std::uint64_t>(256 - s.dark_level)));
        s.corner = static_cast<Corner>(rng.below(4));
        s.margin_px = static_cast<int>(rng.below(3));
        const Region r = patch_region(w, h, s.size_px, s.corner, s.margin_px);
        REQUIRE(embed_patch(img, s) == blend_oracle(img, generate_pattern(s), s.alpha, r));
    }
}

TEST_CASE("patch regions per corner") {
    CHECK(patch_region(800, 600, 12, Corner::TopLeft, 0) == Region{0, 0, 12, 12});
    CHECK(patch_region(800, 600, 12, Corner::TopRight, 5) == Region{783, 5, 12, 12});
    CHECK(patch_region(800, 600, 12, Corner::BottomLeft, 0) == Region{0, 588, 12, 12});
    CHECK(patch_region(800, 600, 12, Corner::BottomRight, 2) == Region{786, 586, 12, 12});
    CHECK(error_kind([] { patch_region(10, 10, 8, Corner::TopLeft, 3); }) == ErrorKind::PatchPlacement);
}

TEST_CASE("a patch that does not fit throws and writes nothing") {
    const auto img = random_image(10, 10, 3, 2);
    const auto copy = img;
    CHECK(error_kind([&] { embed_patch(img, generate_checkerboard(11, 1), 1.0, Corner::TopLeft, 0); }) ==
          ErrorKind::PatchPlacement);
    CHECK(img == copy);
}

TEST_CASE("RGBA alpha channel is untouched") {
    auto img = random_image(20, 20, 4, 3);
    const auto out = embed_patch(img, generate_checkerboard(12, 2), 1.0, Corner::TopLeft, 0);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x) REQUIRE(out.at(x, y, 3) == img.at(x, y, 3));
}

TEST_CASE("property: locality on 1000 random images") {
    Rng rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const int w = 8 + static_cast<int>(rng.below(57)), h = 8 + static_cast<int>(rng.below(57));
        const auto img = random_image(w, h, 3, 5000 + trial);
        const int p = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(w, h))));
        const int margin = static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(w, h) - p + 1)));
        const auto corner = static_cast<Corner>(rng.below(4));
        const double alpha = rng.uniform();
        const auto mask = generate_checkerboard(p, 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(p))));
        const auto out = embed_patch(img, mask, alpha, corner, margin);
        REQUIRE(outside_equal(img, out, patch_region(w, h, p, corner, margin)));
    }
}

TEST_CASE("property: locality exhaustive over every placement on 8x8") {
    const auto img = random_image(8, 8, 3, 77);
    for (int p = 1; p <= 8; ++p)
        for (int b = 1; b <= p; ++b)
            for (int margin = 0; margin + p <= 8; ++margin)
                for (int c = 0; c < 4; ++c) {
                    const auto corner = static_cast<Corner>(c);
                    const auto out = embed_patch(img, generate_checkerboard(p, b), 1.0, corner, margin);
                    const Region r = patch_region(8, 8, p, corner, margin);
                    REQUIRE(outside_equal(img, out, r));
                    REQUIRE(out == blend_oracle(img, generate_checkerboard(p, b), 1.0, r));
                }
}

TEST_CASE("property: idempotent at alpha 1 with a binary mask") {
    // Only m in {0, 1} is a fixed point of the blend; a partial level keeps
    // pulling the pixel toward 255.
    for (int s = 0; s < 50; ++s) {
        const auto img = random_image(30, 30, 3, 900 + s);
        const auto mask = generate_checkerboard(12, 1 + s % 12, 255, 0);
        const auto once = embed_patch(img, mask, 1.0, Corner::TopRight, 1);
        REQUIRE(embed_patch(once, mask, 1.0, Corner::TopRight, 1) == once);
    }
}

TEST_CASE("property: distortion is non-decreasing in alpha") {
    for (int s = 0; s < 30; ++s) {
        const auto img = random_image(24, 24, 3, 300 + s);
        PatchSpec spec;
        spec.size_px = 24;
        spec.block_px = 3;
        spec.bright_level = 60 + 6 * s;
        spec.dark_level = s;
        const auto mask = generate_pattern(spec);
        std::vector<int> prev(img.data.size(), 0);
        for (int k = 0; k <= 20; ++k) {
            const auto out = embed_patch(img, mask, k / 20.0, Corner::TopLeft, 0);
            for (std::size_t i = 0; i < out.data.size(); ++i) {
                const int d = std::abs(int(out.data[i]) - int(img.data[i]));
                REQUIRE(d >= prev[i]);
                prev[i] = d;
            }
        }
    }
}

TEST_CASE("poisoned counts follow round(ratio * N)") {
    CHECK(poisoned_target(1.0, 100) == 100);
    CHECK(poisoned_target(0.05, 100) == 5);
    CHECK(poisoned_target(0.5, 7) == 4);
    CHECK(select_poison_subset(100, 1.0, 3).size() == 100);
    const auto a = select_poison_subset(100, 0.05, 42);
    CHECK(a.size() == 5);
    CHECK(a == select_poison_subset(100, 0.05, 42));
    CHECK(std::is_sorted(a.begin(), a.end()));
    CHECK(select_poison_subset(7, 0.5, 1).size() == 4);
}

TEST_CASE("poison_dataset: ratio, determinism and manifest consistency") {
    testsupport::TempDir in("poison_in");
    std::vector<std::filesystem::path> paths;
    for (int i = 0; i < 100; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "img_%03d.png", i);
        write_image(in / name, random_image(16, 16, 3, static_cast<std::uint64_t>(i)));
        paths.push_back(in / name);
    }
    testsupport::TempDir out1("poison_o1"), out2("poison_o2");
    PatchSpec spec;
    const auto m1 = poison_dataset(paths, spec, 0.05, 9, out1.path());
    const auto m2 = poison_dataset(paths, spec, 0.05, 9, out2.path());
    CHECK(m1.poisoned_count() == 5);
    CHECK(m1.error_count() == 0);
    REQUIRE(m1.entries.size() == 100);
    std::set<std::size_t> s1, s2;
    for (std::size_t i = 0; i < 100; ++i) {
        if (m1.entries[i].poisoned) s1.insert(i);
        if (m2.entries[i].poisoned) s2.insert(i);
        CHECK(m1.entries[i].source == paths[i].string());
        if (m1.entries[i].poisoned) {
            REQUIRE(m1.entries[i].region);
            CHECK(m1.entries[i].region->w == 12);
            CHECK(m1.entries[i].region->h == 12);
        }
    }
    CHECK(s1 == s2);
    // Images byte-identical; manifests equal apart from the output directory.
    auto h1 = testsupport::tree_hashes(out1.path()), h2 = testsupport::tree_hashes(out2.path());
    CHECK(h1.count(kManifestFileName) == 1);
    h1.erase(kManifestFileName);
    h2.erase(kManifestFileName);
    CHECK(h1 == h2);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(std::filesystem::path(m1.entries[i].output).filename() == std::filesystem::path(m2.entries[i].output).filename());
        CHECK(m1.entries[i].region == m2.entries[i].region);
    }

    // Unpoisoned copies are byte-identical images.
    for (std::size_t i = 0; i < 100; ++i) {
        const auto o = read_image(m1.entries[i].output);
        const auto src = read_image(paths[i]);
        if (!m1.entries[i].poisoned) CHECK(o == src);
        else CHECK(o == embed_patch(src, spec));
    }

    const auto all = poison_dataset(paths, spec, 1.0, 0, (out1 / "all"));
    CHECK(all.poisoned_count() == 100);
}

TEST_CASE("poison_dataset records per-image errors and continues") {
    testsupport::TempDir in("perr_in"), out("perr_out");
    write_image(in / "a.png", random_image(20, 20, 3, 1));
    { std::ofstream(in / "b.png") << "not a png"; }
    write_image(in / "c.png", random_image(8, 8, 3, 2));  // too small for P=12
    const auto m = poison_dataset({in / "a.png", in / "b.png", in / "c.png"}, PatchSpec{}, 1.0, 0, out.path());
    CHECK(m.error_count() == 2);
    CHECK_FALSE(m.entries[0].error);
    CHECK(m.entries[1].error);
    CHECK(m.entries[2].error);
    CHECK(std::filesystem::exists(out / "a.png"));
}

TEST_CASE("poison_dataset fails before touching images when the output is unusable") {
    testsupport::TempDir in("pfatal");
    write_image(in / "a.png", random_image(20, 20, 3, 1));
    { std::ofstream(in / "blocker") << "file"; }
    CHECK(error_kind([&] { poison_dataset({in / "a.png"}, PatchSpec{}, 1.0, 0, in / "blocker" / "sub"); }) ==
          ErrorKind::Io);
    CHECK(error_kind([&] { poison_dataset({in / "a.png"}, PatchSpec{}, 0.0, 0, in / "o"); }) ==
          ErrorKind::InvalidParameter);
}

TEST_CASE("compositing onto a background") {
    ImageBuffer px(1, 1, 4);
    px.data = {255, 0, 0, 0};
    CHECK(composite(px, BackgroundPolicy::Black).data == std::vector<std::uint8_t>{0, 0, 0});
    CHECK(composite(px, BackgroundPolicy::White).data == std::vector<std::uint8_t>{255, 255, 255});
    CHECK(composite(px, BackgroundPolicy::Keep) == px);
    px.data = {200, 100, 0, 128};
    const double a = 128 / 255.0;
    CHECK(composite(px, BackgroundPolicy::White).data ==
          std::vector<std::uint8_t>{static_cast<std::uint8_t>(std::round(200 * a + 255 * (1 - a))),
                                    static_cast<std::uint8_t>(std::round(100 * a + 255 * (1 - a))),
                                    static_cast<std::uint8_t>(std::round(255 * (1 - a)))});
}

TEST_CASE("baseline perturbations: identities and errors") {
    const auto img = random_image(32, 32, 3, 8);
    CHECK(baseline_perturb(img, GaussianNoise{0.0, 1}) == img);
    CHECK(baseline_perturb(img, Rotate{0.0}) == img);
    CHECK(baseline_perturb(img, Shear{0.0, 0.0}) == img);
    ImageBuffer flat(32, 32, 3, 93);
    CHECK(baseline_perturb(flat, GaussianBlur{3}) == flat);
    CHECK(baseline_perturb(flat, GaussianBlur{21}) == flat);
    CHECK(error_kind([&] { baseline_perturb(img, GaussianBlur{4}); }) == ErrorKind::InvalidParameter);
    CHECK(error_kind([&] { baseline_perturb(img, GaussianBlur{1}); }) == ErrorKind::InvalidParameter);
    CHECK(error_kind([&] { baseline_perturb(img, GaussianNoise{-1.0, 0}); }) == ErrorKind::InvalidParameter);
    CHECK(blur_sigma_for_kernel(21) == doctest::Approx(0.3 * (10 - 1) + 0.8));
    CHECK(blur_sigma_for_kernel(3) == doctest::Approx(0.8));
}

TEST_CASE("blur interior matches a direct 2D Gaussian convolution") {
    const auto img = random_image(40, 40, 1, 12);
    const int k = 7, r = 3;
    const double sigma = blur_sigma_for_kernel(k);
    const auto out = baseline_perturb(img, GaussianBlur{k});
    double total = 0.0;
    for (int v = -r; v <= r; ++v)
        for (int u = -r; u <= r; ++u) total += std::exp(-(u * u + v * v) / (2 * sigma * sigma));
    for (int y = r; y < 40 - r; ++y)
        for (int x = r; x < 40 - r; ++x) {
            double acc = 0.0;
            for (int v = -r; v <= r; ++v)
                for (int u = -r; u <= r; ++u) acc += std::exp(-(u * u + v * v) / (2 * sigma * sigma)) * img.at(x + u, y + v);
            REQUIRE(std::abs(out.at(x, y) - acc / total) <= 0.5 + 1e-9);
        }
}

TEST_CASE("noise is seeded and rotation moves content") {
    const auto img = random_image(32, 32, 3, 8);
    CHECK(baseline_perturb(img, GaussianNoise{25.0, 4}) == baseline_perturb(img, GaussianNoise{25.0, 4}));
    CHECK(baseline_perturb(img, GaussianNoise{25.0, 4}) != baseline_perturb(img, GaussianNoise{25.0, 5}));
    // 90 degrees about the center of an odd-sized image maps the grid onto itself.
    const auto sq = random_image(31, 31, 1, 9);
    const auto rot = baseline_perturb(sq, Rotate{90.0});
    int cw = 0, ccw = 0;
    for (int y = 0; y < 31; ++y)
        for (int x = 0; x < 31; ++x) {
            cw += rot.at(x, y) == sq.at(y, 30 - x);
            ccw += rot.at(x, y) == sq.at(30 - y, x);
        }
    CHECK(std::max(cw, ccw) == 31 * 31);
}

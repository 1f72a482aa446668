#include <doctest.h>

#include <cmath>
#include <limits>

#include "patchpoison/error.hpp"
#include "patchpoison/metrics.hpp"
#include "patchpoison/poison.hpp"
#include "support.hpp"

using namespace patchpoison;
using testsupport::random_image;

namespace {

double direct_psnr(const ImageBuffer& a, const ImageBuffer& b) {
    long double se = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const long double d = static_cast<long double>(a.data[i]) - b.data[i];
        se += d * d;
    }
    if (se == 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(10.0L * std::log10(255.0L * 255.0L / (se / a.data.size())));
}

// SSIM of two constant images: only the luminance factor differs from 1.
double constant_ssim(double x, double y) {
    const double C1 = (0.01 * 255) * (0.01 * 255);
    return (2 * x * y + C1) / (x * x + y * y + C1);
}

}  // namespace

TEST_CASE("psnr examples") {
    const auto a = random_image(20, 20, 3, 1);
    CHECK(std::isinf(psnr(a, a)));
    CHECK(psnr(a, a) > 0);
    CHECK(psnr(ImageBuffer(10, 10, 1, 0), ImageBuffer(10, 10, 1, 255)) == doctest::Approx(0.0).epsilon(1e-12));
    ImageBuffer x(800, 800, 1, 10);
    x.at(400, 300) = 0;
    ImageBuffer y = x;
    y.at(400, 300) = 255;
    CHECK(psnr(x, y) == doctest::Approx(10 * std::log10(640000.0)).epsilon(1e-12));
    CHECK(psnr(x, y) == doctest::Approx(58.0618).epsilon(1e-5));
}

TEST_CASE("psnr matches direct arithmetic") {
    for (int s = 0; s < 200; ++s) {
        const auto a = random_image(9 + s % 17, 11 + s % 13, 1 + 2 * (s % 2), 10 + s);
        auto b = a;
        Rng rng(s);
        for (int k = 0; k <= s % 50; ++k) b.data[rng.below(b.data.size())] = static_cast<std::uint8_t>(rng.below(256));
        const double expected = direct_psnr(a, b);
        if (std::isinf(expected)) REQUIRE(std::isinf(psnr(a, b)));
        else REQUIRE(std::abs(psnr(a, b) - expected) <= 1e-9);
    }
}

TEST_CASE("ssim of identical images is 1") {
    const auto a = random_image(40, 33, 3, 2);
    CHECK(std::abs(ssim(a, a) - 1.0) <= 1e-9);
}

TEST_CASE("ssim of constant images follows the luminance term") {
    const ImageBuffer a(16, 16, 1, 100), b(16, 16, 1, 150);
    CHECK(ssim(a, b) == doctest::Approx(constant_ssim(100, 150)).epsilon(1e-12));
    CHECK(ssim(ImageBuffer(11, 11, 3, 0), ImageBuffer(11, 11, 3, 255)) ==
          doctest::Approx(constant_ssim(0, 255)).epsilon(1e-12));
}

TEST_CASE("ssim matches the brute-force reference on a random 64x64 pair") {
    const auto a = random_image(64, 64, 1, 3), b = random_image(64, 64, 1, 4);
    CHECK(std::abs(ssim(a, b) - testsupport::reference_ssim(a, b)) <= 1e-6);
}

TEST_CASE("property: ssim oracle equivalence on 1000 seeded pairs") {
    // Sizes start at the window size: smaller images are rejected by contract.
    Rng rng(2024);
    double worst = 0.0;
    for (int s = 0; s < 1000; ++s) {
        const int w = 11 + static_cast<int>(rng.below(54)), h = 11 + static_cast<int>(rng.below(54));
        const auto a = random_image(w, h, 1, 10000 + s);
        ImageBuffer b = (s % 3 == 0) ? random_image(w, h, 1, 20000 + s) : a;
        if (s % 3 != 0)
            for (auto& v : b.data) v = static_cast<std::uint8_t>(std::clamp<int>(v + int(rng.below(61)) - 30, 0, 255));
        worst = std::max(worst, std::abs(ssim(a, b) - testsupport::reference_ssim(a, b)));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("images smaller than the window are rejected") {
    const auto a = random_image(8, 8, 1, 1);
    CHECK_THROWS_AS(ssim(a, a), Error);
    try {
        ssim(a, a);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidInput);
    }
    CHECK_THROWS_AS(psnr(random_image(8, 8, 1, 1), random_image(8, 9, 1, 1)), Error);
    CHECK_THROWS_AS(ssim(random_image(20, 20, 1, 1), random_image(20, 20, 3, 1)), Error);
}

TEST_CASE("property: symmetry, bounds and single-sample sensitivity") {
    for (int s = 0; s < 100; ++s) {
        const auto a = testsupport::smooth_texture(24 + s % 9, 20 + s % 7, 4, 50 + s);
        const auto b = random_image(a.width, a.height, 1, 500 + s);
        REQUIRE(ssim(a, b) == ssim(b, a));
        REQUIRE(psnr(a, b) == psnr(b, a));
        const double v = ssim(a, b);
        REQUIRE(v > -1.0);
        REQUIRE(v <= 1.0);
        REQUIRE(std::isfinite(psnr(a, b)) == (a != b));

        auto c = a;
        const int x = 5 + s % 10, y = 5 + s % 8;
        c.at(x, y) = static_cast<std::uint8_t>(c.at(x, y) < 128 ? c.at(x, y) + 40 : c.at(x, y) - 40);
        REQUIRE(ssim(a, c) < 1.0);
        REQUIRE(std::isfinite(psnr(a, c)));
    }
}

TEST_CASE("summaries use finite values with the sample deviation") {
    const auto s = summarize({0.9, 1.0});
    CHECK(*s.mean == doctest::Approx(0.95));
    CHECK(*s.stddev == doctest::Approx(std::sqrt(0.005)).epsilon(1e-12));
    CHECK(*s.stddev == doctest::Approx(0.0707).epsilon(1e-3));
    const double inf = std::numeric_limits<double>::infinity();
    const auto p = summarize({inf, 30.0, 40.0});
    CHECK(p.finite_count == 2);
    CHECK(*p.mean == doctest::Approx(35.0));
    const auto all_inf = summarize({inf, inf});
    CHECK(std::isinf(*all_inf.mean));
    CHECK_FALSE(all_inf.stddev);
    CHECK_FALSE(summarize({}).mean);
    CHECK_FALSE(summarize({1.0}).stddev);
}

TEST_CASE("evaluate_pairs: identity and errors") {
    std::vector<ImageBuffer> a{random_image(20, 20, 3, 1), random_image(20, 20, 3, 2)};
    const auto r = evaluate_pairs(a, a);
    CHECK(*r.ssim.mean == doctest::Approx(1.0));
    CHECK(r.psnr.finite_count == 0);
    for (const auto& p : r.pairs) CHECK(std::isinf(p.psnr_db));
    CHECK_THROWS_AS(evaluate_pairs(a, {a[0]}), Error);
    CHECK_THROWS_AS(evaluate_pairs(a, {a[0], random_image(20, 21, 3, 2)}), Error);
}

TEST_CASE("lpips values attach by name") {
    auto r = aggregate({{"x.png", 0.9, 30.0, {}}, {"y.png", 1.0, 40.0, {}}});
    attach_lpips(r, {{"x.png", 0.01}, {"y.png", 0.03}});
    CHECK(*r.lpips.mean == doctest::Approx(0.02));
    CHECK(*r.ssim.mean == doctest::Approx(0.95));
    const auto table = format_table(r);
    CHECK(table.find("SSIM") < table.find("PSNR"));
    CHECK(table.find("PSNR") < table.find("LPIPS"));
    const auto csv = to_csv({r});
    CHECK(csv.find("ssim") < csv.find("psnr"));
    CHECK(csv.find("psnr") < csv.find("lpips"));
}

TEST_CASE("12 px patch on rendered views stays imperceptible") {
    std::vector<double> s, p;
    for (std::uint64_t seed = 0; seed < 2; ++seed) {
        const auto img = testsupport::rendered_view(seed);
        const auto out = embed_patch(img, PatchSpec{});
        s.push_back(ssim(out, img));
        p.push_back(psnr(out, img));
    }
    for (double v : s) CHECK(v >= 0.995);
    for (double v : p) {
        CHECK(std::isfinite(v));
        CHECK(v >= 30.0);
    }
}

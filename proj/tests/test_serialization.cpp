#include <doctest.h>

#include <cmath>
#include <limits>

#include "patchpoison/error.hpp"
#include "patchpoison/serialization.hpp"
#include "support.hpp"

using namespace patchpoison;

TEST_CASE("non-finite numbers travel as strings") {
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(number_or_string(inf) == Json("inf"));
    CHECK(number_or_string(-inf) == Json("-inf"));
    CHECK(number_or_string(std::nan("")) == Json("nan"));
    CHECK(number_or_string(39.03) == Json(39.03));
    CHECK(std::isinf(number_from_json(Json::parse(number_or_string(inf).dump()))));
    CHECK(number_from_json(Json::parse(number_or_string(-inf).dump())) < 0);
    CHECK(std::isnan(number_from_json("nan")));
    CHECK(number_from_json(Json(0.25)) == 0.25);
    CHECK_THROWS_AS(number_from_json("infinity"), Error);
    CHECK_THROWS_AS(number_from_json(Json(nullptr)), Error);
}

TEST_CASE("finite doubles survive a dump and parse exactly") {
    Rng rng(4);
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.uniform(-1e6, 1e6) * std::pow(10.0, static_cast<int>(rng.below(20)) - 10);
        CHECK(number_from_json(Json::parse(number_or_string(v).dump())) == v);
    }
}

TEST_CASE("patch spec and region round trip") {
    PatchSpec s;
    s.kind = PatternKind::DiagonalsPlusCircles;
    s.size_px = 48;
    s.block_px = 8;
    s.alpha = 0.3;
    s.bright_level = 200;
    s.dark_level = 10;
    s.corner = Corner::BottomLeft;
    s.margin_px = 5;
    const auto back = patch_spec_from_json(Json::parse(to_json(s).dump()));
    CHECK(to_json(back) == to_json(s));
    CHECK(region_from_json(to_json(Region{1, 2, 3, 4})) == Region{1, 2, 3, 4});

    // Missing keys keep their defaults, unknown names are rejected.
    CHECK(to_json(patch_spec_from_json(Json::object())) == to_json(PatchSpec{}));
    CHECK_THROWS_AS(patch_spec_from_json(Json{{"kind", "zigzag"}}), Error);
    CHECK_THROWS_AS(patch_spec_from_json(Json{{"size_px", "twelve"}}), Error);
    CHECK_THROWS_AS(region_from_json(Json{{"x", 1}}), Error);
}

TEST_CASE("malformed manifests are rejected as invalid input") {
    PoisonManifest m;
    m.entries.push_back({"a", "b", false, std::nullopt, std::nullopt});
    Json j = to_json(m);
    CHECK(manifest_from_json(j) == m);
    j["background"] = "purple";
    try {
        manifest_from_json(j);
        FAIL("accepted an unknown background");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidInput);
    }
    CHECK_THROWS_AS(manifest_from_json(Json::array()), Error);
}

TEST_CASE("every report carries the schema version") {
    const auto r = aggregate({{"x.png", 1.0, std::numeric_limits<double>::infinity(), {}}});
    const Json jr = to_json(r);
    CHECK(jr["schema_version"] == kSchemaVersion);
    CHECK(jr["pairs"][0]["psnr_db"] == "inf");
    CHECK(jr["summary"]["lpips"]["mean"].is_null());

    DiagnosticReport d;
    const Json jd = to_json(d);
    CHECK(jd["schema_version"] == kSchemaVersion);
    CHECK(jd["patch_region"].is_null());
    CHECK(jd.contains("ransac"));
    CHECK(jd.contains("no_ransac"));

    PoisonManifest m;
    CHECK(to_json(m)["schema_version"] == kSchemaVersion);
    CHECK(features_debug_json(PairFeatures{})["schema_version"] == kSchemaVersion);
}

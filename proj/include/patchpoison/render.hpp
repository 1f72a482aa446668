#pragma once

#include <cstdint>

#include "patchpoison/geometry.hpp"
#include "patchpoison/image.hpp"

namespace patchpoison {

/// Synthetic stand-in for an object-centric capture: a 3x3 cluster of
/// textured, tilted tiles at several depths in front of a black background,
/// seen from camera A at the origin and an orbiting camera B aimed at it.
struct RenderOptions {
    int width = 800;
    int height = 800;
    double focal = 800.0;
    double baseline = 0.6;  // camera B center distance, world units
    double max_rotation_deg = 1.0;  // extra rotation on top of the look-at
    double texture_contrast = 1.0;  // 0 gives flat gray tiles
    int supersample = 2;  // per axis
};

struct RenderedTwoView {
    ImageBuffer image_a;  // RGB
    ImageBuffer image_b;
    CameraModel camera_a;  // identity pose
    CameraModel camera_b;
    PoseTruth truth;  // X_b = R X_a + t, t unit length
};

/// Deterministic for a given seed and options.
RenderedTwoView render_two_view(std::uint64_t seed, const RenderOptions& options = {});

/// Renders the same scene from an arbitrary camera (world = camera-A frame).
ImageBuffer render_view(std::uint64_t seed, const RenderOptions& options, const CameraModel& camera);

}  // namespace patchpoison

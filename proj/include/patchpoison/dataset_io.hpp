#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "patchpoison/geometry.hpp"
#include "patchpoison/image.hpp"
#include "patchpoison/poison.hpp"
#include "patchpoison/serialization.hpp"

namespace patchpoison {

/// Camera metadata from a NeRF-style transforms file, aligned with a
/// dataset's image order.
struct CameraMetadata {
    std::filesystem::path source;
    double camera_angle_x = 0.0;  // radians, horizontal field of view
    std::vector<Eigen::Matrix4d> camera_to_world;  // OpenGL axes (x right, y up, z back)
};

struct SceneDataset {
    std::string name;
    std::vector<std::filesystem::path> image_paths;  // lexicographic
    std::optional<CameraMetadata> cameras;
    BackgroundPolicy background = BackgroundPolicy::Keep;
    bool nerf_layout = false;  // a transforms file referenced this directory
    std::vector<std::string> warnings;

    /// Decodes image i and composites it per the background policy.
    ImageBuffer load_image(std::size_t i) const;
};

/// Image files directly inside dir, sorted by filename.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

/// Scans dir for images and looks for transforms*.json next to them or one
/// level up. Metadata whose frames do not resolve one-to-one onto the images
/// is dropped with a warning. Throws NoImages for an empty directory and Io
/// when dir is missing.
SceneDataset load_scene(const std::filesystem::path& dir, BackgroundPolicy background = BackgroundPolicy::Keep);

/// Parses a transforms file and matches frames to images by file stem.
/// Throws InvalidInput when the file is malformed or a frame/image has no
/// partner.
CameraMetadata match_transforms(const std::filesystem::path& transforms,
                                const std::vector<std::filesystem::path>& images);

/// Pinhole camera of frame i (world-to-camera, OpenCV axes).
CameraModel camera_from_metadata(const CameraMetadata& meta, std::size_t index, int width, int height);

/// X_b = R X_a + t between frames a and b, t normalized (zero if the centers coincide).
PoseTruth relative_pose(const CameraMetadata& meta, std::size_t a, std::size_t b, int width, int height);

/// transforms.json content for cameras rendered at the given width.
Json transforms_json(const std::vector<CameraModel>& cameras, const std::vector<std::string>& file_paths, int width);

struct WriteSummary {
    std::size_t written = 0;
    std::vector<std::pair<std::string, std::string>> failures;  // file, reason

    bool ok() const noexcept { return failures.empty(); }
};

/// Writes images[i] under the filename of dataset.image_paths[i] plus a JSON
/// sidecar, each atomically. The directory is checked before anything is
/// encoded; an unusable one throws Io.
WriteSummary write_outputs(const SceneDataset& dataset, const std::vector<ImageBuffer>& images, const Json& sidecar,
                           const std::string& sidecar_name, const std::filesystem::path& out_dir);

}  // namespace patchpoison

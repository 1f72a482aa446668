#include "patchpoison/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "patchpoison/error.hpp"
#include "patchpoison/fs_util.hpp"
#include "patchpoison/image_codec.hpp"
#include "patchpoison/log.hpp"

namespace fs = std::filesystem;

namespace patchpoison {

namespace {

struct Frame {
    fs::path path;  // resolved against the transforms file's directory
    Eigen::Matrix4d c2w;
};

struct TransformsFile {
    double camera_angle_x = 0.0;
    std::vector<Frame> frames;
};

TransformsFile parse_transforms(const fs::path& file) {
    Json j;
    try {
        j = Json::parse(read_text_file(file));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidInput, file.string() + ": " + e.what());
    }
    try {
        TransformsFile t;
        t.camera_angle_x = j.at("camera_angle_x").get<double>();
        if (!(t.camera_angle_x > 0.0 && t.camera_angle_x < 3.14159))
            throw Error(ErrorKind::InvalidInput, file.string() + ": camera_angle_x out of range");
        for (const auto& f : j.at("frames")) {
            Frame fr;
            fs::path p = f.at("file_path").get<std::string>();
            if (!p.has_extension()) p += ".png";
            fr.path = (file.parent_path() / p).lexically_normal();
            const auto& m = f.at("transform_matrix");
            if (m.size() != 4) throw Error(ErrorKind::InvalidInput, file.string() + ": transform_matrix must be 4x4");
            for (int r = 0; r < 4; ++r) {
                if (m[static_cast<std::size_t>(r)].size() != 4)
                    throw Error(ErrorKind::InvalidInput, file.string() + ": transform_matrix must be 4x4");
                for (int c = 0; c < 4; ++c) fr.c2w(r, c) = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
            }
            t.frames.push_back(std::move(fr));
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidInput, file.string() + ": " + e.what());
    }
}

std::vector<fs::path> transforms_candidates(const fs::path& dir) {
    std::vector<fs::path> out;
    auto scan = [&](const fs::path& d) {
        std::error_code ec;
        std::vector<fs::path> found;
        for (const auto& e : fs::directory_iterator(d, ec)) {
            const auto name = e.path().filename().string();
            if (e.is_regular_file() && name.starts_with("transforms") && e.path().extension() == ".json")
                found.push_back(e.path());
        }
        std::sort(found.begin(), found.end());
        out.insert(out.end(), found.begin(), found.end());
    };
    scan(dir);
    const fs::path parent = fs::absolute(dir).lexically_normal().parent_path();
    if (!parent.empty() && parent != fs::absolute(dir).lexically_normal()) scan(parent);
    return out;
}

fs::path canonical_or_normal(const fs::path& p) {
    std::error_code ec;
    auto c = fs::weakly_canonical(p, ec);
    return ec ? fs::absolute(p).lexically_normal() : c;
}

}  // namespace

ImageBuffer SceneDataset::load_image(std::size_t i) const {
    if (i >= image_paths.size()) throw Error(ErrorKind::InvalidParameter, "image index out of range");
    return composite(read_image(image_paths[i]), background);
}

std::vector<fs::path> list_images(const fs::path& dir) {
    std::vector<fs::path> out;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(dir, ec))
        if (e.is_regular_file() && is_image_path(e.path())) out.push_back(e.path());
    if (ec) throw Error(ErrorKind::Io, "cannot list " + dir.string() + ": " + ec.message());
    std::sort(out.begin(), out.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    return out;
}

SceneDataset load_scene(const fs::path& dir, BackgroundPolicy background) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, "not a directory: " + dir.string());
    SceneDataset ds;
    ds.background = background;
    ds.name = fs::absolute(dir).lexically_normal().filename().string();
    if (ds.name.empty()) ds.name = fs::absolute(dir).lexically_normal().parent_path().filename().string();
    ds.image_paths = list_images(dir);
    if (ds.image_paths.empty()) throw Error(ErrorKind::NoImages, "no images in " + dir.string());

    std::map<fs::path, std::size_t> index_of;
    for (std::size_t i = 0; i < ds.image_paths.size(); ++i) index_of[canonical_or_normal(ds.image_paths[i])] = i;
    const fs::path canon_dir = canonical_or_normal(dir);

    for (const auto& candidate : transforms_candidates(dir)) {
        TransformsFile t;
        try {
            t = parse_transforms(candidate);
        } catch (const Error& e) {
            ds.warnings.push_back(std::string("ignoring metadata: ") + e.what());
            continue;
        }
        std::vector<const Frame*> mine;
        for (const auto& f : t.frames)
            if (canonical_or_normal(f.path).parent_path() == canon_dir) mine.push_back(&f);
        if (mine.empty()) continue;
        ds.nerf_layout = true;

        CameraMetadata meta;
        meta.source = candidate;
        meta.camera_angle_x = t.camera_angle_x;
        meta.camera_to_world.resize(ds.image_paths.size());
        std::vector<bool> seen(ds.image_paths.size(), false);
        bool complete = mine.size() == ds.image_paths.size();
        for (const Frame* f : mine) {
            const auto it = index_of.find(canonical_or_normal(f->path));
            if (it == index_of.end() || seen[it->second]) {
                complete = false;
                break;
            }
            seen[it->second] = true;
            meta.camera_to_world[it->second] = f->c2w;
        }
        if (!complete) {
            ds.warnings.push_back("metadata dropped: " + candidate.string() + " lists " + std::to_string(mine.size()) +
                                  " frames for " + std::to_string(ds.image_paths.size()) + " images");
            continue;
        }
        ds.cameras = std::move(meta);
        break;
    }
    for (const auto& w : ds.warnings) log_warn(w);
    return ds;
}

CameraMetadata match_transforms(const fs::path& transforms, const std::vector<fs::path>& images) {
    const TransformsFile t = parse_transforms(transforms);
    std::map<std::string, const Frame*> by_stem;
    for (const auto& f : t.frames) by_stem[f.path.stem().string()] = &f;
    CameraMetadata meta;
    meta.source = transforms;
    meta.camera_angle_x = t.camera_angle_x;
    for (const auto& img : images) {
        const auto it = by_stem.find(img.stem().string());
        if (it == by_stem.end())
            throw Error(ErrorKind::InvalidInput, transforms.string() + " has no frame for " + img.filename().string());
        meta.camera_to_world.push_back(it->second->c2w);
    }
    return meta;
}

CameraModel camera_from_metadata(const CameraMetadata& meta, std::size_t index, int width, int height) {
    if (index >= meta.camera_to_world.size()) throw Error(ErrorKind::InvalidParameter, "frame index out of range");
    const double f = 0.5 * width / std::tan(0.5 * meta.camera_angle_x);
    const Eigen::Matrix4d& m = meta.camera_to_world[index];
    // OpenGL camera axes to OpenCV: flip y and z.
    const Mat3 R_c2w = m.topLeftCorner<3, 3>() * Eigen::Vector3d(1, -1, -1).asDiagonal();
    const Vec3 center = m.topRightCorner<3, 1>();
    CameraModel cam;
    cam.K = intrinsics(f, f, 0.5 * width, 0.5 * height);
    cam.R = R_c2w.transpose();
    cam.t = -cam.R * center;
    return cam;
}

PoseTruth relative_pose(const CameraMetadata& meta, std::size_t a, std::size_t b, int width, int height) {
    const CameraModel ca = camera_from_metadata(meta, a, width, height);
    const CameraModel cb = camera_from_metadata(meta, b, width, height);
    PoseTruth truth;
    truth.K_a = ca.K;
    truth.K_b = cb.K;
    truth.R = cb.R * ca.R.transpose();
    const Vec3 t = cb.R * (ca.center() - cb.center());
    truth.t = t.norm() > 0 ? Vec3(t.normalized()) : Vec3::Zero();
    return truth;
}

Json transforms_json(const std::vector<CameraModel>& cameras, const std::vector<std::string>& file_paths, int width) {
    if (cameras.empty() || cameras.size() != file_paths.size())
        throw Error(ErrorKind::InvalidParameter, "need one file path per camera");
    const double f = cameras.front().K(0, 0);
    Json frames = Json::array();
    for (std::size_t i = 0; i < cameras.size(); ++i) {
        const Mat3 R_gl = cameras[i].R.transpose() * Eigen::Vector3d(1, -1, -1).asDiagonal();
        const Vec3 c = cameras[i].center();
        Json m = Json::array();
        for (int r = 0; r < 3; ++r) m.push_back(Json::array({R_gl(r, 0), R_gl(r, 1), R_gl(r, 2), c(r)}));
        m.push_back(Json::array({0.0, 0.0, 0.0, 1.0}));
        frames.push_back(Json{{"file_path", file_paths[i]}, {"transform_matrix", std::move(m)}});
    }
    return Json{{"camera_angle_x", 2.0 * std::atan(0.5 * width / f)}, {"frames", std::move(frames)}};
}

WriteSummary write_outputs(const SceneDataset& dataset, const std::vector<ImageBuffer>& images, const Json& sidecar,
                           const std::string& sidecar_name, const fs::path& out_dir) {
    if (images.size() != dataset.image_paths.size())
        throw Error(ErrorKind::InvalidParameter, "one output image per dataset image is required");
    ensure_writable_dir(out_dir);
    WriteSummary summary;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const fs::path target = out_dir / dataset.image_paths[i].filename();
        try {
            write_image(target, images[i]);
            ++summary.written;
        } catch (const Error& e) {
            summary.failures.emplace_back(target.string(), e.what());
            log_warn("write failed: " + target.string() + ": " + e.what());
        }
    }
    if (!sidecar_name.empty()) {
        try {
            write_text_atomic(out_dir / sidecar_name, sidecar.dump(2) + "\n");
        } catch (const Error& e) {
            summary.failures.emplace_back((out_dir / sidecar_name).string(), e.what());
        }
    }
    return summary;
}

}  // namespace patchpoison

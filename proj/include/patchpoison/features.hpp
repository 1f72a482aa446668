#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "patchpoison/image.hpp"

namespace patchpoison {

struct PyramidParams {
    int octaves = 4;
    int scales_per_octave = 3;
    double sigma0 = 1.6;
    /// Blur already present in the input; the base level only adds the rest.
    double input_blur = 0.5;
    /// Start with a 2x bilinear upsampled octave so structures finer than
    /// sigma0 input pixels still produce scale-space extrema.
    bool upsample = true;
};

struct Octave {
    int width = 0;
    int height = 0;
    std::vector<GrayImage> gaussians;  // scales_per_octave + 3 levels
    std::vector<GrayImage> dogs;       // scales_per_octave + 2 levels
};

/// Gaussian and difference-of-Gaussian stacks. octaves[o] has resolution
/// input / octave_scale(o), where octave_scale(0) is 1/2 with upsampling and
/// 1 without; level i of every octave has blur sigma0 * 2^(i/s) in that
/// octave's pixel units.
struct ScaleSpacePyramid {
    PyramidParams params;
    std::vector<Octave> octaves;
    std::vector<double> level_sigmas;  // per Gaussian level, octave-relative

    /// Size of one pixel of octaves[o] in input pixels.
    double octave_scale(int octave) const;

    /// Blur of Gaussian level `level` (fractional allowed) in input pixels.
    double sigma(int octave, double level) const;
    /// Characteristic scale of DoG level `level`: geometric midpoint of the
    /// two Gaussian levels it subtracts, in input pixels.
    double dog_sigma(int octave, double level) const;
};

/// Throws InvalidInput when min(width, height) < 2^octaves and
/// InvalidParameter when scales < 2.
ScaleSpacePyramid build_pyramid(const GrayImage& image, const PyramidParams& params = {});
ScaleSpacePyramid build_pyramid(const ImageBuffer& image, const PyramidParams& params = {});

struct Keypoint {
    double x = 0.0;  // input-image pixels
    double y = 0.0;
    double scale = 0.0;  // Gaussian sigma in input pixels
    double orientation = 0.0;  // radians, atan2 of the image gradient (y down)
    double response = 0.0;  // |DoG| at the refined extremum
    int octave = 0;  // index into ScaleSpacePyramid::octaves
    int layer = 0;  // DoG level index inside the octave
    double layer_offset = 0.0;  // sub-level refinement in [-0.5, 0.5]
};

struct DetectorParams {
    double contrast_threshold = 0.03;  // on [0,1] intensities
    double edge_ratio = 10.0;
    int border = 5;
    int max_refine_iterations = 5;
    double orientation_peak_ratio = 0.8;
};

/// Scale-space extrema over 3x3x3 neighborhoods with quadratic refinement,
/// low-contrast and edge rejection, and dominant-orientation assignment.
/// Keypoints whose refined positions coincide are merged; each surviving
/// orientation peak yields its own keypoint.
std::vector<Keypoint> detect_keypoints(const ScaleSpacePyramid& pyramid, const DetectorParams& params = {});
std::vector<Keypoint> detect_keypoints(const ScaleSpacePyramid& pyramid, double contrast_threshold,
                                       double edge_ratio);

inline constexpr std::size_t kDescriptorSize = 128;
using Descriptor = std::array<float, kDescriptorSize>;

struct DescribeResult {
    std::vector<Descriptor> descriptors;
    /// keypoint_index[i] is the input keypoint that descriptors[i] belongs to.
    std::vector<std::size_t> keypoint_index;
};

/// 4x4 spatial cells x 8 orientation bins sampled in the keypoint's octave,
/// rotated to its orientation, L2-normalized, clamped at 0.2, renormalized.
/// Keypoints whose support window leaves the octave image are dropped.
DescribeResult describe(const ScaleSpacePyramid& pyramid, std::span<const Keypoint> keypoints);

/// Convenience: builds a default pyramid for `image` first.
DescribeResult describe(const ImageBuffer& image, std::span<const Keypoint> keypoints,
                        const PyramidParams& params = {});

struct MatchPair {
    std::size_t index_a = 0;
    std::size_t index_b = 0;
    double distance = 0.0;
    double ratio = 0.0;  // nearest / second-nearest distance, 0 with a single candidate
};

struct MatchParams {
    double ratio_threshold = 0.75;
    bool cross_check = true;
};

/// Brute-force L2 nearest neighbors with the ratio test; ties go to the lower
/// index. With cross_check only mutual nearest neighbors survive. Throws
/// InvalidParameter unless ratio_threshold lies in (0, 1].
std::vector<MatchPair> match(std::span<const Descriptor> a, std::span<const Descriptor> b,
                             const MatchParams& params = {});
std::vector<MatchPair> match(std::span<const Descriptor> a, std::span<const Descriptor> b,
                             double ratio_threshold, bool cross_check);

/// Keypoints and descriptors of one image.
struct FeatureSet {
    std::vector<Keypoint> keypoints;  // only the described ones
    std::vector<Descriptor> descriptors;
};

struct FeatureParams {
    PyramidParams pyramid;
    DetectorParams detector;
};

/// detect + describe on a color or gray image.
FeatureSet extract_features(const ImageBuffer& image, const FeatureParams& params = {});

}  // namespace patchpoison

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "patchpoison/image.hpp"

namespace patchpoison {

/// SSIM constants (Wang et al. defaults), also written into report metadata.
struct SsimParams {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 255.0;
};

/// 10*log10(255^2 / MSE) over all samples; +infinity when the images are identical.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

/// Mean of the local SSIM map over every position where the Gaussian window
/// fits entirely (no padding), computed per channel and averaged.
double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimParams& params = {});

struct MetricPair {
    std::string name;
    double ssim = 0.0;
    double psnr_db = 0.0;
    std::optional<double> lpips;  // externally supplied only
};

/// Mean and sample standard deviation of the finite values of one metric.
struct Summary {
    std::optional<double> mean;  // +inf when every value is infinite
    std::optional<double> stddev;  // needs at least two finite values
    std::size_t finite_count = 0;
};

Summary summarize(const std::vector<double>& values);

enum class Direction { PoisonedVsOriginal, PoisonedVsRender };

std::string_view to_string(Direction d) noexcept;
std::optional<Direction> parse_direction(std::string_view name);

struct AggregateReport {
    Direction direction = Direction::PoisonedVsOriginal;
    std::vector<MetricPair> pairs;
    Summary ssim;
    Summary psnr;
    Summary lpips;
    SsimParams ssim_params;
};

/// Pairs images element-wise. names, when non-empty, label the pairs.
/// Throws InvalidInput on count or shape mismatch.
AggregateReport evaluate_pairs(const std::vector<ImageBuffer>& a, const std::vector<ImageBuffer>& b,
                               Direction direction = Direction::PoisonedVsOriginal,
                               const std::vector<std::string>& names = {});

/// Report over already computed pairs, e.g. when images are streamed.
AggregateReport aggregate(std::vector<MetricPair> pairs, Direction direction = Direction::PoisonedVsOriginal);

/// Fills MetricPair::lpips from a name -> value map and refreshes the summary.
void attach_lpips(AggregateReport& report, const std::map<std::string, double>& lpips);

/// Table layout: scene, then ssim/psnr/lpips for each report's direction.
/// Scenes are joined by name; mean and std rows close the table.
std::string to_csv(const std::vector<AggregateReport>& reports);

/// Human-readable mean +- std table in SSIM, PSNR, LPIPS order.
std::string format_table(const AggregateReport& report);

}  // namespace patchpoison

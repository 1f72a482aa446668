#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "patchpoison/diagnose.hpp"
#include "patchpoison/metrics.hpp"
#include "patchpoison/pattern.hpp"
#include "patchpoison/serialization.hpp"

namespace patchpoison {

/// Entry point of the patchpoison tool. Exit codes: 0 success, 1 usage or
/// fatal error, 2 partial per-image failure (poison).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

enum class SweepAxis { PatchSize, BlockSize, Contrast, Alpha, PatternKind, PoisonRatio };

std::string_view to_string(SweepAxis axis) noexcept;
std::optional<SweepAxis> parse_sweep_axis(std::string_view name);

struct SweepConfig {
    SweepAxis axis = SweepAxis::BlockSize;
    std::vector<Json> values;
    PatchSpec base;
    double ratio = 1.0;
    std::uint64_t seed = 0;
    std::filesystem::path input;
    std::filesystem::path output;
    std::string background = "auto";  // auto | black | white | keep
    bool parallel = false;
};

/// Relative paths resolve against base_dir. Throws InvalidParameter when the
/// axis is unknown, values is empty, or any value is invalid for the axis.
SweepConfig parse_sweep_config(const Json& j, const std::filesystem::path& base_dir = {});

struct SweepCell {
    std::string label;  // axis value as written in the CSV
    PatchSpec spec;
    double ratio = 1.0;
    bool ok = false;
    std::string error;
    std::size_t images = 0;
    std::size_t poisoned = 0;
    std::size_t failed_images = 0;
    std::optional<AggregateReport> evaluation;
    std::optional<DiagnosticReport> diagnostic;
};

/// One poison + evaluate + diagnose run per axis value, each under
/// output/<axis>_<value>/. Cell failures are recorded, not thrown.
std::vector<SweepCell> run_sweep(const SweepConfig& config);

std::string sweep_csv(const SweepConfig& config, const std::vector<SweepCell>& cells);

}  // namespace patchpoison

#include "patchpoison/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "patchpoison/error.hpp"

namespace patchpoison {

namespace {

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b) {
    validate(a);
    validate(b);
    if (!a.same_shape(b))
        throw Error(ErrorKind::InvalidInput, "image shapes differ: " + std::to_string(a.width) + "x" +
                                                 std::to_string(a.height) + "x" + std::to_string(a.channels) +
                                                 " vs " + std::to_string(b.width) + "x" + std::to_string(b.height) +
                                                 "x" + std::to_string(b.channels));
}

std::vector<double> gaussian_window(int size, double sigma) {
    std::vector<double> k(static_cast<std::size_t>(size));
    const double c = 0.5 * (size - 1);
    double sum = 0.0;
    for (int i = 0; i < size; ++i) sum += (k[static_cast<std::size_t>(i)] = std::exp(-0.5 * (i - c) * (i - c) / (sigma * sigma)));
    for (auto& v : k) v /= sum;
    return k;
}

// Mean SSIM of one channel using separable valid-mode filtering.
double ssim_channel(const ImageBuffer& a, const ImageBuffer& b, int channel, const SsimParams& p,
                    const std::vector<double>& k) {
    const int w = a.width, h = a.height, n = p.window;
    const int ow = w - n + 1, oh = h - n + 1;
    const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
    const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);

    // Horizontal pass over x, y, x^2, y^2, xy.
    std::vector<double> hx(static_cast<std::size_t>(ow) * h), hy(hx.size()), hxx(hx.size()), hyy(hx.size()),
        hxy(hx.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
            for (int i = 0; i < n; ++i) {
                const double wv = k[static_cast<std::size_t>(i)];
                const double u = a.at(x + i, y, channel), v = b.at(x + i, y, channel);
                sx += wv * u;
                sy += wv * v;
                sxx += wv * (u * u);
                syy += wv * (v * v);
                sxy += wv * (u * v);
            }
            const std::size_t o = static_cast<std::size_t>(y) * ow + x;
            hx[o] = sx;
            hy[o] = sy;
            hxx[o] = sxx;
            hyy[o] = syy;
            hxy[o] = sxy;
        }
    }

    double total = 0.0;
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double mx = 0, my = 0, exx = 0, eyy = 0, exy = 0;
            for (int i = 0; i < n; ++i) {
                const double wv = k[static_cast<std::size_t>(i)];
                const std::size_t o = static_cast<std::size_t>(y + i) * ow + x;
                mx += wv * hx[o];
                my += wv * hy[o];
                exx += wv * hxx[o];
                eyy += wv * hyy[o];
                exy += wv * hxy[o];
            }
            const double vx = exx - mx * mx, vy = eyy - my * my, cov = exy - mx * my;
            total += ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    }
    return total / (static_cast<double>(ow) * oh);
}

std::string fmt_number(double v, int digits) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v, int digits) { return v ? fmt_number(*v, digits) : ""; }

void refresh_summaries(AggregateReport& r) {
    std::vector<double> s, p, l;
    for (const auto& m : r.pairs) {
        s.push_back(m.ssim);
        p.push_back(m.psnr_db);
        if (m.lpips) l.push_back(*m.lpips);
    }
    r.ssim = summarize(s);
    r.psnr = summarize(p);
    r.lpips = summarize(l);
}

}  // namespace

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
    require_same_shape(a, b);
    double sse = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        sse += d * d;
    }
    if (sse == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = sse / static_cast<double>(a.data.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimParams& params) {
    require_same_shape(a, b);
    if (params.window < 1 || params.sigma <= 0.0)
        throw Error(ErrorKind::InvalidParameter, "invalid SSIM window parameters");
    if (a.width < params.window || a.height < params.window)
        throw Error(ErrorKind::InvalidInput, "image smaller than the " + std::to_string(params.window) + "x" +
                                                 std::to_string(params.window) + " SSIM window");
    const auto k = gaussian_window(params.window, params.sigma);
    double sum = 0.0;
    for (int c = 0; c < a.channels; ++c) sum += ssim_channel(a, b, c, params, k);
    return sum / a.channels;
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    double sum = 0.0;
    bool any_inf = false;
    for (double v : values) {
        if (std::isfinite(v)) {
            sum += v;
            ++s.finite_count;
        } else if (std::isinf(v)) {
            any_inf = true;
        }
    }
    if (s.finite_count == 0) {
        if (any_inf) s.mean = std::numeric_limits<double>::infinity();
        return s;
    }
    const double mean = sum / static_cast<double>(s.finite_count);
    s.mean = mean;
    if (s.finite_count >= 2) {
        double ss = 0.0;
        for (double v : values)
            if (std::isfinite(v)) ss += (v - mean) * (v - mean);
        s.stddev = std::sqrt(ss / static_cast<double>(s.finite_count - 1));
    }
    return s;
}

std::string_view to_string(Direction d) noexcept {
    return d == Direction::PoisonedVsOriginal ? "poisoned_vs_original" : "poisoned_vs_render";
}

std::optional<Direction> parse_direction(std::string_view name) {
    if (name == "poisoned_vs_original") return Direction::PoisonedVsOriginal;
    if (name == "poisoned_vs_render") return Direction::PoisonedVsRender;
    return std::nullopt;
}

AggregateReport evaluate_pairs(const std::vector<ImageBuffer>& a, const std::vector<ImageBuffer>& b,
                               Direction direction, const std::vector<std::string>& names) {
    if (a.size() != b.size())
        throw Error(ErrorKind::InvalidInput, "image set sizes differ: " + std::to_string(a.size()) + " vs " +
                                                 std::to_string(b.size()));
    if (!names.empty() && names.size() != a.size())
        throw Error(ErrorKind::InvalidInput, "name count does not match pair count");
    AggregateReport report;
    report.direction = direction;
    for (std::size_t i = 0; i < a.size(); ++i) {
        MetricPair m;
        m.name = names.empty() ? std::to_string(i) : names[i];
        m.ssim = ssim(a[i], b[i], report.ssim_params);
        m.psnr_db = psnr(a[i], b[i]);
        report.pairs.push_back(std::move(m));
    }
    refresh_summaries(report);
    return report;
}

AggregateReport aggregate(std::vector<MetricPair> pairs, Direction direction) {
    AggregateReport report;
    report.direction = direction;
    report.pairs = std::move(pairs);
    refresh_summaries(report);
    return report;
}

void attach_lpips(AggregateReport& report, const std::map<std::string, double>& lpips) {
    for (auto& m : report.pairs) {
        const auto it = lpips.find(m.name);
        if (it != lpips.end()) m.lpips = it->second;
    }
    refresh_summaries(report);
}

std::string to_csv(const std::vector<AggregateReport>& reports) {
    std::ostringstream out;
    out << "scene";
    for (const auto& r : reports) {
        const auto d = to_string(r.direction);
        out << ',' << d << "_ssim," << d << "_psnr," << d << "_lpips";
    }
    out << '\n';

    std::vector<std::string> scenes;
    for (const auto& r : reports)
        for (const auto& m : r.pairs)
            if (std::find(scenes.begin(), scenes.end(), m.name) == scenes.end()) scenes.push_back(m.name);

    for (const auto& scene : scenes) {
        out << scene;
        for (const auto& r : reports) {
            const auto it = std::find_if(r.pairs.begin(), r.pairs.end(),
                                         [&](const MetricPair& m) { return m.name == scene; });
            if (it == r.pairs.end()) {
                out << ",,,";
                continue;
            }
            out << ',' << fmt_number(it->ssim, 6) << ',' << fmt_number(it->psnr_db, 4) << ','
                << fmt_opt(it->lpips, 6);
        }
        out << '\n';
    }
    out << "mean";
    for (const auto& r : reports)
        out << ',' << fmt_opt(r.ssim.mean, 6) << ',' << fmt_opt(r.psnr.mean, 4) << ',' << fmt_opt(r.lpips.mean, 6);
    out << "\nstd";
    for (const auto& r : reports)
        out << ',' << fmt_opt(r.ssim.stddev, 6) << ',' << fmt_opt(r.psnr.stddev, 4) << ','
            << fmt_opt(r.lpips.stddev, 6);
    out << '\n';
    return out.str();
}

std::string format_table(const AggregateReport& report) {
    const bool vs_original = report.direction == Direction::PoisonedVsOriginal;
    // Arrow directions follow the published result tables.
    const char* up = vs_original ? "(down)" : "(up)";
    const char* down = vs_original ? "(up)" : "(down)";
    auto cell = [](const Summary& s, int digits) {
        if (!s.mean) return std::string("n/a");
        std::string v = fmt_number(*s.mean, digits);
        if (s.stddev) v += " +- " + fmt_number(*s.stddev, digits);
        return v;
    };
    std::ostringstream out;
    out << to_string(report.direction) << " (" << report.pairs.size() << " pairs)\n";
    out << "  SSIM" << up << "   " << cell(report.ssim, 4) << '\n';
    out << "  PSNR" << up << "   " << cell(report.psnr, 2) << '\n';
    out << "  LPIPS" << down << "  " << cell(report.lpips, 4) << '\n';
    return out.str();
}

}  // namespace patchpoison

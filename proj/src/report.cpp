// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include <fmt/format.h>

#include "keyreid/error.hpp"
#include "keyreid/io.hpp"

namespace keyreid {

namespace fs = std::filesystem;

void write_cmc_csv(const fs::path& path, const CMCCurve& curve) {
    std::string out = "rank,accuracy\n";
    for (std::size_t r = 0; r < curve.accuracy.size(); ++r) {
        out += fmt::format("{},{:.6f}\n", r + 1, curve.accuracy[r]);
    }
    write_file(path, out);
}

void write_summary_csv(const fs::path& path, std::span<const NamedCurve> curves, std::span<const std::size_t> ranks) {
    std::string out = "method";
    for (std::size_t r : ranks) out += fmt::format(",r{}", r);
    out += '\n';
    for (const auto& named : curves) {
        out += named.name;
        for (std::size_t r : ranks) out += fmt::format(",{:.6f}", named.curve.at(r));
        out += '\n';
    }
    write_file(path, out);
}

void write_rho_sweep_csv(const fs::path& path, std::span<const RhoSweepPoint> sweep) {
    std::string out = "rho,sigma,n_keys\n";
    for (const auto& p : sweep) out += fmt::format("{:.6f},{:.6f},{}\n", p.rho, p.sigma, p.n_keys);
    write_file(path, out);
}

void write_cmc_svg(const fs::path& path, std::span<const NamedCurve> curves) {
    constexpr double kWidth = 640.0;
    constexpr double kHeight = 400.0;
    constexpr double kLeft = 60.0;
    constexpr double kRight = 160.0;
    constexpr double kTop = 20.0;
    constexpr double kBottom = 50.0;
    static const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    std::size_t max_rank = 1;
    for (const auto& c : curves) max_rank = std::max(max_rank, c.curve.accuracy.size());
    const auto x_of = [&](std::size_t rank) {
        return max_rank == 1 ? kLeft : kLeft + plot_w * static_cast<double>(rank - 1) / static_cast<double>(max_rank - 1);
    };
    const auto y_of = [&](double acc) { return kTop + plot_h * (1.0 - acc); };

    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n",
        kWidth, kHeight, kWidth, kHeight);
    out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n", kWidth, kHeight);
    out += fmt::format(
        "<rect x=\"{:.6f}\" y=\"{:.6f}\" width=\"{:.6f}\" height=\"{:.6f}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
        kTop, plot_w, plot_h);
    for (int tick = 0; tick <= 10; tick += 2) {
        const double y = y_of(tick / 10.0);
        out += fmt::format("<line x1=\"{:.6f}\" y1=\"{:.6f}\" x2=\"{:.6f}\" y2=\"{:.6f}\" stroke=\"#dddddd\"/>\n", kLeft,
                           y, kLeft + plot_w, y);
        out += fmt::format(
            "<text x=\"{:.6f}\" y=\"{:.6f}\" font-size=\"11\" text-anchor=\"end\">{}%</text>\n", kLeft - 6.0,
            y + 4.0, tick * 10);
    }
    out += fmt::format("<text x=\"{:.6f}\" y=\"{:.6f}\" font-size=\"11\" text-anchor=\"middle\">1</text>\n", kLeft,
                       kTop + plot_h + 16.0);
    out += fmt::format("<text x=\"{:.6f}\" y=\"{:.6f}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                       kLeft + plot_w, kTop + plot_h + 16.0, max_rank);
    out += fmt::format("<text x=\"{:.6f}\" y=\"{:.6f}\" font-size=\"12\" text-anchor=\"middle\">rank</text>\n",
                       kLeft + plot_w / 2.0, kHeight - 12.0);

    for (std::size_t i = 0; i < curves.size(); ++i) {
        const char* colour = palette[i % std::size(palette)];
        std::string points;
        const auto& acc = curves[i].curve.accuracy;
        for (std::size_t r = 0; r < acc.size(); ++r) {
            if (!points.empty()) points += ' ';
            points += fmt::format("{:.6f},{:.6f}", x_of(r + 1), y_of(acc[r]));
        }
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", colour,
                           points);
        const double ly = kTop + 14.0 + 18.0 * static_cast<double>(i);
        out += fmt::format("<line x1=\"{:.6f}\" y1=\"{:.6f}\" x2=\"{:.6f}\" y2=\"{:.6f}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                           kLeft + plot_w + 12.0, ly, kLeft + plot_w + 32.0, ly, colour);
        out += fmt::format("<text x=\"{:.6f}\" y=\"{:.6f}\" font-size=\"11\">{}</text>\n", kLeft + plot_w + 38.0,
                           ly + 4.0, curves[i].name);
    }
    out += "</svg>\n";
    write_file(path, out);
}

void emit_results(const fs::path& out_dir, std::span<const NamedCurve> curves, std::span<const RhoSweepPoint> sweep) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) {
        throw IoError(fmt::format("cannot create output directory '{}'", out_dir.string()));
    }
    if (!curves.empty()) {
        write_cmc_csv(out_dir / "cmc.csv", curves.front().curve);
        for (const auto& named : curves) write_cmc_csv(out_dir / fmt::format("cmc_{}.csv", named.name), named.curve);
        write_summary_csv(out_dir / "summary.csv", curves, kSummaryRanks);
        write_cmc_svg(out_dir / "cmc.svg", curves);
    }
    if (!sweep.empty()) write_rho_sweep_csv(out_dir / "rho_sweep.csv", sweep);
}

}  // namespace keyreid

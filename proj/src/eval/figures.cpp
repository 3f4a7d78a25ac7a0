#include "deap/eval/figures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "deap/core/error.hpp"
#include "deap/io/files.hpp"

namespace deap::eval {

namespace {

std::string fmt(double v, int prec = 2) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

std::string header(int w, int h) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
           std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) +
           "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s, const std::string& anchor = "middle") {
    return "<text x=\"" + fmt(x, 1) + "\" y=\"" + fmt(y, 1) + "\" text-anchor=\"" + anchor + "\">" + s + "</text>\n";
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

std::string ramp_color(double v) {
    // Piecewise-linear through five viridis anchors.
    static constexpr std::array<std::array<double, 3>, 5> k{{{68, 1, 84}, {59, 82, 139}, {33, 145, 140},
                                                            {94, 201, 98}, {253, 231, 37}}};
    if (!std::isfinite(v)) return "#bbbbbb";
    const double x = clamp01(v) * 4.0;
    const int i = std::min(3, static_cast<int>(x));
    const double f = x - i;
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(k[i][0] + f * (k[i + 1][0] - k[i][0]))),
                  static_cast<int>(std::lround(k[i][1] + f * (k[i + 1][1] - k[i][1]))),
                  static_cast<int>(std::lround(k[i][2] + f * (k[i + 1][2] - k[i][2]))));
    return buf;
}

std::string scatter_svg(const ComparisonReport& report) {
    const int w = 360, h = 360, m = 50;
    const double lo = -0.2, hi = 1.0;
    auto px = [&](double v) { return m + (std::clamp(v, lo, hi) - lo) / (hi - lo) * (w - 2 * m); };
    auto py = [&](double v) { return h - m - (std::clamp(v, lo, hi) - lo) / (hi - lo) * (h - 2 * m); };
    std::ostringstream s;
    s << header(w, h);
    s << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << w - 2 * m << "\" height=\"" << h - 2 * m
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << fmt(px(lo), 1) << "\" y1=\"" << fmt(py(lo), 1) << "\" x2=\"" << fmt(px(hi), 1) << "\" y2=\""
      << fmt(py(hi), 1) << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
    for (double t = 0.0; t <= 1.0 + 1e-9; t += 0.2) {
        s << text(px(t), h - m + 15, fmt(t, 1));
        s << text(m - 6, py(t) + 4, fmt(t, 1), "end");
    }
    s << text(w / 2.0, h - 12, "activation-map pvi SSIM");
    s << "<text x=\"14\" y=\"" << h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << h / 2
      << ")\">learned pvi SSIM</text>\n";
    for (const auto* r : report.succeeded())
        s << "<circle cx=\"" << fmt(px(r->ssim_baseline), 1) << "\" cy=\"" << fmt(py(r->ssim_deap), 1)
          << "\" r=\"4\" fill=\"#21918c\" fill-opacity=\"0.8\"><title>" << r->recording_id << "</title></circle>\n";
    s << "</svg>\n";
    return s.str();
}

std::string violin_svg(const ComparisonReport& report) {
    const int w = 360, h = 320, m = 50;
    const double lo = -0.2, hi = 1.0;
    auto py = [&](double v) { return h - m - (std::clamp(v, lo, hi) - lo) / (hi - lo) * (h - 2 * m); };
    std::vector<double> cols[2];
    for (const auto* r : report.succeeded()) {
        cols[0].push_back(r->ssim_baseline);
        cols[1].push_back(r->ssim_deap);
    }
    const char* names[2] = {"activation map", "learned"};
    const char* colors[2] = {"#3b528b", "#5ec962"};
    std::ostringstream s;
    s << header(w, h);
    s << "<line x1=\"" << m << "\" y1=\"" << m << "\" x2=\"" << m << "\" y2=\"" << h - m << "\" stroke=\"black\"/>\n";
    for (double t = 0.0; t <= 1.0 + 1e-9; t += 0.2) s << text(m - 6, py(t) + 4, fmt(t, 1), "end");
    for (int c = 0; c < 2; ++c) {
        const double cx = m + (w - m) * (c + 0.5) / 2.0;
        const Quartiles q = quartiles(cols[c]);
        s << text(cx, h - m + 18, names[c]);
        if (q.n == 0) continue;
        // Gaussian KDE, Silverman bandwidth with a floor for tight samples.
        const double sd = std::max(1e-3, (q.q3 - q.q1) / 1.34);
        const double bw = std::max(0.02, 0.9 * sd * std::pow(static_cast<double>(q.n), -0.2));
        std::vector<std::pair<double, double>> dens;
        double peak = 0.0;
        for (int i = 0; i <= 60; ++i) {
            const double y = q.min - 2 * bw + (q.max - q.min + 4 * bw) * i / 60.0;
            double d = 0.0;
            for (double v : cols[c]) d += std::exp(-0.5 * std::pow((y - v) / bw, 2));
            dens.emplace_back(y, d);
            peak = std::max(peak, d);
        }
        const double half = 55.0;
        s << "<path d=\"";
        for (std::size_t i = 0; i < dens.size(); ++i)
            s << (i ? " L" : "M") << fmt(cx + half * dens[i].second / peak, 1) << " " << fmt(py(dens[i].first), 1);
        for (std::size_t i = dens.size(); i-- > 0;)
            s << " L" << fmt(cx - half * dens[i].second / peak, 1) << " " << fmt(py(dens[i].first), 1);
        s << " Z\" fill=\"" << colors[c] << "\" fill-opacity=\"0.5\" stroke=\"" << colors[c] << "\"/>\n";
        s << "<rect x=\"" << fmt(cx - 6, 1) << "\" y=\"" << fmt(py(q.q3), 1) << "\" width=\"12\" height=\""
          << fmt(py(q.q1) - py(q.q3), 1) << "\" fill=\"white\" stroke=\"black\"/>\n";
        s << "<line x1=\"" << fmt(cx - 6, 1) << "\" y1=\"" << fmt(py(q.median), 1) << "\" x2=\"" << fmt(cx + 6, 1)
          << "\" y2=\"" << fmt(py(q.median), 1) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        s << text(cx, m - 8, "mean " + fmt(q.mean, 3));
    }
    s << "</svg>\n";
    return s.str();
}

std::string heatmap_svg(const Map2D& map, double lo, double hi, const std::string& title, int cell_px) {
    const int w = map.geom.cols * cell_px, h = map.geom.rows * cell_px;
    std::ostringstream s;
    s << header(w, h + 20);
    s << text(w / 2.0, 14, title);
    const double span = hi > lo ? hi - lo : 1.0;
    // Row 0 is drawn at the bottom so +y points up as in the tissue frame.
    for (int r = 0; r < map.geom.rows; ++r)
        for (int c = 0; c < map.geom.cols; ++c) {
            const double v = map.at(r, c);
            s << "<rect x=\"" << c * cell_px << "\" y=\"" << 20 + (map.geom.rows - 1 - r) * cell_px << "\" width=\""
              << cell_px << "\" height=\"" << cell_px << "\" fill=\""
              << ramp_color(std::isfinite(v) ? (v - lo) / span : v) << "\"/>\n";
        }
    s << "</svg>\n";
    return s.str();
}

std::string isochrone_svg(const phase::IsochroneMap& iso, const std::string& title, int cell_px) {
    double max_band = 0.0;
    for (double b : iso.band.v)
        if (std::isfinite(b)) max_band = std::max(max_band, b);
    std::string svg = heatmap_svg(iso.band, 0.0, std::max(1.0, max_band),
                                  title + " (" + fmt(iso.step_ms, 0) + " ms bands)", cell_px);
    // Band boundaries as black edges between cells of different band index.
    std::ostringstream s;
    const auto& g = iso.band.geom;
    for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) {
            const double b = iso.band.at(r, c);
            if (!std::isfinite(b)) continue;
            const int y = 20 + (g.rows - 1 - r) * cell_px;
            if (c + 1 < g.cols && std::isfinite(iso.band.at(r, c + 1)) && iso.band.at(r, c + 1) != b)
                s << "<line x1=\"" << (c + 1) * cell_px << "\" y1=\"" << y << "\" x2=\"" << (c + 1) * cell_px
                  << "\" y2=\"" << y + cell_px << "\" stroke=\"black\"/>\n";
            if (r + 1 < g.rows && std::isfinite(iso.band.at(r + 1, c)) && iso.band.at(r + 1, c) != b)
                s << "<line x1=\"" << c * cell_px << "\" y1=\"" << y << "\" x2=\"" << (c + 1) * cell_px << "\" y2=\""
                  << y << "\" stroke=\"black\"/>\n";
        }
    svg.insert(svg.size() - 7, s.str());
    return svg;
}

std::string frame_strip_svg(const std::vector<Map2D>& frames, const std::vector<std::string>& captions, int cell_px) {
    require(frames.size() == captions.size(), "frame_strip_svg: one caption per frame");
    if (frames.empty()) return header(10, 10) + "</svg>\n";
    const int fw = frames.front().geom.cols * cell_px, fh = frames.front().geom.rows * cell_px, gap = 6;
    const int w = static_cast<int>(frames.size()) * (fw + gap), h = fh + 20;
    std::ostringstream s;
    s << header(w, h);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const int x0 = static_cast<int>(i) * (fw + gap);
        s << text(x0 + fw / 2.0, 14, captions[i]);
        const auto& f = frames[i];
        for (int r = 0; r < f.geom.rows; ++r)
            for (int c = 0; c < f.geom.cols; ++c)
                s << "<rect x=\"" << x0 + c * cell_px << "\" y=\"" << 20 + (f.geom.rows - 1 - r) * cell_px
                  << "\" width=\"" << cell_px << "\" height=\"" << cell_px << "\" fill=\"" << ramp_color(f.at(r, c))
                  << "\"/>\n";
    }
    s << "</svg>\n";
    return s.str();
}

void write_pgm(const std::filesystem::path& path, const Map2D& map, double lo, double hi) {
    if (path.has_parent_path()) io::ensure_directory(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << map.geom.cols << " " << map.geom.rows << "\n255\n";
    const double span = hi > lo ? hi - lo : 1.0;
    for (int r = map.geom.rows; r-- > 0;)
        for (int c = 0; c < map.geom.cols; ++c) {
            const double v = map.at(r, c);
            const unsigned char b =
                std::isfinite(v) ? static_cast<unsigned char>(std::lround(255.0 * clamp01((v - lo) / span))) : 0;
            out.put(static_cast<char>(b));
        }
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace deap::eval

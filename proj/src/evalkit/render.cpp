#include "evalkit/render.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace opf::evalkit {
namespace {

struct Range {
    double min = 0.0;
    double max = 0.0;
    bool degenerate = true;
};

Range value_range(const DistanceMatrix& m) {
    Range r;
    r.min = std::numeric_limits<double>::infinity();
    r.max = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (double v : m.values) {
        if (std::isnan(v))
            continue;
        if (!std::isfinite(v))
            raise(Errc::invalid_argument, "heatmap input must be finite");
        r.min = std::min(r.min, v);
        r.max = std::max(r.max, v);
        any = true;
    }
    if (!any)
        raise(Errc::invalid_argument, "heatmap input has no values");
    r.degenerate = r.max == r.min;
    return r;
}

uint8_t cell_brightness(double v, const Range& r) {
    if (std::isnan(v))
        return 0;
    if (r.degenerate)
        return 128;
    double b = 255.0 * (1.0 - (v - r.min) / (r.max - r.min));
    return static_cast<uint8_t>(std::lround(std::clamp(b, 0.0, 255.0)));
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

std::string format_sig(double v, int precision) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

} // namespace

netpbm::GrayImage render_heatmap_pgm(const DistanceMatrix& m, uint32_t cell_px) {
    if (cell_px == 0)
        raise(Errc::invalid_argument, "cell_px must be positive");
    Range r = value_range(m);
    size_t n = m.size();
    netpbm::GrayImage img;
    img.width = static_cast<uint32_t>(n) * cell_px;
    img.height = static_cast<uint32_t>(n) * cell_px;
    img.pixels.assign(static_cast<size_t>(img.width) * img.height, 0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            uint8_t b = cell_brightness(m.at(i, j), r);
            for (uint32_t dy = 0; dy < cell_px; ++dy) {
                size_t row = (i * cell_px + dy) * img.width + j * cell_px;
                std::fill_n(img.pixels.begin() + static_cast<ptrdiff_t>(row), cell_px, b);
            }
        }
    }
    return img;
}

std::string render_heatmap_svg(const DistanceMatrix& m, uint32_t cell_px) {
    if (cell_px == 0)
        raise(Errc::invalid_argument, "cell_px must be positive");
    Range r = value_range(m);
    size_t n = m.size();

    size_t label_chars = 0;
    for (size_t i = 0; i < n; ++i)
        label_chars = std::max(label_chars, m.header(i).size());
    uint32_t margin = static_cast<uint32_t>(8 * label_chars + 12);
    uint32_t grid = static_cast<uint32_t>(n) * cell_px;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << margin + grid
        << "\" height=\"" << margin + grid << "\" font-family=\"monospace\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (size_t j = 0; j < n; ++j) {
        uint32_t cx = margin + static_cast<uint32_t>(j) * cell_px + cell_px / 2;
        svg << "<text x=\"" << cx << "\" y=\"" << margin - 6
            << "\" text-anchor=\"end\" transform=\"rotate(-60 " << cx << ' ' << margin - 6
            << ")\">" << xml_escape(m.header(j)) << "</text>\n";
    }
    for (size_t i = 0; i < n; ++i) {
        uint32_t cy = margin + static_cast<uint32_t>(i) * cell_px + cell_px / 2 + 4;
        svg << "<text x=\"" << margin - 6 << "\" y=\"" << cy << "\" text-anchor=\"end\">"
            << xml_escape(m.header(i)) << "</text>\n";
        for (size_t j = 0; j < n; ++j) {
            uint8_t b = cell_brightness(m.at(i, j), r);
            svg << "<rect x=\"" << margin + static_cast<uint32_t>(j) * cell_px << "\" y=\""
                << margin + static_cast<uint32_t>(i) * cell_px << "\" width=\"" << cell_px
                << "\" height=\"" << cell_px << "\" fill=\"rgb(" << int(b) << ',' << int(b) << ','
                << int(b) << ")\" stroke=\"#888\" stroke-width=\"0.5\"/>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_heatmap(const DistanceMatrix& m, const std::filesystem::path& base_path,
                   uint32_t cell_px) {
    std::filesystem::path base = base_path;
    if (base.extension() == ".pgm" || base.extension() == ".svg")
        base.replace_extension();
    netpbm::write_pgm_file(std::filesystem::path(base).replace_extension(".pgm"),
                           render_heatmap_pgm(m, cell_px));
    std::string svg = render_heatmap_svg(m, std::max<uint32_t>(cell_px, 12));
    std::filesystem::path svg_path = std::filesystem::path(base).replace_extension(".svg");
    std::ofstream out(svg_path, std::ios::binary | std::ios::trunc);
    if (!out)
        raise(Errc::io, "cannot write " + svg_path.string());
    out << svg;
    if (!out)
        raise(Errc::io, "short write to " + svg_path.string());
}

std::string render_marked_table(const DistanceMatrix& m, double threshold, int precision) {
    size_t n = m.size();
    std::vector<std::vector<std::string>> cells(n + 1, std::vector<std::string>(n + 1));
    cells[0][0] = "";
    for (size_t j = 0; j < n; ++j)
        cells[0][j + 1] = m.header(j);
    for (size_t i = 0; i < n; ++i) {
        cells[i + 1][0] = m.header(i);
        for (size_t j = 0; j < n; ++j) {
            std::string cell;
            if (m.absent(i, j)) {
                cell = "-";
            } else {
                double v = m.at(i, j);
                bool same = m.labels[i] == m.labels[j];
                bool under = v <= threshold;
                std::string num = format_sig(v, precision);
                if (same && under)
                    cell = "*" + num + "*";
                else if (same != under)
                    cell = "!" + num + "!";
                else
                    cell = num;
            }
            cells[i + 1][j + 1] = cell;
        }
    }

    std::vector<size_t> widths(n + 1, 0);
    for (const auto& row : cells)
        for (size_t c = 0; c < row.size(); ++c)
            widths[c] = std::max(widths[c], row[c].size());

    std::ostringstream out;
    for (const auto& row : cells) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c)
                out << "  ";
            out << row[c];
            if (c + 1 < row.size())
                out << std::string(widths[c] - row[c].size(), ' ');
        }
        out << '\n';
    }
    return out.str();
}

} // namespace opf::evalkit

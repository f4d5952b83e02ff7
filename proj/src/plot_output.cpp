#include "foilmqs/errors.hpp"
#include "foilmqs/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace foil {

namespace {

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

std::string escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    return out;
}

// 1, 2 or 5 times a power of ten, at least range / 6
double tick_step(double range) {
    const double raw = range / 6.0;
    const double p = std::pow(10.0, std::floor(std::log10(raw)));
    for (const double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * p >= raw) {
            return m * p;
        }
    }
    return 10.0 * p;
}

const char* const kColors[] = {"#1f4e9c", "#c0392b", "#27864b", "#8e44ad", "#d68910", "#333333"};

}  // namespace

void write_csv(std::ostream& out, const std::vector<double>& t, const BranchTrace& trace) {
    out << "t,i,v\n";
    for (std::size_t k = 0; k < t.size(); ++k) {
        out << shortest(t[k]) << ',' << shortest(trace.i[k]) << ',' << shortest(trace.v[k]) << '\n';
    }
}

void write_csv(const std::string& path, const std::vector<double>& t, const BranchTrace& trace) {
    auto out = open_out(path);
    write_csv(out, t, trace);
}

CsvSeries read_csv(std::istream& in) {
    CsvSeries s;
    std::string line;
    if (!std::getline(in, line) || line != "t,i,v") {
        throw ParseError(1, "expected header 't,i,v'");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        double vals[3];
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (int c = 0; c < 3; ++c) {
            const auto res = std::from_chars(p, end, vals[c]);
            if (res.ec != std::errc()) {
                throw ParseError(line_no, static_cast<std::size_t>(p - line.data()) + 1, "malformed number");
            }
            p = res.ptr;
            if (c < 2) {
                if (p == end || *p != ',') {
                    throw ParseError(line_no, static_cast<std::size_t>(p - line.data()) + 1, "expected ','");
                }
                ++p;
            }
        }
        if (p != end) {
            throw ParseError(line_no, static_cast<std::size_t>(p - line.data()) + 1, "trailing characters");
        }
        s.t.push_back(vals[0]);
        s.i.push_back(vals[1]);
        s.v.push_back(vals[2]);
    }
    return s;
}

void write_svg(std::ostream& out, const std::string& title, const std::string& x_label, const std::string& y_label,
               const std::vector<PlotSeries>& series) {
    constexpr double width = 640, height = 420, left = 80, right = 160, top = 40, bottom = 60;
    const double pw = width - left - right, ph = height - top - bottom;

    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : series) {
        for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
            if (std::isfinite(s.x[k]) && std::isfinite(s.y[k])) {
                xmin = std::min(xmin, s.x[k]);
                xmax = std::max(xmax, s.x[k]);
                ymin = std::min(ymin, s.y[k]);
                ymax = std::max(ymax, s.y[k]);
            }
        }
    }
    if (!std::isfinite(xmin)) {
        xmin = 0.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;
    }
    if (xmax == xmin) {
        xmax = xmin + 1.0;
    }
    if (ymax == ymin) {
        ymin -= 1.0;
        ymax += 1.0;
    }
    const double xs = tick_step(xmax - xmin), ys = tick_step(ymax - ymin);
    ymin = std::floor(ymin / ys) * ys;
    ymax = std::ceil(ymax / ys) * ys;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
        << "</text>\n";
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double x = std::ceil(xmin / xs) * xs; x <= xmax + 1e-9 * xs; x += xs) {
        out << "<line x1=\"" << fixed(px(x), 2) << "\" y1=\"" << top + ph << "\" x2=\"" << fixed(px(x), 2) << "\" y2=\""
            << top + ph + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fixed(px(x), 2) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
            << shortest(std::abs(x) < 1e-12 * xs ? 0.0 : x) << "</text>\n";
    }
    for (double y = ymin; y <= ymax + 1e-9 * ys; y += ys) {
        out << "<line x1=\"" << left - 5 << "\" y1=\"" << fixed(py(y), 2) << "\" x2=\"" << left << "\" y2=\""
            << fixed(py(y), 2) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << left - 8 << "\" y=\"" << fixed(py(y) + 4, 2) << "\" text-anchor=\"end\">"
            << shortest(std::abs(y) < 1e-12 * ys ? 0.0 : y) << "</text>\n";
    }
    out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">" << escape(x_label)
        << "</text>\n";
    out << "<text transform=\"translate(20 " << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape(y_label) << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kColors[s % std::size(kColors)];
        std::string points;
        auto flush = [&]() {
            if (!points.empty()) {
                out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"" << points
                    << "\"/>\n";
                points.clear();
            }
        };
        for (std::size_t k = 0; k < series[s].x.size() && k < series[s].y.size(); ++k) {
            if (!std::isfinite(series[s].x[k]) || !std::isfinite(series[s].y[k])) {
                flush();
                continue;
            }
            if (!points.empty()) {
                points += ' ';
            }
            points += fixed(px(series[s].x[k]), 2) + "," + fixed(py(series[s].y[k]), 2);
        }
        flush();
        const double ly = top + 14 + 18 * static_cast<double>(s);
        out << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 32 << "\" y2=\"" << ly
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly + 4 << "\">" << escape(series[s].label) << "</text>\n";
    }
    out << "</svg>\n";
}

void write_svg(const std::string& path, const std::string& title, const std::string& x_label, const std::string& y_label,
               const std::vector<PlotSeries>& series) {
    auto out = open_out(path);
    write_svg(out, title, x_label, y_label, series);
}

}  // namespace foil

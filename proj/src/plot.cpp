#include "volnet/plot.hpp"

#include "volnet/error.hpp"
#include "volnet/evaluation.hpp"
#include "volnet/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace volnet::plot {

namespace {

using text::format_exact;

std::string fmt(double v) { return text::format_fixed(v, 2); }

std::string escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

struct Range {
    double lo;
    double hi;
};

Range padded(double lo, double hi)
{
    if (!(hi > lo)) {
        const double pad = std::max(1.0, std::abs(lo) * 0.05);
        return {lo - pad, hi + pad};
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

/// Maps data coordinates into a pixel rectangle.
struct Frame {
    double x0, y0, width, height;
    Range xr, yr;

    double px(double x) const { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * width; }
    double py(double y) const { return y0 + height - (y - yr.lo) / (yr.hi - yr.lo) * height; }
};

void axes(std::ostringstream& svg, const Frame& f, const std::string& xlabel, const std::string& ylabel)
{
    svg << "<rect x=\"" << fmt(f.x0) << "\" y=\"" << fmt(f.y0) << "\" width=\"" << fmt(f.width) << "\" height=\""
        << fmt(f.height) << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = f.xr.lo + (f.xr.hi - f.xr.lo) * i / 4.0;
        const double yv = f.yr.lo + (f.yr.hi - f.yr.lo) * i / 4.0;
        svg << "<text x=\"" << fmt(f.px(xv)) << "\" y=\"" << fmt(f.y0 + f.height + 16)
            << "\" font-size=\"10\" text-anchor=\"middle\">" << text::format_fixed(xv, 2) << "</text>\n";
        svg << "<text x=\"" << fmt(f.x0 - 6) << "\" y=\"" << fmt(f.py(yv) + 3)
            << "\" font-size=\"10\" text-anchor=\"end\">" << text::format_fixed(yv, 2) << "</text>\n";
    }
    svg << "<text x=\"" << fmt(f.x0 + f.width / 2) << "\" y=\"" << fmt(f.y0 + f.height + 32)
        << "\" font-size=\"12\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
    svg << "<text x=\"" << fmt(f.x0 - 44) << "\" y=\"" << fmt(f.y0 + f.height / 2)
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 " << fmt(f.x0 - 44) << ' '
        << fmt(f.y0 + f.height / 2) << ")\">" << escape(ylabel) << "</text>\n";
}

std::string svg_open(double width, double height)
{
    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
      << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\" font-family=\"sans-serif\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return s.str();
}

}  // namespace

LinearFit least_squares_fit(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) throw Error(ErrorKind::LengthMismatch, "fit inputs differ in length");
    if (x.size() < 2) throw Error(ErrorKind::TooFew, "fit needs at least 2 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw Error(ErrorKind::ConstantVector, "fit regressor is constant");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

std::filesystem::path sidecar_path(const std::filesystem::path& svg)
{
    auto p = svg;
    p.replace_extension(".csv");
    return p;
}

std::filesystem::path emit_regression_plot(const Eigen::MatrixXd& actual, const Eigen::MatrixXd& predicted,
                                           std::span<const std::string_view> output_names,
                                           const std::filesystem::path& out, const std::string& title)
{
    if (actual.rows() != predicted.rows() || actual.cols() != predicted.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "regression plot needs matched shapes");
    }
    if (actual.rows() < 2) throw Error(ErrorKind::TooFew, "regression plot needs at least 2 rows");
    const auto cols = actual.cols();
    auto name_of = [&](Eigen::Index c) {
        return static_cast<std::size_t>(c) < output_names.size() ? std::string(output_names[static_cast<std::size_t>(c)])
                                                                 : "output" + std::to_string(c);
    };

    const double panel_w = 360.0;
    const double panel_h = 320.0;
    const double width = 80.0 + static_cast<double>(cols) * (panel_w + 80.0);
    const double height = panel_h + 120.0;
    std::ostringstream svg;
    svg << svg_open(width, height);
    if (!title.empty()) {
        svg << "<text x=\"" << fmt(width / 2) << "\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">" << escape(title)
            << "</text>\n";
    }

    std::ostringstream csv;
    csv << "output,actual,predicted\n";
    for (Eigen::Index c = 0; c < cols; ++c) {
        std::vector<double> a(static_cast<std::size_t>(actual.rows()));
        std::vector<double> p(a.size());
        for (Eigen::Index r = 0; r < actual.rows(); ++r) {
            a[static_cast<std::size_t>(r)] = actual(r, c);
            p[static_cast<std::size_t>(r)] = predicted(r, c);
            csv << name_of(c) << ',' << format_exact(actual(r, c)) << ',' << format_exact(predicted(r, c)) << '\n';
        }
        const double lo = std::min(*std::min_element(a.begin(), a.end()), *std::min_element(p.begin(), p.end()));
        const double hi = std::max(*std::max_element(a.begin(), a.end()), *std::max_element(p.begin(), p.end()));
        const Range range = padded(lo, hi);
        const Frame f{80.0 + static_cast<double>(c) * (panel_w + 80.0), 50.0, panel_w, panel_h, range, range};
        axes(svg, f, "actual " + name_of(c), "predicted " + name_of(c));

        svg << "<g fill=\"#1f77b4\" fill-opacity=\"0.6\">\n";
        for (std::size_t i = 0; i < a.size(); ++i) {
            svg << "<circle cx=\"" << fmt(f.px(a[i])) << "\" cy=\"" << fmt(f.py(p[i])) << "\" r=\"2.5\"/>\n";
        }
        svg << "</g>\n";
        svg << "<line x1=\"" << fmt(f.px(range.lo)) << "\" y1=\"" << fmt(f.py(range.lo)) << "\" x2=\""
            << fmt(f.px(range.hi)) << "\" y2=\"" << fmt(f.py(range.hi))
            << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";

        std::string annotation;
        try {
            const LinearFit fit = least_squares_fit(a, p);
            svg << "<line x1=\"" << fmt(f.px(range.lo)) << "\" y1=\"" << fmt(f.py(fit.intercept + fit.slope * range.lo))
                << "\" x2=\"" << fmt(f.px(range.hi)) << "\" y2=\"" << fmt(f.py(fit.intercept + fit.slope * range.hi))
                << "\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n";
            annotation = "fit: y = " + text::format_fixed(fit.slope, 4) + " x + " + text::format_fixed(fit.intercept, 4);
            annotation += "   R = " + text::format_fixed(eval::pearson_r(a, p), 4);
        } catch (const Error& e) {
            annotation = std::string("fit unavailable: ") + e.what();
        }
        svg << "<text x=\"" << fmt(f.x0 + 6) << "\" y=\"" << fmt(f.y0 + 16) << "\" font-size=\"11\">" << escape(annotation)
            << "</text>\n";
    }
    svg << "</svg>\n";

    write_file(out, svg.str());
    write_file(sidecar_path(out), csv.str());
    return out;
}

std::filesystem::path emit_overlay_plot(const NamedSeries& a, const NamedSeries& b,
                                        const std::filesystem::path& out, const std::string& title)
{
    if (a.dates.size() != a.values.size() || b.dates.size() != b.values.size()) {
        throw Error(ErrorKind::LengthMismatch, "series dates and values differ in length");
    }
    std::vector<Date> dates;
    std::vector<double> va;
    std::vector<double> vb;
    std::size_t j = 0;
    for (std::size_t i = 0; i < a.dates.size(); ++i) {
        while (j < b.dates.size() && b.dates[j] < a.dates[i]) ++j;
        if (j < b.dates.size() && b.dates[j] == a.dates[i]) {
            dates.push_back(a.dates[i]);
            va.push_back(a.values[i]);
            vb.push_back(b.values[j]);
        }
    }
    if (dates.empty()) throw Error(ErrorKind::EmptyIntersection, a.name + " and " + b.name + " share no dates");

    const double width = 900.0;
    const double height = 420.0;
    const double lo = std::min(*std::min_element(va.begin(), va.end()), *std::min_element(vb.begin(), vb.end()));
    const double hi = std::max(*std::max_element(va.begin(), va.end()), *std::max_element(vb.begin(), vb.end()));
    const Range xr = padded(static_cast<double>(dates.front().days()), static_cast<double>(dates.back().days()));
    const Frame f{80.0, 50.0, width - 120.0, height - 110.0, xr, padded(lo, hi)};

    std::ostringstream svg;
    svg << svg_open(width, height);
    if (!title.empty()) {
        svg << "<text x=\"" << fmt(width / 2) << "\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">" << escape(title)
            << "</text>\n";
    }
    svg << "<rect x=\"" << fmt(f.x0) << "\" y=\"" << fmt(f.y0) << "\" width=\"" << fmt(f.width) << "\" height=\""
        << fmt(f.height) << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const std::size_t idx = (dates.size() - 1) * static_cast<std::size_t>(i) / 4;
        const double yv = f.yr.lo + (f.yr.hi - f.yr.lo) * i / 4.0;
        svg << "<text x=\"" << fmt(f.px(dates[idx].days())) << "\" y=\"" << fmt(f.y0 + f.height + 16)
            << "\" font-size=\"10\" text-anchor=\"middle\">" << dates[idx].iso() << "</text>\n";
        svg << "<text x=\"" << fmt(f.x0 - 6) << "\" y=\"" << fmt(f.py(yv) + 3)
            << "\" font-size=\"10\" text-anchor=\"end\">" << text::format_fixed(yv, 2) << "</text>\n";
    }
    auto polyline = [&](const std::vector<double>& v, const char* colour) {
        svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) svg << ' ';
            svg << fmt(f.px(dates[i].days())) << ',' << fmt(f.py(v[i]));
        }
        svg << "\"/>\n";
    };
    polyline(va, "#1f77b4");
    polyline(vb, "#d62728");
    svg << "<text x=\"" << fmt(f.x0 + 10) << "\" y=\"" << fmt(f.y0 + 16) << "\" font-size=\"12\" fill=\"#1f77b4\">"
        << escape(a.name) << "</text>\n";
    svg << "<text x=\"" << fmt(f.x0 + 10) << "\" y=\"" << fmt(f.y0 + 32) << "\" font-size=\"12\" fill=\"#d62728\">"
        << escape(b.name) << "</text>\n";
    svg << "</svg>\n";

    std::ostringstream csv;
    csv << "date," << a.name << ',' << b.name << '\n';
    for (std::size_t i = 0; i < dates.size(); ++i) {
        csv << dates[i].iso() << ',' << format_exact(va[i]) << ',' << format_exact(vb[i]) << '\n';
    }
    write_file(out, svg.str());
    write_file(sidecar_path(out), csv.str());
    return out;
}

std::filesystem::path emit_bar_chart(std::span<const std::string> labels, std::span<const double> values,
                                     const std::filesystem::path& out, const std::string& title,
                                     const std::string& value_label)
{
    if (labels.size() != values.size()) throw Error(ErrorKind::LengthMismatch, "labels and values differ in length");
    if (values.empty()) throw Error(ErrorKind::Empty, "bar chart needs at least one value");

    const double bar_w = 14.0;
    const double width = std::max(400.0, 120.0 + bar_w * 1.5 * static_cast<double>(values.size()));
    const double height = 460.0;
    const double hi = std::max(0.0, *std::max_element(values.begin(), values.end()));
    const double lo = std::min(0.0, *std::min_element(values.begin(), values.end()));
    const Frame f{80.0, 50.0, width - 110.0, 250.0, {0.0, static_cast<double>(values.size())}, padded(lo, hi)};

    std::ostringstream svg;
    svg << svg_open(width, height);
    svg << "<text x=\"" << fmt(width / 2) << "\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">" << escape(title)
        << "</text>\n";
    svg << "<rect x=\"" << fmt(f.x0) << "\" y=\"" << fmt(f.y0) << "\" width=\"" << fmt(f.width) << "\" height=\""
        << fmt(f.height) << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double yv = f.yr.lo + (f.yr.hi - f.yr.lo) * i / 4.0;
        svg << "<text x=\"" << fmt(f.x0 - 6) << "\" y=\"" << fmt(f.py(yv) + 3)
            << "\" font-size=\"10\" text-anchor=\"end\">" << text::format_fixed(yv, 3) << "</text>\n";
    }
    svg << "<text x=\"" << fmt(24) << "\" y=\"" << fmt(f.y0 + f.height / 2)
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 24 " << fmt(f.y0 + f.height / 2) << ")\">"
        << escape(value_label) << "</text>\n";

    std::ostringstream csv;
    csv << "label,value\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double left = f.px(static_cast<double>(i) + 0.15);
        const double right = f.px(static_cast<double>(i) + 0.85);
        const double top = f.py(std::max(values[i], 0.0));
        const double bottom = f.py(std::min(values[i], 0.0));
        svg << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(right - left)
            << "\" height=\"" << fmt(bottom - top) << "\" fill=\"#1f77b4\"><title>" << escape(labels[i]) << ": "
            << format_exact(values[i]) << "</title></rect>\n";
        const double lx = (left + right) / 2;
        const double ly = f.y0 + f.height + 8;
        svg << "<text x=\"" << fmt(lx) << "\" y=\"" << fmt(ly) << "\" font-size=\"8\" text-anchor=\"end\" transform=\"rotate(-70 "
            << fmt(lx) << ' ' << fmt(ly) << ")\">" << escape(labels[i]) << "</text>\n";
        csv << labels[i] << ',' << format_exact(values[i]) << '\n';
    }
    svg << "</svg>\n";
    write_file(out, svg.str());
    write_file(sidecar_path(out), csv.str());
    return out;
}

}  // namespace volnet::plot

/**
 * @file plot.hpp
 * @brief Self-contained SVG charts with CSV sidecars holding the plotted points.
 *
 * The sidecar shares the SVG's stem: `fig.svg` is accompanied by `fig.csv`.
 */
#pragma once

#include "volnet/date.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace volnet::plot {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares of y on x.
LinearFit least_squares_fit(std::span<const double> x, std::span<const double> y);

struct NamedSeries {
    std::string name;
    std::vector<Date> dates;
    std::vector<double> values;
};

std::filesystem::path sidecar_path(const std::filesystem::path& svg);

/// Predicted vs actual scatter, one panel per output column, with identity line, OLS fit
/// line and R. Sidecar: `output,actual,predicted` (rows x cols lines).
std::filesystem::path emit_regression_plot(const Eigen::MatrixXd& actual, const Eigen::MatrixXd& predicted,
                                           std::span<const std::string_view> output_names,
                                           const std::filesystem::path& out, const std::string& title = {});

/// Two series on their common dates. Sidecar: `date,<a>,<b>`. Throws EmptyIntersection.
std::filesystem::path emit_overlay_plot(const NamedSeries& a, const NamedSeries& b,
                                        const std::filesystem::path& out, const std::string& title = {});

/// Vertical bars, one per label. Sidecar: `label,value`.
std::filesystem::path emit_bar_chart(std::span<const std::string> labels, std::span<const double> values,
                                     const std::filesystem::path& out, const std::string& title,
                                     const std::string& value_label);

}  // namespace volnet::plot

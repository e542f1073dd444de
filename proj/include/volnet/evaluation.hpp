#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace volnet::eval {

struct Metrics {
    double mse = 0.0;
    double r = 0.0;
    double mape = 0.0;
};

struct DescriptiveStats {
    double min = 0.0;
    double max = 0.0;
    double average = 0.0;
    double standard_deviation = 0.0;  ///< sample (n-1)
};

struct TTestResult {
    double t_statistic = 0.0;
    double degrees_of_freedom = 0.0;  ///< integral for the paired form, fractional for Welch
    double p_value_two_tailed = 1.0;
    bool paired = true;
};

inline constexpr double kSignificanceLevel = 0.05;

/// (1/N) sum (actual - predicted)^2
double mse(std::span<const double> actual, std::span<const double> predicted);

/// Product-moment form:
///   [N sum(a p) - sum(a) sum(p)] / sqrt([N sum(a^2) - sum(a)^2][N sum(p^2) - sum(p)^2])
double pearson_r(std::span<const double> actual, std::span<const double> predicted);

/// (1/N) sum |(actual - predicted) / actual| * 100
double mape(std::span<const double> actual, std::span<const double> predicted);

DescriptiveStats descriptive_stats(std::span<const double> values);

/// Row-major flattening of a prediction matrix, e.g. [NIFTY_0, GOLD_0, NIFTY_1, ...].
std::vector<double> flatten_rows(const Eigen::MatrixXd& m);

/// All three metrics over row-major flattened outputs.
Metrics compute_metrics(const Eigen::MatrixXd& actual, const Eigen::MatrixXd& predicted);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_tailed_p(double t, double df);

/// Paired: t = mean(d) / (sd(d) / sqrt(n)), df = n - 1, with d = a - b. When every
/// difference is zero the result is t = 0, p = 1; a constant non-zero difference throws
/// DegenerateVariance. Unpaired uses Welch's form.
TTestResult t_test_mse(std::span<const double> a, std::span<const double> b, bool paired);

bool is_significant(const TTestResult& result, double alpha = kSignificanceLevel);
std::string verdict(const TTestResult& result, double alpha = kSignificanceLevel);

}  // namespace volnet::eval

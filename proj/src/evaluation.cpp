#include "volnet/evaluation.hpp"

#include "volnet/error.hpp"
#include "volnet/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace volnet::eval {

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        throw Error(ErrorKind::LengthMismatch,
                    "lengths differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    if (a.empty()) throw Error(ErrorKind::Empty, "empty input");
}

double sample_mean(std::span<const double> v)
{
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v, double mean)
{
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

double mse(std::span<const double> actual, std::span<const double> predicted)
{
    check_lengths(actual, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double d = actual[i] - predicted[i];
        sum += d * d;
    }
    return sum / static_cast<double>(actual.size());
}

double pearson_r(std::span<const double> actual, std::span<const double> predicted)
{
    check_lengths(actual, predicted);
    if (actual.size() < 2) throw Error(ErrorKind::TooFew, "correlation needs at least 2 points");
    auto constant = [](std::span<const double> v) {
        return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
    };
    if (constant(actual) || constant(predicted)) {
        throw Error(ErrorKind::ConstantVector, "correlation undefined for a constant vector");
    }
    // Raw sums in extended precision keep the textbook form usable at percent-scale levels.
    long double sa = 0, sp = 0, sap = 0, saa = 0, spp = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const long double a = actual[i];
        const long double p = predicted[i];
        sa += a;
        sp += p;
        sap += a * p;
        saa += a * a;
        spp += p * p;
    }
    const long double n = static_cast<long double>(actual.size());
    const long double num = n * sap - sa * sp;
    const long double da = n * saa - sa * sa;
    const long double dp = n * spp - sp * sp;
    if (!(da > 0) || !(dp > 0)) throw Error(ErrorKind::ConstantVector, "zero variance in correlation");
    return static_cast<double>(num / std::sqrt(da * dp));
}

double mape(std::span<const double> actual, std::span<const double> predicted)
{
    check_lengths(actual, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] == 0.0) throw Error(ErrorKind::ZeroActual, "actual value is zero at index " + std::to_string(i));
        sum += std::abs((actual[i] - predicted[i]) / actual[i]);
    }
    return sum / static_cast<double>(actual.size()) * 100.0;
}

DescriptiveStats descriptive_stats(std::span<const double> values)
{
    if (values.size() < 2) throw Error(ErrorKind::TooFew, "descriptive statistics need at least 2 values");
    DescriptiveStats s;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    s.average = sample_mean(values);
    // the mean of equal values can round a hair outside [min, max]
    s.average = std::clamp(s.average, s.min, s.max);
    s.standard_deviation = sample_sd(values, s.average);
    return s;
}

std::vector<double> flatten_rows(const Eigen::MatrixXd& m)
{
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
    return out;
}

Metrics compute_metrics(const Eigen::MatrixXd& actual, const Eigen::MatrixXd& predicted)
{
    if (actual.rows() != predicted.rows() || actual.cols() != predicted.cols()) {
        throw Error(ErrorKind::LengthMismatch, "actual/predicted shapes differ");
    }
    const auto a = flatten_rows(actual);
    const auto p = flatten_rows(predicted);
    return {mse(a, p), pearson_r(a, p), mape(a, p)};
}

double incomplete_beta(double a, double b, double x)
{
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "incomplete beta arguments out of range");
    }
    if (x == 0.0 || x == 1.0) return x;

    // Modified Lentz evaluation of the continued fraction; converges fast for
    // x < (a + 1) / (a + b + 2), otherwise use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a).
    auto continued_fraction = [](double a_, double b_, double x_) {
        constexpr double tiny = 1e-300;
        constexpr double eps = 1e-16;
        const double qab = a_ + b_;
        const double qap = a_ + 1.0;
        const double qam = a_ - 1.0;
        double c = 1.0;
        double d = 1.0 - qab * x_ / qap;
        if (std::abs(d) < tiny) d = tiny;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= 10000; ++m) {
            const double m2 = 2.0 * m;
            double aa = m * (b_ - m) * x_ / ((qam + m2) * (a_ + m2));
            d = 1.0 + aa * d;
            if (std::abs(d) < tiny) d = tiny;
            c = 1.0 + aa / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            h *= d * c;
            aa = -(a_ + m) * (qab + m) * x_ / ((a_ + m2) * (qap + m2));
            d = 1.0 + aa * d;
            if (std::abs(d) < tiny) d = tiny;
            c = 1.0 + aa / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            const double del = d * c;
            h *= del;
            if (std::abs(del - 1.0) < eps) break;
        }
        return h;
    };

    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                             b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * continued_fraction(a, b, x) / a;
    return 1.0 - front * continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_tailed_p(double t, double df)
{
    if (!(df > 0.0)) throw Error(ErrorKind::InvalidArgument, "degrees of freedom must be positive");
    if (std::isinf(t)) return 0.0;
    const double t2 = t * t;
    return std::clamp(incomplete_beta(0.5 * df, 0.5, df / (df + t2)), 0.0, 1.0);
}

TTestResult t_test_mse(std::span<const double> a, std::span<const double> b, bool paired)
{
    TTestResult res;
    res.paired = paired;
    if (paired) {
        if (a.size() != b.size()) throw Error(ErrorKind::LengthMismatch, "paired samples differ in length");
        if (a.size() < 2) throw Error(ErrorKind::TooFew, "paired t-test needs at least 2 pairs");
        std::vector<double> d(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
        const double n = static_cast<double>(d.size());
        const double mean = sample_mean(d);
        const double sd = sample_sd(d, mean);
        res.degrees_of_freedom = n - 1.0;
        if (sd == 0.0) {
            if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; })) {
                res.t_statistic = 0.0;
                res.p_value_two_tailed = 1.0;
                return res;
            }
            throw Error(ErrorKind::DegenerateVariance, "paired differences are constant and non-zero");
        }
        res.t_statistic = mean / (sd / std::sqrt(n));
    } else {
        if (a.size() < 2 || b.size() < 2) throw Error(ErrorKind::TooFew, "Welch t-test needs 2 values per sample");
        const double na = static_cast<double>(a.size());
        const double nb = static_cast<double>(b.size());
        const double ma = sample_mean(a);
        const double mb = sample_mean(b);
        const double va = std::pow(sample_sd(a, ma), 2) / na;
        const double vb = std::pow(sample_sd(b, mb), 2) / nb;
        if (va + vb == 0.0) {
            if (ma == mb) {
                res.degrees_of_freedom = na + nb - 2.0;
                res.t_statistic = 0.0;
                res.p_value_two_tailed = 1.0;
                return res;
            }
            throw Error(ErrorKind::DegenerateVariance, "both samples are constant and differ");
        }
        res.t_statistic = (ma - mb) / std::sqrt(va + vb);
        res.degrees_of_freedom = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    }
    res.p_value_two_tailed = student_t_two_tailed_p(res.t_statistic, res.degrees_of_freedom);
    return res;
}

bool is_significant(const TTestResult& result, double alpha)
{
    return result.p_value_two_tailed < alpha;
}

std::string verdict(const TTestResult& result, double alpha)
{
    return is_significant(result, alpha) ? "significant difference at alpha = " + text::format_fixed(alpha, 2)
                                         : "no significant difference at alpha = " + text::format_fixed(alpha, 2);
}

}  // namespace volnet::eval

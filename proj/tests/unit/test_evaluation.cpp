#include "support.hpp"

#include "volnet/error.hpp"
#include "volnet/evaluation.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace volnet;
using namespace volnet::eval;

namespace {

double oracle_mse(const std::vector<double>& a, const std::vector<double>& p)
{
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) s += (static_cast<long double>(a[i]) - p[i]) * (static_cast<long double>(a[i]) - p[i]);
    return static_cast<double>(s / a.size());
}

// Covariance over the product of standard deviations, each from centred sums.
double oracle_r(const std::vector<double>& a, const std::vector<double>& p)
{
    const std::size_t n = a.size();
    long double ma = 0.0L, mp = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mp += p[i];
    }
    ma /= n;
    mp /= n;
    long double cov = 0.0L, va = 0.0L, vp = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (a[i] - ma) * (p[i] - mp);
        va += (a[i] - ma) * (a[i] - ma);
        vp += (p[i] - mp) * (p[i] - mp);
    }
    return static_cast<double>(cov / std::sqrt(va * vp));
}

double oracle_mape(const std::vector<double>& a, const std::vector<double>& p)
{
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs((static_cast<long double>(a[i]) - p[i]) / a[i]);
    return static_cast<double>(100.0L * s / a.size());
}

DescriptiveStats oracle_stats(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    DescriptiveStats s;
    s.min = v.front();
    s.max = v.back();
    long double sum = 0.0L;
    for (double x : v) sum += x;
    const long double mean = sum / v.size();
    long double ss = 0.0L;
    for (double x : v) ss += (x - mean) * (x - mean);
    s.average = static_cast<double>(mean);
    s.standard_deviation = static_cast<double>(std::sqrt(ss / (v.size() - 1)));
    return s;
}

double boost_two_tailed(double t, double df)
{
    const boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

/// Differences with mean t/sqrt(n) and sample sd 1, so the paired t statistic is t.
std::vector<double> differences_with_t(Rng& rng, std::size_t n, double t)
{
    std::vector<double> z = support::random_vector(rng, n);
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double& x : z) {
        x -= mean;
        ss += x * x;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    for (double& x : z) x = x / sd + t / std::sqrt(static_cast<double>(n));
    return z;
}

ErrorKind kind_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("mse hand values")
{
    const std::vector<double> a{1, 2, 3}, same{1, 2, 3}, p{2, 2, 2};
    CHECK(mse(a, same) == 0.0);
    CHECK(mse(std::vector<double>{0, 0}, std::vector<double>{1, 1}) == 1.0);
    CHECK(mse(a, p) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("pearson r hand values")
{
    const std::vector<double> a{1, 2, 3, 4}, neg{-1, -2, -3, -4}, p{1.1, 1.9, 3.2, 3.8};
    CHECK(pearson_r(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pearson_r(a, neg) == doctest::Approx(-1.0).epsilon(1e-15));
    // cov(a, p) / (sd(a) sd(p)) evaluated separately: 0.9908470001860921
    CHECK(std::abs(pearson_r(a, p) - 0.9908470001860921) <= 1e-12);
    CHECK(std::abs(pearson_r(a, p) - oracle_r({1, 2, 3, 4}, {1.1, 1.9, 3.2, 3.8})) <= 1e-12);
}

TEST_CASE("mape hand values")
{
    const std::vector<double> a{10, 20}, p{11, 18};
    CHECK(mape(a, a) == 0.0);
    CHECK(mape(std::vector<double>{100}, std::vector<double>{110}) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(mape(a, p) == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("descriptive statistics hand values")
{
    const auto ones = descriptive_stats(std::vector<double>{1, 1, 1});
    CHECK(ones.min == 1.0);
    CHECK(ones.max == 1.0);
    CHECK(ones.average == 1.0);
    CHECK(ones.standard_deviation == 0.0);
    const auto two = descriptive_stats(std::vector<double>{1, 3});
    CHECK(two.average == 2.0);
    CHECK(two.standard_deviation == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    const std::vector<double> same(27, 4.25);
    const auto flat = descriptive_stats(same);
    CHECK(flat.min == flat.max);
    CHECK(flat.average == 4.25);
    CHECK(flat.standard_deviation == 0.0);
}

TEST_CASE("metric and statistic oracles on random vectors")
{
    Rng rng(61);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform(0, 200));
        const auto a = support::random_vector(rng, n, 1.0, 50.0);
        auto p = a;
        for (auto& x : p) x += rng.uniform(-5, 5);
        CHECK(support::relative_error(mse(a, p), oracle_mse(a, p)) <= 1e-12);
        CHECK(std::abs(pearson_r(a, p) - oracle_r(a, p)) <= 1e-12);
        CHECK(support::relative_error(mape(a, p), oracle_mape(a, p)) <= 1e-12);
        const auto s = descriptive_stats(a);
        const auto o = oracle_stats(a);
        CHECK(s.min == o.min);
        CHECK(s.max == o.max);
        CHECK(support::relative_error(s.average, o.average) <= 1e-12);
        CHECK(support::relative_error(s.standard_deviation, o.standard_deviation) <= 1e-12);
    }
}

TEST_CASE("metric invariants")
{
    Rng rng(62);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 3 + static_cast<std::size_t>(rng.uniform(0, 60));
        const auto x = support::random_vector(rng, n, -10, 10);
        const auto y = support::random_vector(rng, n, -10, 10);
        const double scale = rng.uniform(0.01, 100), shift = rng.uniform(-100, 100);
        std::vector<double> xt(n);
        for (std::size_t i = 0; i < n; ++i) xt[i] = scale * x[i] + shift;
        const double r = pearson_r(x, y);
        CHECK(std::abs(pearson_r(xt, y) - r) <= 1e-12);
        CHECK(std::abs(pearson_r(y, xt) - r) <= 1e-12);
        CHECK(std::abs(r) <= 1.0 + 1e-12);
        CHECK(mse(x, y) == mse(y, x));
        CHECK(mse(x, y) >= 0.0);

        auto shuffled = x;
        for (std::size_t i = n - 1; i > 0; --i) {
            std::swap(shuffled[i], shuffled[static_cast<std::size_t>(rng.uniform(0, static_cast<double>(i + 1)))]);
        }
        const auto s1 = descriptive_stats(x);
        const auto s2 = descriptive_stats(shuffled);
        CHECK(s1.min == s2.min);
        CHECK(s1.max == s2.max);
        CHECK(s1.average == doctest::Approx(s2.average).epsilon(1e-14));
        CHECK(s1.standard_deviation == doctest::Approx(s2.standard_deviation).epsilon(1e-12));
        CHECK(s1.min <= s1.average);
        CHECK(s1.average <= s1.max);
        CHECK(s1.standard_deviation >= 0.0);
    }
}

TEST_CASE("mape is not symmetric")
{
    const std::vector<double> a{10}, p{20};
    CHECK(mape(a, p) == doctest::Approx(100.0));
    CHECK(mape(p, a) == doctest::Approx(50.0));
}

TEST_CASE("metric guards")
{
    const std::vector<double> one{1.0}, two{1.0, 2.0}, three{1, 2, 3}, flat{2, 2, 2};
    CHECK(kind_of([&] { mse(two, three); }) == ErrorKind::LengthMismatch);
    CHECK(kind_of([&] { mse(std::vector<double>{}, std::vector<double>{}); }) == ErrorKind::Empty);
    CHECK(kind_of([&] { pearson_r(one, one); }) == ErrorKind::TooFew);
    CHECK(kind_of([&] { pearson_r(flat, three); }) == ErrorKind::ConstantVector);
    CHECK(kind_of([&] { descriptive_stats(one); }) == ErrorKind::TooFew);
    try {
        mape(std::vector<double>{1, 0, 2}, three);
        FAIL("expected ZeroActual");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ZeroActual);
        CHECK(std::string(e.what()).find('1') != std::string::npos);
    }
}

TEST_CASE("multi-output metrics flatten rows")
{
    Eigen::MatrixXd a(2, 2), p(2, 2);
    a << 1, 10, 2, 20;
    p << 1.5, 9, 2.5, 21;
    CHECK(flatten_rows(a) == std::vector<double>{1, 10, 2, 20});
    const auto m = compute_metrics(a, p);
    const std::vector<double> af{1, 10, 2, 20}, pf{1.5, 9, 2.5, 21};
    CHECK(m.mse == mse(af, pf));
    CHECK(m.r == pearson_r(af, pf));
    CHECK(m.mape == mape(af, pf));
}

TEST_CASE("incomplete beta agrees with an independent implementation")
{
    Rng rng(63);
    for (int trial = 0; trial < 500; ++trial) {
        const double a = rng.uniform(0.1, 60), b = rng.uniform(0.1, 60), x = rng.uniform(0, 1);
        CHECK(std::abs(incomplete_beta(a, b, x) - boost::math::ibeta(a, b, x)) <= 1e-10);
    }
    CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
}

TEST_CASE("two-tailed p-values")
{
    Rng rng(64);
    for (int trial = 0; trial < 500; ++trial) {
        const double t = rng.uniform(-8, 8), df = std::floor(rng.uniform(1, 80));
        const double p = student_t_two_tailed_p(t, df);
        CHECK(std::abs(p - boost_two_tailed(t, df)) <= 1e-10);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(student_t_two_tailed_p(-t, df) == p);
    }
    CHECK(student_t_two_tailed_p(0.0, 10) == 1.0);
}

TEST_CASE("paired t-test on a hand example")
{
    // d = a - b = [1.0, -0.5, 0.3, 0.8, -0.1]: mean 0.3, sample sd sqrt(0.385),
    // t = 0.3 / (sqrt(0.385) / sqrt(5)) = 1.0811249552346707
    const std::vector<double> b{5, 5, 5, 5, 5}, a{6.0, 4.5, 5.3, 5.8, 4.9};
    const auto r = t_test_mse(a, b, true);
    CHECK(r.paired);
    CHECK(r.degrees_of_freedom == 4.0);
    CHECK(std::abs(r.t_statistic - 1.0811249552346707) <= 1e-12);
    CHECK(std::abs(r.p_value_two_tailed - boost_two_tailed(1.0811249552346707, 4)) <= 1e-6);
    CHECK_FALSE(is_significant(r));
}

TEST_CASE("paired t-test degenerate cases")
{
    const std::vector<double> a{1, 2, 3, 4};
    const auto same = t_test_mse(a, a, true);
    CHECK(same.t_statistic == 0.0);
    CHECK(same.p_value_two_tailed == 1.0);
    const std::vector<double> shifted{2, 3, 4, 5};
    try {
        t_test_mse(shifted, a, true);
        FAIL("expected DegenerateVariance");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateVariance);
        CHECK(category_of(e.kind()) == ErrorCategory::Numerical);
    }
    CHECK_THROWS_AS(t_test_mse(a, std::vector<double>{1, 2}, true), Error);
}

TEST_CASE("Welch t-test against a direct computation")
{
    Rng rng(65);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = support::random_vector(rng, 12, 0, 10);
        const auto b = support::random_vector(rng, 9, 2, 20);
        const auto sa = oracle_stats(a), sb = oracle_stats(b);
        const double va = sa.standard_deviation * sa.standard_deviation / 12.0;
        const double vb = sb.standard_deviation * sb.standard_deviation / 9.0;
        const double t = (sa.average - sb.average) / std::sqrt(va + vb);
        const double df = (va + vb) * (va + vb) / (va * va / 11.0 + vb * vb / 8.0);
        const auto r = t_test_mse(a, b, false);
        CHECK_FALSE(r.paired);
        CHECK(std::abs(r.t_statistic - t) <= 1e-10 * std::abs(t));
        CHECK(std::abs(r.degrees_of_freedom - df) <= 1e-10 * df);
        CHECK(std::abs(r.p_value_two_tailed - boost_two_tailed(t, df)) <= 1e-8);
    }
}

TEST_CASE("reported significance levels give a no-difference verdict")
{
    Rng rng(66);
    const boost::math::students_t dist(26);
    for (double target : {0.221, 0.305, 0.184}) {
        const double t = boost::math::quantile(boost::math::complement(dist, target / 2.0));
        const auto d = differences_with_t(rng, 27, t);
        std::vector<double> cffn = support::random_vector(rng, 27, 5, 15), mlff(27);
        for (std::size_t i = 0; i < 27; ++i) mlff[i] = cffn[i] + d[i];
        const auto r = t_test_mse(mlff, cffn, true);
        CHECK(std::abs(r.p_value_two_tailed - target) <= 1e-6);
        CHECK_FALSE(is_significant(r));
        CHECK(verdict(r) == "no significant difference at alpha = 0.05");
    }
    TTestResult small;
    small.p_value_two_tailed = 0.01;
    CHECK(is_significant(small));
    CHECK(verdict(small) == "significant difference at alpha = 0.05");
}

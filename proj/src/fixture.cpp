#include "volnet/fixture.hpp"

#include "volnet/error.hpp"
#include "volnet/rng.hpp"

#include <array>
#include <cmath>

namespace volnet::fixture {

using market::Instrument;

namespace {

struct Profile {
    Instrument symbol;
    double base_vol;      ///< annualized, fraction
    double equity_load;   ///< loading on the equity log-vol factor
    double commodity_load;
    double equity_shock;  ///< weight of the common equity return shock
    double commodity_shock;
    double start_price;
};

constexpr std::array<Profile, 7> kPriced = {{
    {Instrument::NIFTY, 0.20, 1.00, 0.00, 0.95, 0.00, 6000.0},
    {Instrument::GOLD, 0.12, 0.20, 0.90, 0.00, 0.95, 30000.0},
    {Instrument::CRUDE, 0.30, 0.30, 1.00, 0.00, 0.92, 80.0},
    {Instrument::DJIA, 0.14, 0.95, 0.00, 0.95, 0.00, 13000.0},
    {Instrument::DAX, 0.20, 1.00, 0.00, 0.93, 0.00, 7500.0},
    {Instrument::HANGSENG, 0.20, 0.90, 0.00, 0.92, 0.00, 21000.0},
    {Instrument::NIKKEI, 0.22, 0.90, 0.00, 0.90, 0.00, 15000.0},
}};

constexpr double kPersistence = 0.985;
constexpr double kFactorSd = 0.35;

}  // namespace

std::vector<market::PriceSeries> generate(const FixtureOptions& options)
{
    if (options.end < options.start) throw Error(ErrorKind::InvalidArgument, "fixture end precedes start");
    Rng rng(options.seed);

    std::vector<Date> days;
    for (Date d = options.start; d <= options.end; d = d.next()) {
        if (d.weekday() < 5) days.push_back(d);
    }
    const std::size_t n = days.size();

    // Latent log-volatility factors.
    const double innovation = kFactorSd * std::sqrt(1.0 - kPersistence * kPersistence);
    std::vector<double> f_eq(n);
    std::vector<double> f_cm(n);
    std::vector<double> vix_noise_in(n);
    std::vector<double> vix_noise_us(n);
    double e = kFactorSd * rng.normal();
    double c = kFactorSd * rng.normal();
    double ni = 0.0;
    double nu = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        e = kPersistence * e + innovation * z1;
        c = kPersistence * c + innovation * (0.5 * z1 + std::sqrt(0.75) * z2);
        ni = 0.8 * ni + 0.03 * rng.normal();
        nu = 0.8 * nu + 0.03 * rng.normal();
        const double shift =
            options.regime_shift && options.shift_window.contains(days[t]) ? options.shift_log_vol : 0.0;
        f_eq[t] = e + shift;
        f_cm[t] = c + shift;
        vix_noise_in[t] = ni;
        vix_noise_us[t] = nu;
    }

    std::vector<market::PriceSeries> out;
    std::vector<std::vector<double>> closes(kPriced.size(), std::vector<double>(n));
    std::vector<double> price(kPriced.size());
    for (std::size_t i = 0; i < kPriced.size(); ++i) price[i] = kPriced[i].start_price;
    const double day = 1.0 / std::sqrt(252.0);
    for (std::size_t t = 0; t < n; ++t) {
        const double z_eq = rng.normal();
        const double z_cm = rng.normal();
        for (std::size_t i = 0; i < kPriced.size(); ++i) {
            const auto& p = kPriced[i];
            const double vol = p.base_vol * std::exp(p.equity_load * f_eq[t] + p.commodity_load * f_cm[t]) * day;
            const double common = p.equity_shock * z_eq + p.commodity_shock * z_cm;
            const double own = std::sqrt(1.0 - p.equity_shock * p.equity_shock - p.commodity_shock * p.commodity_shock);
            const double shock = common + own * rng.normal();
            price[i] *= std::exp(vol * shock - 0.5 * vol * vol);
            closes[i][t] = price[i];
        }
    }

    auto add_series = [&](Instrument symbol, const std::vector<double>& values) {
        market::PriceSeries s{symbol, {}};
        s.bars.reserve(n);
        for (std::size_t t = 0; t < n; ++t) {
            if (rng.uniform() < options.holiday_rate) continue;
            s.bars.push_back({days[t], values[t]});
        }
        out.push_back(std::move(s));
    };
    for (std::size_t i = 0; i < kPriced.size(); ++i) add_series(kPriced[i].symbol, closes[i]);

    std::vector<double> india(n);
    std::vector<double> cboe(n);
    for (std::size_t t = 0; t < n; ++t) {
        india[t] = 100.0 * 0.20 * std::exp(f_eq[t] + vix_noise_in[t]);
        cboe[t] = 100.0 * 0.16 * std::exp(0.95 * f_eq[t] + vix_noise_us[t]);
    }
    add_series(Instrument::INDIAVIX, india);
    add_series(Instrument::CBOEVIX, cboe);
    return out;
}

void write_directory(const std::filesystem::path& dir, const std::vector<market::PriceSeries>& series)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
    for (const auto& s : series) {
        market::write_price_csv(dir / (std::string(market::to_string(s.symbol)) + ".csv"), s);
    }
}

}  // namespace volnet::fixture

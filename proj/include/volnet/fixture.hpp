#pragma once

#include "volnet/date.hpp"
#include "volnet/market_data.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace volnet::fixture {

/// Synthetic nine-instrument market with two slowly mean-reverting log-volatility factors
/// (equity and commodity), cross-correlated return shocks, VIX-style index levels tracking
/// the equity factor, and per-instrument holiday calendars.
struct FixtureOptions {
    std::uint64_t seed = 20150430;
    Date start = Date::from_ymd(2007, 6, 1);
    Date end = Date::from_ymd(2015, 4, 30);
    double holiday_rate = 0.015;
    /// Adds shift_log_vol to both volatility factors inside shift_window.
    bool regime_shift = false;
    DateRange shift_window{Date::from_ymd(2008, 1, 1), Date::from_ymd(2008, 12, 31)};
    double shift_log_vol = 1.0;
};

std::vector<market::PriceSeries> generate(const FixtureOptions& options = {});

/// Writes `<SYMBOL>.csv` for every series into dir (created if needed).
void write_directory(const std::filesystem::path& dir, const std::vector<market::PriceSeries>& series);

}  // namespace volnet::fixture

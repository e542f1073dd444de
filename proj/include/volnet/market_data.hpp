#pragma once

#include "volnet/date.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace volnet::market {

enum class Instrument { NIFTY, GOLD, CRUDE, DJIA, DAX, HANGSENG, NIKKEI, INDIAVIX, CBOEVIX };

inline constexpr std::array<Instrument, 9> kAllInstruments = {
    Instrument::NIFTY,    Instrument::GOLD,   Instrument::CRUDE,
    Instrument::DJIA,     Instrument::DAX,    Instrument::HANGSENG,
    Instrument::NIKKEI,   Instrument::INDIAVIX, Instrument::CBOEVIX,
};

std::string_view to_string(Instrument symbol);
std::optional<Instrument> instrument_from_string(std::string_view name);

struct PriceBar {
    Date date;
    double close = 0.0;

    bool operator==(const PriceBar&) const = default;
};

/// Close prices for one instrument, strictly increasing by date.
struct PriceSeries {
    Instrument symbol = Instrument::NIFTY;
    std::vector<PriceBar> bars;
};

/// Several instruments on their common calendar (inner join).
struct AlignedPanel {
    std::vector<Date> dates;
    std::map<Instrument, std::vector<double>> columns;
    std::map<Instrument, std::size_t> rows_in;
    std::map<Instrument, std::size_t> dropped_rows;

    std::size_t size() const { return dates.size(); }
    const std::vector<double>& column(Instrument symbol) const;
};

/// Reads a `date,close` CSV. `#` lines and blank lines are skipped. Rows may arrive in
/// any order; the result is sorted ascending.
PriceSeries parse_price_csv(const std::filesystem::path& path, Instrument symbol);
PriceSeries parse_price_csv(std::istream& in, Instrument symbol, const std::string& source_name);

void write_price_csv(std::ostream& out, const PriceSeries& series);
void write_price_csv(const std::filesystem::path& path, const PriceSeries& series);

/// Loads `<SYMBOL>.csv` for each requested instrument from `dir`.
std::vector<PriceSeries> load_directory(const std::filesystem::path& dir,
                                        std::span<const Instrument> symbols = kAllInstruments);

AlignedPanel align(std::span<const PriceSeries> series);

/// Panel columns turned back into one series per instrument.
std::vector<PriceSeries> panel_to_series(const AlignedPanel& panel);

/// `symbol,rows_in,rows_kept,rows_dropped`
void write_alignment_report(std::ostream& out, const AlignedPanel& panel);

/// ln(p[i+1] / p[i]).
std::vector<double> log_returns(std::span<const double> prices);

/// Rows with start <= date <= end.
AlignedPanel slice_window(const AlignedPanel& panel, Date start, Date end);

}  // namespace volnet::market

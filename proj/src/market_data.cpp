#include "volnet/market_data.hpp"

#include "volnet/error.hpp"
#include "volnet/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

namespace volnet::market {

std::string_view to_string(Instrument symbol)
{
    switch (symbol) {
    case Instrument::NIFTY: return "NIFTY";
    case Instrument::GOLD: return "GOLD";
    case Instrument::CRUDE: return "CRUDE";
    case Instrument::DJIA: return "DJIA";
    case Instrument::DAX: return "DAX";
    case Instrument::HANGSENG: return "HANGSENG";
    case Instrument::NIKKEI: return "NIKKEI";
    case Instrument::INDIAVIX: return "INDIAVIX";
    case Instrument::CBOEVIX: return "CBOEVIX";
    }
    return "?";
}

std::optional<Instrument> instrument_from_string(std::string_view name)
{
    for (auto s : kAllInstruments) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

const std::vector<double>& AlignedPanel::column(Instrument symbol) const
{
    auto it = columns.find(symbol);
    if (it == columns.end()) {
        throw Error(ErrorKind::MissingInstrument, std::string(to_string(symbol)));
    }
    return it->second;
}

PriceSeries parse_price_csv(std::istream& in, Instrument symbol, const std::string& source_name)
{
    PriceSeries series{symbol, {}};
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;

    auto malformed = [&](const std::string& why) {
        return Error(ErrorKind::MalformedRow,
                     source_name + ":" + std::to_string(line_no) + ": " + why);
    };

    while (std::getline(in, line)) {
        ++line_no;
        // UTF-8 BOM on the first line
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
            line.erase(0, 3);
        }
        const auto row = text::trim(line);
        if (row.empty() || row.front() == '#') continue;
        if (!header_seen) {
            if (row != "date,close") throw malformed("expected header 'date,close'");
            header_seen = true;
            continue;
        }
        const auto fields = text::split(row, ',');
        if (fields.size() != 2) throw malformed("expected 2 fields");
        const auto date = Date::parse(text::trim(fields[0]));
        if (!date) throw malformed("unparseable date '" + std::string(fields[0]) + "'");
        double close = 0.0;
        if (!text::parse_double(fields[1], close)) {
            throw malformed("non-numeric close '" + std::string(fields[1]) + "'");
        }
        if (!(close > 0.0)) throw malformed("non-positive close " + std::string(fields[1]));
        series.bars.push_back({*date, close});
    }

    if (series.bars.empty()) {
        throw Error(ErrorKind::EmptyFile, source_name + ": no data rows");
    }
    std::stable_sort(series.bars.begin(), series.bars.end(),
                     [](const PriceBar& a, const PriceBar& b) { return a.date < b.date; });
    auto dup = std::adjacent_find(series.bars.begin(), series.bars.end(),
                                  [](const PriceBar& a, const PriceBar& b) { return a.date == b.date; });
    if (dup != series.bars.end()) {
        throw Error(ErrorKind::DuplicateDate, source_name + ": duplicate date " + dup->date.iso());
    }
    return series;
}

PriceSeries parse_price_csv(const std::filesystem::path& path, Instrument symbol)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
    }
    return parse_price_csv(in, symbol, path.string());
}

void write_price_csv(std::ostream& out, const PriceSeries& series)
{
    out << "date,close\n";
    for (const auto& bar : series.bars) {
        out << bar.date.iso() << ',' << text::format_exact(bar.close) << '\n';
    }
}

void write_price_csv(const std::filesystem::path& path, const PriceSeries& series)
{
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
    write_price_csv(out, series);
    if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

std::vector<PriceSeries> load_directory(const std::filesystem::path& dir,
                                        std::span<const Instrument> symbols)
{
    std::vector<PriceSeries> out;
    out.reserve(symbols.size());
    for (auto symbol : symbols) {
        const auto path = dir / (std::string(to_string(symbol)) + ".csv");
        if (!std::filesystem::exists(path)) {
            throw Error(ErrorKind::MissingInstrument,
                        std::string(to_string(symbol)) + " (expected " + path.string() + ")");
        }
        out.push_back(parse_price_csv(path, symbol));
    }
    return out;
}

AlignedPanel align(std::span<const PriceSeries> series)
{
    if (series.size() < 2) {
        throw Error(ErrorKind::InvalidArgument, "align needs at least two series");
    }
    std::set<Instrument> seen;
    for (const auto& s : series) {
        if (s.bars.empty()) {
            throw Error(ErrorKind::InvalidArgument,
                        "empty series for " + std::string(to_string(s.symbol)));
        }
        if (!seen.insert(s.symbol).second) {
            throw Error(ErrorKind::InvalidArgument,
                        "duplicate instrument " + std::string(to_string(s.symbol)));
        }
    }

    std::vector<Date> common;
    common.reserve(series[0].bars.size());
    for (const auto& bar : series[0].bars) common.push_back(bar.date);
    for (std::size_t i = 1; i < series.size(); ++i) {
        std::vector<Date> next;
        auto it = series[i].bars.begin();
        for (Date d : common) {
            it = std::lower_bound(it, series[i].bars.end(), d,
                                  [](const PriceBar& b, Date v) { return b.date < v; });
            if (it != series[i].bars.end() && it->date == d) next.push_back(d);
        }
        common = std::move(next);
    }
    if (common.empty()) {
        throw Error(ErrorKind::EmptyIntersection, "series share no common dates");
    }

    AlignedPanel panel;
    panel.dates = common;
    for (const auto& s : series) {
        std::vector<double> values;
        values.reserve(common.size());
        auto it = s.bars.begin();
        for (Date d : common) {
            while (it->date < d) ++it;
            values.push_back(it->close);
        }
        panel.columns.emplace(s.symbol, std::move(values));
        panel.rows_in[s.symbol] = s.bars.size();
        panel.dropped_rows[s.symbol] = s.bars.size() - common.size();
    }
    return panel;
}

std::vector<PriceSeries> panel_to_series(const AlignedPanel& panel)
{
    std::vector<PriceSeries> out;
    for (const auto& [symbol, values] : panel.columns) {
        PriceSeries s{symbol, {}};
        s.bars.reserve(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) s.bars.push_back({panel.dates[i], values[i]});
        out.push_back(std::move(s));
    }
    return out;
}

void write_alignment_report(std::ostream& out, const AlignedPanel& panel)
{
    out << "symbol,rows_in,rows_kept,rows_dropped\n";
    for (const auto& [symbol, values] : panel.columns) {
        const auto in_it = panel.rows_in.find(symbol);
        const auto drop_it = panel.dropped_rows.find(symbol);
        const std::size_t rows_in = in_it == panel.rows_in.end() ? values.size() : in_it->second;
        const std::size_t dropped = drop_it == panel.dropped_rows.end() ? 0 : drop_it->second;
        out << to_string(symbol) << ',' << rows_in << ',' << values.size() << ',' << dropped << '\n';
    }
}

std::vector<double> log_returns(std::span<const double> prices)
{
    if (prices.size() < 2) {
        throw Error(ErrorKind::TooShort, "log returns need at least two prices");
    }
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0)) {
            throw Error(ErrorKind::NonPositivePrice, "non-positive price at index " + std::to_string(i));
        }
    }
    std::vector<double> out(prices.size() - 1);
    for (std::size_t i = 0; i + 1 < prices.size(); ++i) {
        out[i] = std::log(prices[i + 1] / prices[i]);
    }
    return out;
}

AlignedPanel slice_window(const AlignedPanel& panel, Date start, Date end)
{
    if (end < start) {
        throw Error(ErrorKind::InvalidArgument, "window start after end");
    }
    const auto lo = std::lower_bound(panel.dates.begin(), panel.dates.end(), start);
    const auto hi = std::upper_bound(panel.dates.begin(), panel.dates.end(), end);
    if (lo >= hi) {
        throw Error(ErrorKind::EmptyWindow,
                    "no rows between " + start.iso() + " and " + end.iso());
    }
    const auto first = static_cast<std::size_t>(lo - panel.dates.begin());
    const auto last = static_cast<std::size_t>(hi - panel.dates.begin());

    AlignedPanel out;
    out.dates.assign(lo, hi);
    out.rows_in = panel.rows_in;
    out.dropped_rows = panel.dropped_rows;
    for (const auto& [symbol, values] : panel.columns) {
        out.columns.emplace(symbol, std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(first),
                                                        values.begin() + static_cast<std::ptrdiff_t>(last)));
    }
    return out;
}

}  // namespace volnet::market

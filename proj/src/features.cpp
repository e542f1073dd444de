#include "volnet/features.hpp"

#include "volnet/error.hpp"
#include "volnet/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace volnet::features {

using market::Instrument;

namespace {

constexpr std::array<Instrument, 5> kVolInputs = {Instrument::CRUDE, Instrument::DJIA, Instrument::DAX,
                                                  Instrument::HANGSENG, Instrument::NIKKEI};
constexpr std::array<Instrument, 2> kVolTargets = {Instrument::NIFTY, Instrument::GOLD};

}  // namespace

FeatureDataset FeatureDataset::rows_slice(std::size_t first, std::size_t count) const
{
    FeatureDataset out;
    out.dates.assign(dates.begin() + static_cast<std::ptrdiff_t>(first),
                     dates.begin() + static_cast<std::ptrdiff_t>(first + count));
    const auto f = static_cast<Eigen::Index>(first);
    const auto c = static_cast<Eigen::Index>(count);
    out.X = X.middleRows(f, c);
    out.Y = Y.middleRows(f, c);
    return out;
}

std::vector<double> rolling_volatility(std::span<const double> returns, std::size_t window,
                                       double periods_per_year)
{
    if (window < 2) throw Error(ErrorKind::WindowTooSmall, "window must be at least 2");
    if (returns.size() < window) {
        throw Error(ErrorKind::TooShort, "need at least " + std::to_string(window) + " returns, got " +
                                             std::to_string(returns.size()));
    }
    const double annualize = std::sqrt(periods_per_year);
    const auto n = static_cast<double>(window);
    std::vector<double> out(returns.size() - window + 1);
    // Two-pass per window on values shifted by the window's first element, so a constant
    // window gives exactly zero.
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto w = returns.subspan(k, window);
        const double origin = w.front();
        double sum = 0.0;
        for (double r : w) sum += r - origin;
        const double mean = sum / n;
        double ss = 0.0;
        for (double r : w) ss += (r - origin - mean) * (r - origin - mean);
        out[k] = std::sqrt(ss / (n - 1.0)) * annualize;
    }
    return out;
}

VolatilitySeries price_volatility(const std::vector<Date>& dates, std::span<const double> prices,
                                  std::size_t window)
{
    if (dates.size() != prices.size()) throw Error(ErrorKind::LengthMismatch, "dates vs prices");
    const auto returns = market::log_returns(prices);
    auto vol = rolling_volatility(returns, window);
    VolatilitySeries out;
    out.values.reserve(vol.size());
    for (double v : vol) out.values.push_back(100.0 * v);
    out.dates.assign(dates.begin() + static_cast<std::ptrdiff_t>(window), dates.end());
    return out;
}

FeatureDataset build_dataset(const market::AlignedPanel& panel, std::size_t window)
{
    for (auto symbol : market::kAllInstruments) {
        if (!panel.columns.contains(symbol)) {
            throw Error(ErrorKind::MissingInstrument, std::string(market::to_string(symbol)));
        }
    }
    if (panel.size() < window + 1) {
        throw Error(ErrorKind::TooShort, "panel has " + std::to_string(panel.size()) +
                                             " rows; need more than the window of " + std::to_string(window));
    }

    const std::size_t rows = panel.size() - window;
    FeatureDataset ds;
    ds.dates.assign(panel.dates.begin() + static_cast<std::ptrdiff_t>(window), panel.dates.end());
    ds.X.resize(static_cast<Eigen::Index>(rows), 7);
    ds.Y.resize(static_cast<Eigen::Index>(rows), 2);

    auto fill = [&](Eigen::MatrixXd& m, Eigen::Index col, Instrument symbol) {
        const auto vol = price_volatility(panel.dates, panel.column(symbol), window);
        for (std::size_t i = 0; i < rows; ++i) m(static_cast<Eigen::Index>(i), col) = vol.values[i];
    };

    const auto& india = panel.column(Instrument::INDIAVIX);
    const auto& cboe = panel.column(Instrument::CBOEVIX);
    for (std::size_t i = 0; i < rows; ++i) {
        ds.X(static_cast<Eigen::Index>(i), 0) = india[i + window];
        ds.X(static_cast<Eigen::Index>(i), 1) = cboe[i + window];
    }
    for (std::size_t c = 0; c < kVolInputs.size(); ++c) fill(ds.X, static_cast<Eigen::Index>(c + 2), kVolInputs[c]);
    for (std::size_t c = 0; c < kVolTargets.size(); ++c) fill(ds.Y, static_cast<Eigen::Index>(c), kVolTargets[c]);
    return ds;
}

void write_dataset_csv(std::ostream& out, const FeatureDataset& ds)
{
    out << "date";
    for (auto name : kInputNames) out << ',' << name;
    for (auto name : kTargetNames) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        out << ds.dates[i].iso();
        for (Eigen::Index c = 0; c < ds.X.cols(); ++c) out << ',' << text::format_exact(ds.X(r, c));
        for (Eigen::Index c = 0; c < ds.Y.cols(); ++c) out << ',' << text::format_exact(ds.Y(r, c));
        out << '\n';
    }
}

void write_dataset_csv(const std::filesystem::path& path, const FeatureDataset& ds)
{
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
    write_dataset_csv(out, ds);
    if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

FeatureDataset read_dataset_csv(std::istream& in, const std::string& source_name)
{
    std::string expected = "date";
    for (auto name : kInputNames) expected += "," + std::string(name);
    for (auto name : kTargetNames) expected += "," + std::string(name);

    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<Date> dates;
    std::vector<std::array<double, 9>> values;
    while (std::getline(in, line)) {
        ++line_no;
        const auto row = text::trim(line);
        if (row.empty() || row.front() == '#') continue;
        if (!header_seen) {
            if (row != expected) {
                throw Error(ErrorKind::MalformedRow, source_name + ":" + std::to_string(line_no) +
                                                         ": expected header '" + expected + "'");
            }
            header_seen = true;
            continue;
        }
        const auto fields = text::split(row, ',');
        auto bad = [&](const std::string& why) {
            return Error(ErrorKind::MalformedRow, source_name + ":" + std::to_string(line_no) + ": " + why);
        };
        if (fields.size() != 10) throw bad("expected 10 fields");
        const auto d = Date::parse(fields[0]);
        if (!d) throw bad("unparseable date");
        if (!dates.empty() && !(dates.back() < *d)) throw bad("dates must be strictly increasing");
        std::array<double, 9> v{};
        for (std::size_t c = 0; c < 9; ++c) {
            if (!text::parse_double(fields[c + 1], v[c])) throw bad("non-numeric value");
        }
        dates.push_back(*d);
        values.push_back(v);
    }
    if (dates.empty()) throw Error(ErrorKind::EmptyFile, source_name + ": no data rows");

    FeatureDataset ds;
    ds.dates = std::move(dates);
    const auto n = static_cast<Eigen::Index>(values.size());
    ds.X.resize(n, 7);
    ds.Y.resize(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& v = values[static_cast<std::size_t>(i)];
        for (Eigen::Index c = 0; c < 7; ++c) ds.X(i, c) = v[static_cast<std::size_t>(c)];
        for (Eigen::Index c = 0; c < 2; ++c) ds.Y(i, c) = v[static_cast<std::size_t>(c + 7)];
    }
    return ds;
}

FeatureDataset read_dataset_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
    return read_dataset_csv(in, path.string());
}

Scaler Scaler::fit(const Eigen::MatrixXd& data, std::span<const std::string_view> column_names)
{
    if (data.rows() < 2) throw Error(ErrorKind::TooFew, "scaler needs at least 2 rows");
    Scaler s;
    s.min_ = data.colwise().minCoeff();
    s.max_ = data.colwise().maxCoeff();
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        if (!(s.max_(c) > s.min_(c))) {
            const auto idx = static_cast<std::size_t>(c);
            const std::string name =
                idx < column_names.size() ? std::string(column_names[idx]) : "column " + std::to_string(c);
            throw Error(ErrorKind::ConstantColumn, name);
        }
    }
    return s;
}

Eigen::MatrixXd Scaler::transform(const Eigen::MatrixXd& data) const
{
    if (data.cols() != min_.size()) throw Error(ErrorKind::DimensionMismatch, "scaler column count");
    Eigen::MatrixXd out(data.rows(), data.cols());
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        const double span = max_(c) - min_(c);
        for (Eigen::Index r = 0; r < data.rows(); ++r) {
            out(r, c) = 2.0 * (data(r, c) - min_(c)) / span - 1.0;
        }
    }
    return out;
}

Eigen::MatrixXd Scaler::inverse_transform(const Eigen::MatrixXd& scaled) const
{
    if (scaled.cols() != min_.size()) throw Error(ErrorKind::DimensionMismatch, "scaler column count");
    Eigen::MatrixXd out(scaled.rows(), scaled.cols());
    for (Eigen::Index c = 0; c < scaled.cols(); ++c) {
        const double span = max_(c) - min_(c);
        for (Eigen::Index r = 0; r < scaled.rows(); ++r) {
            out(r, c) = (scaled(r, c) + 1.0) * 0.5 * span + min_(c);
        }
    }
    return out;
}

ScalerPair fit_scaler(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y)
{
    if (X.rows() != Y.rows()) throw Error(ErrorKind::DimensionMismatch, "X and Y row counts differ");
    std::span<const std::string_view> in_names;
    std::span<const std::string_view> out_names;
    if (X.cols() == static_cast<Eigen::Index>(kInputNames.size())) in_names = kInputNames;
    if (Y.cols() == static_cast<Eigen::Index>(kTargetNames.size())) out_names = kTargetNames;
    return {Scaler::fit(X, in_names), Scaler::fit(Y, out_names)};
}

FeatureDataset apply_scalers(const FeatureDataset& ds, const ScalerPair& scalers)
{
    FeatureDataset out;
    out.dates = ds.dates;
    out.X = scalers.inputs.transform(ds.X);
    out.Y = scalers.targets.transform(ds.Y);
    return out;
}

namespace {

std::pair<std::size_t, std::size_t> rows_in_range(const std::vector<Date>& dates, const DateRange& range)
{
    const auto lo = std::lower_bound(dates.begin(), dates.end(), range.first);
    const auto hi = std::upper_bound(dates.begin(), dates.end(), range.last);
    if (lo >= hi) return {0, 0};
    return {static_cast<std::size_t>(lo - dates.begin()), static_cast<std::size_t>(hi - lo)};
}

}  // namespace

DatasetSplit chronological_split(const FeatureDataset& ds, const DateRange& train_range,
                                 const DateRange& test_range, double validation_fraction)
{
    if (!(validation_fraction >= 0.0 && validation_fraction <= 0.5)) {
        throw Error(ErrorKind::InvalidArgument, "validation fraction must lie in [0, 0.5]");
    }
    const auto [train_first, train_count] = rows_in_range(ds.dates, train_range);
    if (train_count == 0) {
        throw Error(ErrorKind::EmptyTrain, "no rows between " + train_range.first.iso() + " and " +
                                               train_range.last.iso());
    }
    const auto [test_first, test_count] = rows_in_range(ds.dates, test_range);
    if (test_count == 0) {
        throw Error(ErrorKind::EmptyTest, "no rows between " + test_range.first.iso() + " and " +
                                              test_range.last.iso());
    }
    // the epsilon keeps e.g. 0.07 * 100 = 7.000000000000001 from rounding up to 8
    const auto val_count =
        static_cast<std::size_t>(std::ceil(validation_fraction * static_cast<double>(train_count) - 1e-9));
    if (val_count >= train_count) {
        throw Error(ErrorKind::EmptyTrain, "validation fraction leaves no training rows");
    }
    DatasetSplit split;
    split.train = ds.rows_slice(train_first, train_count - val_count);
    split.validation = ds.rows_slice(train_first + train_count - val_count, val_count);
    split.test = ds.rows_slice(test_first, test_count);
    return split;
}

}  // namespace volnet::features

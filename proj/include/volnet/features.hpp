/**
 * @file features.hpp
 * @brief Rolling annualized volatility and the 7-input / 2-output dataset.
 *
 * Inputs, in column order: INDIAVIX, CBOEVIX, CRUDESDR, DJIASDR, DAXSDR, HANGSDR,
 * NIKKEISDR. Targets: NIFTYSDR, GOLDSDR. The *SDR columns are 20-day rolling sample
 * standard deviations of daily log returns, annualized with sqrt(252) and expressed in
 * percent. The two VIX columns are index levels passed through untouched.
 */
#pragma once

#include "volnet/date.hpp"
#include "volnet/market_data.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace volnet::features {

inline constexpr std::size_t kDefaultWindow = 20;
inline constexpr double kTradingDaysPerYear = 252.0;
inline constexpr double kDefaultValidationFraction = 0.15;

inline constexpr std::array<std::string_view, 7> kInputNames = {
    "INDIAVIX", "CBOEVIX", "CRUDESDR", "DJIASDR", "DAXSDR", "HANGSDR", "NIKKEISDR"};
inline constexpr std::array<std::string_view, 2> kTargetNames = {"NIFTYSDR", "GOLDSDR"};

struct VolatilitySeries {
    std::vector<Date> dates;
    std::vector<double> values;
};

struct FeatureDataset {
    std::vector<Date> dates;
    Eigen::MatrixXd X;  ///< rows x 7
    Eigen::MatrixXd Y;  ///< rows x 2

    std::size_t rows() const { return dates.size(); }
    /// Rows [first, first + count).
    FeatureDataset rows_slice(std::size_t first, std::size_t count) const;
};

/// Sample standard deviation (n-1) of each full window, times sqrt(periods_per_year).
/// Element k covers returns[k .. k+window-1].
std::vector<double> rolling_volatility(std::span<const double> returns,
                                       std::size_t window = kDefaultWindow,
                                       double periods_per_year = kTradingDaysPerYear);

/// Percent-scale rolling volatility of a price column, dated at each window's last day.
VolatilitySeries price_volatility(const std::vector<Date>& dates, std::span<const double> prices,
                                  std::size_t window = kDefaultWindow);

/// Panel of length L gives L - window rows.
FeatureDataset build_dataset(const market::AlignedPanel& panel, std::size_t window = kDefaultWindow);

void write_dataset_csv(std::ostream& out, const FeatureDataset& ds);
void write_dataset_csv(const std::filesystem::path& path, const FeatureDataset& ds);
FeatureDataset read_dataset_csv(std::istream& in, const std::string& source_name);
FeatureDataset read_dataset_csv(const std::filesystem::path& path);

/// Per-column affine map of [min, max] onto [-1, 1]. Values outside the fitted range
/// extrapolate linearly.
class Scaler {
public:
    Scaler() = default;
    /// Throws ConstantColumn when any column has max == min, TooFew with fewer than 2 rows.
    static Scaler fit(const Eigen::MatrixXd& data, std::span<const std::string_view> column_names = {});

    Eigen::MatrixXd transform(const Eigen::MatrixXd& data) const;
    Eigen::MatrixXd inverse_transform(const Eigen::MatrixXd& scaled) const;

    const Eigen::RowVectorXd& minimum() const { return min_; }
    const Eigen::RowVectorXd& maximum() const { return max_; }

private:
    Eigen::RowVectorXd min_;
    Eigen::RowVectorXd max_;
};

struct ScalerPair {
    Scaler inputs;
    Scaler targets;
};

ScalerPair fit_scaler(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

/// Returns a copy with X and Y mapped through the given scalers.
FeatureDataset apply_scalers(const FeatureDataset& ds, const ScalerPair& scalers);

struct DatasetSplit {
    FeatureDataset train;
    FeatureDataset validation;
    FeatureDataset test;
};

/// The final ceil(fraction * n) rows of the training range become validation. The test
/// range may lie before, after, or overlap the training range.
DatasetSplit chronological_split(const FeatureDataset& ds, const DateRange& train_range,
                                 const DateRange& test_range, double validation_fraction);

}  // namespace volnet::features

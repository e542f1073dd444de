/**
 * @file experiment.hpp
 * @brief The architecture x algorithm x hidden-size trial grid and its aggregation.
 *
 * Each trial gets a seed derived only from (base_seed, architecture, algorithm,
 * hidden_size), so results do not depend on execution order or worker count. Metrics
 * are computed in original (percent volatility) units after inverting the target scaler.
 */
#pragma once

#include "volnet/date.hpp"
#include "volnet/evaluation.hpp"
#include "volnet/features.hpp"
#include "volnet/network.hpp"
#include "volnet/trainers.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace volnet::experiment {

struct ExperimentSpec {
    std::string name = "experiment";
    DateRange train_range;
    DateRange test_range;
    double validation_fraction = features::kDefaultValidationFraction;
    std::vector<nn::Architecture> architectures{nn::Architecture::MLFF, nn::Architecture::CFFN};
    std::vector<train::Algorithm> algorithms{train::kAllAlgorithms.begin(), train::kAllAlgorithms.end()};
    std::vector<std::size_t> hidden_sizes{20, 30, 40};
    std::uint64_t base_seed = 2015;
    train::TrainConfig train_config;
    /// Hyperparameter overrides per algorithm; unlisted algorithms use defaults.
    std::map<train::Algorithm, train::TrainerSpec> trainers;

    std::size_t grid_size() const { return architectures.size() * algorithms.size() * hidden_sizes.size(); }
    train::TrainerSpec trainer_for(train::Algorithm algorithm) const;
    void validate() const;
};

/// The three canonical designs: forecast Jan-Apr 2015 from 2013-14, forecast Oct-Dec 2014
/// from Jan 2013 - Sep 2014, and backcast 2008 from 2013-14.
ExperimentSpec experiment_preset(int number);

std::uint64_t trial_seed(std::uint64_t base_seed, nn::Architecture arch, train::Algorithm algorithm,
                         std::size_t hidden_size);

struct TrialResult {
    nn::Architecture architecture = nn::Architecture::MLFF;
    train::Algorithm algorithm = train::Algorithm::LM;
    std::size_t hidden_size = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;  ///< empty when ok
    eval::Metrics train_metrics;
    eval::Metrics test_metrics;
    std::size_t epochs_run = 0;
    train::StopReason stop_reason = train::StopReason::MaxEpochs;

    /// Test-set targets and predictions in original units (kept in memory for plots).
    Eigen::MatrixXd test_actual;
    Eigen::MatrixXd test_predicted;

    auto key() const { return std::make_tuple(architecture, algorithm, hidden_size); }
};

enum class Metric { MSE, R, MAPE };
enum class Split { Train, Test };

std::string_view to_string(Metric metric);
std::string_view to_string(Split split);

struct StatCell {
    std::optional<eval::DescriptiveStats> stats;  ///< nullopt when fewer than 2 trials
    std::size_t count = 0;
};

/// Keyed by (metric, split, architecture): 12 cells for two architectures.
using StatTables = std::map<std::tuple<Metric, Split, nn::Architecture>, StatCell>;

struct TTestOutcome {
    std::optional<eval::TTestResult> result;
    std::size_t pairs = 0;
    std::string note;  ///< why the test is missing, when it is
};

struct ExperimentReport {
    ExperimentSpec spec;
    std::vector<TrialResult> trials;  ///< sorted by grid key
    StatTables stat_tables;
    TTestOutcome ttest;
    std::size_t excluded = 0;
    std::vector<std::string> artifacts;
};

/// Statistics over successful trials only.
StatTables summarize(const std::vector<TrialResult>& trials);

/// Paired t-test on test MSE, MLFF minus CFFN, over configurations where both succeeded.
TTestOutcome compare_architectures(const std::vector<TrialResult>& trials);

struct RunOptions {
    std::size_t workers = 1;
    /// Called after each trial finishes (from worker threads, serialized by the harness).
    std::function<void(const TrialResult&, std::size_t done, std::size_t total)> on_trial;
};

/// Runs one trial against pre-split, pre-scaled data.
TrialResult run_trial(const ExperimentSpec& spec, nn::Architecture arch, train::Algorithm algorithm,
                      std::size_t hidden_size, const features::DatasetSplit& scaled,
                      const features::DatasetSplit& original, const features::Scaler& target_scaler);

ExperimentReport run_experiment(const ExperimentSpec& spec, const features::FeatureDataset& dataset,
                                const RunOptions& options = {});

}  // namespace volnet::experiment

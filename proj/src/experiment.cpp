#include "volnet/experiment.hpp"

#include "volnet/error.hpp"
#include "volnet/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>
#include <thread>

namespace volnet::experiment {

using nn::Architecture;
using train::Algorithm;

std::string_view to_string(Metric metric)
{
    switch (metric) {
    case Metric::MSE: return "MSE";
    case Metric::R: return "R";
    case Metric::MAPE: return "MAPE";
    }
    return "?";
}

std::string_view to_string(Split split) { return split == Split::Train ? "train" : "test"; }

train::TrainerSpec ExperimentSpec::trainer_for(Algorithm algorithm) const
{
    auto it = trainers.find(algorithm);
    return it == trainers.end() ? train::TrainerSpec::defaults(algorithm) : it->second;
}

void ExperimentSpec::validate() const
{
    if (architectures.empty() || algorithms.empty() || hidden_sizes.empty()) {
        throw Error(ErrorKind::InvalidArgument, "experiment grid has an empty axis");
    }
    auto unique = [](const auto& v) { return std::set(v.begin(), v.end()).size() == v.size(); };
    if (!unique(architectures) || !unique(algorithms) || !unique(hidden_sizes)) {
        throw Error(ErrorKind::InvalidArgument, "experiment grid axes must not repeat values");
    }
    if (std::find(hidden_sizes.begin(), hidden_sizes.end(), 0) != hidden_sizes.end()) {
        throw Error(ErrorKind::InvalidArgument, "hidden sizes must be at least 1");
    }
    if (train_range.last < train_range.first || test_range.last < test_range.first) {
        throw Error(ErrorKind::InvalidArgument, "date range ends before it starts");
    }
    train_config.validate();
}

ExperimentSpec experiment_preset(int number)
{
    ExperimentSpec spec;
    const DateRange y2013_14{Date::from_ymd(2013, 1, 1), Date::from_ymd(2014, 12, 31)};
    switch (number) {
    case 1:
        spec.name = "experiment1";
        spec.train_range = y2013_14;
        spec.test_range = {Date::from_ymd(2015, 1, 1), Date::from_ymd(2015, 4, 30)};
        break;
    case 2:
        spec.name = "experiment2";
        spec.train_range = {Date::from_ymd(2013, 1, 1), Date::from_ymd(2014, 9, 30)};
        spec.test_range = {Date::from_ymd(2014, 10, 1), Date::from_ymd(2014, 12, 31)};
        break;
    case 3:
        spec.name = "experiment3";
        spec.train_range = y2013_14;
        spec.test_range = {Date::from_ymd(2008, 1, 1), Date::from_ymd(2008, 12, 31)};
        break;
    default:
        throw Error(ErrorKind::InvalidArgument, "experiment presets are numbered 1 to 3");
    }
    return spec;
}

std::uint64_t trial_seed(std::uint64_t base_seed, Architecture arch, Algorithm algorithm, std::size_t hidden_size)
{
    return hash_combine({base_seed, static_cast<std::uint64_t>(arch), static_cast<std::uint64_t>(algorithm),
                         static_cast<std::uint64_t>(hidden_size)});
}

namespace {

double metric_value(const eval::Metrics& m, Metric metric)
{
    switch (metric) {
    case Metric::MSE: return m.mse;
    case Metric::R: return m.r;
    case Metric::MAPE: return m.mape;
    }
    return 0.0;
}

bool finite(const eval::Metrics& m)
{
    return std::isfinite(m.mse) && std::isfinite(m.r) && std::isfinite(m.mape);
}

}  // namespace

StatTables summarize(const std::vector<TrialResult>& trials)
{
    std::set<Architecture> archs;
    for (const auto& t : trials) archs.insert(t.architecture);

    StatTables tables;
    for (auto metric : {Metric::MSE, Metric::R, Metric::MAPE}) {
        for (auto split : {Split::Train, Split::Test}) {
            for (auto arch : archs) {
                std::vector<double> values;
                for (const auto& t : trials) {
                    if (!t.ok || t.architecture != arch) continue;
                    values.push_back(metric_value(split == Split::Train ? t.train_metrics : t.test_metrics, metric));
                }
                StatCell cell;
                cell.count = values.size();
                if (values.size() >= 2) cell.stats = eval::descriptive_stats(values);
                tables[{metric, split, arch}] = cell;
            }
        }
    }
    return tables;
}

TTestOutcome compare_architectures(const std::vector<TrialResult>& trials)
{
    TTestOutcome out;
    std::map<std::pair<Algorithm, std::size_t>, double> mlff;
    std::map<std::pair<Algorithm, std::size_t>, double> cffn;
    for (const auto& t : trials) {
        if (!t.ok) continue;
        auto& side = t.architecture == Architecture::MLFF ? mlff : cffn;
        side[{t.algorithm, t.hidden_size}] = t.test_metrics.mse;
    }
    std::vector<double> a;
    std::vector<double> b;
    for (const auto& [key, value] : mlff) {
        auto it = cffn.find(key);
        if (it == cffn.end()) continue;
        a.push_back(value);
        b.push_back(it->second);
    }
    out.pairs = a.size();
    if (a.size() < 2) {
        out.note = "TooFew: " + std::to_string(a.size()) + " matched MLFF/CFFN configurations";
        return out;
    }
    try {
        out.result = eval::t_test_mse(a, b, true);
    } catch (const Error& e) {
        out.note = std::string(volnet::to_string(e.kind())) + ": " + e.what();
    }
    return out;
}

TrialResult run_trial(const ExperimentSpec& spec, Architecture arch, Algorithm algorithm, std::size_t hidden_size,
                      const features::DatasetSplit& scaled, const features::DatasetSplit& original,
                      const features::Scaler& target_scaler)
{
    TrialResult result;
    result.architecture = arch;
    result.algorithm = algorithm;
    result.hidden_size = hidden_size;
    result.seed = trial_seed(spec.base_seed, arch, algorithm, hidden_size);
    try {
        nn::Topology topo{arch, static_cast<std::size_t>(scaled.train.X.cols()), hidden_size,
                          static_cast<std::size_t>(scaled.train.Y.cols())};
        const auto initial = nn::init_weights(topo, result.seed);
        auto config = spec.train_config;
        config.seed = result.seed;
        const auto outcome =
            train::train(initial, spec.trainer_for(algorithm), config, scaled.train, scaled.validation);
        result.epochs_run = outcome.record.epochs_run;
        result.stop_reason = outcome.record.stop_reason;

        const Eigen::MatrixXd train_pred = target_scaler.inverse_transform(nn::predict(outcome.network, scaled.train.X));
        const Eigen::MatrixXd test_pred = target_scaler.inverse_transform(nn::predict(outcome.network, scaled.test.X));
        result.train_metrics = eval::compute_metrics(original.train.Y, train_pred);
        result.test_metrics = eval::compute_metrics(original.test.Y, test_pred);
        if (!finite(result.train_metrics) || !finite(result.test_metrics)) {
            throw Error(ErrorKind::NumericalDivergence, "non-finite metrics");
        }
        result.test_actual = original.test.Y;
        result.test_predicted = test_pred;
        result.ok = true;
    } catch (const Error& e) {
        result.ok = false;
        result.error = std::string(volnet::to_string(e.kind())) + ": " + e.what();
    }
    return result;
}

ExperimentReport run_experiment(const ExperimentSpec& spec, const features::FeatureDataset& dataset,
                                const RunOptions& options)
{
    spec.validate();
    const auto original = features::chronological_split(dataset, spec.train_range, spec.test_range,
                                                        spec.validation_fraction);
    const auto scalers = features::fit_scaler(original.train.X, original.train.Y);
    features::DatasetSplit scaled{features::apply_scalers(original.train, scalers),
                                  features::apply_scalers(original.validation, scalers),
                                  features::apply_scalers(original.test, scalers)};

    struct Cell {
        Architecture arch;
        Algorithm algorithm;
        std::size_t hidden;
    };
    std::vector<Cell> grid;
    for (auto arch : spec.architectures)
        for (auto alg : spec.algorithms)
            for (auto h : spec.hidden_sizes) grid.push_back({arch, alg, h});

    std::vector<TrialResult> results(grid.size());
    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    std::mutex progress_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            results[i] = run_trial(spec, grid[i].arch, grid[i].algorithm, grid[i].hidden, scaled, original,
                                   scalers.targets);
            std::lock_guard lock(progress_mutex);
            ++done;
            if (options.on_trial) options.on_trial(results[i], done, grid.size());
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, grid.size());
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::sort(results.begin(), results.end(), [](const TrialResult& a, const TrialResult& b) { return a.key() < b.key(); });

    ExperimentReport report;
    report.spec = spec;
    report.trials = std::move(results);
    report.excluded = static_cast<std::size_t>(
        std::count_if(report.trials.begin(), report.trials.end(), [](const TrialResult& t) { return !t.ok; }));
    report.stat_tables = summarize(report.trials);
    report.ttest = compare_architectures(report.trials);
    return report;
}

}  // namespace volnet::experiment

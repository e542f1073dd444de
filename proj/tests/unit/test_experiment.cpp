#include "support.hpp"

#include "volnet/config.hpp"
#include "volnet/error.hpp"
#include "volnet/experiment.hpp"
#include "volnet/fixture.hpp"
#include "volnet/market_data.hpp"
#include "volnet/report.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

using namespace volnet;
using namespace volnet::experiment;
using nn::Architecture;
using train::Algorithm;

namespace {

const features::FeatureDataset& fixture_dataset()
{
    static const features::FeatureDataset ds = [] {
        fixture::FixtureOptions opts;
        opts.start = Date::from_ymd(2012, 10, 1);
        const auto series = fixture::generate(opts);
        return features::build_dataset(market::align(series));
    }();
    return ds;
}

ExperimentSpec small_spec()
{
    auto spec = experiment_preset(1);
    spec.name = "small";
    spec.algorithms = {Algorithm::RPROP, Algorithm::SCG, Algorithm::LM};
    spec.hidden_sizes = {3, 5};
    spec.train_config.max_epochs = 15;
    return spec;
}

TrialResult fabricated(Architecture arch, Algorithm alg, std::size_t hidden, double test_mse)
{
    TrialResult t;
    t.architecture = arch;
    t.algorithm = alg;
    t.hidden_size = hidden;
    t.seed = trial_seed(2015, arch, alg, hidden);
    t.ok = true;
    t.train_metrics = {test_mse / 2, 0.95, 5.0};
    t.test_metrics = {test_mse, 0.9, 7.0};
    t.epochs_run = 10;
    t.stop_reason = train::StopReason::EarlyStop;
    return t;
}

std::string trials_csv(const std::vector<TrialResult>& trials)
{
    std::ostringstream out;
    report::write_trials_csv(out, trials);
    return out.str();
}

double pick(const eval::Metrics& m, Metric metric)
{
    switch (metric) {
    case Metric::MSE: return m.mse;
    case Metric::R: return m.r;
    case Metric::MAPE: return m.mape;
    }
    return 0.0;
}

}  // namespace

TEST_CASE("default grid has 54 cells, 27 per architecture")
{
    const ExperimentSpec spec = experiment_preset(1);
    CHECK(spec.grid_size() == 54);
    CHECK(spec.architectures.size() == 2);
    CHECK(spec.algorithms.size() == 9);
    CHECK(spec.hidden_sizes == std::vector<std::size_t>{20, 30, 40});

    std::set<std::uint64_t> seeds;
    for (auto a : spec.architectures)
        for (auto g : spec.algorithms)
            for (auto h : spec.hidden_sizes) seeds.insert(trial_seed(spec.base_seed, a, g, h));
    CHECK(seeds.size() == 54);
    CHECK(trial_seed(1, Architecture::CFFN, Algorithm::LM, 20) == trial_seed(1, Architecture::CFFN, Algorithm::LM, 20));
    CHECK(trial_seed(1, Architecture::CFFN, Algorithm::LM, 20) != trial_seed(2, Architecture::CFFN, Algorithm::LM, 20));
}

TEST_CASE("presets")
{
    const auto e2 = experiment_preset(2);
    CHECK(e2.train_range.first == Date::from_ymd(2013, 1, 1));
    CHECK(e2.test_range.last == Date::from_ymd(2014, 12, 31));
    const auto e3 = experiment_preset(3);
    CHECK(e3.test_range.first == Date::from_ymd(2008, 1, 1));
    CHECK(e3.test_range.last == Date::from_ymd(2008, 12, 31));
    CHECK_THROWS_AS(experiment_preset(4), Error);
}

TEST_CASE("a one-cell grid gives one trial and degenerate tables")
{
    auto spec = small_spec();
    spec.architectures = {Architecture::CFFN};
    spec.algorithms = {Algorithm::LM};
    spec.hidden_sizes = {4};
    const auto rep = run_experiment(spec, fixture_dataset());
    REQUIRE(rep.trials.size() == 1);
    CHECK(rep.trials[0].ok);
    const auto& cell = rep.stat_tables.at({Metric::MSE, Split::Test, Architecture::CFFN});
    CHECK_FALSE(cell.stats);
    CHECK(cell.count == 1);
    CHECK_FALSE(rep.ttest.result);
    const auto md = report::render_tables(rep.trials, spec.name);
    CHECK(md.find("n/a (TooFew: n=1)") != std::string::npos);
}

TEST_CASE("grid runs are complete, deterministic and independent of worker count")
{
    const auto spec = small_spec();
    const auto a = run_experiment(spec, fixture_dataset(), {1, {}});
    const auto b = run_experiment(spec, fixture_dataset(), {3, {}});
    REQUIRE(a.trials.size() == spec.grid_size());
    std::set<std::tuple<Architecture, Algorithm, std::size_t>> keys;
    for (const auto& t : a.trials) {
        keys.insert(t.key());
        CHECK(t.ok);
        CHECK(std::isfinite(t.test_metrics.mse));
        CHECK(std::isfinite(t.train_metrics.r));
    }
    CHECK(keys.size() == spec.grid_size());
    CHECK(std::is_sorted(a.trials.begin(), a.trials.end(),
                         [](const TrialResult& x, const TrialResult& y) { return x.key() < y.key(); }));
    CHECK(trials_csv(a.trials) == trials_csv(b.trials));
    CHECK(report::render_tables(a.trials, "t") == report::render_tables(b.trials, "t"));
}

TEST_CASE("trial results do not depend on execution order")
{
    const auto spec = small_spec();
    const auto rep = run_experiment(spec, fixture_dataset());
    const auto& ds = fixture_dataset();
    const auto original = features::chronological_split(ds, spec.train_range, spec.test_range, spec.validation_fraction);
    const auto scalers = features::fit_scaler(original.train.X, original.train.Y);
    const features::DatasetSplit scaled{features::apply_scalers(original.train, scalers),
                                        features::apply_scalers(original.validation, scalers),
                                        features::apply_scalers(original.test, scalers)};
    auto order = rep.trials;
    std::mt19937 shuffle_rng(5);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (const auto& expected : order) {
        const auto t = run_trial(spec, expected.architecture, expected.algorithm, expected.hidden_size, scaled, original,
                                 scalers.targets);
        CHECK(t.seed == expected.seed);
        CHECK(t.test_metrics.mse == expected.test_metrics.mse);
        CHECK(t.train_metrics.r == expected.train_metrics.r);
        CHECK(t.epochs_run == expected.epochs_run);
    }
}

TEST_CASE("stat tables equal a brute-force pass over the trials")
{
    const auto rep = run_experiment(small_spec(), fixture_dataset());
    for (auto metric : {Metric::MSE, Metric::R, Metric::MAPE})
        for (auto split : {Split::Train, Split::Test})
            for (auto arch : {Architecture::MLFF, Architecture::CFFN}) {
                std::vector<double> values;
                for (const auto& t : rep.trials) {
                    if (t.ok && t.architecture == arch) {
                        values.push_back(pick(split == Split::Train ? t.train_metrics : t.test_metrics, metric));
                    }
                }
                const auto& cell = rep.stat_tables.at({metric, split, arch});
                REQUIRE(cell.stats);
                CHECK(cell.count == values.size());
                double lo = values[0], hi = values[0], sum = 0.0;
                for (double v : values) {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                    sum += v;
                }
                const double mean = sum / static_cast<double>(values.size());
                double ss = 0.0;
                for (double v : values) ss += (v - mean) * (v - mean);
                CHECK(cell.stats->min == lo);
                CHECK(cell.stats->max == hi);
                CHECK(cell.stats->average == doctest::Approx(mean).epsilon(1e-13));
                CHECK(cell.stats->standard_deviation ==
                      doctest::Approx(std::sqrt(ss / static_cast<double>(values.size() - 1))).epsilon(1e-12));
            }
}

TEST_CASE("identical trial errors give zero spread")
{
    std::vector<TrialResult> trials;
    for (auto alg : train::kAllAlgorithms)
        for (std::size_t h : {20, 30, 40}) trials.push_back(fabricated(Architecture::MLFF, alg, h, 3.5));
    const auto tables = summarize(trials);
    const auto& cell = tables.at({Metric::MSE, Split::Test, Architecture::MLFF});
    REQUIRE(cell.stats);
    CHECK(cell.count == 27);
    CHECK(cell.stats->standard_deviation == 0.0);
    CHECK(cell.stats->min == 3.5);
    CHECK(cell.stats->max == 3.5);
    CHECK(cell.stats->average == 3.5);
}

TEST_CASE("failed trials are excluded and counted")
{
    std::vector<TrialResult> trials;
    for (std::size_t h : {1, 2, 3, 4}) {
        trials.push_back(fabricated(Architecture::MLFF, Algorithm::LM, h, 2.0 + static_cast<double>(h)));
        trials.push_back(fabricated(Architecture::CFFN, Algorithm::LM, h, 1.0 + static_cast<double>(h * h)));
    }
    trials[2].ok = false;
    trials[2].error = "NumericalDivergence: training diverged at epoch 3";
    const auto tables = summarize(trials);
    CHECK(tables.at({Metric::MSE, Split::Test, Architecture::MLFF}).count == 3);
    CHECK(tables.at({Metric::MSE, Split::Test, Architecture::CFFN}).count == 4);
    const auto tt = compare_architectures(trials);
    CHECK(tt.pairs == 3);
    const auto md = report::render_tables(trials, "x");
    CHECK(md.find("excluded (failed) trials: 1") != std::string::npos);
}

TEST_CASE("paired comparison matches configurations")
{
    std::vector<TrialResult> trials;
    const double mlff[] = {3.0, 4.5, 2.5, 6.0};
    const double cffn[] = {2.0, 4.0, 3.0, 5.0};
    for (std::size_t i = 0; i < 4; ++i) {
        trials.push_back(fabricated(Architecture::MLFF, Algorithm::SCG, 10 + i, mlff[i]));
        trials.push_back(fabricated(Architecture::CFFN, Algorithm::SCG, 10 + i, cffn[i]));
    }
    const auto tt = compare_architectures(trials);
    REQUIRE(tt.result);
    CHECK(tt.pairs == 4);
    const std::vector<double> a(mlff, mlff + 4), b(cffn, cffn + 4);
    const auto direct = eval::t_test_mse(a, b, true);
    CHECK(tt.result->t_statistic == direct.t_statistic);
    CHECK(tt.result->p_value_two_tailed == direct.p_value_two_tailed);
}

TEST_CASE("trials.csv round trip reproduces tables.md")
{
    auto rep = run_experiment(small_spec(), fixture_dataset());
    rep.trials[1].ok = false;
    rep.trials[1].error = "LineSearchFail: bracket, collapsed\nat step 2";
    const auto csv = trials_csv(rep.trials);
    std::istringstream in(csv);
    const auto parsed = report::parse_trials_csv(in, "trials.csv");
    REQUIRE(parsed.size() == rep.trials.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        CHECK(parsed[i].key() == rep.trials[i].key());
        CHECK(parsed[i].seed == rep.trials[i].seed);
        CHECK(parsed[i].ok == rep.trials[i].ok);
        if (parsed[i].ok) CHECK(parsed[i].test_metrics.mse == rep.trials[i].test_metrics.mse);
    }
    CHECK(trials_csv(parsed) == csv);
    CHECK(report::render_tables(parsed, "small") == report::render_tables(rep.trials, "small"));
}

TEST_CASE("rendered tables follow the published layout")
{
    const auto rep = run_experiment(small_spec(), fixture_dataset());
    const auto md = report::render_tables(rep.trials, "small");
    CHECK(md.find("| MSE | Multi-Layer Feed Forward Network | Cascade Feed Forward Network |") != std::string::npos);
    for (const char* row : {"| Min |", "| Max |", "| Average |", "| Standard Deviation |"}) {
        CHECK(md.find(row) != std::string::npos);
    }
    CHECK(md.find("(two tailed)") != std::string::npos);
    CHECK(md.find("## MAPE of trials for the testing dataset") != std::string::npos);
    std::size_t tables = 0;
    for (auto pos = md.find("\n## "); pos != std::string::npos; pos = md.find("\n## ", pos + 1)) ++tables;
    CHECK(tables == 7);  // six statistic tables and the t-test section
}

TEST_CASE("report emission and error report")
{
    const auto dir = support::scratch("report");
    auto rep = run_experiment(small_spec(), fixture_dataset());
    const auto paths = report::emit_report(rep, dir, "fixture");
    CHECK(paths == rep.artifacts);
    for (const char* name : {"trials.csv", "tables.md", "tables.csv", "config.txt", "test_mse.svg", "test_mse.csv",
                             "best_regression.svg", "best_regression.csv"}) {
        CAPTURE(name);
        CHECK(std::filesystem::exists(dir / name));
        CHECK(std::filesystem::file_size(dir / name) > 0);
    }
    CHECK(support::count_lines(support::slurp(dir / "trials.csv")) == 1 + rep.trials.size());
    CHECK(support::count_lines(support::slurp(dir / "tables.csv")) == 1 + 3 * 2 * 4);

    // config.txt is itself a valid configuration describing the same spec.
    std::istringstream cfg_in(support::slurp(dir / "config.txt"));
    const auto cfg = config::parse_experiment_config(cfg_in, dir, "config.txt");
    CHECK(cfg.spec.grid_size() == rep.spec.grid_size());
    CHECK(cfg.spec.train_config.max_epochs == 15);
    CHECK(cfg.spec.trainer_for(Algorithm::LM).get("mu") == 1e-3);

    report::emit_error_report(dir, "EmptyTest: no rows");
    CHECK_FALSE(std::filesystem::exists(dir / "trials.csv"));
    CHECK_FALSE(std::filesystem::exists(dir / "tables.md"));
    CHECK(support::slurp(dir / "error.txt").find("EmptyTest") != std::string::npos);
}

TEST_CASE("experiment config parsing")
{
    const auto base = support::scratch("config");
    auto parse = [&](const std::string& body) {
        std::istringstream in(body);
        return config::parse_experiment_config(in, base, "test.cfg");
    };
    auto kind = [&](const std::string& body) {
        try {
            parse(body);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Empty;
    };

    const auto cfg = parse(
        "# comment\n"
        "preset=2\n"
        "name=custom\n"
        "algorithms=LM, RPROP\n"
        "hidden_sizes=5,6\n"
        "architectures=CFFN\n"
        "base_seed=7\n"
        "patience=0\n"
        "hp.RPROP.delta0=0.5\n"
        "data_dir=prices\n"
        "window=10\n"
        "workers=2\n");
    CHECK(cfg.spec.name == "custom");
    CHECK(cfg.spec.train_range.last == Date::from_ymd(2014, 9, 30));
    CHECK(cfg.spec.grid_size() == 4);
    CHECK(cfg.spec.base_seed == 7);
    CHECK(cfg.spec.train_config.patience == 0);
    CHECK(cfg.spec.trainer_for(Algorithm::RPROP).get("delta0") == 0.5);
    CHECK(cfg.spec.trainer_for(Algorithm::RPROP).get("delta_inc") == 1.2);
    CHECK(*cfg.data_dir == base / "prices");
    CHECK(cfg.window == 10);
    CHECK(cfg.workers == 2);

    const auto explicit_dates = parse("train_start=2013-01-01\ntrain_end=2014-12-31\n"
                                      "test_start=2008-01-01\ntest_end=2008-12-31\ndataset=/abs/ds.csv\n");
    CHECK(explicit_dates.spec.test_range.first == Date::from_ymd(2008, 1, 1));
    CHECK(*explicit_dates.dataset == std::filesystem::path("/abs/ds.csv"));

    CHECK(kind("preset=1\nlearning_rate=3\n") == ErrorKind::ConfigError);
    CHECK(kind("preset=1\nalgorithms=LM,ADAM\n") == ErrorKind::ConfigError);
    CHECK(kind("preset=1\nhp.LM.lr=0.1\n") == ErrorKind::ConfigError);
    CHECK(kind("preset=1\nhp.LM.mu=-1\n") == ErrorKind::ConfigError);
    CHECK(kind("preset=1\nmax_epochs=0\n") == ErrorKind::ConfigError);
    CHECK(kind("preset=1\ntrain_start=2013-02-30\n") == ErrorKind::ConfigError);
    CHECK(kind("train_start=2013-01-01\n") == ErrorKind::ConfigError);
    CHECK(kind("preset=1\njust some words\n") == ErrorKind::ConfigError);
    CHECK(kind("preset=1\ndata_dir=a\ndataset=b\n") == ErrorKind::ConfigError);
    CHECK(kind("preset=9\n") == ErrorKind::ConfigError);
}

TEST_CASE("an empty test window is a data error")
{
    auto spec = small_spec();
    spec.test_range = {Date::from_ymd(2020, 1, 1), Date::from_ymd(2020, 3, 1)};
    try {
        run_experiment(spec, fixture_dataset());
        FAIL("expected EmptyTest");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyTest);
    }
}

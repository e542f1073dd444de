#include "volnet/cli.hpp"

#include "volnet/config.hpp"
#include "volnet/error.hpp"
#include "volnet/experiment.hpp"
#include "volnet/features.hpp"
#include "volnet/fixture.hpp"
#include "volnet/market_data.hpp"
#include "volnet/network.hpp"
#include "volnet/plot.hpp"
#include "volnet/report.hpp"
#include "volnet/text.hpp"
#include "volnet/trainers.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace volnet {

namespace fs = std::filesystem;

namespace {

std::string_view category_name(ErrorCategory c)
{
    switch (c) {
    case ErrorCategory::Usage: return "usage";
    case ErrorCategory::Data: return "data";
    case ErrorCategory::Numerical: return "numerical";
    }
    return "usage";
}

std::string escape(std::string_view msg)
{
    std::string out;
    for (char c : msg) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (c == '\n' || c == '\r') {
            out += ' ';
        } else {
            out += c;
        }
    }
    return out;
}

void diagnose(std::ostream& err, std::string_view kind, ErrorCategory category, std::string_view msg)
{
    err << "error kind=" << kind << " category=" << category_name(category) << " msg=\"" << escape(msg) << "\"\n";
}

Date parse_date_option(const std::string& value, const std::string& flag)
{
    const auto d = Date::parse(value);
    if (!d) throw Error(ErrorKind::InvalidArgument, flag + " expects YYYY-MM-DD, got '" + value + "'");
    return *d;
}

features::FeatureDataset load_dataset(const config::ExperimentConfig& cfg)
{
    if (cfg.dataset) return features::read_dataset_csv(*cfg.dataset);
    if (!cfg.data_dir) throw Error(ErrorKind::ConfigError, "config names neither data_dir nor dataset");
    const auto series = market::load_directory(*cfg.data_dir);
    const auto panel = market::align(series);
    return features::build_dataset(panel, cfg.window);
}

/// A dated numeric column from any CSV whose first column is `date`.
plot::NamedSeries read_named_series(const std::string& spec)
{
    std::string file = spec;
    std::string column;
    if (const auto colon = spec.rfind(':'); colon != std::string::npos && colon + 1 < spec.size() &&
                                            !fs::exists(spec)) {
        file = spec.substr(0, colon);
        column = spec.substr(colon + 1);
    }
    std::ifstream in(file);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + file);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::EmptyFile, file + ": empty file");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = text::split(text::trim(line), ',');
    if (header.size() < 2 || text::trim(header[0]) != "date") {
        throw Error(ErrorKind::MalformedRow, file + ":1: first column must be date");
    }
    std::size_t index = 1;
    if (!column.empty()) {
        const auto it = std::find_if(header.begin(), header.end(), [&](auto h) { return text::trim(h) == column; });
        if (it == header.end() || it == header.begin()) {
            throw Error(ErrorKind::MissingInstrument, file + ": no column named " + column);
        }
        index = static_cast<std::size_t>(it - header.begin());
    }
    plot::NamedSeries series;
    series.name = std::string(text::trim(header[index]));
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto row = text::trim(line);
        if (row.empty() || row.front() == '#') continue;
        const auto fields = text::split(row, ',');
        const auto date = fields.empty() ? std::nullopt : Date::parse(text::trim(fields[0]));
        double v = 0.0;
        if (fields.size() != header.size() || !date || !text::parse_double(text::trim(fields[index]), v)) {
            throw Error(ErrorKind::MalformedRow, file + ":" + std::to_string(line_no) + ": malformed row");
        }
        series.dates.push_back(*date);
        series.values.push_back(v);
    }
    if (series.dates.empty()) throw Error(ErrorKind::EmptyFile, file + ": no data rows");
    return series;
}

/// Reads `output,actual,predicted` (the regression sidecar layout).
void read_regression_points(const std::string& file, Eigen::MatrixXd& actual, Eigen::MatrixXd& predicted,
                            std::vector<std::string>& names)
{
    std::ifstream in(file);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + file);
    std::string line;
    if (!std::getline(in, line) || text::trim(line) != "output,actual,predicted") {
        throw Error(ErrorKind::MalformedRow, file + ":1: expected header output,actual,predicted");
    }
    std::map<std::string, std::vector<std::pair<double, double>>> by_output;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto row = text::trim(line);
        if (row.empty()) continue;
        const auto fields = text::split(row, ',');
        double a = 0.0, p = 0.0;
        if (fields.size() != 3 || !text::parse_double(fields[1], a) || !text::parse_double(fields[2], p)) {
            throw Error(ErrorKind::MalformedRow, file + ":" + std::to_string(line_no) + ": malformed row");
        }
        const std::string name(fields[0]);
        if (!by_output.count(name)) names.push_back(name);
        by_output[name].emplace_back(a, p);
    }
    if (names.empty()) throw Error(ErrorKind::EmptyFile, file + ": no data rows");
    const auto rows = by_output[names.front()].size();
    actual.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(names.size()));
    predicted.resizeLike(actual);
    for (std::size_t c = 0; c < names.size(); ++c) {
        const auto& pts = by_output[names[c]];
        if (pts.size() != rows) throw Error(ErrorKind::LengthMismatch, file + ": outputs have different lengths");
        for (std::size_t r = 0; r < rows; ++r) {
            actual(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = pts[r].first;
            predicted(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = pts[r].second;
        }
    }
}

void write_metrics(std::ostream& out, const eval::Metrics& train_m, const eval::Metrics& test_m)
{
    out << "split,mse,r,mape\n";
    out << "train," << text::format_exact(train_m.mse) << ',' << text::format_exact(train_m.r) << ','
        << text::format_exact(train_m.mape) << '\n';
    out << "test," << text::format_exact(test_m.mse) << ',' << text::format_exact(test_m.r) << ','
        << text::format_exact(test_m.mape) << '\n';
}

struct Options {
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string config;
    // fixture
    bool regime_shift = false;
    std::string start, end;
    double holiday_rate = 0.015;
    // ingest / dataset
    std::string data_dir;
    std::string input;
    std::size_t window = features::kDefaultWindow;
    // train
    std::string arch, alg;
    std::optional<std::size_t> hidden;
    // experiment
    std::optional<std::size_t> workers;
    bool quiet = false;
    // plot
    std::string series_a, series_b, title;
};

int run_fixture(const Options& o, std::ostream& out)
{
    fixture::FixtureOptions fo;
    if (o.seed) fo.seed = *o.seed;
    if (!o.start.empty()) fo.start = parse_date_option(o.start, "--start");
    if (!o.end.empty()) fo.end = parse_date_option(o.end, "--end");
    if (fo.end < fo.start) throw Error(ErrorKind::InvalidArgument, "--start is after --end");
    if (!(o.holiday_rate >= 0.0 && o.holiday_rate < 0.5)) {
        throw Error(ErrorKind::InvalidArgument, "--holiday-rate must be in [0, 0.5)");
    }
    fo.holiday_rate = o.holiday_rate;
    fo.regime_shift = o.regime_shift;
    const auto series = fixture::generate(fo);
    fixture::write_directory(o.out, series);
    out << "wrote " << series.size() << " price files to " << o.out << '\n';
    return 0;
}

int run_ingest(const Options& o, std::ostream& out)
{
    const auto series = market::load_directory(o.data_dir);
    auto panel = market::align(series);
    if (!o.start.empty() || !o.end.empty()) {
        const Date s = o.start.empty() ? panel.dates.front() : parse_date_option(o.start, "--start");
        const Date e = o.end.empty() ? panel.dates.back() : parse_date_option(o.end, "--end");
        panel = market::slice_window(panel, s, e);
    }
    const auto ds = features::build_dataset(panel, o.window);
    const fs::path dir(o.out);
    fs::create_directories(dir / "aligned");
    for (const auto& s : market::panel_to_series(panel)) {
        market::write_price_csv(dir / "aligned" / (std::string(market::to_string(s.symbol)) + ".csv"), s);
    }
    {
        std::ofstream report(dir / "alignment.csv");
        market::write_alignment_report(report, panel);
    }
    features::write_dataset_csv(dir / "dataset.csv", ds);
    out << "aligned rows: " << panel.size() << "; dataset rows: " << ds.rows() << " (" << ds.dates.front().iso()
        << " .. " << ds.dates.back().iso() << ")\n";
    return 0;
}

int run_dataset(const Options& o, std::ostream& out)
{
    auto ds = features::read_dataset_csv(fs::path(o.input));
    if (!o.start.empty() || !o.end.empty()) {
        const Date s = o.start.empty() ? ds.dates.front() : parse_date_option(o.start, "--start");
        const Date e = o.end.empty() ? ds.dates.back() : parse_date_option(o.end, "--end");
        const auto first = std::lower_bound(ds.dates.begin(), ds.dates.end(), s) - ds.dates.begin();
        const auto last = std::upper_bound(ds.dates.begin(), ds.dates.end(), e) - ds.dates.begin();
        if (last <= first) throw Error(ErrorKind::EmptyWindow, "no dataset rows between " + s.iso() + " and " + e.iso());
        ds = ds.rows_slice(static_cast<std::size_t>(first), static_cast<std::size_t>(last - first));
    }
    out << "rows: " << ds.rows() << "\nfirst: " << ds.dates.front().iso() << "\nlast: " << ds.dates.back().iso()
        << "\ncolumn,min,max,mean\n";
    auto describe = [&](std::string_view name, const Eigen::VectorXd& col) {
        out << name << ',' << text::format_fixed(col.minCoeff(), 4) << ',' << text::format_fixed(col.maxCoeff(), 4)
            << ',' << text::format_fixed(col.mean(), 4) << '\n';
    };
    for (Eigen::Index c = 0; c < ds.X.cols(); ++c) describe(features::kInputNames[static_cast<std::size_t>(c)], ds.X.col(c));
    for (Eigen::Index c = 0; c < ds.Y.cols(); ++c) describe(features::kTargetNames[static_cast<std::size_t>(c)], ds.Y.col(c));
    if (!o.out.empty()) {
        features::write_dataset_csv(fs::path(o.out), ds);
        out << "wrote " << o.out << '\n';
    }
    return 0;
}

int run_train(const Options& o, std::ostream& out)
{
    const auto cfg = config::load_experiment_config(o.config);
    const auto& spec = cfg.spec;
    nn::Architecture arch = spec.architectures.front();
    train::Algorithm alg = spec.algorithms.front();
    std::size_t hidden = o.hidden.value_or(spec.hidden_sizes.front());
    if (!o.arch.empty()) {
        const auto a = nn::architecture_from_string(o.arch);
        if (!a) throw Error(ErrorKind::InvalidArgument, "unknown architecture " + o.arch);
        arch = *a;
    }
    if (!o.alg.empty()) {
        const auto a = train::algorithm_from_string(o.alg);
        if (!a) throw Error(ErrorKind::InvalidArgument, "unknown algorithm " + o.alg);
        alg = *a;
    }
    if (hidden == 0) throw Error(ErrorKind::InvalidArgument, "--hidden must be positive");

    const auto ds = load_dataset(cfg);
    const auto original =
        features::chronological_split(ds, spec.train_range, spec.test_range, spec.validation_fraction);
    const auto scalers = features::fit_scaler(original.train.X, original.train.Y);
    const auto train_set = features::apply_scalers(original.train, scalers);
    const auto val_set = features::apply_scalers(original.validation, scalers);
    const auto test_set = features::apply_scalers(original.test, scalers);

    const std::uint64_t seed = o.seed ? *o.seed : experiment::trial_seed(spec.base_seed, arch, alg, hidden);
    const auto initial = nn::init_weights({arch, features::kInputNames.size(), hidden, features::kTargetNames.size()}, seed);
    auto tc = spec.train_config;
    tc.seed = seed;
    const auto outcome = train::train(initial, spec.trainer_for(alg), tc, train_set, val_set);

    const Eigen::MatrixXd train_pred = scalers.targets.inverse_transform(nn::predict(outcome.network, train_set.X));
    const Eigen::MatrixXd test_pred = scalers.targets.inverse_transform(nn::predict(outcome.network, test_set.X));
    const auto train_m = eval::compute_metrics(original.train.Y, train_pred);
    const auto test_m = eval::compute_metrics(original.test.Y, test_pred);

    const fs::path dir(o.out);
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "network.txt");
        nn::save_network(f, outcome.network);
    }
    {
        std::ofstream f(dir / "curve.csv");
        train::write_curve_csv(f, outcome.record);
    }
    {
        std::ofstream f(dir / "metrics.csv");
        write_metrics(f, train_m, test_m);
    }
    const auto title = std::string(nn::to_string(arch)) + " " + std::string(train::to_string(alg)) + " " +
                       std::to_string(hidden) + " (test)";
    plot::emit_regression_plot(original.test.Y, test_pred, features::kTargetNames, dir / "test_regression.svg", title);

    out << nn::to_string(arch) << ' ' << train::to_string(alg) << " hidden=" << hidden << " seed=" << seed
        << " epochs=" << outcome.record.epochs_run << " stop=" << train::to_string(outcome.record.stop_reason) << '\n'
        << "train mse=" << text::format_fixed(train_m.mse, 6) << " r=" << text::format_fixed(train_m.r, 4)
        << " mape=" << text::format_fixed(train_m.mape, 4) << '\n'
        << "test  mse=" << text::format_fixed(test_m.mse, 6) << " r=" << text::format_fixed(test_m.r, 4)
        << " mape=" << text::format_fixed(test_m.mape, 4) << '\n';
    return 0;
}

int run_experiment_cmd(const Options& o, std::ostream& out, std::ostream& err)
{
    const fs::path dir(o.out);
    try {
        auto cfg = config::load_experiment_config(o.config);
        if (o.seed) cfg.spec.base_seed = *o.seed;
        const auto ds = load_dataset(cfg);
        experiment::RunOptions ro;
        ro.workers = o.workers.value_or(cfg.workers);
        if (ro.workers == 0) throw Error(ErrorKind::InvalidArgument, "--workers must be positive");
        if (!o.quiet) {
            ro.on_trial = [&](const experiment::TrialResult& t, std::size_t done, std::size_t total) {
                err << "[" << done << "/" << total << "] " << nn::to_string(t.architecture) << ' '
                    << train::to_string(t.algorithm) << ' ' << t.hidden_size << ' '
                    << (t.ok ? "test_mse=" + text::format_fixed(t.test_metrics.mse, 4) : "failed: " + t.error) << '\n';
            };
        }
        auto report = experiment::run_experiment(cfg.spec, ds, ro);
        const std::string source = cfg.dataset ? cfg.dataset->string() : cfg.data_dir->string();
        report::emit_report(report, dir, source);
        out << cfg.spec.name << ": " << report.trials.size() << " trials, " << report.excluded << " excluded\n";
        if (report.ttest.result) {
            out << "MLFF vs CFFN test MSE: p = " << text::format_fixed(report.ttest.result->p_value_two_tailed, 3)
                << " (two tailed); " << eval::verdict(*report.ttest.result) << '\n';
        }
        out << "wrote " << report.artifacts.size() << " files to " << dir.string() << '\n';
        return 0;
    } catch (const Error& e) {
        if (!dir.empty()) report::emit_error_report(dir, std::string(to_string(e.kind())) + ": " + e.what());
        throw;
    }
}

int run_plot_overlay(const Options& o, std::ostream& out)
{
    const auto a = read_named_series(o.series_a);
    auto b = read_named_series(o.series_b);
    if (b.name == a.name) b.name += "_2";
    const auto svg = plot::emit_overlay_plot(a, b, o.out, o.title);
    out << "wrote " << svg.string() << " and " << plot::sidecar_path(svg).string() << '\n';
    return 0;
}

int run_plot_regression(const Options& o, std::ostream& out)
{
    Eigen::MatrixXd actual, predicted;
    std::vector<std::string> names;
    read_regression_points(o.input, actual, predicted, names);
    const std::vector<std::string_view> views(names.begin(), names.end());
    const auto svg = plot::emit_regression_plot(actual, predicted, views, o.out, o.title);
    out << "wrote " << svg.string() << " and " << plot::sidecar_path(svg).string() << '\n';
    return 0;
}

}  // namespace

int exit_code_for(ErrorCategory category)
{
    switch (category) {
    case ErrorCategory::Usage: return 1;
    case ErrorCategory::Data: return 2;
    case ErrorCategory::Numerical: return 3;
    }
    return 1;
}

int cli_main(const std::vector<std::string>& args) { return cli_main(args, std::cout, std::cerr); }

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Neural-network volatility estimation: data preparation, training and experiments", "volnet"};
    app.require_subcommand(1);
    Options o;

    auto add_seed = [&](CLI::App* cmd, const std::string& what) { cmd->add_option("--seed", o.seed, what); };

    auto* fixture_cmd = app.add_subcommand("fixture", "Generate the synthetic nine-instrument price fixture");
    fixture_cmd->add_option("--out", o.out, "Output directory for <SYMBOL>.csv files")->required();
    add_seed(fixture_cmd, "Generator seed");
    fixture_cmd->add_flag("--regime-shift", o.regime_shift, "Raise volatility across 2008");
    fixture_cmd->add_option("--start", o.start, "First calendar date (YYYY-MM-DD)");
    fixture_cmd->add_option("--end", o.end, "Last calendar date (YYYY-MM-DD)");
    fixture_cmd->add_option("--holiday-rate", o.holiday_rate, "Per-instrument probability of a missing day");

    auto* ingest_cmd = app.add_subcommand("ingest", "Align a directory of price CSVs and export the feature dataset");
    ingest_cmd->add_option("--data", o.data_dir, "Directory containing <SYMBOL>.csv files")->required();
    ingest_cmd->add_option("--out", o.out, "Output directory")->required();
    ingest_cmd->add_option("--window", o.window, "Rolling volatility window in trading days");
    ingest_cmd->add_option("--start", o.start, "Keep aligned rows from this date");
    ingest_cmd->add_option("--end", o.end, "Keep aligned rows up to this date");

    auto* dataset_cmd = app.add_subcommand("dataset", "Inspect or re-export a feature dataset CSV");
    dataset_cmd->add_option("--input", o.input, "Dataset CSV")->required();
    dataset_cmd->add_option("--start", o.start, "First date to keep");
    dataset_cmd->add_option("--end", o.end, "Last date to keep");
    dataset_cmd->add_option("--out", o.out, "Write the (sliced) dataset here");

    auto* train_cmd = app.add_subcommand("train", "Train a single network");
    train_cmd->add_option("--config", o.config, "Experiment config supplying data, dates and hyperparameters")->required();
    train_cmd->add_option("--out", o.out, "Output directory")->required();
    train_cmd->add_option("--arch", o.arch, "MLFF or CFFN (default: first in config)");
    train_cmd->add_option("--alg", o.alg, "Training algorithm (default: first in config)");
    train_cmd->add_option("--hidden", o.hidden, "Hidden units (default: first in config)");
    add_seed(train_cmd, "Weight initialisation seed (default: derived from base_seed)");

    auto* exp_cmd = app.add_subcommand("experiment", "Run the full architecture x algorithm x hidden-size grid");
    exp_cmd->add_option("--config", o.config, "Experiment config file")->required();
    exp_cmd->add_option("--out", o.out, "Output directory")->required();
    exp_cmd->add_option("--workers", o.workers, "Worker threads (results do not depend on this)");
    exp_cmd->add_flag("--quiet", o.quiet, "Suppress per-trial progress");
    add_seed(exp_cmd, "Override base_seed");

    auto* plot_cmd = app.add_subcommand("plot", "Draw charts from CSV files");
    plot_cmd->require_subcommand(1);
    auto* overlay_cmd = plot_cmd->add_subcommand("overlay", "Two dated series on their common dates");
    overlay_cmd->add_option("--a", o.series_a, "FILE[:COLUMN] with a leading date column")->required();
    overlay_cmd->add_option("--b", o.series_b, "FILE[:COLUMN] with a leading date column")->required();
    overlay_cmd->add_option("--out", o.out, "Output SVG")->required();
    overlay_cmd->add_option("--title", o.title, "Chart title");
    auto* regression_cmd = plot_cmd->add_subcommand("regression", "Predicted vs actual scatter");
    regression_cmd->add_option("--input", o.input, "CSV with output,actual,predicted")->required();
    regression_cmd->add_option("--out", o.out, "Output SVG")->required();
    regression_cmd->add_option("--title", o.title, "Chart title");

    try {
        std::vector<std::string> reversed(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
        std::reverse(reversed.begin(), reversed.end());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << app.help();
        diagnose(err, "InvalidArgument", ErrorCategory::Usage, e.what());
        return 1;
    }

    try {
        if (fixture_cmd->parsed()) return run_fixture(o, out);
        if (ingest_cmd->parsed()) return run_ingest(o, out);
        if (dataset_cmd->parsed()) return run_dataset(o, out);
        if (train_cmd->parsed()) return run_train(o, out);
        if (exp_cmd->parsed()) return run_experiment_cmd(o, out, err);
        if (overlay_cmd->parsed()) return run_plot_overlay(o, out);
        if (regression_cmd->parsed()) return run_plot_regression(o, out);
    } catch (const Error& e) {
        diagnose(err, to_string(e.kind()), e.category(), e.what());
        return exit_code_for(e.category());
    } catch (const fs::filesystem_error& e) {
        diagnose(err, "IoFailure", ErrorCategory::Data, e.what());
        return exit_code_for(ErrorCategory::Data);
    } catch (const std::exception& e) {
        diagnose(err, "NumericalDivergence", ErrorCategory::Numerical, e.what());
        return exit_code_for(ErrorCategory::Numerical);
    }
    err << app.help();
    return 1;
}

}  // namespace volnet

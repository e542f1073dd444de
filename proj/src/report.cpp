#include "volnet/report.hpp"

#include "volnet/config.hpp"
#include "volnet/error.hpp"
#include "volnet/plot.hpp"
#include "volnet/text.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace volnet::report {

using experiment::Metric;
using experiment::Split;
using experiment::StatTables;
using experiment::TrialResult;

namespace {

constexpr std::string_view kTrialsHeader =
    "architecture,algorithm,hidden_size,seed,status,epochs_run,stop_reason,"
    "train_mse,train_r,train_mape,test_mse,test_r,test_mape,error";

constexpr std::array kMetrics{Metric::MSE, Metric::R, Metric::MAPE};
constexpr std::array kSplits{Split::Train, Split::Test};

std::string sanitize(std::string s)
{
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    return s;
}

std::string table_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string_view split_phrase(Split split) { return split == Split::Train ? "training" : "testing"; }

std::vector<nn::Architecture> architectures_in(const std::vector<TrialResult>& trials)
{
    std::vector<nn::Architecture> out;
    for (auto arch : {nn::Architecture::MLFF, nn::Architecture::CFFN}) {
        if (std::any_of(trials.begin(), trials.end(), [&](const auto& t) { return t.architecture == arch; })) {
            out.push_back(arch);
        }
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
}

}  // namespace

void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& trials)
{
    out << kTrialsHeader << '\n';
    for (const auto& t : trials) {
        out << nn::to_string(t.architecture) << ',' << train::to_string(t.algorithm) << ',' << t.hidden_size << ','
            << t.seed << ',' << (t.ok ? "ok" : "failed") << ',' << t.epochs_run << ','
            << train::to_string(t.stop_reason);
        for (const auto* m : {&t.train_metrics, &t.test_metrics}) {
            for (double v : {m->mse, m->r, m->mape}) {
                out << ',';
                if (t.ok) out << text::format_exact(v);
            }
        }
        out << ',' << sanitize(t.error) << '\n';
    }
}

std::vector<TrialResult> parse_trials_csv(std::istream& in, const std::string& source_name)
{
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::EmptyFile, source_name + ": empty trials file");
    if (text::trim(line) != kTrialsHeader) {
        throw Error(ErrorKind::MalformedRow, source_name + ":1: unexpected trials header");
    }
    std::vector<TrialResult> trials;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const auto where = source_name + ":" + std::to_string(line_no);
        auto fail = [&](const std::string& what) { return Error(ErrorKind::MalformedRow, where + ": " + what); };
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto fields = text::split(line, ',');
        if (fields.size() != 14) throw fail("expected 14 fields");

        TrialResult t;
        const auto arch = nn::architecture_from_string(fields[0]);
        const auto alg = train::algorithm_from_string(fields[1]);
        const auto stop = train::stop_reason_from_string(fields[6]);
        unsigned long long seed = 0;
        if (!arch || !alg || !stop) throw fail("unknown enumeration value");
        if (!text::parse_size(fields[2], t.hidden_size) || !text::parse_u64(fields[3], seed) ||
            !text::parse_size(fields[5], t.epochs_run)) {
            throw fail("bad integer field");
        }
        t.architecture = *arch;
        t.algorithm = *alg;
        t.stop_reason = *stop;
        t.seed = seed;
        if (fields[4] == "ok") {
            t.ok = true;
        } else if (fields[4] != "failed") {
            throw fail("status must be ok or failed");
        }
        if (t.ok) {
            double* slots[] = {&t.train_metrics.mse, &t.train_metrics.r, &t.train_metrics.mape,
                               &t.test_metrics.mse,  &t.test_metrics.r,  &t.test_metrics.mape};
            for (std::size_t i = 0; i < 6; ++i) {
                if (!text::parse_double(fields[7 + i], *slots[i])) throw fail("bad metric value");
            }
        }
        t.error = std::string(fields[13]);
        trials.push_back(std::move(t));
    }
    return trials;
}

std::vector<TrialResult> parse_trials_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
    return parse_trials_csv(in, path.string());
}

std::string render_tables(const std::vector<TrialResult>& trials, const std::string& title)
{
    const auto tables = experiment::summarize(trials);
    const auto ttest = experiment::compare_architectures(trials);
    const auto archs = architectures_in(trials);
    const auto excluded =
        static_cast<std::size_t>(std::count_if(trials.begin(), trials.end(), [](const auto& t) { return !t.ok; }));

    std::ostringstream md;
    md << "# " << title << "\n\n";
    md << "Trials: " << trials.size() << "; excluded (failed) trials: " << excluded << "\n\n";

    for (auto metric : kMetrics) {
        for (auto split : kSplits) {
            md << "## " << experiment::to_string(metric) << " of trials for the " << split_phrase(split)
               << " dataset\n\n";
            md << "| " << experiment::to_string(metric);
            for (auto arch : archs) md << " | " << nn::long_name(arch);
            md << " |\n|---";
            for (std::size_t i = 0; i < archs.size(); ++i) md << "|---";
            md << "|\n";

            auto cell_text = [&](nn::Architecture arch, auto pick) -> std::string {
                const auto it = tables.find({metric, split, arch});
                if (it == tables.end() || !it->second.stats) {
                    const std::size_t n = it == tables.end() ? 0 : it->second.count;
                    return "n/a (TooFew: n=" + std::to_string(n) + ")";
                }
                return table_number(pick(*it->second.stats));
            };
            auto row = [&](std::string_view label, auto pick) {
                md << "| " << label;
                for (auto arch : archs) md << " | " << cell_text(arch, pick);
                md << " |\n";
            };
            row("Min", [](const eval::DescriptiveStats& s) { return s.min; });
            row("Max", [](const eval::DescriptiveStats& s) { return s.max; });
            row("Average", [](const eval::DescriptiveStats& s) { return s.average; });
            row("Standard Deviation", [](const eval::DescriptiveStats& s) { return s.standard_deviation; });
            md << '\n';
        }
    }

    md << "## t-test on testing MSE, MLFF vs CFFN\n\n";
    if (ttest.result) {
        const auto& r = *ttest.result;
        md << (r.paired ? "Paired" : "Welch") << " t-test over " << ttest.pairs
           << " matched configurations: t = " << table_number(r.t_statistic)
           << ", df = " << table_number(r.degrees_of_freedom) << ", p = " << text::format_fixed(r.p_value_two_tailed, 3)
           << " (two tailed); " << eval::verdict(r) << "\n";
    } else {
        md << "Not computed: " << ttest.note << "\n";
    }
    return md.str();
}

void write_tables_csv(std::ostream& out, const StatTables& tables)
{
    out << "metric,split,statistic,MLFF,CFFN\n";
    using Pick = double (*)(const eval::DescriptiveStats&);
    const std::array<std::pair<std::string_view, Pick>, 4> stats{{
        {"Min", [](const eval::DescriptiveStats& s) { return s.min; }},
        {"Max", [](const eval::DescriptiveStats& s) { return s.max; }},
        {"Average", [](const eval::DescriptiveStats& s) { return s.average; }},
        {"StdDev", [](const eval::DescriptiveStats& s) { return s.standard_deviation; }},
    }};
    for (auto metric : kMetrics) {
        for (auto split : kSplits) {
            for (const auto& [label, pick] : stats) {
                out << experiment::to_string(metric) << ',' << experiment::to_string(split) << ',' << label;
                for (auto arch : {nn::Architecture::MLFF, nn::Architecture::CFFN}) {
                    out << ',';
                    const auto it = tables.find({metric, split, arch});
                    if (it != tables.end() && it->second.stats) out << text::format_exact(pick(*it->second.stats));
                }
                out << '\n';
            }
        }
    }
}

std::vector<std::string> emit_report(experiment::ExperimentReport& report, const std::filesystem::path& out_dir,
                                     const std::string& data_source)
{
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> paths;
    auto record = [&](const fs::path& p) { paths.push_back(p.string()); };

    {
        std::ostringstream csv;
        write_trials_csv(csv, report.trials);
        write_file(out_dir / "trials.csv", csv.str());
        record(out_dir / "trials.csv");
    }
    write_file(out_dir / "tables.md", render_tables(report.trials, report.spec.name));
    record(out_dir / "tables.md");
    {
        std::ostringstream csv;
        write_tables_csv(csv, report.stat_tables);
        write_file(out_dir / "tables.csv", csv.str());
        record(out_dir / "tables.csv");
    }
    {
        std::ostringstream cfg;
        cfg << "# Full experiment description; this file is itself a valid --config input.\n";
        if (!data_source.empty()) cfg << "# data: " << data_source << '\n';
        cfg << "# inputs and targets are min-max scaled to [-1, 1] using training rows only\n";
        cfg << "# volatility: sample std of log returns over the window, x sqrt(252), in percent\n";
        config::write_spec(cfg, report.spec);
        write_file(out_dir / "config.txt", cfg.str());
        record(out_dir / "config.txt");
    }

    std::vector<std::string> labels;
    std::vector<double> values;
    const TrialResult* best = nullptr;
    for (const auto& t : report.trials) {
        if (!t.ok) continue;
        labels.push_back(std::string(nn::to_string(t.architecture)) + "-" + std::string(train::to_string(t.algorithm)) +
                         "-" + std::to_string(t.hidden_size));
        values.push_back(t.test_metrics.mse);
        if (t.test_actual.size() > 0 && (!best || t.test_metrics.mse < best->test_metrics.mse)) best = &t;
    }
    if (!labels.empty()) {
        const auto svg = plot::emit_bar_chart(labels, values, out_dir / "test_mse.svg",
                                              report.spec.name + ": test MSE per trial", "MSE");
        record(svg);
        record(plot::sidecar_path(svg));
    }
    if (best) {
        const std::string title = report.spec.name + ": best trial " + std::string(nn::to_string(best->architecture)) + " " +
                                  std::string(train::to_string(best->algorithm)) + " " +
                                  std::to_string(best->hidden_size) + " (test)";
        const auto svg = plot::emit_regression_plot(best->test_actual, best->test_predicted, features::kTargetNames,
                                                    out_dir / "best_regression.svg", title);
        record(svg);
        record(plot::sidecar_path(svg));
    }
    report.artifacts = paths;
    return paths;
}

std::filesystem::path emit_error_report(const std::filesystem::path& out_dir, const std::string& message)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    for (const char* name : {"trials.csv", "tables.md", "tables.csv", "config.txt"}) fs::remove(out_dir / name, ec);
    const auto path = out_dir / "error.txt";
    std::ofstream out(path, std::ios::binary);
    out << "experiment failed\n" << message << '\n';
    return path;
}

}  // namespace volnet::report

#include "volnet/config.hpp"

#include "volnet/error.hpp"
#include "volnet/text.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <utility>
#include <vector>

namespace volnet::config {

using experiment::ExperimentSpec;

namespace {

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view value, Parse&& parse, const std::string& key)
{
    std::vector<T> out;
    for (auto item : text::split(value, ',')) {
        item = text::trim(item);
        if (item.empty()) continue;
        auto parsed = parse(item);
        if (!parsed) throw Error(ErrorKind::ConfigError, key + ": unrecognised value '" + std::string(item) + "'");
        out.push_back(*parsed);
    }
    if (out.empty()) throw Error(ErrorKind::ConfigError, key + ": empty list");
    return out;
}

Date parse_date(std::string_view value, const std::string& key)
{
    const auto d = Date::parse(text::trim(value));
    if (!d) throw Error(ErrorKind::ConfigError, key + ": expected YYYY-MM-DD");
    return *d;
}

double parse_real(std::string_view value, const std::string& key)
{
    double v = 0.0;
    if (!text::parse_double(value, v)) throw Error(ErrorKind::ConfigError, key + ": expected a number");
    return v;
}

std::size_t parse_count(std::string_view value, const std::string& key)
{
    std::size_t v = 0;
    if (!text::parse_size(value, v)) throw Error(ErrorKind::ConfigError, key + ": expected a non-negative integer");
    return v;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir,
                                         const std::string& source_name)
{
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t line_no = 0;
    std::optional<int> preset;
    while (std::getline(in, line)) {
        ++line_no;
        const auto row = text::trim(line);
        if (row.empty() || row.front() == '#') continue;
        const auto eq = row.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorKind::ConfigError, source_name + ":" + std::to_string(line_no) + ": expected key=value");
        }
        std::string key(text::trim(row.substr(0, eq)));
        std::string value(text::trim(row.substr(eq + 1)));
        if (key == "preset") {
            const auto n = parse_count(value, key);
            if (n < 1 || n > 3) throw Error(ErrorKind::ConfigError, "preset must be 1, 2 or 3");
            preset = static_cast<int>(n);
            continue;
        }
        entries.emplace_back(std::move(key), std::move(value));
    }

    ExperimentConfig cfg;
    bool train_start = false, train_end = false, test_start = false, test_end = false;
    if (preset) {
        cfg.spec = experiment::experiment_preset(*preset);
        train_start = train_end = test_start = test_end = true;
    }
    auto resolve = [&](const std::string& v) {
        std::filesystem::path p(v);
        return p.is_absolute() ? p : base_dir / p;
    };

    auto& spec = cfg.spec;
    for (const auto& [key, value] : entries) {
        if (key == "name") {
            spec.name = value;
        } else if (key == "train_start") {
            spec.train_range.first = parse_date(value, key);
            train_start = true;
        } else if (key == "train_end") {
            spec.train_range.last = parse_date(value, key);
            train_end = true;
        } else if (key == "test_start") {
            spec.test_range.first = parse_date(value, key);
            test_start = true;
        } else if (key == "test_end") {
            spec.test_range.last = parse_date(value, key);
            test_end = true;
        } else if (key == "validation_fraction") {
            spec.validation_fraction = parse_real(value, key);
        } else if (key == "architectures") {
            spec.architectures = parse_list<nn::Architecture>(value, nn::architecture_from_string, key);
        } else if (key == "algorithms") {
            spec.algorithms = parse_list<train::Algorithm>(value, train::algorithm_from_string, key);
        } else if (key == "hidden_sizes") {
            spec.hidden_sizes = parse_list<std::size_t>(
                value,
                [](std::string_view s) -> std::optional<std::size_t> {
                    std::size_t v = 0;
                    if (!text::parse_size(s, v)) return std::nullopt;
                    return v;
                },
                key);
        } else if (key == "base_seed") {
            unsigned long long v = 0;
            if (!text::parse_u64(value, v)) throw Error(ErrorKind::ConfigError, key + ": expected an unsigned integer");
            spec.base_seed = v;
        } else if (key == "max_epochs") {
            spec.train_config.max_epochs = parse_count(value, key);
        } else if (key == "goal") {
            spec.train_config.goal = parse_real(value, key);
        } else if (key == "patience") {
            spec.train_config.patience = parse_count(value, key);
        } else if (key == "min_grad") {
            spec.train_config.min_grad = parse_real(value, key);
        } else if (key == "data_dir") {
            cfg.data_dir = resolve(value);
        } else if (key == "dataset") {
            cfg.dataset = resolve(value);
        } else if (key == "window") {
            cfg.window = parse_count(value, key);
        } else if (key == "workers") {
            cfg.workers = parse_count(value, key);
        } else if (key.rfind("hp.", 0) == 0) {
            const auto parts = text::split(key, '.');
            if (parts.size() != 3) throw Error(ErrorKind::ConfigError, key + ": expected hp.<ALGORITHM>.<name>");
            const auto alg = train::algorithm_from_string(parts[1]);
            if (!alg) throw Error(ErrorKind::ConfigError, key + ": unknown algorithm");
            auto it = spec.trainers.find(*alg);
            if (it == spec.trainers.end()) it = spec.trainers.emplace(*alg, train::TrainerSpec::defaults(*alg)).first;
            try {
                it->second.set(parts[2], parse_real(value, key));
            } catch (const Error& e) {
                throw Error(ErrorKind::ConfigError, key + ": " + e.what());
            }
        } else {
            throw Error(ErrorKind::ConfigError, source_name + ": unknown key '" + key + "'");
        }
    }
    if (!(train_start && train_end && test_start && test_end)) {
        throw Error(ErrorKind::ConfigError, source_name + ": train_start, train_end, test_start and test_end are required");
    }
    if (cfg.data_dir && cfg.dataset) {
        throw Error(ErrorKind::ConfigError, source_name + ": give either data_dir or dataset, not both");
    }
    try {
        spec.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::ConfigError, source_name + ": " + e.what());
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open config " + path.string());
    return parse_experiment_config(in, path.parent_path(), path.string());
}

void write_spec(std::ostream& out, const ExperimentSpec& spec)
{
    auto join = [&](const auto& items, auto&& render) {
        std::string s;
        for (const auto& item : items) {
            if (!s.empty()) s += ',';
            s += render(item);
        }
        return s;
    };
    out << "name=" << spec.name << '\n'
        << "train_start=" << spec.train_range.first.iso() << '\n'
        << "train_end=" << spec.train_range.last.iso() << '\n'
        << "test_start=" << spec.test_range.first.iso() << '\n'
        << "test_end=" << spec.test_range.last.iso() << '\n'
        << "validation_fraction=" << text::format_exact(spec.validation_fraction) << '\n'
        << "architectures="
        << join(spec.architectures, [](nn::Architecture a) { return std::string(nn::to_string(a)); }) << '\n'
        << "algorithms=" << join(spec.algorithms, [](train::Algorithm a) { return std::string(train::to_string(a)); })
        << '\n'
        << "hidden_sizes=" << join(spec.hidden_sizes, [](std::size_t h) { return std::to_string(h); }) << '\n'
        << "base_seed=" << spec.base_seed << '\n'
        << "max_epochs=" << spec.train_config.max_epochs << '\n'
        << "goal=" << text::format_exact(spec.train_config.goal) << '\n'
        << "patience=" << spec.train_config.patience << '\n'
        << "min_grad=" << text::format_exact(spec.train_config.min_grad) << '\n';
    for (auto alg : spec.algorithms) {
        const auto trainer = spec.trainer_for(alg);
        for (const auto& [name, value] : trainer.hyperparameters()) {
            out << "hp." << train::to_string(alg) << '.' << name << '=' << text::format_exact(value) << '\n';
        }
    }
}

}  // namespace volnet::config

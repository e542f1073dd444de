#pragma once

#include "volnet/experiment.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace volnet::config {

/// Flat `key=value` experiment description. `#` starts a comment line. Unknown keys are
/// errors. Recognised keys:
///
///   preset=1|2|3            canonical date ranges and name (applied before other keys)
///   name, train_start, train_end, test_start, test_end, validation_fraction,
///   architectures=MLFF,CFFN  algorithms=LM,BFGS,...  hidden_sizes=20,30,40
///   base_seed, max_epochs, goal, patience, min_grad
///   hp.<ALGORITHM>.<name>=value   trainer hyperparameter override
///   data_dir=<dir of SYMBOL.csv>  or  dataset=<exported dataset csv>
///   window=20  workers=1
///
/// Relative paths resolve against the config file's directory.
struct ExperimentConfig {
    experiment::ExperimentSpec spec;
    std::optional<std::filesystem::path> data_dir;
    std::optional<std::filesystem::path> dataset;
    std::size_t window = 20;
    std::size_t workers = 1;
};

ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir,
                                         const std::string& source_name);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Writes the spec's keys (every hyperparameter included) in the same syntax.
void write_spec(std::ostream& out, const experiment::ExperimentSpec& spec);

}  // namespace volnet::config

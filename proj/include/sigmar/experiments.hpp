#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "sigmar/path_types.hpp"
#include "sigmar/verification.hpp"

namespace sigmar {

// Anything wrong with a config file: unreadable JSON, unknown keys, values
// outside the target operation's ranges.  The cli maps this to exit 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key set shared by every experiment; each runner reads the fields it
// needs and ignores the rest.  Defaults are coherent, so a config may set
// only the experiment id.
struct ExperimentConfig {
    std::string experiment;
    std::size_t n_paths = 1000;
    std::size_t n_steps = 1024;
    double horizon = 1.0;
    double alpha = 0.7;
    std::vector<double> piece_breaks;  // with piece_values; empty = use alpha
    std::vector<double> piece_values;
    double delta = 0.6;
    std::uint64_t seed = 1;
    double band_scale = 0.5;     // zero band = band_scale * sqrt(dt)
    double eps_exponent = 0.4;   // occupation local-time window = dt^eps_exponent
    std::string probe = "abs_bm";
    std::size_t n_outer = 100;   // nested conditional estimates
    std::size_t n_inner = 1000;
    double t_freeze = 0.5;
    double min_level = 0.1;
    double level_k = 0.5;        // last-passage tail level
    double t_offset = 0.125;
    bool dump_paths = false;
    std::string out_dir = ".";
    unsigned threads = 1;
};

// Parses a flat JSON object.  Unknown keys and wrong value types are
// ConfigErrors; JSON syntax errors keep the parser's line/column anchor.
ExperimentConfig parse_config(const std::string& json_text);

// Range checks shared by every experiment; the runners' own operations
// reject anything finer.  Throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

struct ExperimentResult {
    std::vector<VerificationReport> reports;
    // First few ensemble paths, role-tagged, when dump_paths is set.
    std::vector<SamplePath> dumped;
};

struct ExperimentDef {
    std::string id;
    std::string blurb;
    std::function<ExperimentResult(const ExperimentConfig&)> run;
};

// Stable-ordered catalog; ids are what configs and `list` use.
const std::vector<ExperimentDef>& experiment_registry();
const ExperimentDef* find_experiment(const std::string& id);

// Validates, dispatches, and stamps every report with the config seed.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// manifest.json: config echo plus effective seed and code version.  out_dir
// and threads are runtime knobs that never change the numbers, so they stay
// out of the echo.
void write_manifest_json(std::ostream& out, const ExperimentConfig& cfg);

}  // namespace sigmar

// Command implementations behind the CLI: configuration folding, artifact
// serialization, and reload of fitted models for prediction and checking.
#ifndef PROFMIX_COMMANDS_HPP
#define PROFMIX_COMMANDS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "profmix/io.hpp"
#include "profmix/types.hpp"

namespace profmix {

// Configuration problems (unknown keys, missing required values). Exits with
// the same code as other input errors.
struct ConfigError : DataError {
    using DataError::DataError;
};

struct RunConfig {
    std::string input;
    std::string count_column = "y";
    bool standardize = false;
    int k = 3;
    int k_min = 2;
    int k_max = 4;
    bool have_seed = false;
    std::uint64_t seed = 0;
    Hyperparameters hyper;  // alpha stays empty here; scalar alpha below
    double alpha = 1.0;     // Dirichlet concentration, replicated per K
    WeightPriorKind weight_kind = WeightPriorKind::Dirichlet;
    double logit_sd = 1.0;
    McmcSchedule schedule;
    std::string out_dir;
    int n_rep = 0;  // posterior predictive replicates; 0 means training n
    std::string model_dir;
    // simulate inputs: either a named preset or a full custom truth
    std::string preset;
    std::vector<double> truth_weights;
    std::vector<double> truth_theta;
    std::vector<double> truth_variances;
    std::vector<std::vector<double>> truth_means;  // K rows of P entries
    int truth_n = 0;
    std::vector<std::string> truth_variable_names;

    // Every model-relevant key with its effective value, sorted by key.
    // Output locations and replicate counts are excluded so they never
    // perturb the hash.
    KeyValueList canonical_items() const;
};

// Folds a config file and command-line overrides (overrides win) into a
// RunConfig. Unknown keys and unparsable values raise ConfigError.
RunConfig parse_config(const KeyValueList& file_items, const KeyValueList& overrides);

// FNV-1a over the canonical key=value serialization, as a fixed-width hex
// string. Stamped into every artifact.
std::string config_hash(const RunConfig& config);

// Model spec and schedule implied by a config, for a given K.
ModelSpec model_spec_from(const RunConfig& config, int k);
McmcSchedule schedule_from(const RunConfig& config);

struct LoadedModel {
    PosteriorSamples samples;
    int k = 0;
    int n_train = 0;
    std::string count_column;
    std::vector<std::string> variable_names;
    std::string hash;
};

// Reads metadata.txt and samples.csv from a fit output directory, refusing
// mismatched config hashes between the two.
LoadedModel load_posterior_samples(const std::string& model_dir);

void cmd_fit(const RunConfig& config);
void cmd_select(const RunConfig& config);
void cmd_predict(const RunConfig& config);
void cmd_ppc(const RunConfig& config);
void cmd_simulate(const RunConfig& config);

}  // namespace profmix

#endif

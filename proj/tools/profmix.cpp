// Command-line front end. Subcommands: fit, select, predict, ppc, simulate.
// Exit codes: 0 success, 2 input/config error, 3 numerical failure.
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "profmix/commands.hpp"
#include "profmix/io.hpp"

namespace {

struct CliArgs {
    std::string config_path;
    profmix::KeyValueList overrides;
};

// Every flag funnels into the same key=value space as the config file, so
// precedence is uniform: file first, then flags.
void add_common_flags(CLI::App* cmd, CliArgs& args) {
    cmd->add_option_function<std::string>(
           "--config", [&args](const std::string& value) { args.config_path = value; },
           "flat key=value config file");
    auto forward = [&args, cmd](const std::string& flag, const std::string& key,
                                const std::string& help) {
        cmd->add_option_function<std::string>(
            flag,
            [&args, key](const std::string& value) { args.overrides.emplace_back(key, value); },
            help);
    };
    forward("--input", "input", "input CSV path");
    forward("--count-column", "count_column", "name of the count column (default y)");
    forward("--seed", "seed", "RNG seed (required for stochastic commands)");
    forward("--k", "k", "number of clusters");
    forward("--k-range", "k_range", "K range for selection, e.g. 2..4");
    forward("--out", "out", "output directory");
    forward("--model-dir", "model_dir", "directory of a previous fit");
    forward("--n-rep", "n_rep", "replicates per posterior draw (default: training n)");
    forward("--burn-in", "burn_in", "burn-in iterations");
    forward("--n-iter", "n_iter", "post-burn-in iterations");
    forward("--thin", "thin", "thinning interval");
    forward("--c", "c", "shrinkage prior shape");
    forward("--d", "d", "shrinkage prior rate");
    forward("--r", "r", "variance prior shape");
    forward("--s", "s", "variance prior scale");
    forward("--sigma0-sq", "sigma0_sq", "intercept prior variance");
    forward("--alpha", "alpha", "Dirichlet concentration (scalar)");
    forward("--weight-prior", "weight_prior", "dirichlet or logit");
    forward("--logit-sd", "logit_sd", "prior SD of the logit weight parameters");
    forward("--mh-step-lambda", "mh_step_lambda", "initial shrinkage MH step");
    forward("--mh-step-gamma", "mh_step_gamma", "initial intercept MH step");
    forward("--preset", "preset", "simulate preset: benchmark or benchmark_irrelevant");
    cmd->add_flag_function(
        "--standardize",
        [&args](std::int64_t) { args.overrides.emplace_back("standardize", "1"); },
        "center and scale covariates");
    cmd->add_flag_function(
        "--no-adapt", [&args](std::int64_t) { args.overrides.emplace_back("adapt", "0"); },
        "disable burn-in step adaptation");
}

profmix::RunConfig build_config(const CliArgs& args) {
    profmix::KeyValueList file_items;
    if (!args.config_path.empty()) {
        file_items = profmix::read_key_values(args.config_path);
    }
    return profmix::parse_config(file_items, args.overrides);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian profile-regression mixture model for count outcomes"};
    app.require_subcommand(1);

    CliArgs args;
    void (*commands[])(const profmix::RunConfig&) = {
        profmix::cmd_fit, profmix::cmd_select, profmix::cmd_predict, profmix::cmd_ppc,
        profmix::cmd_simulate};
    const char* names[] = {"fit", "select", "predict", "ppc", "simulate"};
    const char* descriptions[] = {
        "fit a K-cluster model and write posterior artifacts",
        "fit a range of K and choose by BIC",
        "membership probabilities and odds for new covariate profiles",
        "posterior predictive replication of the count distribution",
        "generate a synthetic dataset from a known truth"};
    std::vector<CLI::App*> sub;
    for (int i = 0; i < 5; ++i) {
        sub.push_back(app.add_subcommand(names[i], descriptions[i]));
        add_common_flags(sub.back(), args);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;
    }

    try {
        const profmix::RunConfig config = build_config(args);
        for (int i = 0; i < 5; ++i) {
            if (sub[i]->parsed()) {
                commands[i](config);
            }
        }
    } catch (const profmix::NumericalError& err) {
        std::cerr << "numerical error: " << err.what() << "\n";
        return 3;
    } catch (const profmix::DataError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 0;
}

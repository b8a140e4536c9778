#include "profmix/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "profmix/datagen.hpp"
#include "profmix/inference.hpp"
#include "profmix/sampler.hpp"

namespace profmix {

namespace {

std::uint64_t parse_u64(const std::string& text) {
    std::uint64_t value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("not an unsigned integer: '" + text + "'");
    }
    return value;
}

int parse_int(const std::string& text, const std::string& key) {
    try {
        const long value = parse_long(text);
        if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max()) {
            throw DataError("out of range");
        }
        return static_cast<int>(value);
    } catch (const DataError&) {
        throw ConfigError("config key '" + key + "': not an integer: '" + text + "'");
    }
}

double parse_real(const std::string& text, const std::string& key) {
    try {
        return parse_double(text);
    } catch (const DataError&) {
        throw ConfigError("config key '" + key + "': not a number: '" + text + "'");
    }
}

bool parse_bool(const std::string& text, const std::string& key) {
    if (text == "1" || text == "true") {
        return true;
    }
    if (text == "0" || text == "false") {
        return false;
    }
    throw ConfigError("config key '" + key + "': expected true/false, got '" + text + "'");
}

std::vector<std::string> split_on(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string part;
    for (char ch : text) {
        if (ch == sep) {
            parts.push_back(part);
            part.clear();
        } else {
            part.push_back(ch);
        }
    }
    parts.push_back(part);
    return parts;
}

std::vector<double> parse_real_list(const std::string& text, const std::string& key) {
    std::vector<double> values;
    for (const std::string& part : split_on(text, ',')) {
        values.push_back(parse_real(part, key));
    }
    return values;
}

std::string join_reals(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) {
            out.push_back(',');
        }
        out += format_double(values[i]);
    }
    return out;
}

std::string join_strings(const std::vector<std::string>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) {
            out.push_back(',');
        }
        out += values[i];
    }
    return out;
}

const std::string* find_value(const KeyValueList& items, const std::string& key) {
    const std::string* found = nullptr;
    for (const auto& [k, v] : items) {
        if (k == key) {
            found = &v;  // later entries win
        }
    }
    return found;
}

const std::string& require_value(const KeyValueList& items, const std::string& key,
                                 const std::string& path) {
    const std::string* value = find_value(items, key);
    if (value == nullptr) {
        throw DataError(path + ": missing key '" + key + "'");
    }
    return *value;
}

void require_field(const std::string& value, const char* key, const char* command) {
    if (value.empty()) {
        throw ConfigError(std::string(command) + " requires '" + key + "'");
    }
}

void require_seed(const RunConfig& config, const char* command) {
    if (!config.have_seed) {
        throw ConfigError(std::string(command) + " requires an explicit seed");
    }
}

void ensure_out_dir(const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw DataError("cannot create output directory '" + out_dir + "'");
    }
}

std::string path_join(const std::string& dir, const char* name) {
    return (std::filesystem::path(dir) / name).string();
}

ModelSpec base_spec(const RunConfig& config) {
    ModelSpec spec;
    spec.k = config.k;
    spec.hyper = config.hyper;
    spec.hyper.alpha = Eigen::VectorXd::Constant(1, config.alpha);
    if (config.weight_kind == WeightPriorKind::Dirichlet) {
        spec.weight_prior = WeightPrior::dirichlet(Eigen::VectorXd::Constant(1, config.alpha));
    } else {
        spec.weight_prior = WeightPrior::multinomial_logit(config.logit_sd);
    }
    return spec;
}

std::vector<std::string> samples_header(int k, const std::vector<std::string>& names) {
    std::vector<std::string> header{"iteration", "loglik"};
    for (int c = 1; c <= k; ++c) {
        header.push_back("pi_" + std::to_string(c));
    }
    for (int c = 1; c <= k; ++c) {
        header.push_back("gamma_" + std::to_string(c));
    }
    for (int c = 1; c <= k; ++c) {
        for (const std::string& name : names) {
            header.push_back("mean_" + std::to_string(c) + "_" + name);
        }
    }
    for (const std::string& name : names) {
        header.push_back("common_" + name);
    }
    for (const std::string& name : names) {
        header.push_back("lambda_" + name);
    }
    for (const std::string& name : names) {
        header.push_back("sigma2_" + name);
    }
    return header;
}

void write_samples_csv(const std::string& path, const PosteriorSamples& samples,
                       const std::vector<std::string>& names, const std::string& hash) {
    const int k = samples.states.front().n_clusters();
    const int p = samples.states.front().n_variables();
    CsvTable table;
    table.header = samples_header(k, names);
    for (int t = 0; t < samples.n_states(); ++t) {
        const ChainState& state = samples.states[t];
        std::vector<std::string> row;
        row.reserve(table.header.size());
        row.push_back(std::to_string(samples.meta.burn_in +
                                     static_cast<long long>(t) * samples.meta.thin + 1));
        row.push_back(format_double(samples.observed_loglik[t]));
        for (int c = 0; c < k; ++c) {
            row.push_back(format_double(state.weights[c]));
        }
        for (int c = 0; c < k; ++c) {
            row.push_back(format_double(state.intercepts[c]));
        }
        for (int c = 0; c < k; ++c) {
            for (int j = 0; j < p; ++j) {
                row.push_back(format_double(state.cluster_means(c, j)));
            }
        }
        for (int j = 0; j < p; ++j) {
            row.push_back(format_double(state.common_means[j]));
        }
        for (int j = 0; j < p; ++j) {
            row.push_back(format_double(state.shrinkage[j]));
        }
        for (int j = 0; j < p; ++j) {
            row.push_back(format_double(state.variances[j]));
        }
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table, {"config_hash=" + hash});
}

std::string stat_text(const SummaryStat& stat) {
    char buffer[128];
    std::snprintf(buffer, sizeof(buffer), "%.4g (sd %.3g, 95%% CI %.4g..%.4g)", stat.mean,
                  stat.sd, stat.lo, stat.hi);
    return buffer;
}

void write_summary_txt(const std::string& path, const RunConfig& config, const Dataset& data,
                       const PosteriorSamples& samples, const ProfileReport& report,
                       const InformationCriteria& ic,
                       const std::vector<RelevanceEntry>& relevance, const std::string& hash) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write '" + path + "'");
    }
    const int k = samples.states.front().n_clusters();
    out << "profile mixture fit\n";
    out << "config_hash: " << hash << "\n";
    out << "clusters: " << k << "  covariates: " << data.n_variables()
        << "  subjects: " << data.n_subjects() << "\n";
    out << "retained samples: " << samples.n_states() << " (burn-in " << samples.meta.burn_in
        << ", iterations " << samples.meta.n_iter << ", thin " << samples.meta.thin << ")\n";
    out << "seed: " << samples.meta.seed << "\n";
    char line[160];
    std::snprintf(line, sizeof(line),
                  "deviance (posterior-mean plug-in): %.6g  nu: %d  AIC: %.6g  BIC: %.6g\n",
                  ic.deviance, ic.nu_k, ic.aic, ic.bic);
    out << line;
    std::snprintf(line, sizeof(line), "acceptance: shrinkage %.3f, intercepts %.3f",
                  samples.meta.acceptance.shrinkage, samples.meta.acceptance.intercepts);
    out << line;
    if (config.weight_kind == WeightPriorKind::MultinomialLogit) {
        std::snprintf(line, sizeof(line), ", logit weights %.3f",
                      samples.meta.acceptance.logit_weights);
        out << line;
    }
    out << "\n\n";
    for (int c = 0; c < k; ++c) {
        out << "cluster " << (c + 1) << ":\n";
        out << "  pi:    " << stat_text(report.weights[c]) << "\n";
        out << "  theta: " << stat_text(report.theta[c]) << "\n";
        for (std::size_t j = 0; j < report.variable_names.size(); ++j) {
            out << "  " << report.variable_names[j] << ": "
                << stat_text(report.cluster_means[j][c]) << "\n";
        }
    }
    out << "\nrelevance (ascending shrinkage median):\n";
    for (const RelevanceEntry& entry : relevance) {
        std::snprintf(line, sizeof(line), "  %s: median %.4g (quartiles %.4g..%.4g)\n",
                      report.variable_names[entry.variable].c_str(), entry.box.median,
                      entry.box.q1, entry.box.q3);
        out << line;
    }
    if (!out) {
        throw DataError("write failed for '" + path + "'");
    }
}

void write_fit_metadata(const std::string& path, const RunConfig& config, const Dataset& data,
                        const PosteriorSamples& samples, const InformationCriteria& ic,
                        const std::string& hash) {
    KeyValueList items;
    items.emplace_back("config_hash", hash);
    items.emplace_back("command", "fit");
    for (const auto& item : config.canonical_items()) {
        items.push_back(item);
    }
    items.emplace_back("model_k", std::to_string(config.k));
    items.emplace_back("model_n", std::to_string(data.n_subjects()));
    items.emplace_back("model_p", std::to_string(data.n_variables()));
    for (Eigen::Index j = 0; j < data.n_variables(); ++j) {
        items.emplace_back("variable_" + std::to_string(j + 1), data.variable_names[j]);
    }
    const Standardization& std_info = samples.meta.standardization;
    items.emplace_back("std_enabled", std_info.enabled ? "1" : "0");
    if (std_info.enabled) {
        for (Eigen::Index j = 0; j < data.n_variables(); ++j) {
            items.emplace_back("std_mean_" + std::to_string(j + 1),
                               format_double(std_info.mean[j]));
            items.emplace_back("std_sd_" + std::to_string(j + 1), format_double(std_info.sd[j]));
        }
    }
    items.emplace_back("n_states", std::to_string(samples.n_states()));
    items.emplace_back("acceptance_shrinkage", format_double(samples.meta.acceptance.shrinkage));
    items.emplace_back("acceptance_intercepts",
                       format_double(samples.meta.acceptance.intercepts));
    if (config.weight_kind == WeightPriorKind::MultinomialLogit) {
        items.emplace_back("acceptance_logit_weights",
                           format_double(samples.meta.acceptance.logit_weights));
    }
    items.emplace_back("adapted_step_lambda", format_double(samples.meta.adapted_step_lambda));
    items.emplace_back("adapted_step_gamma", format_double(samples.meta.adapted_step_gamma));
    items.emplace_back("deviance_plug_in", "posterior_mean");
    items.emplace_back("deviance", format_double(ic.deviance));
    items.emplace_back("nu", std::to_string(ic.nu_k));
    items.emplace_back("aic", format_double(ic.aic));
    items.emplace_back("bic", format_double(ic.bic));
    write_key_values(path, items);
}

}  // namespace

KeyValueList RunConfig::canonical_items() const {
    KeyValueList items;
    items.emplace_back("adapt", schedule.adapt_during_burnin ? "1" : "0");
    items.emplace_back("alpha", format_double(alpha));
    items.emplace_back("burn_in", std::to_string(schedule.burn_in));
    items.emplace_back("c", format_double(hyper.c));
    items.emplace_back("count_column", count_column);
    items.emplace_back("d", format_double(hyper.d));
    items.emplace_back("input", input);
    items.emplace_back("k", std::to_string(k));
    items.emplace_back("k_max", std::to_string(k_max));
    items.emplace_back("k_min", std::to_string(k_min));
    items.emplace_back("logit_sd", format_double(logit_sd));
    items.emplace_back("mh_step_gamma", format_double(schedule.mh_step_gamma));
    items.emplace_back("mh_step_lambda", format_double(schedule.mh_step_lambda));
    items.emplace_back("n_iter", std::to_string(schedule.n_iter));
    items.emplace_back("preset", preset);
    items.emplace_back("r", format_double(hyper.r));
    items.emplace_back("s", format_double(hyper.s));
    items.emplace_back("seed", have_seed ? std::to_string(seed) : "");
    items.emplace_back("sigma0_sq", format_double(hyper.sigma0_sq));
    items.emplace_back("standardize", standardize ? "1" : "0");
    items.emplace_back("thin", std::to_string(schedule.thin));
    std::string means_text;
    for (std::size_t row = 0; row < truth_means.size(); ++row) {
        if (row) {
            means_text.push_back(';');
        }
        means_text += join_reals(truth_means[row]);
    }
    items.emplace_back("truth_means", means_text);
    items.emplace_back("truth_n", std::to_string(truth_n));
    items.emplace_back("truth_theta", join_reals(truth_theta));
    items.emplace_back("truth_variable_names", join_strings(truth_variable_names));
    items.emplace_back("truth_variances", join_reals(truth_variances));
    items.emplace_back("truth_weights", join_reals(truth_weights));
    items.emplace_back("weight_prior",
                       weight_kind == WeightPriorKind::Dirichlet ? "dirichlet" : "logit");
    return items;
}

RunConfig parse_config(const KeyValueList& file_items, const KeyValueList& overrides) {
    RunConfig config;
    KeyValueList merged = file_items;
    merged.insert(merged.end(), overrides.begin(), overrides.end());
    for (const auto& [key, value] : merged) {
        if (key == "input") {
            config.input = value;
        } else if (key == "count_column") {
            config.count_column = value;
        } else if (key == "standardize") {
            config.standardize = parse_bool(value, key);
        } else if (key == "k") {
            config.k = parse_int(value, key);
        } else if (key == "k_range") {
            const std::size_t sep = value.find("..");
            if (sep == std::string::npos) {
                throw ConfigError("config key 'k_range': expected A..B, got '" + value + "'");
            }
            config.k_min = parse_int(value.substr(0, sep), key);
            config.k_max = parse_int(value.substr(sep + 2), key);
        } else if (key == "seed") {
            config.seed = parse_u64(value);
            config.have_seed = true;
        } else if (key == "c") {
            config.hyper.c = parse_real(value, key);
        } else if (key == "d") {
            config.hyper.d = parse_real(value, key);
        } else if (key == "r") {
            config.hyper.r = parse_real(value, key);
        } else if (key == "s") {
            config.hyper.s = parse_real(value, key);
        } else if (key == "sigma0_sq") {
            config.hyper.sigma0_sq = parse_real(value, key);
        } else if (key == "alpha") {
            config.alpha = parse_real(value, key);
        } else if (key == "weight_prior") {
            if (value == "dirichlet") {
                config.weight_kind = WeightPriorKind::Dirichlet;
            } else if (value == "logit") {
                config.weight_kind = WeightPriorKind::MultinomialLogit;
            } else {
                throw ConfigError("config key 'weight_prior': expected dirichlet or logit");
            }
        } else if (key == "logit_sd") {
            config.logit_sd = parse_real(value, key);
        } else if (key == "burn_in") {
            config.schedule.burn_in = parse_int(value, key);
        } else if (key == "n_iter") {
            config.schedule.n_iter = parse_int(value, key);
        } else if (key == "thin") {
            config.schedule.thin = parse_int(value, key);
        } else if (key == "mh_step_lambda") {
            config.schedule.mh_step_lambda = parse_real(value, key);
        } else if (key == "mh_step_gamma") {
            config.schedule.mh_step_gamma = parse_real(value, key);
        } else if (key == "adapt") {
            config.schedule.adapt_during_burnin = parse_bool(value, key);
        } else if (key == "out") {
            config.out_dir = value;
        } else if (key == "n_rep") {
            config.n_rep = parse_int(value, key);
        } else if (key == "model_dir") {
            config.model_dir = value;
        } else if (key == "preset") {
            config.preset = value;
        } else if (key == "truth_weights") {
            config.truth_weights = parse_real_list(value, key);
        } else if (key == "truth_theta") {
            config.truth_theta = parse_real_list(value, key);
        } else if (key == "truth_variances") {
            config.truth_variances = parse_real_list(value, key);
        } else if (key == "truth_means") {
            config.truth_means.clear();
            for (const std::string& row : split_on(value, ';')) {
                config.truth_means.push_back(parse_real_list(row, key));
            }
        } else if (key == "truth_n") {
            config.truth_n = parse_int(value, key);
        } else if (key == "truth_variable_names") {
            config.truth_variable_names = split_on(value, ',');
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    return config;
}

std::string config_hash(const RunConfig& config) {
    std::string canonical;
    for (const auto& [key, value] : config.canonical_items()) {
        canonical += key;
        canonical.push_back('=');
        canonical += value;
        canonical.push_back('\n');
    }
    return hash_hex(fnv1a64(canonical));
}

ModelSpec model_spec_from(const RunConfig& config, int k) {
    return spec_for_k(base_spec(config), k);
}

McmcSchedule schedule_from(const RunConfig& config) {
    McmcSchedule schedule = config.schedule;
    schedule.seed = config.seed;
    schedule.validate();
    return schedule;
}

LoadedModel load_posterior_samples(const std::string& model_dir) {
    const std::string meta_path = path_join(model_dir, "metadata.txt");
    const KeyValueList meta = read_key_values(meta_path);

    LoadedModel model;
    model.hash = require_value(meta, "config_hash", meta_path);
    model.k = parse_int(require_value(meta, "model_k", meta_path), "model_k");
    model.n_train = parse_int(require_value(meta, "model_n", meta_path), "model_n");
    model.count_column = require_value(meta, "count_column", meta_path);
    const int p = parse_int(require_value(meta, "model_p", meta_path), "model_p");
    for (int j = 1; j <= p; ++j) {
        model.variable_names.push_back(
            require_value(meta, "variable_" + std::to_string(j), meta_path));
    }

    SampleMeta& sample_meta = model.samples.meta;
    sample_meta.seed = parse_u64(require_value(meta, "seed", meta_path));
    sample_meta.burn_in = parse_int(require_value(meta, "burn_in", meta_path), "burn_in");
    sample_meta.n_iter = parse_int(require_value(meta, "n_iter", meta_path), "n_iter");
    sample_meta.thin = parse_int(require_value(meta, "thin", meta_path), "thin");
    sample_meta.acceptance.shrinkage =
        parse_double(require_value(meta, "acceptance_shrinkage", meta_path));
    sample_meta.acceptance.intercepts =
        parse_double(require_value(meta, "acceptance_intercepts", meta_path));
    if (const std::string* logit = find_value(meta, "acceptance_logit_weights")) {
        sample_meta.acceptance.logit_weights = parse_double(*logit);
    }
    sample_meta.adapted_step_lambda =
        parse_double(require_value(meta, "adapted_step_lambda", meta_path));
    sample_meta.adapted_step_gamma =
        parse_double(require_value(meta, "adapted_step_gamma", meta_path));
    sample_meta.standardization.enabled =
        require_value(meta, "std_enabled", meta_path) == "1";
    if (sample_meta.standardization.enabled) {
        sample_meta.standardization.mean.resize(p);
        sample_meta.standardization.sd.resize(p);
        for (int j = 0; j < p; ++j) {
            sample_meta.standardization.mean[j] =
                parse_double(require_value(meta, "std_mean_" + std::to_string(j + 1), meta_path));
            sample_meta.standardization.sd[j] =
                parse_double(require_value(meta, "std_sd_" + std::to_string(j + 1), meta_path));
        }
    }

    const std::string samples_path = path_join(model_dir, "samples.csv");
    const CsvTable table = read_csv(samples_path);
    std::string samples_hash;
    for (const std::string& comment : table.comments) {
        if (comment.rfind("config_hash=", 0) == 0) {
            samples_hash = comment.substr(12);
        }
    }
    if (samples_hash != model.hash) {
        throw DataError("config hash mismatch between '" + meta_path + "' and '" + samples_path +
                        "'; refusing mixed artifacts");
    }
    if (table.header != samples_header(model.k, model.variable_names)) {
        throw DataError(samples_path + ": column schema does not match the metadata");
    }
    if (table.rows.empty()) {
        throw DataError(samples_path + ": no retained samples");
    }

    const int k = model.k;
    for (std::size_t t = 0; t < table.rows.size(); ++t) {
        const std::vector<std::string>& row = table.rows[t];
        ChainState state;
        state.weights.resize(k);
        state.intercepts.resize(k);
        state.cluster_means.resize(k, p);
        state.common_means.resize(p);
        state.shrinkage.resize(p);
        state.variances.resize(p);
        int col = 1;
        model.samples.observed_loglik.push_back(parse_double(row[col++]));
        for (int c = 0; c < k; ++c) {
            state.weights[c] = parse_double(row[col++]);
        }
        for (int c = 0; c < k; ++c) {
            state.intercepts[c] = parse_double(row[col++]);
        }
        for (int c = 0; c < k; ++c) {
            for (int j = 0; j < p; ++j) {
                state.cluster_means(c, j) = parse_double(row[col++]);
            }
        }
        for (int j = 0; j < p; ++j) {
            state.common_means[j] = parse_double(row[col++]);
        }
        for (int j = 0; j < p; ++j) {
            state.shrinkage[j] = parse_double(row[col++]);
        }
        for (int j = 0; j < p; ++j) {
            state.variances[j] = parse_double(row[col++]);
        }
        state.increments.resize(std::max(k - 1, 0));
        for (int c = 0; c + 1 < k; ++c) {
            state.increments[c] = state.intercepts[c + 1] - state.intercepts[c];
        }
        state.validate();
        model.samples.states.push_back(std::move(state));
    }
    model.samples.validate();
    return model;
}

void cmd_fit(const RunConfig& config) {
    require_field(config.input, "input", "fit");
    require_field(config.out_dir, "out", "fit");
    require_seed(config, "fit");

    Dataset data = load_dataset_csv(config.input, config.count_column);
    if (config.standardize) {
        apply_standardization(data);
    }
    const ModelSpec spec = model_spec_from(config, config.k);
    const McmcSchedule schedule = schedule_from(config);
    const PosteriorSamples samples = run_chain(spec, data, schedule);

    const InformationCriteria ic = compute_ic(samples, data, config.k);
    const ProfileReport report = profile_report(samples, data);
    const std::vector<RelevanceEntry> relevance = relevance_ranking(samples);
    const std::string hash = config_hash(config);

    ensure_out_dir(config.out_dir);
    write_fit_metadata(path_join(config.out_dir, "metadata.txt"), config, data, samples, ic,
                       hash);
    write_samples_csv(path_join(config.out_dir, "samples.csv"), samples, data.variable_names,
                      hash);
    write_summary_txt(path_join(config.out_dir, "summary.txt"), config, data, samples, report,
                      ic, relevance, hash);

    const std::vector<std::string> comment{"config_hash=" + hash};
    const int k = config.k;
    {
        CsvTable table;
        table.header = {"variable", "cluster", "mean", "sd", "lo", "hi"};
        for (std::size_t j = 0; j < report.variable_names.size(); ++j) {
            for (int c = 0; c < k; ++c) {
                const SummaryStat& stat = report.cluster_means[j][c];
                table.rows.push_back({report.variable_names[j], std::to_string(c + 1),
                                      format_double(stat.mean), format_double(stat.sd),
                                      format_double(stat.lo), format_double(stat.hi)});
            }
        }
        write_csv(path_join(config.out_dir, "profiles.csv"), table, comment);
    }
    {
        CsvTable table;
        table.header = {"cluster", "pi_mean", "pi_sd", "pi_lo", "pi_hi",
                        "theta_mean", "theta_sd", "theta_lo", "theta_hi"};
        for (int c = 0; c < k; ++c) {
            table.rows.push_back(
                {std::to_string(c + 1), format_double(report.weights[c].mean),
                 format_double(report.weights[c].sd), format_double(report.weights[c].lo),
                 format_double(report.weights[c].hi), format_double(report.theta[c].mean),
                 format_double(report.theta[c].sd), format_double(report.theta[c].lo),
                 format_double(report.theta[c].hi)});
        }
        write_csv(path_join(config.out_dir, "clusters.csv"), table, comment);
    }
    {
        CsvTable table;
        table.header = {"variable", "cluster_a", "cluster_b", "dstar"};
        for (std::size_t j = 0; j < report.variable_names.size(); ++j) {
            for (int a = 0; a < k; ++a) {
                for (int b = 0; b < k; ++b) {
                    if (a != b) {
                        table.rows.push_back({report.variable_names[j], std::to_string(a + 1),
                                              std::to_string(b + 1),
                                              format_double(report.dstar[j](a, b))});
                    }
                }
            }
        }
        write_csv(path_join(config.out_dir, "dstar.csv"), table, comment);
    }
    {
        CsvTable table;
        table.header = {"rank", "variable", "lambda_median", "lambda_q1", "lambda_q3"};
        for (std::size_t rank = 0; rank < relevance.size(); ++rank) {
            const RelevanceEntry& entry = relevance[rank];
            table.rows.push_back({std::to_string(rank + 1),
                                  report.variable_names[entry.variable],
                                  format_double(entry.box.median), format_double(entry.box.q1),
                                  format_double(entry.box.q3)});
        }
        write_csv(path_join(config.out_dir, "relevance.csv"), table, comment);
    }
    std::cout << "fit: wrote " << config.out_dir << " (K=" << k << ", BIC="
              << format_double(ic.bic) << ")\n";
}

void cmd_select(const RunConfig& config) {
    require_field(config.input, "input", "select");
    require_field(config.out_dir, "out", "select");
    require_seed(config, "select");

    Dataset data = load_dataset_csv(config.input, config.count_column);
    if (config.standardize) {
        apply_standardization(data);
    }
    const McmcSchedule schedule = schedule_from(config);
    const SelectionResult result =
        select_k(data, base_spec(config), config.k_min, config.k_max, schedule);
    const std::string hash = config_hash(config);

    ensure_out_dir(config.out_dir);
    CsvTable table;
    table.header = {"K", "deviance", "nu", "AIC", "BIC"};
    for (const InformationCriteria& ic : result.criteria) {
        table.rows.push_back({std::to_string(ic.k), format_double(ic.deviance),
                              std::to_string(ic.nu_k), format_double(ic.aic),
                              format_double(ic.bic)});
    }
    write_csv(path_join(config.out_dir, "criteria.csv"), table,
              {"config_hash=" + hash, "chosen_k=" + std::to_string(result.chosen_k)});

    KeyValueList items;
    items.emplace_back("config_hash", hash);
    items.emplace_back("command", "select");
    for (const auto& item : config.canonical_items()) {
        items.push_back(item);
    }
    items.emplace_back("chosen_k", std::to_string(result.chosen_k));
    write_key_values(path_join(config.out_dir, "metadata.txt"), items);
    std::cout << "select: chose K=" << result.chosen_k << "\n";
}

void cmd_predict(const RunConfig& config) {
    require_field(config.model_dir, "model_dir", "predict");
    require_field(config.input, "input", "predict");
    require_field(config.out_dir, "out", "predict");

    const LoadedModel model = load_posterior_samples(config.model_dir);
    const CsvTable patients = read_csv(config.input);

    std::vector<int> column_of;
    std::vector<std::string> missing;
    for (const std::string& name : model.variable_names) {
        const int col = patients.column(name);
        if (col < 0) {
            missing.push_back(name);
        }
        column_of.push_back(col);
    }
    std::vector<std::string> extra;
    for (const std::string& name : patients.header) {
        if (std::find(model.variable_names.begin(), model.variable_names.end(), name) ==
            model.variable_names.end()) {
            extra.push_back(name);
        }
    }
    if (!missing.empty() || !extra.empty()) {
        std::string message = config.input + ": covariate columns do not match the model";
        if (!missing.empty()) {
            message += "; missing: " + join_strings(missing);
        }
        if (!extra.empty()) {
            message += "; unexpected: " + join_strings(extra);
        }
        throw DataError(message);
    }
    if (patients.rows.empty()) {
        throw DataError(config.input + ": no patient rows");
    }

    const int p = static_cast<int>(model.variable_names.size());
    const int k = model.k;
    CsvTable predictions;
    predictions.header = {"patient"};
    for (int c = 1; c <= k; ++c) {
        predictions.header.push_back("membership_" + std::to_string(c));
    }
    for (int a = 1; a <= k; ++a) {
        for (int b = 1; b <= k; ++b) {
            if (a != b) {
                predictions.header.push_back("odds_" + std::to_string(a) + "_" +
                                             std::to_string(b));
            }
        }
    }
    CsvTable densities;
    densities.header = {"patient", "sample"};
    for (int c = 1; c <= k; ++c) {
        densities.header.push_back("membership_" + std::to_string(c));
    }

    for (std::size_t row = 0; row < patients.rows.size(); ++row) {
        Eigen::VectorXd x(p);
        for (int j = 0; j < p; ++j) {
            const std::string& cell = patients.rows[row][column_of[j]];
            try {
                x[j] = parse_double(cell);
            } catch (const DataError& err) {
                throw DataError(config.input + ": line " +
                                std::to_string(patients.line_numbers[row]) + ", column '" +
                                model.variable_names[j] + "': " + err.what());
            }
        }
        const MembershipPosterior membership = membership_posterior(model.samples, x);
        std::vector<std::string> out_row{std::to_string(row + 1)};
        for (int c = 0; c < k; ++c) {
            out_row.push_back(format_double(membership.mean[c]));
        }
        for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) {
                if (a != b) {
                    const double denom = membership.mean[b];
                    out_row.push_back(denom > 0.0 ? format_double(membership.mean[a] / denom)
                                                  : "inf");
                }
            }
        }
        predictions.rows.push_back(std::move(out_row));
        for (Eigen::Index t = 0; t < membership.per_sample.rows(); ++t) {
            std::vector<std::string> density_row{std::to_string(row + 1),
                                                 std::to_string(t + 1)};
            for (int c = 0; c < k; ++c) {
                density_row.push_back(format_double(membership.per_sample(t, c)));
            }
            densities.rows.push_back(std::move(density_row));
        }
    }

    ensure_out_dir(config.out_dir);
    const std::vector<std::string> comment{"config_hash=" + model.hash};
    write_csv(path_join(config.out_dir, "predictions.csv"), predictions, comment);
    write_csv(path_join(config.out_dir, "membership_samples.csv"), densities, comment);
    std::cout << "predict: wrote " << config.out_dir << " (" << patients.rows.size()
              << " profiles)\n";
}

void cmd_ppc(const RunConfig& config) {
    require_field(config.model_dir, "model_dir", "ppc");
    require_field(config.out_dir, "out", "ppc");
    require_seed(config, "ppc");

    const LoadedModel model = load_posterior_samples(config.model_dir);
    const int n_rep = config.n_rep > 0 ? config.n_rep : model.n_train;
    RngStream rng(config.seed);
    const PpcSummary summary = posterior_predictive(model.samples, n_rep, rng);

    ensure_out_dir(config.out_dir);
    const std::vector<std::string> comments{"config_hash=" + model.hash,
                                            "ppc_seed=" + std::to_string(config.seed),
                                            "n_rep=" + std::to_string(n_rep)};
    {
        CsvTable table;
        table.header = {"rank", "mean", "sd", "lo", "hi"};
        for (std::size_t i = 0; i < summary.ranks.size(); ++i) {
            const SummaryStat& stat = summary.ranks[i];
            table.rows.push_back({std::to_string(i + 1), format_double(stat.mean),
                                  format_double(stat.sd), format_double(stat.lo),
                                  format_double(stat.hi)});
        }
        write_csv(path_join(config.out_dir, "ppc_ranks.csv"), table, comments);
    }
    {
        CsvTable table;
        table.header = {"count", "freq_mean", "freq_sd", "freq_lo", "freq_hi"};
        for (std::size_t i = 0; i < summary.count_values.size(); ++i) {
            const SummaryStat& stat = summary.count_freq[i];
            table.rows.push_back({std::to_string(summary.count_values[i]),
                                  format_double(stat.mean), format_double(stat.sd),
                                  format_double(stat.lo), format_double(stat.hi)});
        }
        write_csv(path_join(config.out_dir, "ppc_counts.csv"), table, comments);
    }
    std::cout << "ppc: wrote " << config.out_dir << " (n_rep=" << n_rep << ")\n";
}

void cmd_simulate(const RunConfig& config) {
    require_field(config.out_dir, "out", "simulate");
    require_seed(config, "simulate");

    GenerativeTruth truth;
    if (config.preset == "benchmark") {
        truth = benchmark_truth();
    } else if (config.preset == "benchmark_irrelevant") {
        truth = benchmark_truth_irrelevant();
    } else if (config.preset.empty()) {
        truth.k = static_cast<int>(config.truth_weights.size());
        truth.n = config.truth_n;
        truth.weights = Eigen::Map<const Eigen::VectorXd>(
            config.truth_weights.data(), static_cast<Eigen::Index>(config.truth_weights.size()));
        truth.theta = Eigen::Map<const Eigen::VectorXd>(
            config.truth_theta.data(), static_cast<Eigen::Index>(config.truth_theta.size()));
        truth.variances = Eigen::Map<const Eigen::VectorXd>(
            config.truth_variances.data(),
            static_cast<Eigen::Index>(config.truth_variances.size()));
        const int p = static_cast<int>(config.truth_variances.size());
        if (static_cast<int>(config.truth_means.size()) != truth.k) {
            throw ConfigError("truth_means needs one row per cluster");
        }
        truth.means.resize(truth.k, p);
        for (int c = 0; c < truth.k; ++c) {
            if (static_cast<int>(config.truth_means[c].size()) != p) {
                throw ConfigError("truth_means row " + std::to_string(c + 1) +
                                  " needs one entry per variable");
            }
            for (int j = 0; j < p; ++j) {
                truth.means(c, j) = config.truth_means[c][j];
            }
        }
        truth.variable_names = config.truth_variable_names;
        if (truth.variable_names.empty()) {
            for (int j = 0; j < p; ++j) {
                truth.variable_names.push_back("x" + std::to_string(j + 1));
            }
        }
    } else {
        throw ConfigError("unknown preset '" + config.preset + "'");
    }
    truth.seed = config.seed;
    truth.validate();

    const GeneratedData generated = generate(truth);
    const std::string hash = config_hash(config);
    ensure_out_dir(config.out_dir);
    write_dataset_csv(path_join(config.out_dir, "data.csv"), generated.data,
                      config.count_column, {"config_hash=" + hash});
    {
        CsvTable table;
        table.header = {"subject", "cluster"};
        for (std::size_t i = 0; i < generated.true_assignments.size(); ++i) {
            table.rows.push_back(
                {std::to_string(i + 1), std::to_string(generated.true_assignments[i] + 1)});
        }
        write_csv(path_join(config.out_dir, "true_assignments.csv"), table,
                  {"config_hash=" + hash});
    }
    {
        KeyValueList items;
        items.emplace_back("config_hash", hash);
        items.emplace_back("command", "simulate");
        items.emplace_back("k", std::to_string(truth.k));
        items.emplace_back("n", std::to_string(truth.n));
        items.emplace_back("seed", std::to_string(truth.seed));
        items.emplace_back("weights",
                           join_reals({truth.weights.data(),
                                       truth.weights.data() + truth.weights.size()}));
        items.emplace_back("theta", join_reals({truth.theta.data(),
                                                truth.theta.data() + truth.theta.size()}));
        items.emplace_back("variances",
                           join_reals({truth.variances.data(),
                                       truth.variances.data() + truth.variances.size()}));
        std::string means_text;
        for (int c = 0; c < truth.k; ++c) {
            if (c) {
                means_text.push_back(';');
            }
            std::vector<double> row(truth.means.row(c).begin(), truth.means.row(c).end());
            means_text += join_reals(row);
        }
        items.emplace_back("means", means_text);
        items.emplace_back("variable_names", join_strings(truth.variable_names));
        write_key_values(path_join(config.out_dir, "truth.txt"), items);
    }
    std::cout << "simulate: wrote " << config.out_dir << " (n=" << truth.n << ")\n";
}

}  // namespace profmix

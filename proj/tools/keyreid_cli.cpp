// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: validate, saliency, sweep-rho, rerank, eval, synth.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "keyreid/error.hpp"
#include "keyreid/eval.hpp"
#include "keyreid/flow.hpp"
#include "keyreid/io.hpp"
#include "keyreid/parallel.hpp"
#include "keyreid/rerank.hpp"
#include "keyreid/saliency.hpp"
#include "keyreid/synth.hpp"
#include "keyreid/validate.hpp"

namespace fs = std::filesystem;
using namespace keyreid;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::size_t jobs = 1;
};

struct Inputs {
    FlowSet probe;
    FlowSet gallery;
    FeatureBank bank;
    PipelineConfig config;
};

/// --config wins over the bundle's own config.cfg, which wins over defaults.
PipelineConfig resolve_config(const GlobalOptions& g, const std::optional<PipelineConfig>& bundled) {
    PipelineConfig config;
    if (!g.config_path.empty()) config = load_config(g.config_path);
    else if (bundled) config = *bundled;
    if (g.seed) config.seed = *g.seed;
    config.validate();
    return config;
}

Inputs load_inputs(const GlobalOptions& g, const std::string& bundle_dir) {
    DatasetBundle bundle = load_bundle(bundle_dir);
    Inputs in{build_flow(std::move(bundle.probe_records), bundle.probe_camera),
              build_flow(std::move(bundle.gallery_records), bundle.gallery_camera), std::move(bundle.bank),
              resolve_config(g, bundle.config)};
    const auto report = validate_inputs(in.bank, in.probe, in.gallery);
    if (!report.passed()) {
        const auto& first = report.issues.front();
        throw ValidationError(fmt::format("{} ({} issue(s); run 'validate' for the full list)", first.message,
                                          report.issues.size()));
    }
    return in;
}

fs::path output_dir(const GlobalOptions& g) {
    const fs::path dir = g.out_dir.empty() ? fs::path(".") : fs::path(g.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError(fmt::format("cannot create output directory '{}'", dir.string()));
    return dir;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string token = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            std::size_t used = 0;
            grid.push_back(std::stod(token, &used));
            if (used != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
            throw ParameterError(fmt::format("--grid: '{}' is not a number", token));
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return grid;
}

// ---------------------------------------------------------------------------

int run_validate(const GlobalOptions& g, const std::string& bundle_dir) {
    DatasetBundle bundle = load_bundle(bundle_dir);
    if (!g.config_path.empty()) {
        const auto config = load_config(g.config_path);
        for (auto& space : bundle.bank.spaces) space.rho = config.rho_for(space);
    }
    const FlowSet probe = build_flow(std::move(bundle.probe_records), bundle.probe_camera);
    const FlowSet gallery = build_flow(std::move(bundle.gallery_records), bundle.gallery_camera);
    const auto report = validate_inputs(bundle.bank, probe, gallery);
    for (const auto& issue : report.issues) {
        fmt::print("{}: {}\n", issue_kind_name(issue.kind), issue.message);
    }
    if (!report.passed()) {
        fmt::print(stderr, "validation error: {} issue(s) found\n", report.issues.size());
        return 1;
    }
    fmt::print("ok: {} probe, {} gallery, {} feature(s)\n", probe.size(), gallery.size(), bundle.bank.spaces.size());
    return 0;
}

int run_saliency(const GlobalOptions& g, const std::string& bundle_dir) {
    Inputs in = load_inputs(g, bundle_dir);
    FlowSet probe = in.probe;
    if (in.config.split_velocity) {
        probe = split_by_velocity(in.probe, in.config.angle_threshold, in.config.speed_tolerance);
    }
    const fs::path dir = output_dir(g);

    std::string scores = "feature,id,score,knn_mean\n";
    for (const auto& space : in.bank.spaces) {
        const auto table = saliency_scores(space, probe, in.config.k_nn);
        for (const auto& m : probe.members()) {
            scores += fmt::format("{},{},{:.6f},{:.6f}\n", space.name, m.id, table.scores.at(m.id),
                                  table.raw_knn_mean.at(m.id));
        }
    }
    write_file(dir / "saliency.csv", scores);

    const KeySet keys = union_key_sets(in.bank, probe, in.config);
    std::string key_csv = "id,feature,score\n";
    for (const auto& k : keys.keys) key_csv += fmt::format("{},{},{:.6f}\n", k.id, k.feature, k.score);
    write_file(dir / "keys.csv", key_csv);

    for (const auto& [feature, selected] : keys.per_feature) {
        fmt::print("{}: {} key person(s) at rho {:.6f}\n", feature, selected.size(),
                   in.config.rho_for(in.bank.space(feature)));
    }
    fmt::print("union: {} key person(s)\n", keys.keys.size());
    for (const auto& k : keys.keys) fmt::print("  {} {} {:.6f}\n", k.id, k.feature, k.score);
    return 0;
}

int run_sweep(const GlobalOptions& g, const std::string& bundle_dir, std::string feature, const std::string& grid_text) {
    Inputs in = load_inputs(g, bundle_dir);
    if (feature.empty()) feature = in.bank.baseline;
    std::vector<double> grid;
    if (grid_text.empty()) {
        for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
    } else {
        grid = parse_grid(grid_text);
    }
    const auto sweep = sweep_rho(in.bank.space(feature), in.probe, in.gallery, grid, in.config.k_nn);
    emit_results(output_dir(g), {}, sweep);
    fmt::print("rho sigma n_keys ({})\n", feature);
    for (const auto& p : sweep) fmt::print("{:.6f} {:.6f} {}\n", p.rho, p.sigma, p.n_keys);
    return 0;
}

int run_rerank(const GlobalOptions& g, const std::string& bundle_dir, const std::vector<std::string>& queries,
               std::size_t top) {
    Inputs in = load_inputs(g, bundle_dir);
    FlowSet probe = in.probe;
    FlowSet gallery = in.gallery;
    if (in.config.split_velocity) {
        probe = split_by_velocity(in.probe, in.config.angle_threshold, in.config.speed_tolerance);
        gallery = split_by_velocity(in.gallery, in.config.angle_threshold, in.config.speed_tolerance);
    }
    const KeySet keys = union_key_sets(in.bank, probe, in.config);
    const Reranker reranker(probe, gallery, in.bank, keys, in.config);

    std::vector<std::string> ids = queries.empty() ? probe.ids() : queries;
    for (const auto& id : ids) {
        if (!probe.contains(id)) throw NotFoundError(fmt::format("query '{}' is not in the probe flow", id));
    }
    std::vector<std::string> blocks(ids.size());
    parallel_for(ids.size(), g.jobs, [&](std::size_t i) {
        const auto ranking = reranker.rerank(ids[i]).ranking;
        const auto base = reranker.baseline(ids[i]);
        std::map<std::string_view, double> base_score;
        for (const auto& c : base) base_score.emplace(c.id, c.score);
        const std::size_t n = top == 0 ? ranking.size() : std::min(top, ranking.size());
        std::string block;
        for (std::size_t r = 0; r < n; ++r) {
            block += fmt::format("{},{},{},{:.6f},{:.6f}\n", ids[i], r + 1, ranking[r].id, ranking[r].score,
                                 base_score.at(ranking[r].id));
        }
        blocks[i] = std::move(block);
    });
    std::string out = "query,rank,gallery_id,score,baseline_score\n";
    for (const auto& b : blocks) out += b;
    write_file(output_dir(g) / "rankings.csv", out);
    fmt::print("{} quer{} ranked against {} gallery member(s) with {} key person(s)\n", ids.size(),
               ids.size() == 1 ? "y" : "ies", gallery.size(), keys.keys.size());
    return 0;
}

int run_eval(const GlobalOptions& g, const std::string& bundle_dir, bool synth, std::size_t trials, double split) {
    Dataset dataset;
    FeatureBank bank;
    PipelineConfig config;
    if (synth) {
        SynthParams params;
        if (g.seed) params.seed = *g.seed;
        SyntheticFlow flow = generate_flow(params);
        dataset = {std::move(flow.probe), std::move(flow.gallery)};
        bank = std::move(flow.bank);
        config = resolve_config(g, std::nullopt);
    } else {
        if (bundle_dir.empty()) throw ParameterError("eval needs --bundle or --synth");
        Inputs in = load_inputs(g, bundle_dir);
        dataset = {std::move(in.probe), std::move(in.gallery)};
        bank = std::move(in.bank);
        config = std::move(in.config);
    }

    TrialOptions options;
    options.num_trials = trials;
    options.split = split;
    options.seed = config.seed;
    options.jobs = g.jobs;
    const TrialSummary summary = run_trials(dataset, bank, config, options);

    const std::vector<NamedCurve> curves = {{"key_aided", summary.key_aided}, {"baseline", summary.baseline}};
    const fs::path dir = output_dir(g);
    emit_results(dir, curves);
    std::string per_trial = "trial,seed,test_size,n_keys,baseline_r1,key_aided_r1\n";
    for (std::size_t t = 0; t < summary.trials.size(); ++t) {
        const auto& o = summary.trials[t];
        per_trial += fmt::format("{},{},{},{},{:.6f},{:.6f}\n", t, o.seed, o.test_size, o.n_keys, o.baseline.at(1),
                                 o.key_aided.at(1));
    }
    write_file(dir / "trials.csv", per_trial);
    fmt::print("{}", compare_table(curves, kSummaryRanks));
    return 0;
}

struct SynthFlags {
    SynthParams params;
    std::vector<std::size_t> dims;
    std::vector<std::string> names;
};

int run_synth(const GlobalOptions& g, SynthFlags flags, const std::string& config_path_to_embed) {
    if (g.out_dir.empty()) throw ParameterError("synth needs --out");
    if (!flags.dims.empty()) flags.params.dims = flags.dims;
    if (!flags.names.empty()) flags.params.feature_names = flags.names;
    if (g.seed) flags.params.seed = *g.seed;
    const SyntheticFlow flow = generate_flow(flags.params);

    DatasetBundle bundle;
    bundle.probe_camera = flow.probe.camera();
    bundle.gallery_camera = flow.gallery.camera();
    bundle.probe_records.assign(flow.probe.members().begin(), flow.probe.members().end());
    bundle.gallery_records.assign(flow.gallery.members().begin(), flow.gallery.members().end());
    bundle.bank = flow.bank;
    if (!config_path_to_embed.empty()) bundle.config = load_config(config_path_to_embed);
    write_bundle(g.out_dir, bundle);

    std::string outliers = "feature,id\n";
    for (std::size_t m = 0; m < flow.outliers.size(); ++m) {
        for (const auto& id : flow.outliers[m]) outliers += fmt::format("{},{}\n", flow.bank.spaces[m].name, id);
    }
    write_file(fs::path(g.out_dir) / "outliers.csv", outliers);
    fmt::print("wrote {} identities, {} feature(s) to {}\n", flags.params.num_identities, flags.params.num_features,
               g.out_dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Key-person aided cross-camera re-identification"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config_path, "Pipeline config file (key=value)")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Master seed; overrides the config");
    app.add_option("--out", g.out_dir, "Output directory");
    app.add_option("--jobs", g.jobs, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);

    std::string bundle_dir;
    auto add_bundle = [&](CLI::App* sub, bool required) {
        auto* opt = sub->add_option("--bundle", bundle_dir, "Dataset bundle directory")->check(CLI::ExistingDirectory);
        if (required) opt->required();
    };

    auto* validate = app.add_subcommand("validate", "Check a dataset bundle for defects");
    add_bundle(validate, true);

    auto* saliency = app.add_subcommand("saliency", "Saliency scores and key persons of the probe flow");
    add_bundle(saliency, true);

    std::string feature;
    std::string grid;
    auto* sweep = app.add_subcommand("sweep-rho", "Key-person rank-1 accuracy and count across rho");
    add_bundle(sweep, true);
    sweep->add_option("--feature", feature, "Feature space (default: baseline)");
    sweep->add_option("--grid", grid, "Comma-separated rho values (default: 0, 0.05, ..., 1)");

    std::size_t top = 10;
    std::vector<std::string> queries;
    auto* rerank = app.add_subcommand("rerank", "Key-aided ranked gallery lists per probe");
    add_bundle(rerank, true);
    rerank->add_option("--top", top, "Candidates per query, 0 for all");
    rerank->add_option("--query", queries, "Probe ids to rank (default: all)");

    std::size_t trials = 10;
    double split = 0.5;
    bool use_synth = false;
    auto* eval = app.add_subcommand("eval", "Trial protocol with CMC against the baseline");
    add_bundle(eval, false);
    eval->add_option("--trials", trials, "Number of random splits")->check(CLI::PositiveNumber);
    eval->add_option("--split", split, "Fraction of identities tested per trial, in (0, 1]");
    eval->add_flag("--synth", use_synth, "Evaluate on a generated flow at the generator defaults");

    SynthFlags sf;
    std::string embed_config;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset bundle");
    synth->add_option("--identities", sf.params.num_identities, "Number of identities");
    synth->add_option("--features", sf.params.num_features, "Number of feature spaces");
    synth->add_option("--dim", sf.dims, "Dimension, shared or one per feature");
    synth->add_option("--feature-names", sf.names, "Feature names")->delimiter(',');
    synth->add_option("--salient-fraction", sf.params.salient_fraction, "Planted outlier fraction per feature");
    synth->add_option("--cluster-spread", sf.params.cluster_spread, "Bulk cluster radius");
    synth->add_option("--view-noise", sf.params.cross_view_noise, "Cross-view embedding noise");
    synth->add_option("--arrival-rate", sf.params.arrival_rate, "Mean inter-arrival frames");
    synth->add_option("--transit-mean", sf.params.transit_mean, "Mean transit frames");
    synth->add_option("--transit-jitter", sf.params.transit_jitter, "Transit time std. dev.");
    synth->add_option("--direction-split", sf.params.direction_split, "Fraction walking in +x");
    synth->add_option("--speed-spread", sf.params.speed_spread, "Relative speed std. dev.");
    synth->add_flag("--require-salient", sf.params.require_salient, "Fail when no outlier would be planted");
    synth->add_option("--embed-config", embed_config, "Copy this config into the bundle")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*validate) return run_validate(g, bundle_dir);
        if (*saliency) return run_saliency(g, bundle_dir);
        if (*sweep) return run_sweep(g, bundle_dir, feature, grid);
        if (*rerank) return run_rerank(g, bundle_dir, queries, top);
        if (*eval) return run_eval(g, bundle_dir, use_synth, trials, split);
        if (*synth) return run_synth(g, sf, embed_config);
    } catch (const Error& e) {
        fmt::print(stderr, "{} error: {}\n", category_name(e.category()), e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "internal error: {}\n", e.what());
        return 3;
    }
    return 0;
}

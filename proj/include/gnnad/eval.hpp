// Experimental protocol: stratified train/test splits, repeated seeded runs
// of the full GSAGE+RF pipeline, metric aggregation, sampling-rate sweeps,
// and the test-time measurement (inference on pre-built samples; graph and
// sample construction are one-time offline costs and clocked separately).
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gnnad/attack_graph.hpp"
#include "gnnad/common.hpp"
#include "gnnad/flow.hpp"
#include "gnnad/forest.hpp"
#include "gnnad/fusion.hpp"
#include "gnnad/gsage.hpp"
#include "gnnad/metrics.hpp"

namespace gnnad {

struct ExperimentConfig {
    double train_fraction = 0.8;
    size_t repeats = 10;
    uint64_t base_seed = 0;
    std::vector<double> rates = {0.1, 0.2, 0.4, 0.6, 0.8, 1.0};
    std::set<int> positive_classes;  // empty = any attack class (binary collapse)

    void validate() const {
        if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
            throw InputError("experiment: train_fraction must be in (0,1)");
        if (repeats < 1) throw InputError("experiment: repeats must be >= 1");
        for (double r : rates)
            if (!(r > 0.0) || r > 1.0) throw InputError("experiment: rates must be in (0,1]");
    }
};

struct PipelineConfig {
    GsageConfig gsage;
    RandomForestConfig forest;
    ExperimentConfig experiment;
};

/// Stratified split: per class, round((1-fraction)*size) records go to test
/// (at least 1 and at most size-1 when the class has >= 2 records; singleton
/// classes stay in train with a warning). Both partitions preserve the input
/// record order.
inline std::pair<FlowDataset, FlowDataset> split_train_test(
    const FlowDataset& ds, double fraction, uint64_t seed,
    std::vector<std::string>* warnings = nullptr) {
    if (!(fraction > 0.0) || !(fraction < 1.0))
        throw InputError("split_train_test: fraction must be in (0,1)");
    SeededRng rng(seed);
    std::vector<size_t> train_idx, test_idx;
    for (const auto& [cls, indices] : ds.class_indices()) {
        if (indices.size() < 2) {
            if (warnings)
                warnings->push_back("class '" + ds.class_names.at(cls) +
                                    "' has fewer than 2 samples; placed in train");
            train_idx.insert(train_idx.end(), indices.begin(), indices.end());
            continue;
        }
        size_t want_test = static_cast<size_t>(
            std::llround((1.0 - fraction) * static_cast<double>(indices.size())));
        want_test = std::clamp<size_t>(want_test, 1, indices.size() - 1);
        std::vector<bool> in_test(indices.size(), false);
        for (size_t pick : rng.sample_without_replacement(indices.size(), want_test))
            in_test[pick] = true;
        for (size_t i = 0; i < indices.size(); ++i)
            (in_test[i] ? test_idx : train_idx).push_back(indices[i]);
    }
    return {detail::take_indices(ds, std::move(train_idx)),
            detail::take_indices(ds, std::move(test_idx))};
}

struct PreparedRun {
    FlowDataset train;
    FlowDataset test;
    NormalizationParams params;  // fitted on the train partition only
};

/// Split, then min-max normalize both partitions with train-fitted
/// parameters (test values clamp into [0,1]).
inline PreparedRun prepare_run(const FlowDataset& flows, double fraction, uint64_t seed,
                               std::vector<std::string>* warnings = nullptr) {
    auto [train, test] = split_train_test(flows, fraction, seed, warnings);
    PreparedRun out;
    out.params = fit_minmax(train);
    out.train = apply_minmax(std::move(train), out.params);
    out.test = apply_minmax(std::move(test), out.params);
    return out;
}

struct RunTiming {
    double train_seconds = 0.0;
    double embed_seconds = 0.0;
    double forest_seconds = 0.0;
    double predict_seconds = 0.0;
};

struct RunOutput {
    uint64_t seed = 0;
    RunMetrics metrics;
    double final_train_loss = 0.0;
    double final_train_accuracy = 0.0;
    RunTiming timing;
};

/// Trained state of one run, for callers that persist checkpoints or dump
/// embeddings alongside the metrics.
struct RunArtifacts {
    std::optional<GsageModel> model;
    std::optional<RandomForest> forest;
    Matrix train_embeddings;
    Matrix test_embeddings;
    FlowDataset train;
    FlowDataset test;
};

struct ExperimentReport {
    std::vector<RunOutput> runs;
    MetricsSummary mean;
    double empty_mapping_rate = 0.0;
    size_t train_size = 0, test_size = 0;
    std::vector<std::string> warnings;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline size_t class_count_of(const FlowDataset& ds) {
    int max_label = 0;
    for (const auto& r : ds.records) max_label = std::max(max_label, r.label);
    return static_cast<size_t>(max_label) + 1;
}

}  // namespace detail

/// One seeded pipeline pass: train GSAGE on the train partition, embed both
/// partitions, fit the forest on train embeddings, score the test set.
inline RunOutput run_single(const StaticAttackGraph& sag, const PreparedRun& prepared,
                            const PipelineConfig& cfg, uint64_t run_seed, size_t class_count,
                            RunArtifacts* artifacts = nullptr) {
    RunOutput out;
    out.seed = run_seed;

    auto train_fused = build_dataset(sag, prepared.train.records);
    auto test_fused = build_dataset(sag, prepared.test.records);

    GsageConfig gcfg = cfg.gsage;
    gcfg.seed = run_seed;
    GsageModel model(gcfg, sag.vocab_size(), prepared.train.feature_count(),
                     AdjacencyList::from_sag(sag), class_count);

    auto t0 = std::chrono::steady_clock::now();
    auto history = model.train(train_fused.samples);
    out.timing.train_seconds = detail::seconds_since(t0);
    if (!history.empty()) {
        out.final_train_loss = history.back().mean_loss;
        out.final_train_accuracy = history.back().accuracy;
    }

    t0 = std::chrono::steady_clock::now();
    Matrix train_emb = model.embed(train_fused.samples);
    Matrix test_emb = model.embed(test_fused.samples);
    out.timing.embed_seconds = detail::seconds_since(t0);

    std::vector<int> train_labels;
    for (const auto& r : prepared.train.records) train_labels.push_back(r.label);

    RandomForestConfig fcfg = cfg.forest;
    fcfg.seed = run_seed + 1000003;  // independent stream from the GNN seed
    t0 = std::chrono::steady_clock::now();
    auto forest = RandomForest::fit(train_emb, train_labels, fcfg);
    out.timing.forest_seconds = detail::seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    std::vector<int> predictions = forest.predict_rows(test_emb);
    out.timing.predict_seconds = detail::seconds_since(t0);

    std::vector<int> truth;
    for (const auto& r : prepared.test.records) truth.push_back(r.label);
    out.metrics = compute_metrics(predictions, truth, cfg.experiment.positive_classes);

    if (artifacts) {
        artifacts->model.emplace(std::move(model));
        artifacts->forest.emplace(std::move(forest));
        artifacts->train_embeddings = std::move(train_emb);
        artifacts->test_embeddings = std::move(test_emb);
        artifacts->train = prepared.train;
        artifacts->test = prepared.test;
    }
    return out;
}

/// The repeated protocol: run r uses seed base_seed + r; the split is
/// re-randomized per run and every model seed derives from the run seed.
inline ExperimentReport run_experiment(const StaticAttackGraph& sag, const FlowDataset& flows,
                                       const PipelineConfig& cfg,
                                       RunArtifacts* last_run_artifacts = nullptr) {
    cfg.experiment.validate();
    ExperimentReport report;
    report.empty_mapping_rate = build_dataset(sag, flows.records).empty_mapping_fraction;
    const size_t class_count = detail::class_count_of(flows);
    std::vector<RunMetrics> metrics;
    for (size_t r = 0; r < cfg.experiment.repeats; ++r) {
        const uint64_t run_seed = cfg.experiment.base_seed + r;
        auto prepared = prepare_run(flows, cfg.experiment.train_fraction, run_seed,
                                    &report.warnings);
        if (r == 0) {
            report.train_size = prepared.train.records.size();
            report.test_size = prepared.test.records.size();
        }
        RunArtifacts* sink =
            (last_run_artifacts && r + 1 == cfg.experiment.repeats) ? last_run_artifacts : nullptr;
        report.runs.push_back(run_single(sag, prepared, cfg, run_seed, class_count, sink));
        metrics.push_back(report.runs.back().metrics);
    }
    report.mean = summarize(metrics);
    return report;
}

struct SweepRow {
    double rate = 0.0;
    ExperimentReport report;
};

/// Applies rate_sample before the experiment, once per rate. The subsample
/// seed is the experiment base seed, so the rate 1.0 row coincides with the
/// unsampled experiment.
inline std::vector<SweepRow> rate_sweep(const StaticAttackGraph& sag, const FlowDataset& flows,
                                        const PipelineConfig& cfg) {
    cfg.experiment.validate();
    std::vector<SweepRow> rows;
    for (double rate : cfg.experiment.rates) {
        FlowDataset sampled = rate_sample(flows, rate, cfg.experiment.base_seed);
        rows.push_back({rate, run_experiment(sag, sampled, cfg)});
    }
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "rate,accuracy,recall,precision,f1\n";
    auto cell = [](const std::optional<double>& v) {
        if (!v) return std::string("undefined");
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", *v);
        return std::string(buf);
    };
    for (const auto& row : rows) {
        char rate[32];
        std::snprintf(rate, sizeof rate, "%g", row.rate);
        out += rate;
        for (const auto& v : {row.report.mean.accuracy, row.report.mean.recall,
                              row.report.mean.precision, row.report.mean.f1})
            out += "," + cell(v);
        out += "\n";
    }
    return out;
}

struct TimingReport {
    double median_seconds = 0.0;
    std::vector<double> run_seconds;  // the 5 raw measurements
    size_t sample_count = 0;
};

/// Wall-clock for embed + predict over pre-built samples, median of 5 runs.
/// Sample construction never enters this clock.
inline TimingReport measure_test_time(GsageModel& model, const RandomForest& forest,
                                      std::span<const GraphSample> samples, size_t repetitions = 5) {
    TimingReport report;
    report.sample_count = samples.size();
    std::vector<int> reference;
    for (size_t rep = 0; rep < repetitions; ++rep) {
        auto t0 = std::chrono::steady_clock::now();
        Matrix emb = model.embed(samples);
        std::vector<int> predictions = forest.predict_rows(emb);
        report.run_seconds.push_back(detail::seconds_since(t0));
        if (rep == 0)
            reference = std::move(predictions);
        else if (predictions != reference)
            throw std::runtime_error("measure_test_time: predictions changed between runs");
    }
    std::vector<double> sorted = report.run_seconds;
    std::sort(sorted.begin(), sorted.end());
    report.median_seconds = sorted[sorted.size() / 2];
    return report;
}

// ---------------------------------------------------------------------------
// JSON report assembly. Timing lives only under "timing" keys so determinism
// comparisons can strip it.

namespace detail {

inline nlohmann::ordered_json metrics_json(const RunMetrics& m) {
    nlohmann::ordered_json j;
    auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    j["accuracy"] = opt(m.accuracy);
    j["recall"] = opt(m.recall);
    j["precision"] = opt(m.precision);
    j["f1"] = opt(m.f1);
    j["confusion"] = {{"tp", m.counts.tp}, {"fp", m.counts.fp}, {"tn", m.counts.tn},
                      {"fn", m.counts.fn}};
    j["per_class_confusion"] = m.per_class_confusion;
    return j;
}

}  // namespace detail

inline nlohmann::ordered_json report_json(const ExperimentReport& report,
                                          const PipelineConfig& cfg) {
    nlohmann::ordered_json j;
    j["config"]["gsage"] = {{"layer_count", cfg.gsage.layer_count},
                            {"hidden_units", cfg.gsage.hidden_units},
                            {"dropout", cfg.gsage.dropout_p},
                            {"neighbor_pooling", to_string(cfg.gsage.neighbor_pool)},
                            {"graph_pooling", to_string(cfg.gsage.graph_pool)},
                            {"epochs", cfg.gsage.epochs},
                            {"batch_size", cfg.gsage.batch_size},
                            {"learning_rate", cfg.gsage.learning_rate}};
    j["config"]["forest"] = {{"tree_count", cfg.forest.tree_count},
                             {"max_depth", cfg.forest.max_depth},
                             {"min_samples_leaf", cfg.forest.min_samples_leaf},
                             {"features_per_split", cfg.forest.features_per_split},
                             {"bootstrap", cfg.forest.bootstrap},
                             {"soft_voting", cfg.forest.soft_voting}};
    j["config"]["experiment"] = {{"train_fraction", cfg.experiment.train_fraction},
                                 {"repeats", cfg.experiment.repeats},
                                 {"base_seed", cfg.experiment.base_seed}};
    j["empty_mapping_rate"] = report.empty_mapping_rate;
    j["train_size"] = report.train_size;
    j["test_size"] = report.test_size;
    j["runs"] = nlohmann::ordered_json::array();
    for (size_t r = 0; r < report.runs.size(); ++r) {
        const auto& run = report.runs[r];
        nlohmann::ordered_json rj = detail::metrics_json(run.metrics);
        rj["run"] = r;
        rj["seed"] = run.seed;
        rj["final_train_loss"] = run.final_train_loss;
        rj["final_train_accuracy"] = run.final_train_accuracy;
        j["runs"].push_back(rj);
    }
    auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    j["mean"] = {{"accuracy", opt(report.mean.accuracy)},
                 {"recall", opt(report.mean.recall)},
                 {"precision", opt(report.mean.precision)},
                 {"f1", opt(report.mean.f1)}};
    j["warnings"] = report.warnings;
    j["timing"] = nlohmann::ordered_json::array();
    for (const auto& run : report.runs)
        j["timing"].push_back({{"train_s", run.timing.train_seconds},
                               {"embed_s", run.timing.embed_seconds},
                               {"forest_s", run.timing.forest_seconds},
                               {"predict_s", run.timing.predict_seconds}});
    return j;
}

}  // namespace gnnad

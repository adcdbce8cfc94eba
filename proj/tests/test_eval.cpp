#include <gtest/gtest.h>

#include <cmath>

#include "gnnad/eval.hpp"
#include "gnnad/fixture_graph.hpp"

using namespace gnnad;

namespace {

FlowDataset make_classes(const std::vector<std::pair<int, size_t>>& sizes) {
    FlowDataset ds;
    ds.feature_names = {"f0", "f1"};
    int serial = 0;
    for (auto [cls, count] : sizes) {
        ds.class_names[cls] = cls == 0 ? "BENIGN" : "ATTACK" + std::to_string(cls);
        for (size_t i = 0; i < count; ++i) {
            FlowRecord r;
            r.src_ip = "10.0.0.1";
            r.dst_ip = "10.0.0.2";
            r.features = {static_cast<double>(serial), static_cast<double>(serial)};
            ++serial;
            r.label = cls;
            r.timestamp_text = "0";
            ds.records.push_back(std::move(r));
        }
    }
    return ds;
}

StaticAttackGraph five_node_sag() {
    FixtureSpec spec;
    spec.hosts = {"10.0.0.1", "10.0.0.2"};
    spec.attacker_host = "10.0.0.1";
    spec.reachability = {{"10.0.0.1", "10.0.0.2", "tcp", 80}};
    spec.vulnerabilities = {{"10.0.0.2", {"CVE-2021-44228"}}};
    return encode_attack_graph(generate_fixture_graph(spec));
}

// Separable two-class flows over the fixture hosts.
FlowDataset separable_flows(size_t per_class, uint64_t seed) {
    SeededRng rng(seed);
    FlowDataset ds;
    ds.feature_names = {"f0", "f1"};
    ds.class_names = {{0, "BENIGN"}, {1, "DoS"}};
    for (size_t i = 0; i < per_class * 2; ++i) {
        FlowRecord r;
        r.src_ip = "10.0.0.1";
        r.dst_ip = "10.0.0.2";
        r.label = static_cast<int>(i % 2);
        double base = r.label == 0 ? 1.0 : 9.0;
        r.features = {base + rng.uniform(-0.5, 0.5), base + rng.uniform(-0.5, 0.5)};
        r.timestamp_text = "0";
        ds.records.push_back(std::move(r));
    }
    return ds;
}

PipelineConfig fast_config(uint64_t seed) {
    PipelineConfig cfg;
    cfg.gsage.layer_count = 2;
    cfg.gsage.hidden_units = 8;
    cfg.gsage.epochs = 15;
    cfg.gsage.batch_size = 16;
    cfg.forest.tree_count = 20;
    cfg.experiment.repeats = 2;
    cfg.experiment.base_seed = seed;
    return cfg;
}

// builds (predictions, truth) realizing the given binary confusion counts
std::pair<std::vector<int>, std::vector<int>> from_counts(const ConfusionCounts& c) {
    std::vector<int> pred, truth;
    for (size_t i = 0; i < c.tp; ++i) { pred.push_back(1); truth.push_back(1); }
    for (size_t i = 0; i < c.fp; ++i) { pred.push_back(1); truth.push_back(0); }
    for (size_t i = 0; i < c.tn; ++i) { pred.push_back(0); truth.push_back(0); }
    for (size_t i = 0; i < c.fn; ++i) { pred.push_back(0); truth.push_back(1); }
    return {pred, truth};
}

}  // namespace

TEST(SplitTrainTest, EightyTwentyArithmetic) {
    auto ds = make_classes({{0, 9000}, {1, 1000}, {2, 1000}, {3, 1000}, {4, 1000}, {5, 1000},
                            {6, 1000}, {7, 1000}, {8, 1000}});
    ASSERT_EQ(ds.records.size(), 17000u);
    auto [train, test] = split_train_test(ds, 0.8, 3);
    EXPECT_EQ(train.records.size(), 13600u);
    EXPECT_EQ(test.records.size(), 3400u);
}

TEST(SplitTrainTest, SameSeedSamePartitions) {
    auto ds = make_classes({{0, 100}, {1, 50}});
    auto [tr1, te1] = split_train_test(ds, 0.8, 42);
    auto [tr2, te2] = split_train_test(ds, 0.8, 42);
    ASSERT_EQ(tr1.records.size(), tr2.records.size());
    for (size_t i = 0; i < tr1.records.size(); ++i)
        EXPECT_EQ(tr1.records[i].features, tr2.records[i].features);
    for (size_t i = 0; i < te1.records.size(); ++i)
        EXPECT_EQ(te1.records[i].features, te2.records[i].features);
}

TEST(SplitTrainTest, PerClassProportionsWithinOneSample) {
    auto ds = make_classes({{0, 333}, {1, 77}, {2, 1001}});
    auto [train, test] = split_train_test(ds, 0.8, 9);
    (void)train;
    auto by_class = test.class_indices();
    for (auto [cls, size] : std::vector<std::pair<int, size_t>>{{0, 333}, {1, 77}, {2, 1001}}) {
        double want = 0.2 * static_cast<double>(size);
        EXPECT_LE(std::abs(static_cast<double>(by_class[cls].size()) - want), 1.0)
            << "class " << cls;
    }
}

TEST(SplitTrainTest, SingletonClassStaysInTrainWithWarning) {
    auto ds = make_classes({{0, 50}, {1, 1}});
    std::vector<std::string> warnings;
    auto [train, test] = split_train_test(ds, 0.8, 3, &warnings);
    EXPECT_EQ(train.class_indices()[1].size(), 1u);
    EXPECT_EQ(test.class_indices().count(1), 0u);
    ASSERT_EQ(warnings.size(), 1u);
}

TEST(SplitTrainTest, Disjoint) {
    auto ds = make_classes({{0, 200}, {1, 100}});
    auto [train, test] = split_train_test(ds, 0.7, 5);
    std::set<double> train_ids;
    for (const auto& r : train.records) train_ids.insert(r.features[0]);
    for (const auto& r : test.records) EXPECT_EQ(train_ids.count(r.features[0]), 0u);
    EXPECT_EQ(train.records.size() + test.records.size(), ds.records.size());
}

TEST(ComputeMetrics, DirectFormulas) {
    auto [pred, truth] = from_counts({3, 1, 5, 1});
    auto m = compute_metrics(pred, truth);
    EXPECT_DOUBLE_EQ(*m.accuracy, 0.8);
    EXPECT_DOUBLE_EQ(*m.precision, 0.75);
    EXPECT_DOUBLE_EQ(*m.recall, 0.75);
    EXPECT_DOUBLE_EQ(*m.f1, 0.75);
    EXPECT_EQ(m.counts.total(), 10u);
}

TEST(ComputeMetrics, AllCorrect) {
    std::vector<int> v{0, 1, 2, 0, 1};
    auto m = compute_metrics(v, v);
    EXPECT_DOUBLE_EQ(*m.accuracy, 1.0);
    EXPECT_DOUBLE_EQ(*m.precision, 1.0);
    EXPECT_DOUBLE_EQ(*m.recall, 1.0);
    EXPECT_DOUBLE_EQ(*m.f1, 1.0);
}

TEST(ComputeMetrics, NoPredictedPositivesFlagsPrecisionUndefined) {
    std::vector<int> pred{0, 0, 0}, truth{0, 1, 1};
    auto m = compute_metrics(pred, truth);
    EXPECT_FALSE(m.precision.has_value());
    EXPECT_TRUE(m.recall.has_value());
    EXPECT_DOUBLE_EQ(*m.recall, 0.0);
    EXPECT_FALSE(m.f1.has_value());
}

TEST(ComputeMetrics, MulticlassCollapseAndPerClassConfusion) {
    std::vector<int> truth{0, 1, 2, 2, 0}, pred{0, 2, 2, 0, 1};
    auto m = compute_metrics(pred, truth);
    // binary collapse: attack = nonzero
    EXPECT_EQ(m.counts.tp, 2u);  // truth 1->2, 2->2
    EXPECT_EQ(m.counts.fn, 1u);  // truth 2 -> predicted 0
    EXPECT_EQ(m.counts.fp, 1u);  // truth 0 -> predicted 1
    EXPECT_EQ(m.counts.tn, 1u);
    EXPECT_EQ(m.per_class_confusion[2][2], 1u);
    EXPECT_EQ(m.per_class_confusion[2][0], 1u);
}

TEST(ComputeMetrics, LengthMismatch) {
    std::vector<int> a{0, 1}, b{0};
    EXPECT_THROW(compute_metrics(a, b), std::invalid_argument);
}

TEST(Summarize, MeanIsExactArithmetic) {
    std::vector<RunMetrics> runs(3);
    runs[0].accuracy = 0.5;
    runs[1].accuracy = 0.75;
    runs[2].accuracy = 1.0;
    auto s = summarize(runs);
    EXPECT_NEAR(*s.accuracy, 0.75, 1e-12);
}

TEST(PrepareRun, NormalizationFittedOnTrainOnly) {
    auto ds = separable_flows(50, 3);
    auto baseline = prepare_run(ds, 0.8, 7);

    // mutate every record that landed in the test partition and re-prepare:
    // fitted parameters must not move
    std::set<double> test_keys;
    for (const auto& r : baseline.test.records) test_keys.insert(r.timestamp);
    auto [train_part, test_part] = split_train_test(ds, 0.8, 7);
    (void)train_part;
    std::set<size_t> test_flow_rows;
    for (const auto& r : test_part.records)
        for (size_t i = 0; i < ds.records.size(); ++i)
            if (ds.records[i].features == r.features) test_flow_rows.insert(i);

    FlowDataset mutated = ds;
    for (size_t i : test_flow_rows) {
        mutated.records[i].features[0] *= 1000.0;
        mutated.records[i].features[1] -= 500.0;
    }
    auto after = prepare_run(mutated, 0.8, 7);
    EXPECT_EQ(after.params.min, baseline.params.min);
    EXPECT_EQ(after.params.max, baseline.params.max);
}

TEST(PrepareRun, NormalizedValuesInUnitInterval) {
    auto ds = separable_flows(30, 5);
    auto prepared = prepare_run(ds, 0.8, 11);
    for (const auto& part : {prepared.train, prepared.test})
        for (const auto& r : part.records)
            for (double v : r.features) {
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
            }
}

TEST(RunExperiment, SingleRepeatEqualsManualComposition) {
    auto sag = five_node_sag();
    auto flows = separable_flows(40, 9);
    PipelineConfig cfg = fast_config(5);
    cfg.experiment.repeats = 1;

    auto report = run_experiment(sag, flows, cfg);
    ASSERT_EQ(report.runs.size(), 1u);

    auto prepared = prepare_run(flows, cfg.experiment.train_fraction, cfg.experiment.base_seed);
    auto manual = run_single(sag, prepared, cfg, cfg.experiment.base_seed, 2);
    EXPECT_EQ(report.runs[0].metrics.counts.tp, manual.metrics.counts.tp);
    EXPECT_EQ(report.runs[0].metrics.counts.fp, manual.metrics.counts.fp);
    EXPECT_EQ(report.runs[0].metrics.counts.tn, manual.metrics.counts.tn);
    EXPECT_EQ(report.runs[0].metrics.counts.fn, manual.metrics.counts.fn);
    EXPECT_DOUBLE_EQ(report.runs[0].final_train_loss, manual.final_train_loss);
}

TEST(RunExperiment, MeanEqualsArithmeticMeanOfRuns) {
    auto sag = five_node_sag();
    auto flows = separable_flows(30, 13);
    PipelineConfig cfg = fast_config(2);
    auto report = run_experiment(sag, flows, cfg);
    double sum = 0.0;
    for (const auto& r : report.runs) sum += *r.metrics.accuracy;
    EXPECT_NEAR(*report.mean.accuracy, sum / static_cast<double>(report.runs.size()), 1e-12);
}

TEST(RunExperiment, SeparableSyntheticReachesHighAccuracy) {
    auto sag = five_node_sag();
    auto flows = separable_flows(100, 17);
    PipelineConfig cfg = fast_config(21);
    cfg.gsage.epochs = 25;
    auto report = run_experiment(sag, flows, cfg);
    EXPECT_GE(*report.mean.accuracy, 0.95);
    EXPECT_DOUBLE_EQ(report.empty_mapping_rate, 0.0);
}

TEST(RunExperiment, DeterministicReports) {
    auto sag = five_node_sag();
    auto flows = separable_flows(25, 19);
    PipelineConfig cfg = fast_config(33);
    auto a = report_json(run_experiment(sag, flows, cfg), cfg);
    auto b = report_json(run_experiment(sag, flows, cfg), cfg);
    a.erase("timing");
    b.erase("timing");
    EXPECT_EQ(a.dump(), b.dump());
}

TEST(RateSweep, FullRateRowEqualsUnsampledExperiment) {
    auto sag = five_node_sag();
    auto flows = separable_flows(30, 23);
    PipelineConfig cfg = fast_config(3);
    cfg.experiment.rates = {0.5, 1.0};
    auto rows = rate_sweep(sag, flows, cfg);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_DOUBLE_EQ(rows[0].rate, 0.5);
    EXPECT_DOUBLE_EQ(rows[1].rate, 1.0);

    auto direct = run_experiment(sag, flows, cfg);
    EXPECT_EQ(*rows[1].report.mean.accuracy, *direct.mean.accuracy);
    EXPECT_EQ(rows[1].report.runs[0].metrics.counts.tp, direct.runs[0].metrics.counts.tp);
}

TEST(RateSweep, CsvHasOneRowPerRate) {
    auto sag = five_node_sag();
    auto flows = separable_flows(20, 29);
    PipelineConfig cfg = fast_config(4);
    cfg.gsage.epochs = 3;
    cfg.experiment.repeats = 1;
    cfg.experiment.rates = {0.2, 0.5, 1.0};
    auto rows = rate_sweep(sag, flows, cfg);
    std::string csv = sweep_csv(rows);
    size_t lines = std::count(csv.begin(), csv.end(), '\n');
    EXPECT_EQ(lines, 4u);  // header + 3 rates
    EXPECT_EQ(csv.rfind("rate,accuracy,recall,precision,f1\n", 0), 0u);
    // rate column carries the actual rates, not a stale formatting buffer
    EXPECT_NE(csv.find("\n0.2,"), std::string::npos);
    EXPECT_NE(csv.find("\n0.5,"), std::string::npos);
    EXPECT_NE(csv.find("\n1,"), std::string::npos);
}

TEST(MeasureTestTime, MedianOfFiveAndPurity) {
    auto sag = five_node_sag();
    auto flows = separable_flows(20, 31);
    PipelineConfig cfg = fast_config(6);
    cfg.gsage.epochs = 2;
    auto prepared = prepare_run(flows, 0.8, 1);
    auto fused = build_dataset(sag, prepared.test.records);

    GsageConfig gcfg = cfg.gsage;
    gcfg.seed = 1;
    GsageModel model(gcfg, sag.vocab_size(), 2, AdjacencyList::from_sag(sag), 2);
    auto train_fused = build_dataset(sag, prepared.train.records);
    model.train(train_fused.samples);
    std::vector<int> labels;
    for (const auto& r : prepared.train.records) labels.push_back(r.label);
    auto forest = RandomForest::fit(model.embed(train_fused.samples), labels, cfg.forest);

    auto timing = measure_test_time(model, forest, fused.samples);
    ASSERT_EQ(timing.run_seconds.size(), 5u);
    EXPECT_EQ(timing.sample_count, fused.samples.size());
    std::vector<double> sorted = timing.run_seconds;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_DOUBLE_EQ(timing.median_seconds, sorted[2]);
}

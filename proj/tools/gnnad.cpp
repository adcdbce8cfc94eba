// Command-line front end: encode attack graphs, generate synthetic fixtures,
// and run the training/evaluation pipeline end to end.
//
// Exit status: 0 success, 1 input error (bad paths, malformed files, bad
// flags), 2 internal error. Every subcommand validates and parses all inputs
// before it writes any output file.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gnnad/attack_graph.hpp"
#include "gnnad/eval.hpp"
#include "gnnad/fixture_graph.hpp"
#include "gnnad/flow.hpp"
#include "gnnad/forest.hpp"
#include "gnnad/fusion.hpp"
#include "gnnad/gsage.hpp"
#include "gnnad/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw gnnad::InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw gnnad::InputError("cannot write " + path.string());
    out << content;
}

struct SamplingConfig {
    bool enabled = true;
    size_t attack_cap = 1000;
    size_t benign_cap = 9000;
    std::vector<std::string> exclude = {"Infiltration", "Heartbleed"};
};

struct WindowConfig {
    double seconds = 0.0;  // 0 disables window aggregation
    gnnad::Agg agg = gnnad::Agg::Mean;
};

struct CliConfig {
    fs::path vertices, arcs, flows, out_dir = ".";
    bool reverse_arcs = false;
    std::string benign_label = "BENIGN";
    std::map<std::string, int> label_map;
    SamplingConfig sampling;
    WindowConfig window;
    gnnad::PipelineConfig pipeline;
};

CliConfig parse_config_json(const std::string& text, const fs::path& config_dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw gnnad::InputError(std::string("config: ") + e.what());
    }
    CliConfig cfg;
    auto resolve = [&](const std::string& p) {
        fs::path path(p);
        return path.is_absolute() ? path : config_dir / path;
    };
    if (j.contains("paths")) {
        const auto& p = j["paths"];
        if (p.contains("vertices")) cfg.vertices = resolve(p["vertices"]);
        if (p.contains("arcs")) cfg.arcs = resolve(p["arcs"]);
        if (p.contains("flows")) cfg.flows = resolve(p["flows"]);
        if (p.contains("out_dir")) cfg.out_dir = resolve(p["out_dir"]);
    }
    cfg.reverse_arcs = j.value("reverse_arcs", false);
    cfg.benign_label = j.value("benign_label", std::string("BENIGN"));
    if (j.contains("label_map"))
        for (auto& [k, v] : j["label_map"].items()) cfg.label_map[k] = v.get<int>();
    if (j.contains("sampling")) {
        const auto& s = j["sampling"];
        cfg.sampling.enabled = s.value("enabled", true);
        cfg.sampling.attack_cap = s.value("attack_cap", size_t{1000});
        cfg.sampling.benign_cap = s.value("benign_cap", size_t{9000});
        if (s.contains("exclude"))
            cfg.sampling.exclude = s["exclude"].get<std::vector<std::string>>();
    }
    if (j.contains("window")) {
        cfg.window.seconds = j["window"].value("seconds", 0.0);
        cfg.window.agg = gnnad::agg_from_string(j["window"].value("agg", std::string("mean")));
    }
    if (j.contains("gsage")) {
        const auto& g = j["gsage"];
        auto& m = cfg.pipeline.gsage;
        m.layer_count = g.value("layer_count", m.layer_count);
        m.hidden_units = g.value("hidden_units", m.hidden_units);
        m.dropout_p = g.value("dropout", m.dropout_p);
        if (g.contains("neighbor_pooling"))
            m.neighbor_pool = gnnad::pool_from_string(g["neighbor_pooling"].get<std::string>());
        if (g.contains("graph_pooling"))
            m.graph_pool = gnnad::pool_from_string(g["graph_pooling"].get<std::string>());
        m.epochs = g.value("epochs", m.epochs);
        m.batch_size = g.value("batch_size", m.batch_size);
        m.learning_rate = g.value("learning_rate", m.learning_rate);
    }
    if (j.contains("forest")) {
        const auto& f = j["forest"];
        auto& m = cfg.pipeline.forest;
        m.tree_count = f.value("tree_count", m.tree_count);
        m.max_depth = f.value("max_depth", m.max_depth);
        m.min_samples_leaf = f.value("min_samples_leaf", m.min_samples_leaf);
        m.features_per_split = f.value("features_per_split", m.features_per_split);
        m.bootstrap = f.value("bootstrap", m.bootstrap);
        m.soft_voting = f.value("soft_voting", m.soft_voting);
    }
    if (j.contains("experiment")) {
        const auto& e = j["experiment"];
        auto& m = cfg.pipeline.experiment;
        m.train_fraction = e.value("train_fraction", m.train_fraction);
        m.repeats = e.value("repeats", m.repeats);
        m.base_seed = e.value("base_seed", m.base_seed);
        if (e.contains("rates")) m.rates = e["rates"].get<std::vector<double>>();
        if (e.contains("positive_classes"))
            for (int c : e["positive_classes"]) m.positive_classes.insert(c);
    }
    return cfg;
}

ordered_json default_config_json(const fs::path& vertices, const fs::path& arcs,
                                 const fs::path& flows, bool sampling_enabled) {
    gnnad::PipelineConfig d;
    ordered_json j;
    j["paths"] = {{"vertices", vertices.string()},
                  {"arcs", arcs.string()},
                  {"flows", flows.string()},
                  {"out_dir", "out"}};
    j["reverse_arcs"] = false;
    j["benign_label"] = "BENIGN";
    j["sampling"] = {{"enabled", sampling_enabled},
                     {"attack_cap", 1000},
                     {"benign_cap", 9000},
                     {"exclude", {"Infiltration", "Heartbleed"}}};
    j["gsage"] = {{"layer_count", d.gsage.layer_count},
                  {"hidden_units", d.gsage.hidden_units},
                  {"dropout", d.gsage.dropout_p},
                  {"neighbor_pooling", to_string(d.gsage.neighbor_pool)},
                  {"graph_pooling", to_string(d.gsage.graph_pool)},
                  {"epochs", d.gsage.epochs},
                  {"batch_size", d.gsage.batch_size},
                  {"learning_rate", d.gsage.learning_rate}};
    j["forest"] = {{"tree_count", d.forest.tree_count},
                   {"max_depth", d.forest.max_depth},
                   {"min_samples_leaf", d.forest.min_samples_leaf},
                   {"features_per_split", d.forest.features_per_split},
                   {"bootstrap", d.forest.bootstrap},
                   {"soft_voting", d.forest.soft_voting}};
    j["experiment"] = {{"train_fraction", d.experiment.train_fraction},
                       {"repeats", d.experiment.repeats},
                       {"base_seed", d.experiment.base_seed},
                       {"rates", d.experiment.rates}};
    return j;
}

// Inputs shared by run/sweep/time after parsing and preparation.
struct LoadedPipeline {
    gnnad::StaticAttackGraph sag;
    gnnad::FlowDataset flows;
    std::vector<std::string> preparation_warnings;
    size_t parsed_records = 0;
    size_t dropped_rows = 0;
};

LoadedPipeline load_pipeline_inputs(const CliConfig& cfg) {
    for (const auto& [label, path] :
         std::initializer_list<std::pair<const char*, const fs::path*>>{
             {"vertices", &cfg.vertices}, {"arcs", &cfg.arcs}, {"flows", &cfg.flows}}) {
        if (path->empty()) throw gnnad::InputError(std::string("config: missing paths.") + label);
        if (!fs::exists(*path))
            throw gnnad::InputError(std::string(label) + " file not found: " + path->string());
    }

    LoadedPipeline lp;
    auto graph = gnnad::parse_attack_graph(read_file(cfg.vertices), read_file(cfg.arcs),
                                           cfg.reverse_arcs);
    lp.sag = gnnad::encode_attack_graph(std::move(graph));

    gnnad::ParseFlowOptions opts;
    opts.benign_label = cfg.benign_label;
    opts.label_map = cfg.label_map;
    lp.flows = gnnad::parse_flow_csv(read_file(cfg.flows), opts);
    lp.parsed_records = lp.flows.records.size();
    lp.dropped_rows = lp.flows.dropped_rows;

    if (cfg.window.seconds > 0.0) {
        // aggregate each flow with its recent same-endpoint history
        std::map<std::pair<std::string, std::string>, std::vector<gnnad::FlowRecord>> groups;
        for (const auto& r : lp.flows.records) groups[{r.src_ip, r.dst_ip}].push_back(r);
        for (auto& r : lp.flows.records) {
            const auto& history = groups[{r.src_ip, r.dst_ip}];
            r.features = gnnad::window_aggregate(history, r.timestamp - cfg.window.seconds,
                                                 r.timestamp, cfg.window.agg);
        }
    }

    if (cfg.sampling.enabled) {
        std::set<int> exclude_ids;
        std::map<int, size_t> caps;
        for (const auto& [id, name] : lp.flows.class_names) {
            caps[id] = id == 0 ? cfg.sampling.benign_cap : cfg.sampling.attack_cap;
            for (const auto& ex : cfg.sampling.exclude)
                if (gnnad::to_lower(name) == gnnad::to_lower(ex)) exclude_ids.insert(id);
        }
        lp.flows = gnnad::stratified_cap_sample(lp.flows, caps, exclude_ids,
                                                cfg.pipeline.experiment.base_seed,
                                                &lp.preparation_warnings);
    }
    return lp;
}

ordered_json dataset_json(const CliConfig& cfg, const LoadedPipeline& lp) {
    ordered_json j;
    j["vertices"] = cfg.vertices.string();
    j["arcs"] = cfg.arcs.string();
    j["flows"] = cfg.flows.string();
    j["nodes"] = lp.sag.node_count();
    j["edges"] = lp.sag.graph.edges.size();
    j["vocabulary"] = lp.sag.vocab_size();
    j["parsed_records"] = lp.parsed_records;
    j["dropped_rows"] = lp.dropped_rows;
    j["prepared_records"] = lp.flows.records.size();
    ordered_json counts = ordered_json::object();
    for (const auto& [cls, indices] : lp.flows.class_indices())
        counts[lp.flows.class_names.at(cls)] = indices.size();
    j["class_counts"] = counts;
    j["preparation_warnings"] = lp.preparation_warnings;
    return j;
}

std::string embeddings_csv(const gnnad::Matrix& emb, const std::vector<int>& labels) {
    std::string out = "sample,label";
    for (size_t j = 0; j < emb.cols(); ++j) out += ",e" + std::to_string(j);
    out += "\n";
    char buf[40];
    for (size_t i = 0; i < emb.rows(); ++i) {
        out += std::to_string(i) + "," + std::to_string(labels[i]);
        for (size_t j = 0; j < emb.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", emb(i, j));
            out += ",";
            out += buf;
        }
        out += "\n";
    }
    return out;
}

void ensure_writable_out_dir(const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw gnnad::InputError("cannot create output directory " + out_dir.string());
    const fs::path probe = out_dir / ".gnnad_write_probe";
    std::ofstream f(probe);
    if (!f) throw gnnad::InputError("output directory not writable: " + out_dir.string());
    f.close();
    fs::remove(probe, ec);
}

int run_command(const CliConfig& cfg, bool sweep_mode) {
    auto lp = load_pipeline_inputs(cfg);
    ensure_writable_out_dir(cfg.out_dir);

    if (sweep_mode) {
        auto rows = gnnad::rate_sweep(lp.sag, lp.flows, cfg.pipeline);
        ordered_json j;
        j["dataset"] = dataset_json(cfg, lp);
        j["sweep"] = ordered_json::array();
        for (const auto& row : rows) {
            ordered_json rj = report_json(row.report, cfg.pipeline);
            rj["rate"] = row.rate;
            j["sweep"].push_back(rj);
        }
        write_file(cfg.out_dir / "sweep.csv", gnnad::sweep_csv(rows));
        write_file(cfg.out_dir / "sweep.json", j.dump(2) + "\n");
        std::cout << gnnad::sweep_csv(rows);
        std::cout << "wrote " << (cfg.out_dir / "sweep.csv").string() << " and sweep.json\n";
        return 0;
    }

    gnnad::RunArtifacts artifacts;
    auto report = gnnad::run_experiment(lp.sag, lp.flows, cfg.pipeline, &artifacts);

    ordered_json j = report_json(report, cfg.pipeline);
    j["dataset"] = dataset_json(cfg, lp);
    write_file(cfg.out_dir / "report.json", j.dump(2) + "\n");
    write_file(cfg.out_dir / "gsage_checkpoint.txt", artifacts.model->save());
    write_file(cfg.out_dir / "forest.txt", artifacts.forest->save());

    std::vector<int> labels;
    for (const auto& r : artifacts.train.records) labels.push_back(r.label);
    for (const auto& r : artifacts.test.records) labels.push_back(r.label);
    gnnad::Matrix all(artifacts.train_embeddings.rows() + artifacts.test_embeddings.rows(),
                      artifacts.train_embeddings.cols());
    for (size_t i = 0; i < artifacts.train_embeddings.rows(); ++i)
        for (size_t c = 0; c < all.cols(); ++c) all(i, c) = artifacts.train_embeddings(i, c);
    for (size_t i = 0; i < artifacts.test_embeddings.rows(); ++i)
        for (size_t c = 0; c < all.cols(); ++c)
            all(artifacts.train_embeddings.rows() + i, c) = artifacts.test_embeddings(i, c);
    write_file(cfg.out_dir / "embeddings.csv", embeddings_csv(all, labels));

    auto pct = [](const std::optional<double>& v) {
        return v ? std::to_string(*v) : std::string("undefined");
    };
    std::cout << "runs=" << report.runs.size() << " train=" << report.train_size
              << " test=" << report.test_size
              << " empty_mapping_rate=" << report.empty_mapping_rate << "\n"
              << "mean accuracy=" << pct(report.mean.accuracy)
              << " recall=" << pct(report.mean.recall)
              << " precision=" << pct(report.mean.precision) << " f1=" << pct(report.mean.f1)
              << "\n"
              << "wrote " << (cfg.out_dir / "report.json").string() << "\n";
    return 0;
}

int time_command(const CliConfig& cfg, const std::string& checkpoint_path,
                 const std::string& forest_path) {
    auto lp = load_pipeline_inputs(cfg);
    ensure_writable_out_dir(cfg.out_dir);

    auto prepared = gnnad::prepare_run(lp.flows, cfg.pipeline.experiment.train_fraction,
                                       cfg.pipeline.experiment.base_seed);

    // graph construction (fusion of flows onto the SAG) is the one-time
    // offline cost; clock it separately from inference
    auto t0 = std::chrono::steady_clock::now();
    auto train_fused = gnnad::build_dataset(lp.sag, prepared.train.records);
    auto test_fused = gnnad::build_dataset(lp.sag, prepared.test.records);
    const double construction_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::optional<gnnad::GsageModel> model;
    std::optional<gnnad::RandomForest> forest;
    if (!checkpoint_path.empty() && !forest_path.empty()) {
        model = gnnad::GsageModel::load(read_file(checkpoint_path), cfg.pipeline.gsage);
        forest = gnnad::RandomForest::load(read_file(forest_path));
    } else {
        gnnad::GsageConfig gcfg = cfg.pipeline.gsage;
        gcfg.seed = cfg.pipeline.experiment.base_seed;
        model.emplace(gcfg, lp.sag.vocab_size(), prepared.train.feature_count(),
                      gnnad::AdjacencyList::from_sag(lp.sag),
                      gnnad::detail::class_count_of(lp.flows));
        model->train(train_fused.samples);
        std::vector<int> labels;
        for (const auto& r : prepared.train.records) labels.push_back(r.label);
        gnnad::RandomForestConfig fcfg = cfg.pipeline.forest;
        fcfg.seed = cfg.pipeline.experiment.base_seed + 1000003;
        forest = gnnad::RandomForest::fit(model->embed(train_fused.samples), labels, fcfg);
    }

    auto timing = gnnad::measure_test_time(*model, *forest, test_fused.samples);

    ordered_json j;
    j["timing"] = {{"test_samples", timing.sample_count},
                   {"embed_predict_median_s", timing.median_seconds},
                   {"embed_predict_runs_s", timing.run_seconds},
                   {"construction_s", construction_s}};
    write_file(cfg.out_dir / "time.json", j.dump(2) + "\n");
    std::cout << "test_samples=" << timing.sample_count << "\n"
              << "embed+predict median of " << timing.run_seconds.size() << " runs: "
              << timing.median_seconds << " s\n"
              << "graph construction (excluded from the clock above): " << construction_s
              << " s\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gnnad: attack-graph + traffic GNN anomaly detection pipeline"};
    app.require_subcommand(1);

    // ---- encode ----
    auto* encode = app.add_subcommand("encode", "Parse and one-hot encode an attack graph");
    std::string enc_vertices, enc_arcs, enc_out, enc_dot;
    bool enc_reverse = false;
    encode->add_option("--vertices", enc_vertices, "vertices CSV (id,\"statement\",\"kind\",metric)")
        ->required();
    encode->add_option("--arcs", enc_arcs, "arcs CSV (src,dst[,weight])")->required();
    encode->add_flag("--reverse-arcs", enc_reverse, "read arc rows as dst,src");
    encode->add_option("--out", enc_out, "write encoded SAG as JSON");
    encode->add_option("--dot", enc_dot, "write Graphviz DOT of the parsed graph");

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "Generate a synthetic fixture graph + flow CSV");
    std::string synth_out = "synth";
    gnnad::SynthConfig synth_cfg;
    synth->add_option("--out", synth_out, "output directory")->capture_default_str();
    synth->add_option("--seed", synth_cfg.seed, "generator seed")->capture_default_str();
    synth->add_option("--flows", synth_cfg.flows_per_class, "flows per class")
        ->capture_default_str();
    synth->add_option("--features", synth_cfg.feature_count, "dynamic feature count")
        ->capture_default_str();
    synth->add_option("--attack-classes", synth_cfg.attack_classes, "number of attack classes")
        ->capture_default_str();

    // ---- run / sweep / time (shared config + overrides) ----
    const gnnad::PipelineConfig defaults;
    std::string config_path, out_dir_flag, checkpoint_path, forest_path;
    uint64_t seed_flag = 0;
    std::vector<double> rates_flag;
    size_t epochs_flag = defaults.gsage.epochs, repeats_flag = defaults.experiment.repeats;
    size_t hidden_flag = defaults.gsage.hidden_units, layers_flag = defaults.gsage.layer_count;
    size_t batch_flag = defaults.gsage.batch_size, trees_flag = defaults.forest.tree_count;
    double dropout_flag = defaults.gsage.dropout_p, lr_flag = defaults.gsage.learning_rate;
    double fraction_flag = defaults.experiment.train_fraction;
    std::string npool_flag = to_string(defaults.gsage.neighbor_pool);
    std::string gpool_flag = to_string(defaults.gsage.graph_pool);

    struct SharedOpts {
        CLI::Option *seed = nullptr, *out = nullptr, *rates = nullptr, *epochs = nullptr,
                    *repeats = nullptr, *hidden = nullptr, *layers = nullptr, *batch = nullptr,
                    *trees = nullptr, *dropout = nullptr, *lr = nullptr, *fraction = nullptr,
                    *npool = nullptr, *gpool = nullptr;
    };
    auto add_shared = [&](CLI::App* cmd) {
        SharedOpts o;
        cmd->add_option("--config", config_path, "pipeline config JSON")->required();
        o.seed = cmd->add_option("--seed", seed_flag, "experiment base seed (default 0)");
        o.out = cmd->add_option("--out", out_dir_flag, "output directory (default from config)");
        o.rates = cmd->add_option("--rates", rates_flag,
                                  "sweep rates in (0,1] (default 0.1,0.2,0.4,0.6,0.8,1.0)")
                      ->delimiter(',');
        o.epochs = cmd->add_option("--epochs", epochs_flag, "training epochs")
                       ->capture_default_str();
        o.repeats = cmd->add_option("--repeats", repeats_flag, "experiment repetitions")
                        ->capture_default_str();
        o.hidden = cmd->add_option("--hidden-units", hidden_flag, "GSAGE hidden width")
                       ->capture_default_str();
        o.layers = cmd->add_option("--layers", layers_flag, "SAGE convolution layers")
                       ->capture_default_str();
        o.batch = cmd->add_option("--batch-size", batch_flag, "mini-batch size")
                      ->capture_default_str();
        o.trees = cmd->add_option("--trees", trees_flag, "random forest size")
                      ->capture_default_str();
        o.dropout = cmd->add_option("--dropout", dropout_flag, "dropout probability")
                        ->capture_default_str();
        o.lr = cmd->add_option("--learning-rate", lr_flag, "Adam learning rate")
                   ->capture_default_str();
        o.fraction = cmd->add_option("--train-fraction", fraction_flag, "training split share")
                         ->capture_default_str();
        o.npool = cmd->add_option("--neighbor-pooling", npool_flag, "sum or mean")
                      ->capture_default_str();
        o.gpool = cmd->add_option("--graph-pooling", gpool_flag, "mean or sum")
                      ->capture_default_str();
        return o;
    };

    auto* run = app.add_subcommand("run", "Run the full GSAGE+RF experiment");
    SharedOpts run_opts = add_shared(run);
    auto* sweep = app.add_subcommand("sweep", "Run the sampling-rate sweep");
    SharedOpts sweep_opts = add_shared(sweep);
    auto* time_cmd = app.add_subcommand("time", "Measure embed+predict wall-clock on prebuilt samples");
    SharedOpts time_opts = add_shared(time_cmd);
    time_cmd->add_option("--checkpoint", checkpoint_path, "reuse a saved GSAGE checkpoint");
    time_cmd->add_option("--forest", forest_path, "reuse a saved forest");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (encode->parsed()) {
            for (const std::string& p : {enc_vertices, enc_arcs})
                if (!fs::exists(p)) throw gnnad::InputError("file not found: " + p);
            auto graph = gnnad::parse_attack_graph(read_file(enc_vertices), read_file(enc_arcs),
                                                   enc_reverse);
            auto sag = gnnad::encode_attack_graph(std::move(graph));
            std::cout << "nodes=" << sag.node_count() << " edges=" << sag.graph.edges.size()
                      << " vocabulary=" << sag.vocab_size() << "\n";
            for (const auto& w : sag.warnings) std::cerr << "warning: " << w << "\n";
            if (!enc_dot.empty()) write_file(enc_dot, to_dot(sag.graph));
            if (!enc_out.empty()) {
                ordered_json j;
                j["nodes"] = ordered_json::array();
                for (const auto& n : sag.graph.nodes)
                    j["nodes"].push_back({{"id", n.id},
                                          {"statement", n.statement},
                                          {"kind", to_string(n.kind)},
                                          {"metric", n.metric}});
                j["edges"] = sag.graph.edges;
                j["vocabulary"] = sag.vocabulary.tokens;
                j["features"] = ordered_json::array();
                for (size_t r = 0; r < sag.node_count(); ++r) {
                    std::vector<int> row(sag.vocab_size());
                    for (size_t c = 0; c < sag.vocab_size(); ++c)
                        row[c] = sag.features(r, c) != 0.0 ? 1 : 0;
                    j["features"].push_back(row);
                }
                write_file(enc_out, j.dump(2) + "\n");
                std::cout << "wrote " << enc_out << "\n";
            }
            return 0;
        }

        if (synth->parsed()) {
            auto out = gnnad::generate_synthetic(synth_cfg);
            fs::path dir(synth_out);
            write_file(dir / "vertices.csv", out.vertices_csv);
            write_file(dir / "arcs.csv", out.arcs_csv);
            write_file(dir / "flows.csv", out.flows_csv);
            ordered_json cfg_json = default_config_json("vertices.csv", "arcs.csv", "flows.csv",
                                                        /*sampling_enabled=*/false);
            write_file(dir / "config.json", cfg_json.dump(2) + "\n");
            std::cout << "wrote " << (dir / "vertices.csv").string() << ", arcs.csv, flows.csv, "
                      << "config.json (" << (1 + synth_cfg.attack_classes) << " classes x "
                      << synth_cfg.flows_per_class << " flows)\n";
            return 0;
        }

        // run / sweep / time share config loading + overrides
        const SharedOpts& opts = run->parsed() ? run_opts
                                : sweep->parsed() ? sweep_opts
                                                  : time_opts;
        if (!fs::exists(config_path))
            throw gnnad::InputError("config file not found: " + config_path);
        CliConfig cfg =
            parse_config_json(read_file(config_path), fs::path(config_path).parent_path());
        if (opts.seed->count()) cfg.pipeline.experiment.base_seed = seed_flag;
        if (opts.out->count()) cfg.out_dir = out_dir_flag;
        if (opts.rates->count()) cfg.pipeline.experiment.rates = rates_flag;
        if (opts.epochs->count()) cfg.pipeline.gsage.epochs = epochs_flag;
        if (opts.repeats->count()) cfg.pipeline.experiment.repeats = repeats_flag;
        if (opts.hidden->count()) cfg.pipeline.gsage.hidden_units = hidden_flag;
        if (opts.layers->count()) cfg.pipeline.gsage.layer_count = layers_flag;
        if (opts.batch->count()) cfg.pipeline.gsage.batch_size = batch_flag;
        if (opts.trees->count()) cfg.pipeline.forest.tree_count = trees_flag;
        if (opts.dropout->count()) cfg.pipeline.gsage.dropout_p = dropout_flag;
        if (opts.lr->count()) cfg.pipeline.gsage.learning_rate = lr_flag;
        if (opts.fraction->count()) cfg.pipeline.experiment.train_fraction = fraction_flag;
        if (opts.npool->count()) cfg.pipeline.gsage.neighbor_pool = gnnad::pool_from_string(npool_flag);
        if (opts.gpool->count()) cfg.pipeline.gsage.graph_pool = gnnad::pool_from_string(gpool_flag);
        cfg.pipeline.gsage.validate();
        cfg.pipeline.experiment.validate();

        if (time_cmd->parsed()) return time_command(cfg, checkpoint_path, forest_path);
        return run_command(cfg, sweep->parsed());
    } catch (const gnnad::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}

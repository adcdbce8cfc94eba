// Desk-scale synthetic stand-in for a real flow corpus: a small fixture
// attack graph plus a CIC-schema flow CSV whose classes draw from
// well-separated Gaussians over IPs present in the graph (so every flow maps
// onto the SAG and a correct pipeline must separate the classes).
#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "gnnad/fixture_graph.hpp"
#include "gnnad/rng.hpp"

namespace gnnad {

struct SynthConfig {
    size_t flows_per_class = 1000;
    size_t feature_count = 8;
    size_t attack_classes = 1;
    double class_mean_gap = 0.6;
    double noise_sigma = 0.05;  // gap/sigma = 12 sigmas by default
    uint64_t seed = 0;
};

struct SynthOutput {
    FixtureSpec network;
    std::string vertices_csv;
    std::string arcs_csv;
    std::string flows_csv;
};

namespace detail {

inline std::string synth_timestamp(size_t t) {
    const size_t base = 8 * 3600 + 42 * 60;
    const size_t s = base + t;
    char buf[32];
    std::snprintf(buf, sizeof buf, "5/7/2017 %zu:%02zu:%02zu", s / 3600, (s % 3600) / 60, s % 60);
    return buf;
}

}  // namespace detail

inline SynthOutput generate_synthetic(const SynthConfig& cfg) {
    SynthOutput out;
    out.network.hosts = {"10.0.0.10", "10.0.0.20"};
    out.network.attacker_host = "10.0.0.10";
    out.network.reachability = {{"10.0.0.10", "10.0.0.20", "tcp", 80}};
    out.network.vulnerabilities = {{"10.0.0.20", {"CVE-2021-44228"}}};
    AttackGraph graph = generate_fixture_graph(out.network);
    out.vertices_csv = write_vertices_csv(graph);
    out.arcs_csv = write_arcs_csv(graph);

    static const char* kFeatureNames[] = {
        "Flow Duration",    "Total Fwd Packets",  "Total Backward Packets",
        "Total Length of Fwd Packets", "Total Length of Bwd Packets",
        "Flow Bytes/s",     "Flow Packets/s",     "Flow IAT Mean",
    };
    const size_t known = sizeof(kFeatureNames) / sizeof(kFeatureNames[0]);

    std::string csv = "Flow ID,Source IP,Source Port,Destination IP,Destination Port,Protocol,Timestamp";
    for (size_t f = 0; f < cfg.feature_count; ++f) {
        csv += ",";
        csv += f < known ? kFeatureNames[f] : "Feature " + std::to_string(f);
    }
    csv += ",Label\n";

    SeededRng rng(cfg.seed);
    const size_t classes = 1 + cfg.attack_classes;
    const size_t total = cfg.flows_per_class * classes;
    char buf[48];
    for (size_t t = 0; t < total; ++t) {
        const size_t cls = t % classes;  // interleave classes over time
        const std::string label = cls == 0 ? "BENIGN" : cfg.attack_classes == 1
                                                            ? "DoS"
                                                            : "DoS-" + std::to_string(cls);
        // every feature is discriminative: class c centers at 0.2 + c*gap
        const double mean = 0.2 + static_cast<double>(cls) * cfg.class_mean_gap;
        csv += "flow-" + std::to_string(t) + ",10.0.0.10," +
               std::to_string(1024 + t % 40000) + ",10.0.0.20,80,6," + detail::synth_timestamp(t);
        for (size_t f = 0; f < cfg.feature_count; ++f) {
            std::snprintf(buf, sizeof buf, "%.6f", rng.normal(mean, cfg.noise_sigma));
            csv += ",";
            csv += buf;
        }
        csv += "," + label + "\n";
    }
    out.flows_csv = std::move(csv);
    return out;
}

}  // namespace gnnad

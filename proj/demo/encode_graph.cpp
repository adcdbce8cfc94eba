// Minimal walkthrough of the static side: build a small network fixture,
// derive its attack graph, and inspect the bag-of-words encoding.
#include <iostream>

#include "gnnad/attack_graph.hpp"
#include "gnnad/fixture_graph.hpp"

int main() {
    gnnad::FixtureSpec spec;
    spec.hosts = {"10.0.0.1", "10.0.0.2", "10.0.0.3"};
    spec.attacker_host = "10.0.0.1";
    spec.reachability = {{"10.0.0.1", "10.0.0.2", "tcp", 22},
                         {"10.0.0.2", "10.0.0.3", "tcp", 3306}};
    spec.vulnerabilities = {{"10.0.0.2", {"CVE-2024-6387"}}, {"10.0.0.3", {"CVE-2012-2122"}}};

    auto sag = gnnad::encode_attack_graph(gnnad::generate_fixture_graph(spec));
    std::cout << "nodes: " << sag.node_count() << ", edges: " << sag.graph.edges.size()
              << ", vocabulary: " << sag.vocab_size() << "\n\n";
    for (const auto& node : sag.graph.nodes)
        std::cout << node.id << " [" << to_string(node.kind) << "] " << node.statement << "\n";
    std::cout << "\nfirst feature row:";
    for (size_t j = 0; j < sag.vocab_size(); ++j) std::cout << ' ' << sag.features(0, j);
    std::cout << "\n";
    return 0;
}

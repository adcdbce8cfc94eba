// Deterministic MulVAL-shaped fixture graphs from a toy network description.
// One derivation rule is applied to a fixpoint:
//
//   compromised(h) ∧ hacl(h, h', p, q) ∧ vulExists(h', v)  =>  execCode(h')
//
// where compromised(h) means attackerLocated(h) or a previously derived
// execCode(h). Base facts become LEAF nodes, each rule application an AND
// node, each derived fact an OR node (created once, fed by every rule that
// derives it).
#pragma once

#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gnnad/attack_graph.hpp"
#include "gnnad/common.hpp"

namespace gnnad {

struct Reachability {
    std::string src;
    std::string dst;
    std::string protocol;  // tcp/udp/icmp
    int port = 0;
};

struct FixtureSpec {
    std::vector<std::string> hosts;  // host identifiers; IP literals work best
    std::vector<Reachability> reachability;
    std::map<std::string, std::vector<std::string>> vulnerabilities;  // host -> vuln ids
    std::string attacker_host;
};

inline AttackGraph generate_fixture_graph(const FixtureSpec& spec) {
    if (spec.hosts.empty()) throw InputError("fixture spec: empty host list");
    std::set<std::string> hosts(spec.hosts.begin(), spec.hosts.end());
    if (!hosts.count(spec.attacker_host))
        throw InputError("fixture spec: attacker location '" + spec.attacker_host +
                         "' not among hosts");
    for (const auto& r : spec.reachability)
        for (const auto& h : {r.src, r.dst})
            if (!hosts.count(h))
                throw InputError("fixture spec: reachability references unknown host '" + h + "'");
    for (const auto& [h, vulns] : spec.vulnerabilities) {
        (void)vulns;
        if (!hosts.count(h))
            throw InputError("fixture spec: vulnerability on unknown host '" + h + "'");
    }

    AttackGraph g;
    int next_id = 1;
    auto add_node = [&](const std::string& stmt, NodeKind kind, double metric) {
        g.nodes.push_back({next_id, stmt, kind, metric});
        return next_id++;
    };

    // Base facts first, in spec order.
    std::map<std::string, int> compromised_node;  // host -> node providing code execution
    int attacker_leaf = add_node("attackerLocated('" + spec.attacker_host + "')", NodeKind::LEAF, 1.0);
    compromised_node[spec.attacker_host] = attacker_leaf;

    std::vector<int> hacl_leaf(spec.reachability.size());
    for (size_t i = 0; i < spec.reachability.size(); ++i) {
        const auto& r = spec.reachability[i];
        hacl_leaf[i] = add_node("hacl('" + r.src + "','" + r.dst + "'," + r.protocol + "," +
                                    std::to_string(r.port) + ")",
                                NodeKind::LEAF, 1.0);
    }

    std::map<std::pair<std::string, std::string>, int> vul_leaf;  // (host, vuln) -> node
    for (const auto& h : spec.hosts) {
        auto it = spec.vulnerabilities.find(h);
        if (it == spec.vulnerabilities.end()) continue;
        for (const auto& v : it->second)
            vul_leaf[{h, v}] = add_node("vulExists('" + h + "','" + v + "')", NodeKind::LEAF, 1.0);
    }

    // Chain the rule to a fixpoint. Iteration order is fixed (reachability
    // then vulnerability list order), so output is deterministic. Each
    // (reachability row, vulnerability) pair fires at most once.
    std::set<std::pair<size_t, std::string>> fired;
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < spec.reachability.size(); ++i) {
            const auto& r = spec.reachability[i];
            auto src_it = compromised_node.find(r.src);
            if (src_it == compromised_node.end()) continue;
            auto vit = spec.vulnerabilities.find(r.dst);
            if (vit == spec.vulnerabilities.end()) continue;
            for (const auto& v : vit->second) {
                if (!fired.insert({i, v}).second) continue;
                int rule = add_node("RULE 2 (remote exploit of a server program)", NodeKind::AND, 0.0);
                g.edges.emplace_back(src_it->second, rule);
                g.edges.emplace_back(hacl_leaf[i], rule);
                g.edges.emplace_back(vul_leaf.at({r.dst, v}), rule);
                auto exec_it = compromised_node.find(r.dst);
                if (exec_it == compromised_node.end()) {
                    int exec = add_node("execCode('" + r.dst + "',root)", NodeKind::OR, 0.0);
                    compromised_node[r.dst] = exec;
                    g.edges.emplace_back(rule, exec);
                } else {
                    g.edges.emplace_back(rule, exec_it->second);
                }
                changed = true;
            }
        }
    }
    return g;
}

/// Canonical vertices CSV (`id,"statement","kind",metric`).
inline std::string write_vertices_csv(const AttackGraph& g) {
    std::string out;
    for (const auto& n : g.nodes) {
        std::string stmt = n.statement;
        std::string quoted;
        for (char c : stmt) {
            if (c == '"') quoted += '"';
            quoted += c;
        }
        char metric[32];
        std::snprintf(metric, sizeof metric, "%g", n.metric);
        out += std::to_string(n.id) + ",\"" + quoted + "\",\"" + to_string(n.kind) + "\"," + metric + "\n";
    }
    return out;
}

/// Canonical arcs CSV (`src,dst`).
inline std::string write_arcs_csv(const AttackGraph& g) {
    std::string out;
    for (auto [s, d] : g.edges) out += std::to_string(s) + "," + std::to_string(d) + "\n";
    return out;
}

}  // namespace gnnad

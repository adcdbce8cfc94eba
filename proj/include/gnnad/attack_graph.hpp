// MulVAL-style attack graph ingestion and bag-of-words encoding.
//
// The input is the two-file layout emitted by attack-graph generators: a
// vertices CSV (`id,"statement","kind",metric`) and an arcs CSV
// (`src,dst[,weight]`). Parsing validates referential integrity and
// acyclicity; encoding turns each node statement into a binary
// token-presence row over a vocabulary built in first-occurrence order.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gnnad/common.hpp"
#include "gnnad/matrix.hpp"

namespace gnnad {

enum class NodeKind { AND, OR, LEAF };

inline const char* to_string(NodeKind k) {
    switch (k) {
        case NodeKind::AND: return "AND";
        case NodeKind::OR: return "OR";
        default: return "LEAF";
    }
}

struct AttackGraphNode {
    int id = 0;                // unique, positive
    std::string statement;     // MulVAL predicate text, e.g. execCode(webServer,root)
    NodeKind kind = NodeKind::LEAF;
    double metric = 0.0;       // carried through, unused by the encoding
};

struct AttackGraph {
    std::vector<AttackGraphNode> nodes;
    std::vector<std::pair<int, int>> edges;  // (src id, dst id)

    const AttackGraphNode* find(int id) const {
        for (const auto& n : nodes)
            if (n.id == id) return &n;
        return nullptr;
    }
};

/// Lowercased maximal runs of [A-Za-z0-9_], in order of appearance.
inline std::vector<std::string> tokenize_statement(std::string_view statement) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : statement) {
        if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_') {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

struct Vocabulary {
    std::unordered_map<std::string, size_t> token_to_index;
    std::vector<std::string> tokens;  // first-occurrence order

    size_t size() const { return tokens.size(); }

    std::optional<size_t> index_of(const std::string& token) const {
        auto it = token_to_index.find(token);
        if (it == token_to_index.end()) return std::nullopt;
        return it->second;
    }

    /// Returns the token's index, inserting it if new.
    size_t intern(const std::string& token) {
        auto [it, inserted] = token_to_index.try_emplace(token, tokens.size());
        if (inserted) tokens.push_back(token);
        return it->second;
    }
};

namespace detail {

inline NodeKind parse_kind(std::string_view raw, size_t lineno) {
    std::string k = to_lower(trim(raw));
    if (k == "and") return NodeKind::AND;
    if (k == "or") return NodeKind::OR;
    if (k == "leaf") return NodeKind::LEAF;
    throw InputError("vertices line " + std::to_string(lineno + 1) +
                     ": unknown node kind '" + std::string(trim(raw)) + "'");
}

/// Kahn's algorithm. Returns node ids in topological order, or throws with
/// the ids of one cycle.
inline std::vector<int> topological_order(const AttackGraph& g) {
    std::unordered_map<int, std::vector<int>> out;
    std::unordered_map<int, int> indegree;
    for (const auto& n : g.nodes) indegree[n.id] = 0;
    for (auto [s, d] : g.edges) {
        out[s].push_back(d);
        ++indegree[d];
    }
    std::vector<int> queue;
    for (const auto& n : g.nodes)
        if (indegree[n.id] == 0) queue.push_back(n.id);
    std::vector<int> order;
    while (!queue.empty()) {
        int v = queue.back();
        queue.pop_back();
        order.push_back(v);
        for (int d : out[v])
            if (--indegree[d] == 0) queue.push_back(d);
    }
    if (order.size() == g.nodes.size()) return order;

    // Nodes never emitted sit on or behind a cycle, and each has at least one
    // never-emitted predecessor. Walking predecessors until a repeat is
    // therefore guaranteed to close a loop; reverse it for reporting.
    std::unordered_set<int> remaining;
    for (const auto& n : g.nodes) remaining.insert(n.id);
    for (int v : order) remaining.erase(v);
    std::unordered_map<int, std::vector<int>> in;
    for (auto [s, d] : g.edges)
        if (remaining.count(s) && remaining.count(d)) in[d].push_back(s);

    std::vector<int> path;
    std::unordered_map<int, size_t> seen;
    int v = *remaining.begin();
    while (!seen.count(v)) {
        seen[v] = path.size();
        path.push_back(v);
        v = in[v].front();
    }
    std::vector<int> cycle(path.begin() + static_cast<long>(seen[v]), path.end());
    std::reverse(cycle.begin(), cycle.end());
    std::string ids;
    for (int c : cycle) ids += std::to_string(c) + " -> ";
    ids += std::to_string(cycle.front());
    throw InputError("attack graph contains a cycle: " + ids);
}

}  // namespace detail

/// Parses the two-file MulVAL output format. With `reverse_arcs`, arc rows
/// are read as `dst,src` (some generators emit arcs child-first).
inline AttackGraph parse_attack_graph(std::string_view vertices_text, std::string_view arcs_text,
                                      bool reverse_arcs = false) {
    AttackGraph g;
    std::unordered_set<int> ids;

    for_each_line(vertices_text, [&](std::string_view line, size_t lineno) {
        if (trim(line).empty()) return;
        auto fields = split_csv(line);
        if (fields.size() != 4)
            throw InputError("vertices line " + std::to_string(lineno + 1) + ": expected 4 fields, got " +
                             std::to_string(fields.size()));
        long long id;
        if (!parse_long(fields[0], id) || id <= 0)
            throw InputError("vertices line " + std::to_string(lineno + 1) + ": bad node id '" +
                             std::string(trim(fields[0])) + "'");
        if (!ids.insert(static_cast<int>(id)).second)
            throw InputError("vertices line " + std::to_string(lineno + 1) + ": duplicate node id " +
                             std::to_string(id));
        AttackGraphNode n;
        n.id = static_cast<int>(id);
        n.statement = std::string(trim(fields[1]));
        if (n.statement.empty())
            throw InputError("vertices line " + std::to_string(lineno + 1) + ": empty statement");
        n.kind = detail::parse_kind(fields[2], lineno);
        if (!parse_double(fields[3], n.metric))
            throw InputError("vertices line " + std::to_string(lineno + 1) + ": bad metric '" +
                             std::string(trim(fields[3])) + "'");
        g.nodes.push_back(std::move(n));
    });
    if (g.nodes.empty()) throw InputError("vertices file contains no nodes");

    std::set<std::pair<int, int>> seen_edges;
    for_each_line(arcs_text, [&](std::string_view line, size_t lineno) {
        if (trim(line).empty()) return;
        auto fields = split_csv(line);
        if (fields.size() != 2 && fields.size() != 3)
            throw InputError("arcs line " + std::to_string(lineno + 1) + ": expected 2 or 3 fields, got " +
                             std::to_string(fields.size()));
        long long a, b;
        if (!parse_long(fields[0], a) || !parse_long(fields[1], b))
            throw InputError("arcs line " + std::to_string(lineno + 1) + ": bad node id");
        int src = static_cast<int>(reverse_arcs ? b : a);
        int dst = static_cast<int>(reverse_arcs ? a : b);
        for (int v : {src, dst})
            if (!ids.count(v))
                throw InputError("arcs line " + std::to_string(lineno + 1) + ": unknown node id " +
                                 std::to_string(v));
        if (!seen_edges.insert({src, dst}).second)
            throw InputError("arcs line " + std::to_string(lineno + 1) + ": duplicate edge " +
                             std::to_string(src) + " -> " + std::to_string(dst));
        g.edges.emplace_back(src, dst);
    });

    detail::topological_order(g);  // throws on cycles (a self-loop counts)
    return g;
}

/// The encoded triple (V, E, F): the parsed graph, the token vocabulary, and
/// an n x D binary feature matrix. Row r corresponds to the node with the
/// r-th smallest id; `row_of` maps node id to row.
struct StaticAttackGraph {
    AttackGraph graph;
    Vocabulary vocabulary;
    Matrix features;                    // n x D, entries in {0,1}
    std::vector<int> node_ids;          // ascending; node_ids[row] = id
    std::unordered_map<int, size_t> row_of;
    std::vector<std::string> warnings;  // e.g. statements with no tokens

    size_t node_count() const { return node_ids.size(); }
    size_t vocab_size() const { return vocabulary.size(); }
};

/// Algorithm: scan nodes in ascending id order, interning tokens in first
/// occurrence order to build the vocabulary, then set F[v][i]=1 for every
/// token i appearing in node v's statement (set semantics).
inline StaticAttackGraph encode_attack_graph(AttackGraph graph) {
    StaticAttackGraph sag;
    sag.graph = std::move(graph);

    sag.node_ids.reserve(sag.graph.nodes.size());
    for (const auto& n : sag.graph.nodes) sag.node_ids.push_back(n.id);
    std::sort(sag.node_ids.begin(), sag.node_ids.end());
    for (size_t r = 0; r < sag.node_ids.size(); ++r) sag.row_of[sag.node_ids[r]] = r;

    std::vector<std::vector<std::string>> node_tokens(sag.node_ids.size());
    for (const auto& n : sag.graph.nodes) node_tokens[sag.row_of[n.id]] = tokenize_statement(n.statement);

    for (size_t r = 0; r < node_tokens.size(); ++r) {
        if (node_tokens[r].empty())
            sag.warnings.push_back("node " + std::to_string(sag.node_ids[r]) +
                                   ": statement has no tokens");
        for (const auto& t : node_tokens[r]) sag.vocabulary.intern(t);
    }

    sag.features = Matrix(sag.node_ids.size(), sag.vocabulary.size());
    for (size_t r = 0; r < node_tokens.size(); ++r)
        for (const auto& t : node_tokens[r]) sag.features(r, *sag.vocabulary.index_of(t)) = 1.0;
    return sag;
}

/// Re-encodes a graph against an existing (frozen) vocabulary. Any token not
/// in the vocabulary is an error: the SAG is static per deployment, so a
/// foreign graph is a configuration mistake, not an inference case.
inline Matrix encode_with_vocabulary(const AttackGraph& graph, const Vocabulary& vocab) {
    std::vector<int> ids;
    for (const auto& n : graph.nodes) ids.push_back(n.id);
    std::sort(ids.begin(), ids.end());
    std::unordered_map<int, size_t> row_of;
    for (size_t r = 0; r < ids.size(); ++r) row_of[ids[r]] = r;

    Matrix f(ids.size(), vocab.size());
    for (const auto& n : graph.nodes) {
        for (const auto& t : tokenize_statement(n.statement)) {
            auto idx = vocab.index_of(t);
            if (!idx)
                throw InputError("encode_with_vocabulary: token '" + t + "' (node " +
                                 std::to_string(n.id) + ") not in vocabulary");
            f(row_of[n.id], *idx) = 1.0;
        }
    }
    return f;
}

/// Graphviz export for inspection; node label is the statement.
inline std::string to_dot(const AttackGraph& g) {
    std::ostringstream os;
    os << "digraph attack_graph {\n";
    for (const auto& n : g.nodes) {
        std::string label = n.statement;
        std::string escaped;
        for (char c : label) {
            if (c == '"' || c == '\\') escaped += '\\';
            escaped += c;
        }
        os << "  n" << n.id << " [label=\"" << escaped << "\", shape="
           << (n.kind == NodeKind::AND ? "ellipse" : n.kind == NodeKind::OR ? "diamond" : "box")
           << "];\n";
    }
    for (auto [s, d] : g.edges) os << "  n" << s << " -> n" << d << ";\n";
    os << "}\n";
    return os.str();
}

}  // namespace gnnad

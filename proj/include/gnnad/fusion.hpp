// Static/dynamic fusion: map each flow onto SAG nodes whose statements
// mention the flow's endpoints, and assemble per-flow graph samples whose
// node features are [static one-hot row | dynamic flow vector].
//
// Matching is by IP only. Ports and protocol names are extracted into the
// endpoint index for inspection, but MulVAL statements rarely carry port
// context in a form worth trusting for joins.
#pragma once

#include <cctype>
#include <set>
#include <string>
#include <vector>

#include "gnnad/attack_graph.hpp"
#include "gnnad/common.hpp"
#include "gnnad/flow.hpp"
#include "gnnad/matrix.hpp"

namespace gnnad {

/// Network identifiers found in one statement: dotted-quad IPv4 literals
/// (each octet <= 255, not embedded in a longer number), protocol keywords
/// (tcp/udp/icmp), and port numbers. A bare integer counts as a port only
/// when it immediately follows a protocol keyword, as in
/// `hacl(h1, h2, tcp, 80)`; without that anchor a digit run is just a token.
inline std::set<std::string> extract_identifiers(std::string_view statement) {
    std::set<std::string> ids;
    const size_t len = statement.size();
    std::vector<bool> masked(len, false);

    auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
    auto boundary = [&](size_t pos) {  // the quad must be a standalone token
        if (pos >= len) return true;
        char c = statement[pos];
        return !std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.';
    };

    // dotted-quad scan
    for (size_t i = 0; i < len; ++i) {
        if (!is_digit(statement[i]) || !boundary(i == 0 ? len : i - 1)) continue;
        size_t p = i;
        int octets = 0;
        bool ok = true;
        size_t end = p;
        for (int o = 0; o < 4 && ok; ++o) {
            int value = 0, digits = 0;
            while (end < len && is_digit(statement[end]) && digits < 3) {
                value = value * 10 + (statement[end] - '0');
                ++end;
                ++digits;
            }
            if (digits == 0 || value > 255 || (end < len && is_digit(statement[end]))) {
                ok = false;
                break;
            }
            ++octets;
            if (o < 3) {
                if (end < len && statement[end] == '.') ++end;
                else ok = false;
            }
        }
        if (ok && octets == 4 && boundary(end)) {
            ids.insert(std::string(statement.substr(i, end - i)));
            for (size_t m = i; m < end; ++m) masked[m] = true;
            i = end;
        }
    }

    // token walk outside IP spans; ports must trail a protocol keyword
    static const std::set<std::string> kProtocols{"tcp", "udp", "icmp"};
    std::string cur;
    bool prev_was_protocol = false;
    auto flush = [&] {
        if (cur.empty()) return;
        if (kProtocols.count(cur)) {
            ids.insert(cur);
            prev_was_protocol = true;
        } else {
            bool digits = std::all_of(cur.begin(), cur.end(),
                                      [](char c) { return c >= '0' && c <= '9'; });
            if (digits && prev_was_protocol && cur.size() <= 5 && std::stol(cur) <= 65535)
                ids.insert(cur);
            prev_was_protocol = false;
        }
        cur.clear();
    };
    for (size_t i = 0; i < len; ++i) {
        char c = statement[i];
        if (!masked[i] && (std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        else
            flush();
    }
    flush();
    return ids;
}

/// Per-row identifier sets for one SAG; covers every node (possibly empty).
struct NodeEndpointIndex {
    std::vector<std::set<std::string>> by_row;

    static NodeEndpointIndex build(const StaticAttackGraph& sag) {
        NodeEndpointIndex idx;
        idx.by_row.resize(sag.node_count());
        for (const auto& n : sag.graph.nodes)
            idx.by_row[sag.row_of.at(n.id)] = extract_identifiers(n.statement);
        return idx;
    }
};

/// Rows whose identifier set contains the flow's source or destination IP.
inline std::vector<size_t> map_flow_to_nodes(const FlowRecord& flow,
                                             const NodeEndpointIndex& index) {
    std::vector<size_t> rows;
    for (size_t r = 0; r < index.by_row.size(); ++r)
        if (index.by_row[r].count(flow.src_ip) || index.by_row[r].count(flow.dst_ip))
            rows.push_back(r);
    return rows;
}

/// One classification unit: the shared SAG topology plus this flow's
/// dynamic vector replicated onto its mapped rows. Stored compactly; the
/// dense n x (D+K) matrix view is materialized on demand. The SAG must
/// outlive the sample.
struct GraphSample {
    const StaticAttackGraph* sag = nullptr;
    std::vector<size_t> mapped_rows;  // ascending
    std::vector<double> dynamic;      // length K (normalized flow features)
    int label = 0;
    size_t flow_id = 0;               // index of the originating record

    size_t node_count() const { return sag->node_count(); }
    size_t feature_width() const { return sag->vocab_size() + dynamic.size(); }

    /// Writes the fused rows into `out` starting at `row_offset`.
    void write_features(Matrix& out, size_t row_offset) const {
        const size_t n = node_count(), d = sag->vocab_size(), k = dynamic.size();
        for (size_t r = 0; r < n; ++r) {
            double* dst = out.row(row_offset + r);
            const double* src = sag->features.row(r);
            for (size_t j = 0; j < d; ++j) dst[j] = src[j];
            for (size_t j = 0; j < k; ++j) dst[d + j] = 0.0;
        }
        for (size_t r : mapped_rows) {
            double* dst = out.row(row_offset + r);
            for (size_t j = 0; j < k; ++j) dst[d + j] = dynamic[j];
        }
    }

    Matrix node_features() const {
        Matrix m(node_count(), feature_width());
        write_features(m, 0);
        return m;
    }
};

inline GraphSample build_sample(const StaticAttackGraph& sag, const NodeEndpointIndex& index,
                                const FlowRecord& flow, size_t flow_id = 0) {
    GraphSample s;
    s.sag = &sag;
    s.mapped_rows = map_flow_to_nodes(flow, index);
    s.dynamic = flow.features;
    s.label = flow.label;
    s.flow_id = flow_id;
    return s;
}

struct FusedDataset {
    std::vector<GraphSample> samples;
    double empty_mapping_fraction = 0.0;
};

/// One sample per flow, input order preserved. The fraction of flows that
/// mapped to no node is reported so SAG/traffic mismatches are visible.
inline FusedDataset build_dataset(const StaticAttackGraph& sag,
                                  const std::vector<FlowRecord>& flows) {
    NodeEndpointIndex index = NodeEndpointIndex::build(sag);
    FusedDataset out;
    out.samples.reserve(flows.size());
    size_t empty = 0;
    for (size_t i = 0; i < flows.size(); ++i) {
        out.samples.push_back(build_sample(sag, index, flows[i], i));
        if (out.samples.back().mapped_rows.empty()) ++empty;
    }
    out.empty_mapping_fraction =
        flows.empty() ? 0.0 : static_cast<double>(empty) / static_cast<double>(flows.size());
    return out;
}

// ---------------------------------------------------------------------------
// Columnar interchange format:
//   line 1: gnnad-samples v1
//   line 2: <n> <D> <K> <sample count>
//   per sample: "S <label> <flow_id>" then n lines of D+K numbers (%.17g).

inline std::string write_samples(const FusedDataset& ds) {
    std::string out = "gnnad-samples v1\n";
    if (ds.samples.empty()) return out + "0 0 0 0\n";
    const size_t n = ds.samples[0].node_count();
    const size_t d = ds.samples[0].sag->vocab_size();
    const size_t k = ds.samples[0].dynamic.size();
    out += std::to_string(n) + " " + std::to_string(d) + " " + std::to_string(k) + " " +
           std::to_string(ds.samples.size()) + "\n";
    char buf[40];
    for (const auto& s : ds.samples) {
        out += "S " + std::to_string(s.label) + " " + std::to_string(s.flow_id) + "\n";
        Matrix m = s.node_features();
        for (size_t r = 0; r < n; ++r) {
            for (size_t j = 0; j < d + k; ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", m(r, j));
                if (j) out += ' ';
                out += buf;
            }
            out += '\n';
        }
    }
    return out;
}

struct SerializedSamples {
    size_t n = 0, d = 0, k = 0;
    std::vector<Matrix> features;  // one n x (D+K) matrix per sample
    std::vector<int> labels;
    std::vector<size_t> flow_ids;
};

inline SerializedSamples read_samples(std::string_view text) {
    SerializedSamples out;
    size_t count = 0;
    size_t row_in_sample = 0;
    bool have_header = false, have_dims = false;
    for_each_line(text, [&](std::string_view line, size_t lineno) {
        if (!have_header) {
            if (trim(line) != "gnnad-samples v1")
                throw InputError("samples file: bad magic on line 1");
            have_header = true;
            return;
        }
        if (!have_dims) {
            auto parts = split(trim(line), ' ');
            long long n, d, k, c;
            if (parts.size() != 4 || !parse_long(parts[0], n) || !parse_long(parts[1], d) ||
                !parse_long(parts[2], k) || !parse_long(parts[3], c))
                throw InputError("samples file: bad dimension line");
            out.n = static_cast<size_t>(n);
            out.d = static_cast<size_t>(d);
            out.k = static_cast<size_t>(k);
            count = static_cast<size_t>(c);
            have_dims = true;
            return;
        }
        auto t = trim(line);
        if (t.empty()) return;
        if (t.starts_with("S ")) {
            auto parts = split(t, ' ');
            long long label, flow_id;
            if (parts.size() != 3 || !parse_long(parts[1], label) || !parse_long(parts[2], flow_id))
                throw InputError("samples file line " + std::to_string(lineno + 1) +
                                 ": bad sample header");
            out.features.emplace_back(out.n, out.d + out.k);
            out.labels.push_back(static_cast<int>(label));
            out.flow_ids.push_back(static_cast<size_t>(flow_id));
            row_in_sample = 0;
            return;
        }
        if (out.features.empty() || row_in_sample >= out.n)
            throw InputError("samples file line " + std::to_string(lineno + 1) +
                             ": unexpected data row");
        auto cells = split(t, ' ');
        if (cells.size() != out.d + out.k)
            throw InputError("samples file line " + std::to_string(lineno + 1) +
                             ": expected " + std::to_string(out.d + out.k) + " values");
        for (size_t j = 0; j < cells.size(); ++j) {
            double v;
            if (!parse_double(cells[j], v))
                throw InputError("samples file line " + std::to_string(lineno + 1) +
                                 ": bad number");
            out.features.back()(row_in_sample, j) = v;
        }
        ++row_in_sample;
    });
    if (out.features.size() != count)
        throw InputError("samples file: expected " + std::to_string(count) + " samples, found " +
                         std::to_string(out.features.size()));
    return out;
}

}  // namespace gnnad

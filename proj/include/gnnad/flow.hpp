// Flow-feature CSV ingestion (CIC-IDS-2017 schema compatible), cleaning,
// min-max normalization, stratified subsampling, and time-window
// aggregation.
//
// Column handling: the seven required columns are matched case-insensitively
// after trimming. Every remaining column is a feature candidate; a candidate
// counts as numeric when at least half of its non-empty cells parse fully as
// numbers (so identifier-style text columns drop out, while occasional
// NaN/Infinity strings keep a column numeric and instead drop the affected
// rows). Rows with missing, unparseable, or non-finite feature cells are
// dropped and counted.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gnnad/common.hpp"
#include "gnnad/rng.hpp"

namespace gnnad {

struct FlowRecord {
    std::string src_ip;
    std::string dst_ip;
    int src_port = 0;
    int dst_port = 0;
    int protocol = 0;
    double timestamp = 0.0;       // seconds; synthetic row clock when unparseable
    std::string timestamp_text;   // original cell, for faithful re-emission
    std::vector<double> features; // length K, finite
    int label = 0;                // 0 = benign
};

struct FlowDataset {
    std::vector<FlowRecord> records;
    std::map<int, std::string> class_names;
    std::vector<std::string> feature_names;
    size_t dropped_rows = 0;
    std::vector<std::string> warnings;

    size_t feature_count() const { return feature_names.size(); }

    std::map<int, std::vector<size_t>> class_indices() const {
        std::map<int, std::vector<size_t>> by_class;
        for (size_t i = 0; i < records.size(); ++i) by_class[records[i].label].push_back(i);
        return by_class;
    }
};

struct NormalizationParams {
    std::vector<double> min;
    std::vector<double> max;
};

class EmptyWindowError : public InputError {
public:
    EmptyWindowError() : InputError("no data in window") {}
};

struct ParseFlowOptions {
    std::string benign_label = "BENIGN";   // matched case-insensitively, trimmed
    std::map<std::string, int> label_map;  // optional explicit text -> class id
};

namespace detail {

// CIC-IDS-2017 timestamps: d/M/yyyy H:m[:s]. Returns false when the cell
// does not match.
inline bool parse_cic_timestamp(std::string_view raw, double& out) {
    std::string s(trim(raw));
    int d, mo, y, h, mi, sec = 0;
    int n = std::sscanf(s.c_str(), "%d/%d/%d %d:%d:%d", &d, &mo, &y, &h, &mi, &sec);
    if (n != 5 && n != 6) return false;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 ||
        sec < 0 || sec > 60)
        return false;
    // days since 1970-01-01 (civil-from-days inverse, Hinnant's algorithm)
    int32_t yy = y - (mo <= 2);
    int32_t era = (yy >= 0 ? yy : yy - 399) / 400;
    uint32_t yoe = static_cast<uint32_t>(yy - era * 400);
    uint32_t doy = static_cast<uint32_t>((153 * (mo + (mo > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    uint32_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    int64_t days = static_cast<int64_t>(era) * 146097 + static_cast<int64_t>(doe) - 719468;
    out = static_cast<double>(days) * 86400.0 + h * 3600.0 + mi * 60.0 + sec;
    return true;
}

inline bool parse_port(std::string_view raw, int& out) {
    long long v;
    if (!parse_long(raw, v) || v < 0 || v > 65535) return false;
    out = static_cast<int>(v);
    return true;
}

}  // namespace detail

inline FlowDataset parse_flow_csv(std::string_view text, const ParseFlowOptions& options = {}) {
    // header
    std::string_view header_line;
    size_t body_start = 0;
    {
        size_t nl = text.find('\n');
        header_line = (nl == std::string_view::npos) ? text : text.substr(0, nl);
        if (!header_line.empty() && header_line.back() == '\r') header_line.remove_suffix(1);
        body_start = (nl == std::string_view::npos) ? text.size() : nl + 1;
    }
    if (trim(header_line).empty()) throw InputError("flow csv: empty file");

    auto header = split_csv(header_line);
    std::vector<std::string> names(header.size());
    for (size_t i = 0; i < header.size(); ++i) names[i] = std::string(trim(header[i]));

    auto find_col = [&](std::string_view wanted) -> long {
        for (size_t i = 0; i < names.size(); ++i)
            if (to_lower(names[i]) == wanted) return static_cast<long>(i);
        return -1;
    };
    const long c_src_ip = find_col("source ip"), c_dst_ip = find_col("destination ip");
    const long c_src_port = find_col("source port"), c_dst_port = find_col("destination port");
    const long c_proto = find_col("protocol"), c_time = find_col("timestamp");
    const long c_label = find_col("label");
    for (auto [col, name] : std::initializer_list<std::pair<long, const char*>>{
             {c_src_ip, "source ip"}, {c_dst_ip, "destination ip"}, {c_src_port, "source port"},
             {c_dst_port, "destination port"}, {c_proto, "protocol"}, {c_time, "timestamp"},
             {c_label, "label"}})
        if (col < 0) throw InputError(std::string("flow csv: missing required column '") + name + "'");

    std::set<long> required{c_src_ip, c_dst_ip, c_src_port, c_dst_port, c_proto, c_time, c_label};

    // first body pass: majority-vote numeric classification of candidates
    std::string_view body = text.substr(body_start);
    std::vector<size_t> non_empty(names.size(), 0), parsed_ok(names.size(), 0);
    for_each_line(body, [&](std::string_view line, size_t) {
        if (trim(line).empty()) return;
        auto cells = split_csv(line);
        for (size_t i = 0; i < cells.size() && i < names.size(); ++i) {
            if (required.count(static_cast<long>(i))) continue;
            if (trim(cells[i]).empty()) continue;
            ++non_empty[i];
            double v;
            if (parse_double(cells[i], v)) ++parsed_ok[i];
        }
    });

    FlowDataset ds;
    std::vector<size_t> feature_cols;
    for (size_t i = 0; i < names.size(); ++i) {
        if (required.count(static_cast<long>(i))) continue;
        if (non_empty[i] == 0) continue;
        if (parsed_ok[i] * 2 >= non_empty[i]) {
            feature_cols.push_back(i);
            ds.feature_names.push_back(names[i]);
        }
    }

    // label assignment: benign pinned to 0, attacks in first-occurrence order
    std::map<std::string, int> label_ids = options.label_map;
    const std::string benign_lower = to_lower(trim(options.benign_label));
    int next_class = 1;
    for (const auto& [text_label, id] : label_ids) {
        (void)text_label;
        next_class = std::max(next_class, id + 1);
    }

    // second body pass: build records
    size_t data_row = 0;
    for_each_line(body, [&](std::string_view line, size_t) {
        if (trim(line).empty()) return;
        const size_t row_index = data_row++;
        auto cells = split_csv(line);
        if (cells.size() != names.size()) {
            ++ds.dropped_rows;
            return;
        }
        FlowRecord rec;
        rec.src_ip = std::string(trim(cells[static_cast<size_t>(c_src_ip)]));
        rec.dst_ip = std::string(trim(cells[static_cast<size_t>(c_dst_ip)]));
        std::string label_text(trim(cells[static_cast<size_t>(c_label)]));
        if (rec.src_ip.empty() || rec.dst_ip.empty() || label_text.empty() ||
            !detail::parse_port(cells[static_cast<size_t>(c_src_port)], rec.src_port) ||
            !detail::parse_port(cells[static_cast<size_t>(c_dst_port)], rec.dst_port)) {
            ++ds.dropped_rows;
            return;
        }
        long long proto;
        if (!parse_long(cells[static_cast<size_t>(c_proto)], proto)) {
            ++ds.dropped_rows;
            return;
        }
        rec.protocol = static_cast<int>(proto);

        rec.features.resize(feature_cols.size());
        for (size_t f = 0; f < feature_cols.size(); ++f) {
            double v;
            if (!parse_double(cells[feature_cols[f]], v) || !std::isfinite(v)) {
                ++ds.dropped_rows;
                return;
            }
            rec.features[f] = v;
        }

        rec.timestamp_text = std::string(trim(cells[static_cast<size_t>(c_time)]));
        if (!detail::parse_cic_timestamp(rec.timestamp_text, rec.timestamp) &&
            !parse_double(rec.timestamp_text, rec.timestamp))
            rec.timestamp = static_cast<double>(row_index);  // synthetic clock

        auto [it, inserted] = label_ids.try_emplace(label_text, 0);
        if (inserted) {
            if (to_lower(label_text) == benign_lower)
                it->second = 0;
            else
                it->second = next_class++;
        }
        rec.label = it->second;
        ds.class_names[rec.label] = label_text;
        ds.records.push_back(std::move(rec));
    });

    if (ds.records.empty())
        throw InputError(data_row == 0 ? "flow csv: no data rows"
                                       : "flow csv: no rows survive cleaning");
    return ds;
}

/// Audit re-emission with the same schema the parser accepts.
inline std::string write_flow_csv(const FlowDataset& ds) {
    std::string out = "Source IP,Destination IP,Source Port,Destination Port,Protocol,Timestamp";
    for (const auto& f : ds.feature_names) out += "," + f;
    out += ",Label\n";
    char buf[40];
    for (const auto& r : ds.records) {
        out += r.src_ip + "," + r.dst_ip + "," + std::to_string(r.src_port) + "," +
               std::to_string(r.dst_port) + "," + std::to_string(r.protocol) + "," +
               r.timestamp_text;
        for (double v : r.features) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out += ",";
            out += buf;
        }
        out += "," + ds.class_names.at(r.label) + "\n";
    }
    return out;
}

/// Per-feature min/max. Fit on the training partition only.
inline NormalizationParams fit_minmax(const FlowDataset& ds) {
    if (ds.records.empty()) throw InputError("fit_minmax: empty dataset");
    const size_t k = ds.feature_count();
    NormalizationParams p;
    p.min.assign(k, std::numeric_limits<double>::infinity());
    p.max.assign(k, -std::numeric_limits<double>::infinity());
    for (const auto& r : ds.records)
        for (size_t f = 0; f < k; ++f) {
            p.min[f] = std::min(p.min[f], r.features[f]);
            p.max[f] = std::max(p.max[f], r.features[f]);
        }
    return p;
}

/// (x-min)/(max-min), clamped to [0,1]; constant features map to 0.
inline FlowDataset apply_minmax(FlowDataset ds, const NormalizationParams& p) {
    const size_t k = ds.feature_count();
    if (p.min.size() != k || p.max.size() != k)
        throw std::invalid_argument("apply_minmax: parameter length mismatch");
    for (auto& r : ds.records)
        for (size_t f = 0; f < k; ++f) {
            const double range = p.max[f] - p.min[f];
            double v = range > 0.0 ? (r.features[f] - p.min[f]) / range : 0.0;
            r.features[f] = std::clamp(v, 0.0, 1.0);
        }
    return ds;
}

namespace detail {

/// Selected original indices, ascending, so full-rate sampling is the
/// identity and downstream splits see a stable order.
inline FlowDataset take_indices(const FlowDataset& ds, std::vector<size_t> idx) {
    std::sort(idx.begin(), idx.end());
    FlowDataset out;
    out.class_names = ds.class_names;
    out.feature_names = ds.feature_names;
    out.records.reserve(idx.size());
    for (size_t i : idx) out.records.push_back(ds.records[i]);
    return out;
}

}  // namespace detail

/// Uniform per-class subsampling to min(cap, available); classes in
/// `exclude` are removed entirely. Caps must cover every retained class.
inline FlowDataset stratified_cap_sample(const FlowDataset& ds,
                                         const std::map<int, size_t>& caps,
                                         const std::set<int>& exclude, uint64_t seed,
                                         std::vector<std::string>* warnings = nullptr) {
    SeededRng rng(seed);
    std::vector<size_t> chosen;
    for (const auto& [cls, indices] : ds.class_indices()) {
        if (exclude.count(cls)) continue;
        auto cap_it = caps.find(cls);
        if (cap_it == caps.end())
            throw InputError("stratified_cap_sample: no cap for class " + std::to_string(cls) +
                             " ('" + ds.class_names.at(cls) + "')");
        const size_t want = cap_it->second;
        if (indices.size() <= want) {
            if (indices.size() < want && warnings)
                warnings->push_back("class '" + ds.class_names.at(cls) + "': only " +
                                    std::to_string(indices.size()) + " of requested " +
                                    std::to_string(want) + " records available");
            chosen.insert(chosen.end(), indices.begin(), indices.end());
        } else {
            for (size_t pick : rng.sample_without_replacement(indices.size(), want))
                chosen.push_back(indices[pick]);
        }
    }
    return detail::take_indices(ds, std::move(chosen));
}

/// Per-class uniform sampling of ceil(rate * class size) records.
inline FlowDataset rate_sample(const FlowDataset& ds, double rate, uint64_t seed) {
    if (!(rate > 0.0) || rate > 1.0)
        throw InputError("rate_sample: rate must be in (0, 1]");
    SeededRng rng(seed);
    std::vector<size_t> chosen;
    for (const auto& [cls, indices] : ds.class_indices()) {
        (void)cls;
        const size_t want = static_cast<size_t>(
            std::ceil(rate * static_cast<double>(indices.size())));
        if (want >= indices.size()) {
            chosen.insert(chosen.end(), indices.begin(), indices.end());
        } else {
            for (size_t pick : rng.sample_without_replacement(indices.size(), want))
                chosen.push_back(indices[pick]);
        }
    }
    return detail::take_indices(ds, std::move(chosen));
}

enum class Agg { Mean, Sum, Max };

inline Agg agg_from_string(std::string_view s) {
    std::string v = to_lower(trim(s));
    if (v == "mean") return Agg::Mean;
    if (v == "sum") return Agg::Sum;
    if (v == "max") return Agg::Max;
    throw InputError("unknown aggregation '" + std::string(s) + "' (expected mean, sum, or max)");
}

/// Per-coordinate aggregation of every record with timestamp in [t1, t2].
inline std::vector<double> window_aggregate(std::span<const FlowRecord> records, double t1,
                                            double t2, Agg agg) {
    if (t1 > t2) throw std::invalid_argument("window_aggregate: t1 > t2");
    std::vector<double> acc;
    size_t count = 0;
    for (const auto& r : records) {
        if (r.timestamp < t1 || r.timestamp > t2) continue;
        if (acc.empty()) acc.assign(r.features.size(), agg == Agg::Max
                                                           ? -std::numeric_limits<double>::infinity()
                                                           : 0.0);
        for (size_t f = 0; f < r.features.size(); ++f) {
            switch (agg) {
                case Agg::Mean:
                case Agg::Sum: acc[f] += r.features[f]; break;
                case Agg::Max: acc[f] = std::max(acc[f], r.features[f]); break;
            }
        }
        ++count;
    }
    if (count == 0) throw EmptyWindowError();
    if (agg == Agg::Mean)
        for (double& v : acc) v /= static_cast<double>(count);
    return acc;
}

}  // namespace gnnad

// GSAGE: a stack of SAGE-convolution layers over the shared attack-graph
// topology, global pooling to one embedding per graph sample, and a linear
// classification head trained with softmax cross-entropy.
//
// Per layer:  h' = dropout(relu(AGGR(h) * W))  with AGGR pooling each node's
// own row together with its neighbors' rows (sum or mean). Edges are treated
// as undirected for the neighborhood: the graph is a DAG and strictly
// directed aggregation would starve its source nodes of context.
//
// A mini-batch is processed as one block-diagonal graph: sample features are
// stacked into a (B*n) x width matrix and aggregation runs per block. Every
// gradient here is exact; tests hold it to central finite differences.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gnnad/attack_graph.hpp"
#include "gnnad/common.hpp"
#include "gnnad/fusion.hpp"
#include "gnnad/gradcheck.hpp"
#include "gnnad/matrix.hpp"
#include "gnnad/nn.hpp"
#include "gnnad/rng.hpp"

namespace gnnad {

enum class Pool { Sum, Mean };

inline const char* to_string(Pool p) { return p == Pool::Sum ? "sum" : "mean"; }

inline Pool pool_from_string(std::string_view s) {
    std::string v = to_lower(trim(s));
    if (v == "sum") return Pool::Sum;
    if (v == "mean") return Pool::Mean;
    throw InputError("unknown pooling '" + std::string(s) + "' (expected sum or mean)");
}

struct GsageConfig {
    size_t layer_count = 3;
    size_t hidden_units = 256;
    double dropout_p = 0.2;
    Pool neighbor_pool = Pool::Sum;
    Pool graph_pool = Pool::Mean;
    size_t epochs = 100;
    size_t batch_size = 32;
    double learning_rate = 1e-3;
    uint64_t seed = 0;

    void validate() const {
        if (layer_count < 1) throw InputError("gsage: layer_count must be >= 1");
        if (hidden_units < 1) throw InputError("gsage: hidden_units must be >= 1");
        if (dropout_p < 0.0 || dropout_p >= 1.0) throw InputError("gsage: dropout_p must be in [0,1)");
        if (batch_size < 1) throw InputError("gsage: batch_size must be >= 1");
    }
};

/// Undirected neighbor lists by SAG row (deduplicated, self excluded; the
/// aggregation adds the self row explicitly).
struct AdjacencyList {
    std::vector<std::vector<size_t>> neighbors;

    size_t size() const { return neighbors.size(); }

    static AdjacencyList from_sag(const StaticAttackGraph& sag) {
        AdjacencyList adj;
        adj.neighbors.resize(sag.node_count());
        std::set<std::pair<size_t, size_t>> seen;
        for (auto [s, d] : sag.graph.edges) {
            size_t a = sag.row_of.at(s), b = sag.row_of.at(d);
            if (a == b) continue;
            if (seen.insert({std::min(a, b), std::max(a, b)}).second) {
                adj.neighbors[a].push_back(b);
                adj.neighbors[b].push_back(a);
            }
        }
        return adj;
    }
};

struct TrainingEpoch {
    double mean_loss = 0.0;
    double accuracy = 0.0;  // argmax agreement on the training passes
    double seconds = 0.0;
};
using TrainingHistory = std::vector<TrainingEpoch>;

/// AGGR over {self} + neighbors for each of `blocks` stacked graphs laid out
/// as consecutive row groups of size adj.size().
inline Matrix sc_aggregate(const Matrix& h, const AdjacencyList& adj, Pool pool, size_t blocks) {
    const size_t n = adj.size(), w = h.cols();
    if (h.rows() != n * blocks)
        throw std::invalid_argument("sc_aggregate: row count != nodes * blocks");
    Matrix out(h.rows(), w);
    for (size_t b = 0; b < blocks; ++b) {
        const size_t base = b * n;
        for (size_t i = 0; i < n; ++i) {
            double* dst = out.row(base + i);
            const double* self = h.row(base + i);
            for (size_t j = 0; j < w; ++j) dst[j] = self[j];
            for (size_t nb : adj.neighbors[i]) {
                const double* src = h.row(base + nb);
                for (size_t j = 0; j < w; ++j) dst[j] += src[j];
            }
            if (pool == Pool::Mean) {
                const double inv = 1.0 / static_cast<double>(1 + adj.neighbors[i].size());
                for (size_t j = 0; j < w; ++j) dst[j] *= inv;
            }
        }
    }
    return out;
}

/// Transpose of sc_aggregate for the backward pass. Sum pooling is symmetric
/// (undirected A + I); mean pooling scales each source row by its own
/// 1/(deg+1) before the symmetric gather.
inline Matrix sc_aggregate_transpose(const Matrix& g, const AdjacencyList& adj, Pool pool,
                                     size_t blocks) {
    if (pool == Pool::Sum) return sc_aggregate(g, adj, pool, blocks);
    const size_t n = adj.size(), w = g.cols();
    Matrix scaled = g;
    for (size_t b = 0; b < blocks; ++b)
        for (size_t i = 0; i < n; ++i) {
            const double inv = 1.0 / static_cast<double>(1 + adj.neighbors[i].size());
            double* row = scaled.row(b * n + i);
            for (size_t j = 0; j < w; ++j) row[j] *= inv;
        }
    return sc_aggregate(scaled, adj, Pool::Sum, blocks);
}

/// One SAGE-convolution layer on a single graph:
/// dropout(relu(AGGR(h) * w)). Eval mode (training == false) skips dropout.
inline Matrix sc_layer_forward(const Matrix& h, const AdjacencyList& adj, const Matrix& w,
                               Pool neighbor_pool, double dropout_p, SeededRng& rng,
                               bool training) {
    Matrix z = relu(matmul(sc_aggregate(h, adj, neighbor_pool, 1), w));
    return dropout(z, dropout_p, rng, training).output;
}

class GsageModel {
public:
    GsageModel(GsageConfig config, size_t static_dim, size_t dynamic_dim, AdjacencyList adjacency,
               size_t class_count)
        : config_(config),
          static_dim_(static_dim),
          dynamic_dim_(dynamic_dim),
          class_count_(class_count),
          adjacency_(std::move(adjacency)),
          rng_(config.seed) {
        config_.validate();
        if (class_count_ < 2) throw InputError("gsage: need at least 2 classes");
        size_t in = input_width();
        for (size_t l = 0; l < config_.layer_count; ++l) {
            layers_.emplace_back(glorot_uniform(in, config_.hidden_units, rng_));
            in = config_.hidden_units;
        }
        head_w_ = Parameter(glorot_uniform(config_.hidden_units, class_count_, rng_));
        head_b_ = Parameter(Matrix(1, class_count_));
    }

    const GsageConfig& config() const { return config_; }
    size_t input_width() const { return static_dim_ + dynamic_dim_; }
    size_t static_dim() const { return static_dim_; }
    size_t dynamic_dim() const { return dynamic_dim_; }
    size_t node_count() const { return adjacency_.size(); }
    size_t class_count() const { return class_count_; }
    const AdjacencyList& adjacency() const { return adjacency_; }

    std::vector<Parameter*> parameters() {
        std::vector<Parameter*> ps;
        for (auto& l : layers_) ps.push_back(&l);
        ps.push_back(&head_w_);
        ps.push_back(&head_b_);
        return ps;
    }

    /// Seeded-shuffle mini-batch training with Adam. Deterministic for a
    /// given construction seed; epochs == 0 returns an empty history and
    /// leaves the model untouched.
    TrainingHistory train(std::span<const GraphSample> samples) {
        TrainingHistory history;
        if (config_.epochs == 0) return history;
        if (samples.empty()) throw InputError("gsage train: no samples");
        std::set<int> classes;
        for (const auto& s : samples) classes.insert(s.label);
        if (classes.size() < 2) throw InputError("gsage train: single-class dataset");

        AdamConfig adam;
        adam.learning_rate = config_.learning_rate;
        std::vector<AdamState> states;
        for (Parameter* p : parameters()) states.emplace_back(*p);

        std::vector<size_t> order(samples.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;

        std::vector<const GraphSample*> batch;
        for (size_t epoch = 0; epoch < config_.epochs; ++epoch) {
            auto t0 = std::chrono::steady_clock::now();
            rng_.shuffle(order);
            double loss_sum = 0.0;
            size_t correct = 0;
            for (size_t start = 0; start < order.size(); start += config_.batch_size) {
                const size_t bsz = std::min(config_.batch_size, order.size() - start);
                batch.clear();
                std::vector<int> labels(bsz);
                for (size_t b = 0; b < bsz; ++b) {
                    batch.push_back(&samples[order[start + b]]);
                    labels[b] = batch.back()->label;
                }
                Cache cache;
                forward_batch(batch, /*training=*/true, cache);
                auto ce = softmax_cross_entropy(cache.logits, labels);
                if (!std::isfinite(ce.loss))
                    throw std::runtime_error(
                        "gsage train: non-finite loss at epoch " + std::to_string(epoch) +
                        ", batch " + std::to_string(start / config_.batch_size) +
                        " (learning rate too high or inputs unnormalized?)");
                loss_sum += ce.loss * static_cast<double>(bsz);
                for (size_t b = 0; b < bsz; ++b)
                    if (argmax_row(cache.logits, b) == labels[b]) ++correct;

                for (Parameter* p : parameters()) p->zero_grad();
                backward(cache, ce.grad);
                auto ps = parameters();
                for (size_t i = 0; i < ps.size(); ++i) adam_step(*ps[i], states[i], adam);
            }
            TrainingEpoch e;
            e.mean_loss = loss_sum / static_cast<double>(samples.size());
            e.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
            e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            history.push_back(e);
        }
        return history;
    }

    /// Graph embeddings in eval mode (dropout off), one row per sample.
    Matrix embed(std::span<const GraphSample> samples) {
        Matrix out(samples.size(), config_.hidden_units);
        std::vector<const GraphSample*> batch;
        for (size_t start = 0; start < samples.size(); start += config_.batch_size) {
            const size_t bsz = std::min(config_.batch_size, samples.size() - start);
            batch.clear();
            for (size_t b = 0; b < bsz; ++b) batch.push_back(&samples[start + b]);
            Cache cache;
            forward_batch(batch, /*training=*/false, cache);
            for (size_t b = 0; b < bsz; ++b)
                for (size_t j = 0; j < config_.hidden_units; ++j)
                    out(start + b, j) = cache.hgraph(b, j);
        }
        return out;
    }

    /// Eval-mode forward of one sample: (graph embedding, logits).
    std::pair<std::vector<double>, std::vector<double>> forward_one(const GraphSample& sample) {
        const GraphSample* ptr = &sample;
        Cache cache;
        forward_batch({&ptr, 1}, /*training=*/false, cache);
        std::vector<double> emb(cache.hgraph.row(0), cache.hgraph.row(0) + config_.hidden_units);
        std::vector<double> logits(cache.logits.row(0), cache.logits.row(0) + class_count_);
        return {emb, logits};
    }

    /// Training-mode forward of one sample (consumes dropout randomness).
    std::pair<std::vector<double>, std::vector<double>> forward_one_training(
        const GraphSample& sample) {
        const GraphSample* ptr = &sample;
        Cache cache;
        forward_batch({&ptr, 1}, /*training=*/true, cache);
        std::vector<double> emb(cache.hgraph.row(0), cache.hgraph.row(0) + config_.hidden_units);
        std::vector<double> logits(cache.logits.row(0), cache.logits.row(0) + class_count_);
        return {emb, logits};
    }

    int predict_head(const GraphSample& sample) {
        auto [emb, logits] = forward_one(sample);
        (void)emb;
        int best = 0;
        for (size_t j = 1; j < logits.size(); ++j)
            if (logits[j] > logits[static_cast<size_t>(best)]) best = static_cast<int>(j);
        return best;
    }

    /// Eval forward on explicit features/adjacency (permutation tests and
    /// other adversarial-topology checks).
    std::pair<std::vector<double>, std::vector<double>> forward_eval_raw(
        const Matrix& features, const AdjacencyList& adj) const {
        if (features.cols() != input_width())
            throw std::invalid_argument("gsage forward: feature width " +
                                        std::to_string(features.cols()) + " != D+K " +
                                        std::to_string(input_width()));
        Matrix h = features;
        for (const auto& layer : layers_) {
            Matrix m = sc_aggregate(h, adj, config_.neighbor_pool, 1);
            h = relu(matmul(m, layer.value));
        }
        std::vector<double> emb = pool_rows(h, 0, h.rows());
        Matrix hg(1, config_.hidden_units);
        for (size_t j = 0; j < emb.size(); ++j) hg(0, j) = emb[j];
        Matrix logits = matmul(hg, head_w_.value);
        for (size_t j = 0; j < class_count_; ++j) logits(0, j) += head_b_.value(0, j);
        return {emb, {logits.row(0), logits.row(0) + class_count_}};
    }

    /// Deterministic loss + exact gradients on a fixed batch (dropout off).
    /// This is the entry point the finite-difference oracle drives.
    double loss_and_grad(std::span<const GraphSample> samples) {
        std::vector<const GraphSample*> batch;
        std::vector<int> labels;
        for (const auto& s : samples) {
            batch.push_back(&s);
            labels.push_back(s.label);
        }
        Cache cache;
        forward_batch(batch, /*training=*/false, cache);
        auto ce = softmax_cross_entropy(cache.logits, labels);
        for (Parameter* p : parameters()) p->zero_grad();
        backward(cache, ce.grad);
        return ce.loss;
    }

    std::string save() const;
    static GsageModel load(std::string_view text, GsageConfig base_config);

private:
    struct Cache {
        size_t batch = 0, n = 0;
        std::vector<Matrix> inputs;   // per layer: aggregated input M_l
        std::vector<Matrix> pre;      // per layer: Z_l = M_l * W_l
        std::vector<Matrix> masks;    // per layer: dropout multipliers
        std::vector<Matrix> outputs;  // per layer: H_l after dropout
        Matrix h0;                    // stacked fused features
        Matrix hgraph;                // B x hidden
        Matrix logits;                // B x classes
    };

    int argmax_row(const Matrix& m, size_t row) const {
        int best = 0;
        for (size_t j = 1; j < m.cols(); ++j)
            if (m(row, j) > m(row, static_cast<size_t>(best))) best = static_cast<int>(j);
        return best;
    }

    std::vector<double> pool_rows(const Matrix& h, size_t begin, size_t count) const {
        std::vector<double> out(h.cols(), 0.0);
        for (size_t r = begin; r < begin + count; ++r)
            for (size_t j = 0; j < h.cols(); ++j) out[j] += h(r, j);
        if (config_.graph_pool == Pool::Mean)
            for (double& v : out) v /= static_cast<double>(count);
        return out;
    }

    void forward_batch(std::span<const GraphSample* const> batch, bool training, Cache& cache) {
        const size_t n = node_count();
        cache.batch = batch.size();
        cache.n = n;
        cache.h0 = Matrix(batch.size() * n, input_width());
        for (size_t b = 0; b < batch.size(); ++b) {
            if (batch[b]->feature_width() != input_width())
                throw std::invalid_argument("gsage forward: sample width " +
                                            std::to_string(batch[b]->feature_width()) +
                                            " != model D+K " + std::to_string(input_width()));
            batch[b]->write_features(cache.h0, b * n);
        }

        cache.inputs.clear();
        cache.pre.clear();
        cache.masks.clear();
        cache.outputs.clear();
        const Matrix* h = &cache.h0;
        for (auto& layer : layers_) {
            cache.inputs.push_back(sc_aggregate(*h, adjacency_, config_.neighbor_pool, batch.size()));
            cache.pre.push_back(matmul(cache.inputs.back(), layer.value));
            Matrix activated = relu(cache.pre.back());
            auto dr = dropout(activated, config_.dropout_p, rng_, training);
            cache.masks.push_back(std::move(dr.mask));
            cache.outputs.push_back(std::move(dr.output));
            h = &cache.outputs.back();
        }

        cache.hgraph = Matrix(batch.size(), config_.hidden_units);
        for (size_t b = 0; b < batch.size(); ++b) {
            auto pooled = pool_rows(*h, b * n, n);
            for (size_t j = 0; j < pooled.size(); ++j) cache.hgraph(b, j) = pooled[j];
        }
        cache.logits = matmul(cache.hgraph, head_w_.value);
        for (size_t b = 0; b < batch.size(); ++b)
            for (size_t j = 0; j < class_count_; ++j) cache.logits(b, j) += head_b_.value(0, j);
    }

    /// Accumulates exact gradients into every Parameter from d loss/d logits.
    void backward(const Cache& cache, const Matrix& dlogits) {
        // head
        add_inplace(head_w_.grad, matmul(transpose(cache.hgraph), dlogits));
        for (size_t b = 0; b < cache.batch; ++b)
            for (size_t j = 0; j < class_count_; ++j) head_b_.grad(0, j) += dlogits(b, j);
        Matrix dhgraph = matmul(dlogits, transpose(head_w_.value));

        // pooling
        Matrix dh(cache.batch * cache.n, config_.hidden_units);
        const double scale = config_.graph_pool == Pool::Mean
                                 ? 1.0 / static_cast<double>(cache.n)
                                 : 1.0;
        for (size_t b = 0; b < cache.batch; ++b)
            for (size_t r = 0; r < cache.n; ++r)
                for (size_t j = 0; j < config_.hidden_units; ++j)
                    dh(b * cache.n + r, j) = dhgraph(b, j) * scale;

        // layers, last to first
        for (size_t li = layers_.size(); li-- > 0;) {
            Matrix da = hadamard(dh, cache.masks[li]);
            Matrix dz = relu_backward(cache.pre[li], da);
            add_inplace(layers_[li].grad, matmul(transpose(cache.inputs[li]), dz));
            if (li > 0) {
                Matrix dm = matmul(dz, transpose(layers_[li].value));
                dh = sc_aggregate_transpose(dm, adjacency_, config_.neighbor_pool, cache.batch);
            }
        }
    }

    GsageConfig config_;
    size_t static_dim_, dynamic_dim_, class_count_;
    AdjacencyList adjacency_;
    SeededRng rng_;
    std::vector<Parameter> layers_;
    Parameter head_w_, head_b_;
};

// ---------------------------------------------------------------------------
// Checkpoint format (text, bit-exact):
//   gnnad-checkpoint v1
//   arch <hash>            fnv1a over the architecture line below
//   seed <seed>
//   shape <D> <K> <n> <classes> <layers> <hidden> <neighbor_pool> <graph_pool>
//   adjacency <n> rows: space-separated neighbor indices (blank allowed)
//   per weight matrix: "matrix <rows> <cols>" then rows of hex-encoded
//   IEEE-754 doubles. Hex preserves every bit, so identical runs produce
//   byte-identical files.

namespace detail {

inline std::string arch_line(size_t d, size_t k, size_t n, size_t classes, const GsageConfig& c) {
    return std::to_string(d) + " " + std::to_string(k) + " " + std::to_string(n) + " " +
           std::to_string(classes) + " " + std::to_string(c.layer_count) + " " +
           std::to_string(c.hidden_units) + " " + to_string(c.neighbor_pool) + " " +
           to_string(c.graph_pool);
}

inline void write_matrix_hex(std::string& out, const Matrix& m) {
    out += "matrix " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
    char buf[20];
    for (size_t i = 0; i < m.rows(); ++i) {
        for (size_t j = 0; j < m.cols(); ++j) {
            uint64_t bits;
            static_assert(sizeof(double) == sizeof(uint64_t));
            const double v = m(i, j);
            std::memcpy(&bits, &v, sizeof bits);
            std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(bits));
            if (j) out += ' ';
            out += buf;
        }
        out += '\n';
    }
}

}  // namespace detail

inline std::string GsageModel::save() const {
    std::string out = "gnnad-checkpoint v1\n";
    std::string arch = detail::arch_line(static_dim_, dynamic_dim_, adjacency_.size(),
                                         class_count_, config_);
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(arch)));
    out += std::string("arch ") + hash + "\n";
    out += "seed " + std::to_string(config_.seed) + "\n";
    out += "shape " + arch + "\n";
    out += "adjacency\n";
    for (const auto& nbrs : adjacency_.neighbors) {
        for (size_t i = 0; i < nbrs.size(); ++i) {
            if (i) out += ' ';
            out += std::to_string(nbrs[i]);
        }
        out += '\n';
    }
    for (const auto& l : layers_) detail::write_matrix_hex(out, l.value);
    detail::write_matrix_hex(out, head_w_.value);
    detail::write_matrix_hex(out, head_b_.value);
    return out;
}

inline GsageModel GsageModel::load(std::string_view text, GsageConfig base_config) {
    std::istringstream in{std::string(text)};
    std::string line;
    auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) throw InputError(std::string("checkpoint: truncated at ") + what);
        return line;
    };
    if (next_line("magic") != "gnnad-checkpoint v1") throw InputError("checkpoint: bad magic");
    std::string arch_hash = next_line("arch");
    std::string seed_line = next_line("seed");
    std::string shape = next_line("shape");
    if (shape.rfind("shape ", 0) != 0) throw InputError("checkpoint: missing shape line");
    std::istringstream ss(shape.substr(6));
    size_t d, k, n, classes, layer_count, hidden;
    std::string npool, gpool;
    if (!(ss >> d >> k >> n >> classes >> layer_count >> hidden >> npool >> gpool))
        throw InputError("checkpoint: bad shape line");

    base_config.layer_count = layer_count;
    base_config.hidden_units = hidden;
    base_config.neighbor_pool = pool_from_string(npool);
    base_config.graph_pool = pool_from_string(gpool);
    {
        std::string arch = detail::arch_line(d, k, n, classes, base_config);
        char hash[20];
        std::snprintf(hash, sizeof hash, "%016llx",
                      static_cast<unsigned long long>(fnv1a64(arch)));
        if (arch_hash != std::string("arch ") + hash)
            throw InputError("checkpoint: architecture hash mismatch");
    }
    if (seed_line.rfind("seed ", 0) != 0) throw InputError("checkpoint: missing seed line");
    long long seed_value;
    if (!parse_long(seed_line.substr(5), seed_value))
        throw InputError("checkpoint: bad seed value");
    base_config.seed = static_cast<uint64_t>(seed_value);

    if (next_line("adjacency") != "adjacency") throw InputError("checkpoint: missing adjacency");
    AdjacencyList adj;
    adj.neighbors.resize(n);
    for (size_t i = 0; i < n; ++i) {
        next_line("adjacency row");
        std::istringstream rs(line);
        size_t v;
        while (rs >> v) {
            if (v >= n) throw InputError("checkpoint: adjacency index out of range");
            adj.neighbors[i].push_back(v);
        }
    }

    GsageModel model(base_config, d, k, std::move(adj), classes);
    auto read_matrix = [&](Matrix& dst, const char* what) {
        next_line(what);
        std::istringstream hs(line);
        std::string tag;
        size_t rows, cols;
        if (!(hs >> tag >> rows >> cols) || tag != "matrix")
            throw InputError(std::string("checkpoint: expected matrix header for ") + what);
        if (rows != dst.rows() || cols != dst.cols())
            throw InputError(std::string("checkpoint: shape mismatch for ") + what + " (" +
                             std::to_string(rows) + "x" + std::to_string(cols) + " vs expected " +
                             std::to_string(dst.rows()) + "x" + std::to_string(dst.cols()) + ")");
        for (size_t i = 0; i < rows; ++i) {
            next_line("matrix row");
            std::istringstream ls(line);
            std::string hex;
            for (size_t j = 0; j < cols; ++j) {
                uint64_t bits;
                if (!(ls >> hex) || !parse_hex_u64(hex, bits))
                    throw InputError("checkpoint: bad matrix row");
                double v;
                std::memcpy(&v, &bits, sizeof v);
                dst(i, j) = v;
            }
        }
    };
    for (size_t l = 0; l < layer_count; ++l) read_matrix(model.layers_[l].value, "layer");
    read_matrix(model.head_w_.value, "head weights");
    read_matrix(model.head_b_.value, "head bias");
    return model;
}

}  // namespace gnnad

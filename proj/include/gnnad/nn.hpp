// Training primitives: parameters with accumulated gradients, Adam with bias
// correction, inverted dropout, and a numerically stable softmax
// cross-entropy with its exact gradient.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gnnad/matrix.hpp"
#include "gnnad/rng.hpp"

namespace gnnad {

struct Parameter {
    Matrix value;
    Matrix grad;

    Parameter() = default;
    explicit Parameter(Matrix v) : value(std::move(v)), grad(value.rows(), value.cols()) {}

    void zero_grad() { grad.fill(0.0); }
};

/// Glorot/Xavier uniform init: entries in +-sqrt(6/(fan_in+fan_out)).
inline Matrix glorot_uniform(size_t fan_in, size_t fan_out, SeededRng& rng) {
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
    return w;
}

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    Matrix m;  // first moment
    Matrix v;  // second moment
    int64_t t = 0;

    explicit AdamState(const Parameter& p)
        : m(p.value.rows(), p.value.cols()), v(p.value.rows(), p.value.cols()) {}
};

/// One Adam update from p.grad. Standard bias-corrected form.
inline void adam_step(Parameter& p, AdamState& s, const AdamConfig& cfg) {
    if (!p.grad.same_shape(p.value) || !s.m.same_shape(p.value))
        throw std::invalid_argument("adam_step: state/gradient shape mismatch");
    s.t += 1;
    const double b1t = 1.0 - std::pow(cfg.beta1, static_cast<double>(s.t));
    const double b2t = 1.0 - std::pow(cfg.beta2, static_cast<double>(s.t));
    for (size_t i = 0; i < p.value.size(); ++i) {
        const double g = p.grad.data()[i];
        double& m = s.m.data()[i];
        double& v = s.v.data()[i];
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        const double mhat = m / b1t;
        const double vhat = v / b2t;
        p.value.data()[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
}

struct DropoutResult {
    Matrix output;
    /// Per-entry multiplier actually applied: 0 for dropped entries,
    /// 1/(1-p) for survivors, 1 everywhere in eval mode. The backward pass
    /// is upstream .* mask.
    Matrix mask;
};

/// Inverted dropout. Training mode zeroes each entry with probability p and
/// scales survivors by 1/(1-p); eval mode is the identity. Mask entries are
/// drawn in row-major order from `rng` (one uniform per entry), which pins
/// the stream layout for reproducibility.
inline DropoutResult dropout(const Matrix& x, double p, SeededRng& rng, bool training) {
    if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must be in [0,1)");
    DropoutResult r{x, Matrix(x.rows(), x.cols(), 1.0)};
    if (!training || p == 0.0) return r;
    const double keep_scale = 1.0 / (1.0 - p);
    for (size_t i = 0; i < r.output.size(); ++i) {
        if (rng.uniform01() < p) {
            r.mask.data()[i] = 0.0;
            r.output.data()[i] = 0.0;
        } else {
            r.mask.data()[i] = keep_scale;
            r.output.data()[i] *= keep_scale;
        }
    }
    return r;
}

struct SoftmaxCrossEntropy {
    double loss;       // mean over rows of -log softmax(logits)[label]
    Matrix grad;       // d loss / d logits = (softmax - onehot) / rows
    Matrix softmax;    // row-wise probabilities (handy for accuracy reporting)
};

inline SoftmaxCrossEntropy softmax_cross_entropy(const Matrix& logits,
                                                 const std::vector<int>& labels) {
    if (labels.size() != logits.rows())
        throw std::invalid_argument("softmax_cross_entropy: one label per row required");
    const size_t n = logits.rows(), c = logits.cols();
    SoftmaxCrossEntropy out{0.0, Matrix(n, c), Matrix(n, c)};
    for (size_t i = 0; i < n; ++i) {
        const int label = labels[i];
        if (label < 0 || static_cast<size_t>(label) >= c)
            throw std::invalid_argument("softmax_cross_entropy: label out of range");
        // max-subtraction keeps exp() from overflowing
        double mx = logits(i, 0);
        for (size_t j = 1; j < c; ++j) mx = std::max(mx, logits(i, j));
        double denom = 0.0;
        for (size_t j = 0; j < c; ++j) denom += std::exp(logits(i, j) - mx);
        const double log_denom = std::log(denom);
        out.loss += -(logits(i, static_cast<size_t>(label)) - mx - log_denom);
        for (size_t j = 0; j < c; ++j) {
            const double p = std::exp(logits(i, j) - mx) / denom;
            out.softmax(i, j) = p;
            out.grad(i, j) = (p - (static_cast<size_t>(label) == j ? 1.0 : 0.0)) /
                             static_cast<double>(n);
        }
    }
    out.loss /= static_cast<double>(n);
    return out;
}

}  // namespace gnnad

// Central finite-difference gradient verification. The oracle of record for
// every backward pass in this library: any composite loss can be checked
// against it on a coordinate subsample.
#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "gnnad/nn.hpp"
#include "gnnad/rng.hpp"

namespace gnnad {

struct GradCheckReport {
    double max_rel_error = 0.0;
    size_t coords_checked = 0;
};

/// Compares analytic gradients against central differences.
///
/// `loss_fn` must be deterministic (freeze dropout masks or run in eval
/// mode), must zero and then populate `grad` on every listed parameter, and
/// must return the loss. Up to `max_coords` coordinates are sampled
/// uniformly across all parameters (all of them when max_coords covers the
/// total). Relative error per coordinate is |analytic - numeric| divided by
/// max(|numeric|, 1e-10).
inline GradCheckReport finite_difference_check(const std::function<double()>& loss_fn,
                                               std::span<Parameter* const> params,
                                               size_t max_coords, double epsilon,
                                               SeededRng& rng) {
    loss_fn();
    std::vector<Matrix> analytic;
    analytic.reserve(params.size());
    size_t total = 0;
    for (const Parameter* p : params) {
        analytic.push_back(p->grad);
        total += p->value.size();
    }

    std::vector<size_t> coords;
    if (max_coords >= total) {
        coords.resize(total);
        for (size_t i = 0; i < total; ++i) coords[i] = i;
    } else {
        coords = rng.sample_without_replacement(total, max_coords);
    }

    GradCheckReport report;
    for (size_t flat : coords) {
        size_t pi = 0, offset = flat;
        while (offset >= params[pi]->value.size()) {
            offset -= params[pi]->value.size();
            ++pi;
        }
        double& w = params[pi]->value.data()[offset];
        const double saved = w;
        w = saved + epsilon;
        const double up = loss_fn();
        w = saved - epsilon;
        const double down = loss_fn();
        w = saved;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double a = analytic[pi].data()[offset];
        const double rel = std::abs(a - numeric) / std::max(std::abs(numeric), 1e-10);
        report.max_rel_error = std::max(report.max_rel_error, rel);
        ++report.coords_checked;
    }
    // restore analytic gradients for the caller
    loss_fn();
    return report;
}

}  // namespace gnnad

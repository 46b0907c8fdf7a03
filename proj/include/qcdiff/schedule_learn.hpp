#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "qcdiff/embedding.hpp"
#include "qcdiff/errors.hpp"
#include "qcdiff/mixing.hpp"
#include "qcdiff/rng.hpp"
#include "qcdiff/schedule.hpp"

namespace qcdiff {

struct LearnedSchedule {
    NoiseSchedule schedule;
    std::vector<double> grid_t;
    std::vector<double> grid_alpha;     // after isotonic regression
    std::vector<double> target_values;
    std::vector<double> verified_pflip;  // fresh-sample estimates on the grid
    double max_residual = 0.0;
    double mse_loss = 0.0;  // mean squared p_flip-vs-target error on the grid
};

namespace detail {

// Pool-adjacent-violators for a nonincreasing sequence.
inline std::vector<double> isotonic_nonincreasing(const std::vector<double>& y) {
    const size_t n = y.size();
    std::vector<double> level(n), weight(n);
    std::vector<size_t> size(n);
    size_t blocks = 0;
    for (size_t i = 0; i < n; ++i) {
        level[blocks] = -y[i];
        weight[blocks] = 1.0;
        size[blocks] = 1;
        ++blocks;
        while (blocks > 1 && level[blocks - 2] > level[blocks - 1]) {
            const double merged = (level[blocks - 2] * weight[blocks - 2] +
                                   level[blocks - 1] * weight[blocks - 1]) /
                                  (weight[blocks - 2] + weight[blocks - 1]);
            weight[blocks - 2] += weight[blocks - 1];
            size[blocks - 2] += size[blocks - 1];
            level[blocks - 2] = merged;
            --blocks;
        }
    }
    std::vector<double> out;
    out.reserve(n);
    for (size_t b = 0; b < blocks; ++b)
        for (size_t k = 0; k < size[b]; ++k) out.push_back(-level[b]);
    return out;
}

}  // namespace detail

// Learn alpha_bar^h for a desired token-mixing profile. p_flip(t) depends on
// the schedule only through alpha_bar(t) and is monotone in it, so each grid
// point is fit independently by bisection against a common-random-number MC
// estimate; monotonicity is then restored by isotonic regression and the
// grid is linearly interpolated to all T steps. A fresh-sample verification
// pass reports the achieved residual.
inline LearnedSchedule learn_discrete_schedule(const TokenBasis& basis,
                                               const std::function<double(double)>& f_target,
                                               int num_classes, int T, int samples, double tol,
                                               Rng rng, int grid_points = 64,
                                               int bisect_iters = 48) {
    if (num_classes != basis.num_classes)
        throw ValidationError("target class count does not match basis");
    const double cap = 1.0 - 1.0 / num_classes;
    if (std::abs(f_target(1.0) - cap) > 1e-6)
        throw ValidationError("infeasible target: f(1) must be 1 - 1/N");
    if (grid_points < 2 || T < 1 || samples < 1) throw ValidationError("bad learner parameters");

    const double ab_hi = 1.0 - 1e-6;  // keeps log-SNR finite at t = 0
    const double ab_lo = 1e-9;

    LearnedSchedule out;
    out.grid_t.resize(grid_points);
    out.grid_alpha.resize(grid_points);
    out.target_values.resize(grid_points);

    for (int k = 0; k < grid_points; ++k) {
        const double t = static_cast<double>(k) / (grid_points - 1);
        out.grid_t[k] = t;
        const double target = f_target(t);
        out.target_values[k] = target;
        FlipProbe probe(basis, samples, rng.derive("fit", k));
        double lo = ab_lo, hi = ab_hi;
        if (probe.p_flip(hi).mean >= target) {
            out.grid_alpha[k] = ab_hi;  // target below the softmax residual
            continue;
        }
        if (probe.p_flip(lo).mean <= target) {
            out.grid_alpha[k] = ab_lo;
            continue;
        }
        for (int it = 0; it < bisect_iters; ++it) {
            const double mid = 0.5 * (lo + hi);
            // p_flip decreases as alpha_bar grows
            if (probe.p_flip(mid).mean > target) lo = mid;
            else hi = mid;
        }
        out.grid_alpha[k] = 0.5 * (lo + hi);
    }

    out.grid_alpha = detail::isotonic_nonincreasing(out.grid_alpha);

    // Monotone (linear) interpolation of the grid onto t(i) = i/T, then a
    // strictness pass so downstream posterior variances never degenerate.
    NoiseSchedule s;
    s.T = T;
    s.label = "learned";
    s.alpha_bar.resize(T + 1);
    for (int i = 0; i <= T; ++i) {
        const double t = static_cast<double>(i) / T;
        const double x = t * (grid_points - 1);
        const int g = std::min(static_cast<int>(x), grid_points - 2);
        const double frac = x - g;
        s.alpha_bar[i] = out.grid_alpha[g] * (1.0 - frac) + out.grid_alpha[g + 1] * frac;
    }
    s.alpha_bar[0] = ab_hi;
    for (int i = 1; i <= T; ++i)
        s.alpha_bar[i] = std::clamp(s.alpha_bar[i], ab_lo * (1.0 - static_cast<double>(i) / T / 2),
                                    s.alpha_bar[i - 1] * (1.0 - 1e-12));
    s.validate();
    out.schedule = std::move(s);

    // Verification with fresh seeds, measuring the interpolated schedule.
    out.max_residual = 0.0;
    out.verified_pflip.resize(grid_points);
    double mse = 0.0;
    for (int k = 0; k < grid_points; ++k) {
        FlipProbe probe(basis, samples, rng.derive("verify", k));
        const double p = probe.p_flip(out.schedule.at(out.grid_t[k])).mean;
        out.verified_pflip[k] = p;
        const double r = std::abs(p - out.target_values[k]);
        out.max_residual = std::max(out.max_residual, r);
        mse += r * r;
    }
    out.mse_loss = mse / grid_points;
    if (out.max_residual > tol)
        throw NumericalError("schedule fit did not reach tolerance: residual " +
                             std::to_string(out.max_residual) + " > " + std::to_string(tol));
    return out;
}

inline LearnedSchedule learn_discrete_schedule(const TokenBasis& basis, const HammingTarget& f,
                                               int T, int samples, double tol, Rng rng,
                                               int grid_points = 64) {
    return learn_discrete_schedule(
        basis, [&f](double t) { return f(t); }, f.num_classes, T, samples, tol, rng, grid_points);
}

}  // namespace qcdiff

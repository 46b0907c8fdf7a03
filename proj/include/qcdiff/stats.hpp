#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "qcdiff/errors.hpp"

namespace qcdiff {

struct Histogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<long> counts;
    long total = 0;

    Histogram(double lo_, double hi_, int bins) : lo(lo_), hi(hi_), counts(bins, 0) {
        if (bins < 1 || !(hi_ > lo_)) throw ValidationError("bad histogram spec");
    }
    void add(double v) {
        int b = static_cast<int>((v - lo) / (hi - lo) * counts.size());
        b = std::clamp(b, 0, static_cast<int>(counts.size()) - 1);
        ++counts[b];
        ++total;
    }
    double bin_center(int b) const {
        return lo + (b + 0.5) * (hi - lo) / counts.size();
    }
    std::vector<double> smoothed(int window = 3) const {
        std::vector<double> out(counts.size(), 0.0);
        const int half = window / 2;
        for (int i = 0; i < static_cast<int>(counts.size()); ++i) {
            double sum = 0.0;
            int n = 0;
            for (int k = -half; k <= half; ++k) {
                const int j = i + k;
                if (j < 0 || j >= static_cast<int>(counts.size())) continue;
                sum += counts[j];
                ++n;
            }
            out[i] = sum / n;
        }
        return out;
    }
};

// A band [band_lo, band_hi] holds a local mode when its tallest bin has
// enough topographic prominence: the count must drop substantially on both
// sides before any taller terrain is reached. Raw bins are used because the
// infidelity spectra of discrete edits concentrate on knife-edge spikes.
inline bool has_local_mode(const Histogram& h, double band_lo, double band_hi) {
    const int bins = static_cast<int>(h.counts.size());
    auto bin_of = [&](double v) {
        return std::clamp(static_cast<int>((v - h.lo) / (h.hi - h.lo) * bins), 0, bins - 1);
    };
    const int b0 = bin_of(band_lo), b1 = bin_of(band_hi);
    int peak = b0;
    for (int b = b0; b <= b1; ++b)
        if (h.counts[b] > h.counts[peak]) peak = b;
    if (h.counts[peak] <= 0) return false;
    auto saddle = [&](int dir) {
        long lowest = h.counts[peak];
        for (int b = peak + dir; 0 <= b && b < bins; b += dir) {
            if (h.counts[b] > h.counts[peak]) return lowest;
            lowest = std::min(lowest, h.counts[b]);
        }
        return lowest;
    };
    const double prominence =
        static_cast<double>(h.counts[peak] - std::max(saddle(-1), saddle(+1)));
    return prominence >= std::max(50.0, 0.25 * h.counts[peak]);
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw ValidationError("median of empty set");
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
        m = 0.5 * (m + v[mid - 1]);
    }
    return m;
}

inline double mean(const std::vector<double>& v) {
    if (v.empty()) throw ValidationError("mean of empty set");
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
}

inline void write_histogram_csv(const std::string& path, const Histogram& h) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    out << "bin_center,count\n";
    for (size_t b = 0; b < h.counts.size(); ++b)
        out << h.bin_center(static_cast<int>(b)) << "," << h.counts[b] << "\n";
}

// Kolmogorov-Smirnov statistic against U[0, 1].
inline double ks_statistic_uniform(std::vector<double> samples) {
    if (samples.empty()) throw ValidationError("ks on empty sample");
    std::sort(samples.begin(), samples.end());
    double d = 0.0;
    const double n = static_cast<double>(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
        const double cdf = samples[i];
        d = std::max(d, std::abs((i + 1) / n - cdf));
        d = std::max(d, std::abs(cdf - i / n));
    }
    return d;
}

}  // namespace qcdiff

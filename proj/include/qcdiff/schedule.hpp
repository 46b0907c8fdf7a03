#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "qcdiff/errors.hpp"

namespace qcdiff {

// Discrete-time noise schedule: alpha_bar over t(i) = i/T for i = 0..T,
// nonincreasing with alpha_bar(0) = 1 (learned schedules clamp to 1 - 1e-6
// to keep log-SNR finite). Continuous t reads linear interpolation.
struct NoiseSchedule {
    int T = 1000;
    std::vector<double> alpha_bar;  // length T + 1
    std::string label;

    double at(double t) const {
        if (t <= 0.0) return alpha_bar.front();
        if (t >= 1.0) return alpha_bar.back();
        const double x = t * T;
        const int i = static_cast<int>(x);
        const double frac = x - i;
        return alpha_bar[i] * (1.0 - frac) + alpha_bar[i + 1] * frac;
    }
    double beta_bar(double t) const { return 1.0 - at(t); }

    void validate() const {
        if (static_cast<int>(alpha_bar.size()) != T + 1)
            throw ValidationError("schedule length != T + 1");
        for (size_t i = 0; i < alpha_bar.size(); ++i) {
            if (alpha_bar[i] < 0.0 || alpha_bar[i] > 1.0)
                throw ValidationError("alpha_bar out of [0, 1]");
            if (i > 0 && alpha_bar[i] > alpha_bar[i - 1] + 1e-15)
                throw ValidationError("alpha_bar must be nonincreasing");
        }
        if (alpha_bar.front() < 1.0 - 1e-5)
            throw ValidationError("alpha_bar(0) must be ~1");
    }
};

enum class FixedSchedule { LinearBeta, CosineAlpha, CosineAlpha2 };

inline FixedSchedule fixed_schedule_from_name(const std::string& name) {
    if (name == "linear_beta") return FixedSchedule::LinearBeta;
    if (name == "cosine_alpha") return FixedSchedule::CosineAlpha;
    if (name == "cosine_alpha2") return FixedSchedule::CosineAlpha2;
    throw ValidationError("unknown schedule kind: " + name);
}

// linear_beta: beta_i on a linear grid from 1e-4 to 0.02 with cumulative
// products; cosine_alpha: alpha_bar = cos(t pi/2) taken as written (not the
// squared convention); cosine_alpha2: its square.
inline NoiseSchedule fixed_schedule(FixedSchedule kind, int T) {
    if (T < 1) throw ValidationError("schedule needs T >= 1");
    NoiseSchedule s;
    s.T = T;
    s.alpha_bar.resize(T + 1);
    switch (kind) {
        case FixedSchedule::LinearBeta: {
            const double beta0 = 1e-4, beta1 = 0.02;
            s.label = "linear_beta";
            s.alpha_bar[0] = 1.0;
            for (int i = 1; i <= T; ++i) {
                const double frac = (T > 1) ? static_cast<double>(i - 1) / (T - 1) : 0.0;
                const double beta = beta0 + frac * (beta1 - beta0);
                s.alpha_bar[i] = s.alpha_bar[i - 1] * (1.0 - beta);
            }
            break;
        }
        case FixedSchedule::CosineAlpha: {
            s.label = "cosine_alpha";
            for (int i = 0; i <= T; ++i)
                s.alpha_bar[i] = std::cos(static_cast<double>(i) / T * std::numbers::pi / 2.0);
            s.alpha_bar[T] = 0.0;
            break;
        }
        case FixedSchedule::CosineAlpha2: {
            s.label = "cosine_alpha2";
            for (int i = 0; i <= T; ++i) {
                const double c = std::cos(static_cast<double>(i) / T * std::numbers::pi / 2.0);
                s.alpha_bar[i] = c * c;
            }
            s.alpha_bar[T] = 0.0;
            break;
        }
    }
    return s;
}

// SNR(t) = alpha_bar / (1 - alpha_bar); infinite at zero noise.
inline double snr(const NoiseSchedule& s, double t) {
    const double ab = s.at(t);
    if (ab >= 1.0) return std::numeric_limits<double>::infinity();
    return ab / (1.0 - ab);
}

// The circular two-dimensional encoding is more robust to noise than a raw
// coordinate, which shifts the SNR by pi^2 d_w.
inline double snr_lambda(const NoiseSchedule& s_w, double t, int d_w) {
    return snr(s_w, t) * std::numbers::pi * std::numbers::pi * d_w;
}

// Desired average-Hamming-distance profile; f(0) = 0 and f(1) = 1 - 1/N.
struct HammingTarget {
    enum class Kind { Linear, Sin, Sin2 };
    Kind kind = Kind::Linear;
    int num_classes = 2;

    static HammingTarget from_name(const std::string& name, int num_classes) {
        HammingTarget t;
        t.num_classes = num_classes;
        if (name == "linear") t.kind = Kind::Linear;
        else if (name == "sin") t.kind = Kind::Sin;
        else if (name == "sin2") t.kind = Kind::Sin2;
        else throw ValidationError("unknown hamming target: " + name);
        return t;
    }

    double operator()(double t) const {
        const double cap = 1.0 - 1.0 / num_classes;
        switch (kind) {
            case Kind::Linear: return cap * t;
            case Kind::Sin: return cap * std::sin(t * std::numbers::pi / 2.0);
            case Kind::Sin2: {
                const double s = std::sin(t * std::numbers::pi / 2.0);
                return cap * s * s;
            }
        }
        return 0.0;
    }

    std::string name() const {
        switch (kind) {
            case Kind::Linear: return "linear";
            case Kind::Sin: return "sin";
            case Kind::Sin2: return "sin2";
        }
        return "?";
    }
};

// SNR of the discrete mode through the uniform-diffusion duality,
// a_t = 1 - p_flip(t)/p_flip(1):
//   SNR_discrete(t) = (f_target(1) - f_target(t)) / f_target(t).
inline double snr_discrete(const HammingTarget& f, double t) {
    const double ft = f(t);
    if (ft <= 0.0) return std::numeric_limits<double>::infinity();
    return std::max(0.0, (f(1.0) - ft) / ft);
}

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double sigmoid_log(double snr_value) {
    if (std::isinf(snr_value)) return 1.0;
    if (snr_value <= 0.0) return 0.0;
    return sigmoid(std::log(snr_value));
}

// Velocity-view loss weights: omega = (1 - alpha_bar) * sigmoid(log SNR_mode).
inline double weight_h(const NoiseSchedule& s_h, const HammingTarget& f, double t) {
    return s_h.beta_bar(t) * sigmoid_log(snr_discrete(f, t));
}

inline double weight_w(const NoiseSchedule& s_w, int d_w, double t) {
    return s_w.beta_bar(t) * sigmoid_log(snr_lambda(s_w, t, d_w));
}

struct WeightCurve {
    std::string mode;  // "discrete" or "continuous"
    std::vector<double> t;
    std::vector<double> values;
};

inline WeightCurve weight_curve_h(const NoiseSchedule& s_h, const HammingTarget& f,
                                  const std::vector<double>& grid) {
    WeightCurve c{"discrete", grid, {}};
    c.values.reserve(grid.size());
    for (double t : grid) c.values.push_back(weight_h(s_h, f, t));
    return c;
}

inline WeightCurve weight_curve_w(const NoiseSchedule& s_w, int d_w,
                                  const std::vector<double>& grid) {
    WeightCurve c{"continuous", grid, {}};
    c.values.reserve(grid.size());
    for (double t : grid) c.values.push_back(weight_w(s_w, d_w, t));
    return c;
}

inline double trapezoid_area(const std::vector<double>& t, const std::vector<double>& v) {
    double area = 0.0;
    for (size_t i = 1; i < t.size(); ++i) area += 0.5 * (v[i] + v[i - 1]) * (t[i] - t[i - 1]);
    return area;
}

struct AreaBalance {
    double area_h = 0.0;
    double area_w = 0.0;
    double ratio = 0.0;   // area_h / area_w
    bool flagged = false; // outside [0.8, 1.25]
};

// The two loss terms are balanced implicitly when the weight areas roughly
// match; the flag band [0.8, 1.25] marks schedules worth revisiting.
inline AreaBalance area_balance(const WeightCurve& w_h, const WeightCurve& w_w) {
    if (w_h.t != w_w.t) throw ValidationError("area_balance: grids differ");
    AreaBalance b;
    b.area_h = trapezoid_area(w_h.t, w_h.values);
    b.area_w = trapezoid_area(w_w.t, w_w.values);
    b.ratio = (b.area_w != 0.0) ? b.area_h / b.area_w
                                : std::numeric_limits<double>::infinity();
    b.flagged = !(b.ratio >= 0.8 && b.ratio <= 1.25);
    return b;
}

// Schedule files: CSV "index,alpha_bar".
inline void write_schedule_csv(const std::string& path, const NoiseSchedule& s) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    out << "index,alpha_bar\n";
    out.precision(17);
    for (int i = 0; i <= s.T; ++i) out << i << "," << s.alpha_bar[i] << "\n";
}

inline NoiseSchedule read_schedule_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    NoiseSchedule s;
    s.alpha_bar.clear();
    std::string line;
    if (!std::getline(in, line) || line.rfind("index,alpha_bar", 0) != 0)
        throw ValidationError("schedule csv: bad header in " + path);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ValidationError("schedule csv: bad row");
        s.alpha_bar.push_back(std::stod(line.substr(comma + 1)));
    }
    if (s.alpha_bar.size() < 2) throw ValidationError("schedule csv: too few rows");
    s.T = static_cast<int>(s.alpha_bar.size()) - 1;
    s.label = "file:" + path;
    s.validate();
    return s;
}

}  // namespace qcdiff

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "qcdiff/circuit.hpp"
#include "qcdiff/errors.hpp"
#include "qcdiff/rng.hpp"

namespace qcdiff {

// Token embeddings form an orthogonal basis of R^{d_h} with zero element
// mean and unit element variance per row. The zero-sum constraint removes
// one dimension, so at most N = d_h - 1 classes fit.
struct TokenBasis {
    int d_h = 0;
    int num_classes = 0;
    Eigen::MatrixXd vectors;  // num_classes x d_h

    double default_temperature() const { return 1.0 / std::sqrt(static_cast<double>(d_h)); }
    Eigen::VectorXd row(int cls) const { return vectors.row(cls); }
};

namespace detail {

// Rows orthogonal to the all-ones direction, mutually orthogonal, scaled to
// norm sqrt(dim) so each row has element mean 0 and variance 1.
inline Eigen::MatrixXd orthogonal_zero_mean_rows(int count, int dim, Rng& rng) {
    if (count > dim - 1)
        throw ValidationError("at most dim-1 zero-mean orthogonal rows; requested " +
                              std::to_string(count) + " with dim " + std::to_string(dim));
    Eigen::MatrixXd m(count, dim);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(dim);
    for (int r = 0; r < count; ++r) {
        for (int attempt = 0;; ++attempt) {
            Eigen::VectorXd v(dim);
            for (int k = 0; k < dim; ++k) v(k) = rng.normal();
            v -= (v.dot(ones) / dim) * ones;
            for (int p = 0; p < r; ++p) v -= v.dot(m.row(p)) / m.row(p).squaredNorm() * m.row(p).transpose();
            const double norm = v.norm();
            if (norm > 1e-8) {
                m.row(r) = v * (std::sqrt(static_cast<double>(dim)) / norm);
                break;
            }
            if (attempt > 32) throw NumericalError("degenerate basis draw");
        }
    }
    return m;
}

}  // namespace detail

inline TokenBasis build_token_basis(int num_classes, int d_h, Rng rng) {
    if (num_classes < 1) throw ValidationError("need at least one class");
    TokenBasis b;
    b.d_h = d_h;
    b.num_classes = num_classes;
    b.vectors = detail::orthogonal_zero_mean_rows(num_classes, d_h, rng);
    return b;
}

// Parameter embedding plane: w0(lambda) = cos(lambda pi) v1 + sin(lambda pi) v2
// with orthogonal zero-mean unit-variance v1, v2.
struct ParamBasis {
    int d_w = 3;
    Eigen::VectorXd v1, v2;
};

inline ParamBasis build_param_basis(int d_w, Rng rng) {
    if (d_w < 3) throw ValidationError("param basis needs d_w >= 3");
    ParamBasis b;
    b.d_w = d_w;
    Eigen::MatrixXd rows = detail::orthogonal_zero_mean_rows(2, d_w, rng);
    b.v1 = rows.row(0);
    b.v2 = rows.row(1);
    return b;
}

inline Eigen::VectorXd encode_param(double lambda, const ParamBasis& b) {
    const double a = lambda * std::numbers::pi;
    return std::cos(a) * b.v1 + std::sin(a) * b.v2;
}

// lambda_hat = (1/pi) atan2(<v2, w>, <v1, w>); errors when both projections
// vanish exactly (the angle is undefined).
inline double decode_param(const Eigen::VectorXd& w, const ParamBasis& b) {
    const double c = b.v1.dot(w);
    const double s = b.v2.dot(w);
    if (c == 0.0 && s == 0.0) throw NumericalError("undefined angle: zero projections");
    return std::atan2(s, c) / std::numbers::pi;
}

// Latent pair for one circuit: h0 is qubits x positions x d_h, w0 is
// positions x d_w, both flattened row-major.
struct LatentGeometry {
    int num_qubits = 0;
    int num_positions = 0;
    int d_h = 0;
    int d_w = 0;

    int num_cells() const { return num_qubits * num_positions; }
    int h_size() const { return num_cells() * d_h; }
    int w_size() const { return num_positions * d_w; }
    int h_offset(int q, int j) const { return (q * num_positions + j) * d_h; }
    int w_offset(int j) const { return j * d_w; }
    bool operator==(const LatentGeometry& o) const {
        return num_qubits == o.num_qubits && num_positions == o.num_positions && d_h == o.d_h &&
               d_w == o.d_w;
    }
};

struct CircuitLatent {
    LatentGeometry geom;
    Eigen::VectorXd h0;
    Eigen::VectorXd w0;
};

inline CircuitLatent encode_circuit(const TokenMatrix& m, const GateSet& set,
                                    const TokenBasis& tb, const ParamBasis& pb) {
    if (set.num_classes() > tb.num_classes)
        throw ValidationError("token basis has fewer classes than the gate set");
    CircuitLatent lat;
    lat.geom = {m.num_qubits, m.num_positions, tb.d_h, pb.d_w};
    lat.h0.resize(lat.geom.h_size());
    lat.w0.resize(lat.geom.w_size());
    for (int q = 0; q < m.num_qubits; ++q)
        for (int j = 0; j < m.num_positions; ++j) {
            const int cls = set.class_of_token(m.tok(q, j));
            lat.h0.segment(lat.geom.h_offset(q, j), tb.d_h) = tb.vectors.row(cls);
        }
    for (int j = 0; j < m.num_positions; ++j)
        lat.w0.segment(lat.geom.w_offset(j), pb.d_w) = encode_param(m.params[j], pb);
    return lat;
}

struct TokenDecode {
    TokenMatrix matrix;       // params left at zero
    Eigen::MatrixXd probs;    // num_cells x num_classes, cells row-major (q, j)
};

// Nearest-class decode via softmax over (1/tau) <h0^(j), cell>; the hard
// class is the argmax, ties broken toward the lowest class id.
inline TokenDecode decode_tokens(const Eigen::VectorXd& h, const LatentGeometry& geom,
                                 const TokenBasis& tb, const GateSet& set, double tau) {
    if (h.size() != geom.h_size()) throw ValidationError("latent size mismatch");
    if (tau <= 0.0) throw ValidationError("temperature must be positive");
    TokenDecode out;
    out.matrix = TokenMatrix(geom.num_qubits, geom.num_positions);
    out.probs.resize(geom.num_cells(), tb.num_classes);
    const int used = set.num_classes();
    for (int q = 0; q < geom.num_qubits; ++q)
        for (int j = 0; j < geom.num_positions; ++j) {
            const Eigen::VectorXd cell = h.segment(geom.h_offset(q, j), geom.d_h);
            Eigen::VectorXd logits = (tb.vectors * cell) / tau;
            const double mx = logits.maxCoeff();
            Eigen::VectorXd p = (logits.array() - mx).exp();
            p /= p.sum();
            out.probs.row(q * geom.num_positions + j) = p;
            int best = 0;
            for (int k = 1; k < used; ++k)
                if (logits(k) > logits(best)) best = k;
            out.matrix.tok(q, j) = set.token_of_class(best);
        }
    return out;
}

// Full decoder p(x | h0, w0): tokens by nearest class, lambda per
// parameterized column, zero elsewhere.
inline TokenMatrix decode_circuit_latent(const Eigen::VectorXd& h, const Eigen::VectorXd& w,
                                         const LatentGeometry& geom, const TokenBasis& tb,
                                         const ParamBasis& pb, const GateSet& set, double tau) {
    TokenMatrix m = decode_tokens(h, geom, tb, set, tau).matrix;
    for (int j = 0; j < geom.num_positions; ++j) {
        bool parameterized = false;
        for (int q = 0; q < geom.num_qubits; ++q) {
            const std::int16_t tk = m.tok(q, j);
            if (tk != 0 && tk != set.padding_token() && traits(set.kind_of(tk)).parameterized)
                parameterized = true;
        }
        if (parameterized)
            m.params[j] = decode_param(w.segment(geom.w_offset(j), geom.d_w), pb);
    }
    return m;
}

}  // namespace qcdiff

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <string>

#include <Eigen/Dense>

#include "qcdiff/errors.hpp"
#include "qcdiff/rng.hpp"

namespace qcdiff {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

// Dense unitary with the defect check ||U U^dag - I||_max <= 1e-10 applied
// on construction.
class Unitary {
  public:
    static constexpr double kUnitarityTol = 1e-10;

    explicit Unitary(CMatrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || m_.rows() < 1)
            throw ValidationError("unitary must be square and nonempty");
        const auto n = m_.rows();
        double defect = max_abs(m_ * m_.adjoint() - CMatrix::Identity(n, n));
        if (!(defect <= kUnitarityTol))
            throw NumericalError("unitarity violated: defect " + std::to_string(defect));
    }

    static Unitary identity(Eigen::Index dim) { return Unitary(CMatrix::Identity(dim, dim)); }

    Eigen::Index dim() const { return m_.rows(); }
    const CMatrix& matrix() const { return m_; }

  private:
    CMatrix m_;
};

// I = 1 - |Tr(U^dag V)|^2 / 4^n, zero iff the matrices agree up to a global
// phase; clamped against float round-off.
inline double infidelity(const Unitary& u, const Unitary& target) {
    if (u.dim() != target.dim()) throw ValidationError("infidelity: dimension mismatch");
    const double d = static_cast<double>(u.dim());
    const Complex tr = (u.matrix().adjoint() * target.matrix()).trace();
    double i = 1.0 - std::norm(tr) / (d * d);
    return std::clamp(i, 0.0, 1.0);
}

// Haar-random unitary via QR of a Ginibre matrix with phase-fixed R diagonal.
inline Unitary random_unitary(Eigen::Index dim, Rng& rng) {
    CMatrix g(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c) g(r, c) = Complex(rng.normal(), rng.normal());
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < dim; ++k) {
        Complex d = r(k, k);
        q.col(k) *= (d == Complex(0, 0)) ? Complex(1, 0) : d / std::abs(d);
    }
    return Unitary(q);
}

// File format: u32 dim, then row-major float64 (re, im) pairs, little-endian.
inline void write_unitary(std::ostream& out, const Unitary& u) {
    const std::uint32_t dim = static_cast<std::uint32_t>(u.dim());
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    for (Eigen::Index r = 0; r < u.dim(); ++r)
        for (Eigen::Index c = 0; c < u.dim(); ++c) {
            const double re = u.matrix()(r, c).real(), im = u.matrix()(r, c).imag();
            out.write(reinterpret_cast<const char*>(&re), sizeof(re));
            out.write(reinterpret_cast<const char*>(&im), sizeof(im));
        }
}

inline Unitary read_unitary(std::istream& in) {
    std::uint32_t dim = 0;
    in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
    if (!in || dim == 0 || dim > (1u << 20)) throw ValidationError("bad unitary header");
    CMatrix m(dim, dim);
    for (std::uint32_t r = 0; r < dim; ++r)
        for (std::uint32_t c = 0; c < dim; ++c) {
            double re = 0, im = 0;
            in.read(reinterpret_cast<char*>(&re), sizeof(re));
            in.read(reinterpret_cast<char*>(&im), sizeof(im));
            m(r, c) = Complex(re, im);
        }
    if (!in) throw ValidationError("truncated unitary file");
    return Unitary(std::move(m));
}

inline void write_unitary_file(const std::string& path, const Unitary& u) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    write_unitary(out, u);
}

inline Unitary read_unitary_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    return read_unitary(in);
}

}  // namespace qcdiff

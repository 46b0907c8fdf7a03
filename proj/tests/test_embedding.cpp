#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "qcdiff/embedding.hpp"
#include "qcdiff/mixing.hpp"
#include "qcdiff/schedule.hpp"
#include "test_support.hpp"

using namespace qcdiff;

namespace {
const double kPi = std::numbers::pi;

void check_basis_constraints(const Eigen::MatrixXd& rows, double tol) {
    const int n = static_cast<int>(rows.rows());
    const int dim = static_cast<int>(rows.cols());
    for (int i = 0; i < n; ++i) {
        CHECK(std::abs(rows.row(i).mean()) <= tol);
        const double var = rows.row(i).squaredNorm() / dim - std::pow(rows.row(i).mean(), 2);
        CHECK(std::abs(var - 1.0) <= tol);
        for (int j = 0; j < n; ++j)
            if (i != j) CHECK(std::abs(rows.row(i).dot(rows.row(j))) <= tol);
    }
}
}  // namespace

TEST_CASE("token basis: paper dimensions d_h = 13, N = 12") {
    const TokenBasis b = build_token_basis(12, 13, Rng(42));
    check_basis_constraints(b.vectors, 1e-10);
}

TEST_CASE("token basis: N = d_h is rejected, zero-sum removes one dimension") {
    CHECK_THROWS_AS(build_token_basis(13, 13, Rng(1)), ValidationError);
    CHECK_THROWS_AS(build_token_basis(3, 3, Rng(1)), ValidationError);
}

TEST_CASE("token basis: tiny case N = 2, d_h = 3") {
    const TokenBasis b = build_token_basis(2, 3, Rng(5));
    check_basis_constraints(b.vectors, 1e-10);
    CHECK(b.vectors.rows() == 2);
}

TEST_CASE("token basis: deterministic given the seed") {
    const TokenBasis a = build_token_basis(12, 13, Rng(9));
    const TokenBasis b = build_token_basis(12, 13, Rng(9));
    CHECK((a.vectors - b.vectors).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("token basis: equidistant embeddings") {
    const TokenBasis b = build_token_basis(12, 13, Rng(42));
    const double expected = std::sqrt(2.0 * 13.0);
    for (int i = 0; i < 12; ++i)
        for (int j = i + 1; j < 12; ++j)
            CHECK(std::abs((b.vectors.row(i) - b.vectors.row(j)).norm() - expected) <= 1e-9);
}

TEST_CASE("encode/decode tokens is the identity on clean latents") {
    const GateSet set = GateSet::full();
    const TokenBasis tb = build_token_basis(set.num_classes(), 13, Rng(3));
    const ParamBasis pb = build_param_basis(3, Rng(4));
    Rng rng(17);
    for (int it = 0; it < 20; ++it) {
        const Circuit c = testing::random_circuit(3, 6, set, rng);
        const TokenMatrix m = tokenize(c, 8, set);
        const CircuitLatent lat = encode_circuit(m, set, tb, pb);
        const TokenMatrix back =
            decode_circuit_latent(lat.h0, lat.w0, lat.geom, tb, pb, set, tb.default_temperature());
        CHECK(back.tokens == m.tokens);
        for (int j = 0; j < m.num_positions; ++j)
            CHECK(std::abs(back.params[j] - m.params[j]) < 1e-9);
    }
}

TEST_CASE("fully noisy latents decode to uniform classes") {
    const GateSet set = GateSet::full();
    REQUIRE(set.num_classes() == 12);
    const TokenBasis tb = build_token_basis(12, 13, Rng(21));
    const LatentGeometry geom{4, 25000, 13, 3};
    Rng rng(22);
    Eigen::VectorXd h(geom.h_size());
    for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = rng.normal();
    const TokenDecode dec = decode_tokens(h, geom, tb, set, tb.default_temperature());
    std::vector<long> counts(12, 0);
    for (int q = 0; q < geom.num_qubits; ++q)
        for (int j = 0; j < geom.num_positions; ++j)
            ++counts[set.class_of_token(dec.matrix.tok(q, j))];
    const double cells = geom.num_cells();
    const double p = 1.0 / 12.0;
    const double sigma = std::sqrt(p * (1 - p) / cells);
    for (long c : counts) CHECK(std::abs(c / cells - p) <= 3 * sigma);
}

TEST_CASE("temperature to zero gives one-hot probabilities at the argmax") {
    const GateSet set = GateSet::full();
    const TokenBasis tb = build_token_basis(12, 13, Rng(33));
    const LatentGeometry geom{1, 1, 13, 3};
    Rng rng(34);
    Eigen::VectorXd h(13);
    for (int i = 0; i < 13; ++i) h(i) = rng.normal();
    const TokenDecode hard = decode_tokens(h, geom, tb, set, 1e-8);
    const int cls = set.class_of_token(hard.matrix.tok(0, 0));
    CHECK(hard.probs(0, cls) > 0.9999);
}

TEST_CASE("param embedding: lambda 0 and 0.5 hit the basis vectors") {
    const ParamBasis pb = build_param_basis(3, Rng(7));
    CHECK((encode_param(0.0, pb) - pb.v1).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((encode_param(0.5, pb) - pb.v2).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(decode_param(pb.v1, pb)) <= 1e-15);
    CHECK(std::abs(decode_param(pb.v2, pb) - 0.5) <= 1e-15);
    // the endpoints are the same point on the circle
    CHECK((encode_param(-1.0, pb) - encode_param(1.0, pb)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("param embedding: basis constraints and round trip") {
    const ParamBasis pb = build_param_basis(3, Rng(8));
    Eigen::MatrixXd rows(2, 3);
    rows.row(0) = pb.v1;
    rows.row(1) = pb.v2;
    check_basis_constraints(rows, 1e-10);
    Rng rng(9);
    for (int it = 0; it < 300; ++it) {
        const double lambda = rng.uniform(-1.0, 1.0);
        double err = decode_param(encode_param(lambda, pb), pb) - lambda;
        err = std::fmod(err + 3.0, 2.0) - 1.0;
        CHECK(std::abs(err) <= 1e-12);
    }
    CHECK_THROWS_AS(decode_param(Eigen::VectorXd::Zero(3), pb), NumericalError);
}

TEST_CASE("full circuit embedding has element mean 0 and variance 1") {
    const GateSet set = GateSet::full();
    const TokenBasis tb = build_token_basis(12, 13, Rng(51));
    const ParamBasis pb = build_param_basis(3, Rng(52));
    Rng rng(53);
    for (int it = 0; it < 10; ++it) {
        const Circuit c = testing::random_circuit(3, 6, set, rng);
        const CircuitLatent lat = encode_circuit(tokenize(c, 8, set), set, tb, pb);
        Eigen::VectorXd all(lat.h0.size() + lat.w0.size());
        all << lat.h0, lat.w0;
        const double mean = all.mean();
        const double var = all.squaredNorm() / all.size() - mean * mean;
        CHECK(std::abs(mean) <= 1e-9);
        CHECK(std::abs(var - 1.0) <= 1e-9);
    }
}

TEST_CASE("p_flip at t = 0 is a small softmax residual") {
    const TokenBasis tb = build_token_basis(12, 13, Rng(61));
    const NoiseSchedule s = fixed_schedule(FixedSchedule::CosineAlpha2, 1000);
    const MeanStd p = p_flip(0.0, tb, s, 20000, Rng(62));
    CHECK(p.mean < 0.05);
}

TEST_CASE("p_flip at t = 1 meets the uniform bound 1 - 1/N") {
    const TokenBasis tb = build_token_basis(12, 13, Rng(63));
    const NoiseSchedule s = fixed_schedule(FixedSchedule::CosineAlpha2, 1000);
    const MeanStd p = p_flip(1.0, tb, s, 100000, Rng(64));
    CHECK(std::abs(p.mean - (1.0 - 1.0 / 12.0)) <= 3 * p.stderr_);
}

TEST_CASE("p_flip is monotone in t for a monotone schedule") {
    const TokenBasis tb = build_token_basis(12, 13, Rng(65));
    const NoiseSchedule s = fixed_schedule(FixedSchedule::CosineAlpha2, 1000);
    Rng rng(66);
    double prev = -1.0, prev_se = 0.0;
    for (double t : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
        const MeanStd p = p_flip(t, tb, s, 20000, rng.derive("pt", static_cast<int>(t * 10)));
        CHECK(p.mean >= prev - 3 * (p.stderr_ + prev_se));
        prev = p.mean;
        prev_se = p.stderr_;
    }
}

TEST_CASE("hamming curve hits the 1 - 1/N bound at t = 1") {
    const TokenBasis tb = build_token_basis(12, 13, Rng(67));
    const NoiseSchedule s = fixed_schedule(FixedSchedule::CosineAlpha2, 1000);
    const auto curve = hamming_curve(tb, s, {0.0, 1.0}, 50000, Rng(68));
    CHECK(curve.front().value <= 1e-4);  // hard decode at zero noise
    CHECK(std::abs(curve.back().value - (1.0 - 1.0 / 12.0)) <= 3 * curve.back().stderr_);
}

TEST_CASE("circular loss curve endpoints") {
    const ParamBasis pb = build_param_basis(3, Rng(71));
    const NoiseSchedule s = fixed_schedule(FixedSchedule::CosineAlpha2, 1000);
    const auto curve = circular_loss_curve(pb, s, {0.0, 1.0}, 50000, Rng(72));
    CHECK(curve.front().value <= 1e-6);
    CHECK(std::abs(curve.back().value - 1.0) <= 3 * curve.back().stderr_);
}

TEST_CASE("curve csv format") {
    const ParamBasis pb = build_param_basis(3, Rng(81));
    const NoiseSchedule s = fixed_schedule(FixedSchedule::CosineAlpha2, 100);
    const auto curve = circular_loss_curve(pb, s, {0.0, 0.5, 1.0}, 200, Rng(82));
    write_curve_csv("curve_test.csv", curve);
    std::ifstream in("curve_test.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,value,stderr");
    int rows = 0;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
    std::remove("curve_test.csv");
}

TEST_CASE("decode-error variance saturates the Fisher bound at high SNR") {
    const ParamBasis pb = build_param_basis(3, Rng(73));
    const NoiseSchedule s = fixed_schedule(FixedSchedule::CosineAlpha2, 1000);
    const double t = 0.1;
    const double snr_w = snr(s, t);
    REQUIRE(snr_w >= 10.0);
    const double var = lambda_decode_error_variance(pb, s.at(t), 200000, Rng(74));
    const double product = var * snr_w * kPi * kPi * 3.0;
    CHECK(product >= 0.9);
    CHECK(product <= 1.1);
}

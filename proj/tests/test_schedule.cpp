#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "qcdiff/embedding.hpp"
#include "qcdiff/mixing.hpp"
#include "qcdiff/schedule.hpp"
#include "qcdiff/schedule_learn.hpp"

using namespace qcdiff;

namespace {
const double kPi = std::numbers::pi;
}

TEST_CASE("cosine schedules at the endpoints") {
    const NoiseSchedule c1 = fixed_schedule(FixedSchedule::CosineAlpha, 1000);
    CHECK(c1.alpha_bar.front() == 1.0);
    CHECK(c1.alpha_bar.back() == 0.0);
    const NoiseSchedule c2 = fixed_schedule(FixedSchedule::CosineAlpha2, 1000);
    CHECK(std::abs(c2.at(0.5) - 0.5) < 1e-12);
    c1.validate();
    c2.validate();
}

TEST_CASE("linear beta schedule matches a high-precision product oracle") {
    const int T = 1000;
    const NoiseSchedule s = fixed_schedule(FixedSchedule::LinearBeta, T);
    s.validate();
    // independent evaluation: sum of log1p in extended precision
    long double log_prod = 0.0L;
    for (int i = 1; i <= T; ++i) {
        const long double beta =
            1e-4L + (0.02L - 1e-4L) * static_cast<long double>(i - 1) / (T - 1);
        log_prod += std::log1p(-beta);
    }
    const double expected = static_cast<double>(std::exp(log_prod));
    CHECK(std::abs(s.alpha_bar.back() - expected) / expected < 1e-10);
    CHECK(expected == Catch::Approx(4.04e-5).epsilon(0.01));
}

TEST_CASE("snr pivots") {
    NoiseSchedule s;
    s.T = 1;
    s.alpha_bar = {1.0, 0.5};
    CHECK(snr(s, 1.0) == Catch::Approx(1.0).margin(1e-12));
    CHECK(std::isinf(snr(s, 0.0)));
    CHECK(snr_lambda(s, 1.0, 3) == Catch::Approx(kPi * kPi * 3.0).margin(1e-9));
}

TEST_CASE("snr_lambda shift constant matches the paper value") {
    CHECK(-std::log(kPi * kPi * 3.0) == Catch::Approx(-3.39).margin(0.005));
}

TEST_CASE("discrete snr from the linear hamming target") {
    const HammingTarget f = HammingTarget::from_name("linear", 12);
    CHECK(f(0.0) == 0.0);
    CHECK(f(1.0) == Catch::Approx(1.0 - 1.0 / 12.0));
    CHECK(snr_discrete(f, 0.5) == Catch::Approx(1.0).margin(1e-12));
    CHECK(std::isinf(snr_discrete(f, 0.0)));
    for (const char* name : {"sin", "sin2"}) {
        const HammingTarget g = HammingTarget::from_name(name, 12);
        CHECK(g(0.0) == 0.0);
        CHECK(g(1.0) == Catch::Approx(1.0 - 1.0 / 12.0));
    }
}

TEST_CASE("weights vanish at both ends") {
    const NoiseSchedule s = fixed_schedule(FixedSchedule::CosineAlpha2, 1000);
    const HammingTarget f = HammingTarget::from_name("linear", 12);
    CHECK(weight_h(s, f, 0.0) == 0.0);   // 1 - alpha_bar(0) = 0
    CHECK(weight_h(s, f, 1.0) == 0.0);   // sigmoid(log 0) = 0
    CHECK(weight_w(s, 3, 0.0) == 0.0);
    CHECK(weight_w(s, 3, 1.0) == 0.0);
    CHECK(weight_w(s, 3, 0.5) > 0.0);
}

TEST_CASE("weight_w sits at half the prefactor when snr_lambda is one") {
    NoiseSchedule s;
    s.T = 1;
    const double ab = 1.0 / (1.0 + kPi * kPi * 3.0);  // snr_w * pi^2 d_w = 1
    s.alpha_bar = {1.0, ab};
    CHECK(weight_w(s, 3, 1.0) == Catch::Approx((1.0 - ab) * 0.5).margin(1e-12));
}

TEST_CASE("area balance ratios") {
    WeightCurve a{"discrete", {0.0, 0.5, 1.0}, {0.0, 1.0, 0.0}};
    WeightCurve b = a;
    CHECK(area_balance(a, b).ratio == Catch::Approx(1.0));
    CHECK_FALSE(area_balance(a, b).flagged);
    for (double& v : b.values) v *= 2.0;
    const AreaBalance r = area_balance(b, a);
    CHECK(r.ratio == Catch::Approx(2.0));
    CHECK(r.flagged);
    WeightCurve c{"continuous", {0.0, 1.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(area_balance(a, c), ValidationError);
}

TEST_CASE("schedule csv round trip") {
    const NoiseSchedule s = fixed_schedule(FixedSchedule::CosineAlpha2, 64);
    const std::string path = "schedule_roundtrip.csv";
    write_schedule_csv(path, s);
    const NoiseSchedule back = read_schedule_csv(path);
    REQUIRE(back.T == s.T);
    for (int i = 0; i <= s.T; ++i) CHECK(back.alpha_bar[i] == s.alpha_bar[i]);
}

TEST_CASE("learned schedule hits a linear hamming target") {
    const TokenBasis tb = build_token_basis(6, 7, Rng(201));
    const HammingTarget f = HammingTarget::from_name("linear", 6);
    const LearnedSchedule learned =
        learn_discrete_schedule(tb, f, 200, 16384, 0.025, Rng(202), 33);
    CHECK(learned.max_residual <= 0.025);
    CHECK(learned.mse_loss <= 0.025 * 0.025);
    learned.schedule.validate();
    CHECK(learned.schedule.alpha_bar.front() == Catch::Approx(1.0 - 1e-6));
    for (size_t i = 1; i < learned.schedule.alpha_bar.size(); ++i)
        CHECK(learned.schedule.alpha_bar[i] < learned.schedule.alpha_bar[i - 1]);
}

TEST_CASE("learned schedule rejects infeasible targets") {
    const TokenBasis tb = build_token_basis(6, 7, Rng(203));
    CHECK_THROWS_AS(learn_discrete_schedule(
                        tb, [](double) { return 0.0; }, 6, 100, 1024, 0.02, Rng(204), 9),
                    ValidationError);
}

TEST_CASE("duality: hard-decode marginals follow the categorical mixture") {
    const TokenBasis tb = build_token_basis(12, 13, Rng(205));
    const NoiseSchedule s = fixed_schedule(FixedSchedule::CosineAlpha2, 1000);
    const double cap = 1.0 - 1.0 / 12.0;
    Rng rng(206);
    const int samples = 36000;  // 3000 per class
    for (double t : {0.2, 0.4, 0.5, 0.6, 0.8}) {
        const double ab = s.at(t);
        FlipProbe soft_probe(tb, samples, rng.derive("soft", static_cast<int>(t * 100)));
        const MeanStd pf = soft_probe.p_flip(ab);
        const double a_t = 1.0 - pf.mean / cap;
        FlipProbe hard_probe(tb, samples, rng.derive("hard", static_cast<int>(t * 100)));
        for (int from : {0, 5, 11}) {
            const Eigen::VectorXd freq = hard_probe.hard_decode_frequencies(ab, from);
            const double m_class = samples / 12.0;
            for (int j = 0; j < 12; ++j) {
                const double expected = (j == from) ? a_t + (1.0 - a_t) / 12.0
                                                    : (1.0 - a_t) / 12.0;
                const double sigma =
                    std::sqrt(std::max(expected * (1.0 - expected), 1e-12) / m_class) +
                    pf.stderr_ / cap;
                CHECK(std::abs(freq(j) - expected) <= 3 * sigma);
            }
        }
    }
}

TEST_CASE("area balance of the toy default pairing stays in band") {
    // learned-linear discrete weight (toy gate set, N = 6) vs cosine_alpha2
    // continuous weight; the ratio is a pinned regression value
    const TokenBasis tb = build_token_basis(6, 13, Rng(207));
    const HammingTarget f = HammingTarget::from_name("linear", 6);
    const LearnedSchedule learned =
        learn_discrete_schedule(tb, f, 200, 16384, 0.025, Rng(208), 33);
    const NoiseSchedule w = fixed_schedule(FixedSchedule::CosineAlpha2, 200);
    std::vector<double> grid;
    for (int k = 0; k <= 100; ++k) grid.push_back(k / 100.0);
    const AreaBalance bal =
        area_balance(weight_curve_h(learned.schedule, f, grid), weight_curve_w(w, 3, grid));
    CHECK(bal.ratio >= 0.5);
    CHECK(bal.ratio <= 2.0);
    CHECK(bal.ratio == Catch::Approx(1.034).margin(0.02));
    CHECK_FALSE(bal.flagged);
}

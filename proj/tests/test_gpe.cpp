#include <catch2/catch_amalgamated.hpp>

#include "qcdiff/gpe.hpp"
#include "test_support.hpp"

using namespace qcdiff;

namespace {

Circuit motif_h_cx(int n = 2) {
    return Circuit(n, {GateInstance::make(Gate::H, {}, {0}),
                       GateInstance::make(Gate::CX, {0}, {1})});
}

bool same_gates(const Circuit& a, const Circuit& b) {
    if (a.num_qubits != b.num_qubits || a.gates.size() != b.gates.size()) return false;
    for (size_t i = 0; i < a.gates.size(); ++i)
        if (!(a.gates[i] == b.gates[i])) return false;
    return true;
}

}  // namespace

TEST_CASE("find_pairs counts a planted motif") {
    std::vector<Circuit> corpus(5, motif_h_cx());
    const auto counts = find_pairs(corpus);
    REQUIRE(counts.size() == 1);
    CHECK(counts.begin()->second == 5);
    CHECK(counts.begin()->first ==
          pattern_key(GateInstance::make(Gate::H, {}, {0}), GateInstance::make(Gate::CX, {0}, {1})));
}

TEST_CASE("gates on disjoint qubits form no pair") {
    const Circuit c(3, {GateInstance::make(Gate::H, {}, {0}),
                        GateInstance::make(Gate::Rz, {}, {2}, 1.0)});
    CHECK(find_pairs({c}).empty());
}

TEST_CASE("qubit-role normalization identifies relabeled patterns") {
    // the spec's relabeling example: reversed cx directions normalize alike
    const auto k1 = pattern_key(GateInstance::make(Gate::CX, {0}, {1}),
                                GateInstance::make(Gate::CX, {2}, {3}));
    const auto k2 = pattern_key(GateInstance::make(Gate::CX, {1}, {0}),
                                GateInstance::make(Gate::CX, {3}, {2}));
    CHECK(k1 == k2);

    // shared-qubit variants
    const auto k3 = pattern_key(GateInstance::make(Gate::H, {}, {0}),
                                GateInstance::make(Gate::CX, {0}, {1}));
    const auto k4 = pattern_key(GateInstance::make(Gate::H, {}, {1}),
                                GateInstance::make(Gate::CX, {1}, {0}));
    CHECK(k3 == k4);
    const auto k5 = pattern_key(GateInstance::make(Gate::H, {}, {1}),
                                GateInstance::make(Gate::CX, {0}, {1}));
    CHECK(k3 != k5);  // control side differs from target side

    // symmetric gates: either qubit of a swap or cp can carry the partner
    const auto s1 = pattern_key(GateInstance::make(Gate::H, {}, {0}),
                                GateInstance::make(Gate::Swap, {}, {0, 1}));
    const auto s2 = pattern_key(GateInstance::make(Gate::H, {}, {1}),
                                GateInstance::make(Gate::Swap, {}, {0, 1}));
    CHECK(s1 == s2);
    const auto p1 = pattern_key(GateInstance::make(Gate::H, {}, {0}),
                                GateInstance::make(Gate::Cp, {0}, {1}, 0.3));
    const auto p2 = pattern_key(GateInstance::make(Gate::H, {}, {1}),
                                GateInstance::make(Gate::Cp, {0}, {1}, 0.9));
    CHECK(p1 == p2);  // parameters are structural noise for pattern identity
}

TEST_CASE("first merge is the planted motif") {
    std::vector<Circuit> corpus(4, motif_h_cx());
    corpus.push_back(Circuit(2, {GateInstance::make(Gate::Rx, {}, {0}, 1.0)}));
    const GpeResult result = run_gpe(corpus, 2, 250);
    REQUIRE_FALSE(result.vocab.merges.empty());
    const GpePattern& first = result.vocab.merges.front();
    CHECK(first.key == pattern_key(GateInstance::make(Gate::H, {}, {0}),
                                   GateInstance::make(Gate::CX, {0}, {1})));
    CHECK(first.frequency == 4);
    CHECK(first.depth == 1);
    CHECK(first.token == kGpeFirstMergedToken);
}

TEST_CASE("no pair above threshold leaves the corpus unchanged") {
    std::vector<Circuit> corpus{motif_h_cx()};
    const GpeResult result = run_gpe(corpus, 2, 250);
    CHECK(result.vocab.merges.empty());
    REQUIRE(result.rewritten.size() == 1);
    CHECK(result.rewritten[0].size() == 2);
    CHECK(same_gates(expand_items(result.rewritten[0], 2), corpus[0]));
}

TEST_CASE("two-level motif produces a depth-2 merge") {
    const Circuit two_level(2, {GateInstance::make(Gate::H, {}, {0}),
                                GateInstance::make(Gate::CX, {0}, {1}),
                                GateInstance::make(Gate::H, {}, {0}),
                                GateInstance::make(Gate::CX, {0}, {1})});
    std::vector<Circuit> corpus(6, two_level);
    const GpeResult result = run_gpe(corpus, 2, 250);
    REQUIRE(result.vocab.merges.size() >= 2);
    CHECK(result.vocab.merges[0].depth == 1);
    CHECK(result.vocab.merges[1].depth == 2);
    CHECK(result.vocab.merges[1].left_token == result.vocab.merges[0].token);
    CHECK(result.vocab.merges[1].right_token == result.vocab.merges[0].token);
    // fully merged: one item per circuit
    for (const auto& items : result.rewritten) CHECK(items.size() == 1);
}

TEST_CASE("rewritten corpora expand back to the original circuits") {
    GateSet set = GateSet::full();
    Rng rng(601);
    std::vector<Circuit> corpus;
    for (int i = 0; i < 40; ++i)
        corpus.push_back(testing::random_circuit(3, 2 + static_cast<int>(rng.index(8)), set, rng));
    const GpeResult result = run_gpe(corpus, 2, 250);
    REQUIRE(result.rewritten.size() == corpus.size());
    for (size_t i = 0; i < corpus.size(); ++i)
        CHECK(same_gates(expand_items(result.rewritten[i], result.num_qubits[i]), corpus[i]));
}

TEST_CASE("token count is nonincreasing across merge iterations") {
    GateSet set({Gate::H, Gate::CX, Gate::Rx});
    Rng rng(607);
    std::vector<Circuit> corpus;
    for (int i = 0; i < 30; ++i) corpus.push_back(testing::random_circuit(2, 6, set, rng));
    auto total_items = [](const GpeResult& r) {
        size_t total = 0;
        for (const auto& items : r.rewritten) total += items.size();
        return total;
    };
    size_t prev = total_items(run_gpe(corpus, 2, 0));
    for (int iters = 1; iters <= 6; ++iters) {
        const size_t now = total_items(run_gpe(corpus, 2, iters));
        CHECK(now <= prev);
        prev = now;
    }
}

TEST_CASE("gpe is deterministic") {
    GateSet set = GateSet::full();
    Rng rng(613);
    std::vector<Circuit> corpus;
    for (int i = 0; i < 25; ++i) corpus.push_back(testing::random_circuit(3, 5, set, rng));
    const GpeResult a = run_gpe(corpus, 2, 50);
    const GpeResult b = run_gpe(corpus, 2, 50);
    REQUIRE(a.vocab.merges.size() == b.vocab.merges.size());
    for (size_t i = 0; i < a.vocab.merges.size(); ++i) {
        CHECK(a.vocab.merges[i].key == b.vocab.merges[i].key);
        CHECK(a.vocab.merges[i].frequency == b.vocab.merges[i].frequency);
    }
}

TEST_CASE("report: planted corpus tops the list and depth 0 matches direct counting") {
    std::vector<Circuit> corpus(7, motif_h_cx());
    corpus.push_back(Circuit(2, {GateInstance::make(Gate::Rx, {}, {1}, 0.5)}));
    const GpeResult result = run_gpe(corpus, 2, 250);
    const nlohmann::json report = report_structures(result.vocab, corpus, 5, true);
    CHECK(report.at("num_merges").get<size_t>() == result.vocab.merges.size());

    // depth-0 histogram equals direct gate counting
    std::map<std::string, long> expected{{"h", 7}, {"cx", 7}, {"rx", 1}};
    for (const auto& e : report.at("depth_0"))
        CHECK(e.at("count").get<long>() == expected.at(e.at("gate").get<std::string>()));

    const auto& depth1 = report.at("structures").at("depth_1");
    REQUIRE_FALSE(depth1.empty());
    CHECK(depth1[0].at("frequency").get<long>() == 7);
    CHECK(depth1[0].at("expansion").at("gates").size() == 2);

    const std::string text = report_text(report);
    CHECK(text.find("depth_1") != std::string::npos);
}

TEST_CASE("report on an empty vocab") {
    std::vector<Circuit> corpus{motif_h_cx()};
    const GpeResult result = run_gpe(corpus, 2, 250);
    const nlohmann::json report = report_structures(result.vocab, corpus, 5, false);
    CHECK(report.at("structures").empty());
    CHECK(report.at("num_merges").get<size_t>() == 0);
}

TEST_CASE("min_frequency below two is rejected") {
    std::vector<Circuit> corpus{motif_h_cx()};
    CHECK_THROWS_AS(run_gpe(corpus, 1, 10), ValidationError);
    CHECK_THROWS_AS(run_gpe({}, 2, 10), ValidationError);
}

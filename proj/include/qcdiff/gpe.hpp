#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qcdiff/circuit.hpp"
#include "qcdiff/circuit_io.hpp"
#include "qcdiff/errors.hpp"

namespace qcdiff {

// Corpus element during merging: a base gate or a previously merged token.
// The primitive expansion is carried along, so rewriting never loses the
// original circuit.
struct GpeItem {
    int token = 0;                    // base gates use the Gate enum value; merges count up from 8
    int depth = 0;                    // base gates are depth 0
    std::vector<int> qubits;          // connection interface in role order
    std::vector<GateInstance> gates;  // expansion to primitives, original order
};

inline constexpr int kGpeFirstMergedToken = 8;

namespace detail {

struct RoleGroup {
    bool symmetric;
    std::vector<int> qubits;
};

// Connection groups per gate kind. swap's targets, ccx's controls and cp's
// two qubits are interchangeable, so they form symmetric groups; everything
// else keeps its semantic order.
inline std::vector<RoleGroup> role_groups(const GateInstance& g) {
    switch (g.kind) {
        case Gate::Swap: return {{true, g.targets}};
        case Gate::Cp: return {{true, {g.controls[0], g.targets[0]}}};
        case Gate::CCX: return {{true, g.controls}, {false, g.targets}};
        default: {
            std::vector<RoleGroup> groups;
            if (!g.controls.empty()) groups.push_back({false, g.controls});
            groups.push_back({false, g.targets});
            return groups;
        }
    }
}

class RoleAssigner {
  public:
    int assign(int qubit) {
        auto it = role_of_.find(qubit);
        if (it != role_of_.end()) return it->second;
        const int role = next_++;
        role_of_[qubit] = role;
        return role;
    }
    bool known(int qubit) const { return role_of_.count(qubit) > 0; }
    int role(int qubit) const { return role_of_.at(qubit); }

  private:
    std::map<int, int> role_of_;
    int next_ = 0;
};

// Emit one item's contribution to the pattern key. Within a symmetric group
// already-seen qubits are assigned first (ordered by their role) so the key
// is invariant under qubit relabeling.
inline void append_item_key(std::ostringstream& key, const GpeItem& item, RoleAssigner& ra) {
    key << 't' << item.token;
    std::vector<RoleGroup> groups;
    if (item.token < kGpeFirstMergedToken)
        groups = role_groups(item.gates.front());
    else
        groups = {{false, item.qubits}};
    for (const auto& group : groups) {
        std::vector<int> roles;
        if (group.symmetric) {
            std::vector<std::pair<int, int>> seen;  // (role, qubit)
            std::vector<int> fresh;
            for (int q : group.qubits)
                if (ra.known(q)) seen.emplace_back(ra.role(q), q);
                else fresh.push_back(q);
            std::sort(seen.begin(), seen.end());
            for (auto& [r, q] : seen) roles.push_back(ra.assign(q));
            for (int q : fresh) roles.push_back(ra.assign(q));
            std::sort(roles.begin(), roles.end());
            key << 's';
        } else {
            for (int q : group.qubits) roles.push_back(ra.assign(q));
            key << 'a';
        }
        key << '(';
        for (size_t i = 0; i < roles.size(); ++i) key << (i ? "," : "") << roles[i];
        key << ')';
    }
}

inline bool share_qubit(const GpeItem& a, const GpeItem& b) {
    for (int qa : a.qubits)
        for (int qb : b.qubits)
            if (qa == qb) return true;
    return false;
}

inline std::vector<GpeItem> items_from_circuit(const Circuit& c) {
    std::vector<GpeItem> items;
    items.reserve(c.gates.size());
    for (const auto& g : c.gates) {
        GpeItem item;
        item.token = static_cast<int>(g.kind);
        item.depth = 0;
        for (const auto& group : role_groups(g))
            item.qubits.insert(item.qubits.end(), group.qubits.begin(), group.qubits.end());
        item.gates = {g};
        items.push_back(std::move(item));
    }
    return items;
}

// Interface of the merged item: concrete qubits ordered by the roles the
// pattern normalization assigned.
inline GpeItem merge_items(const GpeItem& a, const GpeItem& b, int token) {
    RoleAssigner ra;
    std::ostringstream ignored;
    append_item_key(ignored, a, ra);
    append_item_key(ignored, b, ra);
    std::vector<std::pair<int, int>> by_role;  // (role, qubit)
    std::set<int> qubits(a.qubits.begin(), a.qubits.end());
    qubits.insert(b.qubits.begin(), b.qubits.end());
    for (int q : qubits) by_role.emplace_back(ra.role(q), q);
    std::sort(by_role.begin(), by_role.end());
    GpeItem merged;
    merged.token = token;
    merged.depth = std::max(a.depth, b.depth) + 1;
    for (auto& [r, q] : by_role) merged.qubits.push_back(q);
    merged.gates = a.gates;
    merged.gates.insert(merged.gates.end(), b.gates.begin(), b.gates.end());
    return merged;
}

}  // namespace detail

// Normalized key of a candidate pair; qubit labels are replaced by roles in
// order of first use, making the pattern placement-invariant.
inline std::string pattern_key(const GpeItem& a, const GpeItem& b) {
    detail::RoleAssigner ra;
    std::ostringstream key;
    detail::append_item_key(key, a, ra);
    key << ';';
    detail::append_item_key(key, b, ra);
    return key.str();
}

inline std::string pattern_key(const GateInstance& a, const GateInstance& b) {
    auto items = detail::items_from_circuit(Circuit(
        std::max(a.max_qubit(), b.max_qubit()) + 1, {a, b}));
    return pattern_key(items[0], items[1]);
}

// Count every adjacent pair of items that acts on at least one common qubit.
// std::map keeps keys in lexicographic order, which drives deterministic
// tie-breaking downstream.
inline std::map<std::string, long> find_pairs(const std::vector<std::vector<GpeItem>>& corpus) {
    std::map<std::string, long> counts;
    for (const auto& items : corpus)
        for (size_t i = 0; i + 1 < items.size(); ++i)
            if (detail::share_qubit(items[i], items[i + 1]))
                ++counts[pattern_key(items[i], items[i + 1])];
    return counts;
}

inline std::map<std::string, long> find_pairs(const std::vector<Circuit>& corpus) {
    if (corpus.empty()) throw ValidationError("find_pairs: empty corpus");
    std::vector<std::vector<GpeItem>> items;
    items.reserve(corpus.size());
    for (const auto& c : corpus) items.push_back(detail::items_from_circuit(c));
    return find_pairs(items);
}

struct GpePattern {
    int token = 0;
    int left_token = 0;
    int right_token = 0;
    std::string key;
    int depth = 1;
    long frequency = 0;                   // at discovery
    std::vector<GateInstance> exemplar;   // role-relabeled primitive expansion
    int exemplar_qubits = 0;
    std::vector<double> param_samples;    // lambda of parameterized primitives
};

struct GpeVocab {
    long min_frequency = 2;
    int max_iterations = 250;
    std::vector<GpePattern> merges;  // discovery order
};

struct GpeResult {
    GpeVocab vocab;
    std::vector<std::vector<GpeItem>> rewritten;
    std::vector<int> num_qubits;  // per corpus circuit
};

inline Circuit expand_items(const std::vector<GpeItem>& items, int num_qubits) {
    std::vector<GateInstance> gates;
    for (const auto& item : items)
        gates.insert(gates.end(), item.gates.begin(), item.gates.end());
    return Circuit(num_qubits, std::move(gates));
}

namespace detail {

// Relabel an instance's primitive gates onto role indices for reporting.
inline std::pair<std::vector<GateInstance>, int> role_normalized_gates(
    const std::vector<GateInstance>& gates) {
    std::map<int, int> role_of;
    int next = 0;
    auto role = [&](int q) {
        auto it = role_of.find(q);
        if (it != role_of.end()) return it->second;
        role_of[q] = next;
        return next++;
    };
    std::vector<GateInstance> out;
    for (const auto& g : gates) {
        std::vector<int> controls, targets;
        for (int q : g.controls) controls.push_back(role(q));
        for (int q : g.targets) targets.push_back(role(q));
        std::optional<double> theta;
        if (traits(g.kind).parameterized) theta = g.theta;
        out.push_back(GateInstance::make(g.kind, controls, targets, theta));
    }
    return {out, next};
}

}  // namespace detail

// Greedy merge loop: count pairs, take the most frequent one (ties broken by
// lexicographically smallest key), replace all occurrences left to right,
// repeat until the threshold or the iteration cap.
inline GpeResult run_gpe(const std::vector<Circuit>& corpus, long min_frequency,
                         int max_iterations) {
    if (min_frequency < 2) throw ValidationError("min_frequency must be >= 2");
    if (corpus.empty()) throw ValidationError("run_gpe: empty corpus");
    GpeResult result;
    result.vocab.min_frequency = min_frequency;
    result.vocab.max_iterations = max_iterations;
    result.rewritten.reserve(corpus.size());
    for (const auto& c : corpus) {
        result.rewritten.push_back(detail::items_from_circuit(c));
        result.num_qubits.push_back(c.num_qubits);
    }

    std::map<int, int> depth_of;  // token -> depth
    int next_token = kGpeFirstMergedToken;

    for (int iter = 0; iter < max_iterations; ++iter) {
        const auto counts = find_pairs(result.rewritten);
        std::string best_key;
        long best_count = 0;
        for (const auto& [key, count] : counts)
            if (count > best_count) {  // first hit is the lex-smallest among ties
                best_key = key;
                best_count = count;
            }
        if (best_count < min_frequency) break;

        GpePattern pattern;
        pattern.token = next_token++;
        pattern.key = best_key;
        pattern.frequency = best_count;
        bool captured = false;

        constexpr size_t kMaxParamSamples = 10000;
        for (size_t ci = 0; ci < result.rewritten.size(); ++ci) {
            auto& items = result.rewritten[ci];
            std::vector<GpeItem> out;
            out.reserve(items.size());
            size_t i = 0;
            while (i < items.size()) {
                if (i + 1 < items.size() && detail::share_qubit(items[i], items[i + 1]) &&
                    pattern_key(items[i], items[i + 1]) == best_key) {
                    GpeItem merged = detail::merge_items(items[i], items[i + 1], pattern.token);
                    if (!captured) {
                        pattern.left_token = items[i].token;
                        pattern.right_token = items[i + 1].token;
                        pattern.depth = merged.depth;
                        auto [gates, nq] = detail::role_normalized_gates(merged.gates);
                        pattern.exemplar = std::move(gates);
                        pattern.exemplar_qubits = nq;
                        captured = true;
                    }
                    if (pattern.param_samples.size() < kMaxParamSamples)
                        for (const auto& g : merged.gates)
                            if (traits(g.kind).parameterized)
                                pattern.param_samples.push_back(normalize_param(g.kind, g.theta));
                    out.push_back(std::move(merged));
                    i += 2;
                } else {
                    out.push_back(std::move(items[i]));
                    ++i;
                }
            }
            items = std::move(out);
        }
        depth_of[pattern.token] = pattern.depth;
        result.vocab.merges.push_back(std::move(pattern));
    }
    return result;
}

// Frequency-sorted structure listing, optionally grouped by depth, with
// depth 0 reporting the primitive-gate histogram of the original corpus.
inline nlohmann::json report_structures(const GpeVocab& vocab, const std::vector<Circuit>& corpus,
                                        int top_k, bool by_depth) {
    nlohmann::json report;
    report["min_frequency"] = vocab.min_frequency;
    report["num_merges"] = vocab.merges.size();

    std::map<std::string, long> gate_hist;
    for (const auto& c : corpus)
        for (const auto& g : c.gates) ++gate_hist[gate_name(g.kind)];
    nlohmann::json depth0 = nlohmann::json::array();
    std::vector<std::pair<long, std::string>> base_sorted;
    for (const auto& [name, count] : gate_hist) base_sorted.emplace_back(count, name);
    std::sort(base_sorted.rbegin(), base_sorted.rend());
    for (const auto& [count, name] : base_sorted)
        depth0.push_back({{"gate", name}, {"count", count}});
    report["depth_0"] = depth0;

    auto entry_json = [](const GpePattern& p) {
        nlohmann::json e;
        e["token"] = p.token;
        e["key"] = p.key;
        e["depth"] = p.depth;
        e["frequency"] = p.frequency;
        e["constituents"] = {p.left_token, p.right_token};
        Circuit exemplar(std::max(p.exemplar_qubits, 1), p.exemplar);
        e["expansion"] = circuit_to_json(exemplar);
        if (!p.param_samples.empty()) {
            double mn = p.param_samples[0], mx = p.param_samples[0], sum = 0;
            for (double v : p.param_samples) {
                mn = std::min(mn, v);
                mx = std::max(mx, v);
                sum += v;
            }
            e["param_lambda"] = {{"count", p.param_samples.size()},
                                 {"min", mn},
                                 {"max", mx},
                                 {"mean", sum / p.param_samples.size()}};
        }
        return e;
    };

    std::vector<const GpePattern*> sorted;
    for (const auto& p : vocab.merges) sorted.push_back(&p);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const GpePattern* a, const GpePattern* b) {
                         return a->frequency > b->frequency;
                     });

    if (by_depth) {
        std::map<int, std::vector<const GpePattern*>> grouped;
        for (const GpePattern* p : sorted) grouped[p->depth].push_back(p);
        nlohmann::json depths = nlohmann::json::object();
        for (const auto& [depth, list] : grouped) {
            nlohmann::json arr = nlohmann::json::array();
            for (size_t i = 0; i < list.size() && static_cast<int>(i) < top_k; ++i)
                arr.push_back(entry_json(*list[i]));
            depths["depth_" + std::to_string(depth)] = arr;
        }
        report["structures"] = depths;
    } else {
        nlohmann::json arr = nlohmann::json::array();
        for (size_t i = 0; i < sorted.size() && static_cast<int>(i) < top_k; ++i)
            arr.push_back(entry_json(*sorted[i]));
        report["structures"] = arr;
    }
    return report;
}

inline std::string report_text(const nlohmann::json& report) {
    std::ostringstream out;
    out << "gate-pair encoding report\n";
    out << "merges: " << report.at("num_merges").get<size_t>()
        << "  min_frequency: " << report.at("min_frequency").get<long>() << "\n\n";
    out << "depth 0 (primitive gate counts):\n";
    for (const auto& e : report.at("depth_0"))
        out << "  " << e.at("gate").get<std::string>() << ": " << e.at("count").get<long>()
            << "\n";
    const auto& structures = report.at("structures");
    auto print_entry = [&out](const nlohmann::json& e) {
        out << "  token " << e.at("token").get<int>() << "  freq "
            << e.at("frequency").get<long>() << "  depth " << e.at("depth").get<int>()
            << "  expansion " << e.at("expansion").dump() << "\n";
    };
    if (structures.is_object()) {
        for (const auto& [depth, arr] : structures.items()) {
            out << "\n" << depth << ":\n";
            for (const auto& e : arr) print_entry(e);
        }
    } else {
        out << "\nstructures:\n";
        for (const auto& e : structures) print_entry(e);
    }
    return out.str();
}

}  // namespace qcdiff

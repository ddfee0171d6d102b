// chc.hpp — the edge-lookup ("Clever Hans") predictor and the
// teacher-forced evaluation harness.
//
// The predictor sees the graph plus the ground-truth target prefix and
// predicts the next target token by a single-edge lookup on the previous
// node. That is exact everywhere except at the leading node, where nothing
// in the prefix disambiguates the arm, so it guesses uniformly; with
// forward targets the expected sequence accuracy is therefore 1/D, while
// reversed targets are fully determined and score 1.
#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "pathstar/rng.hpp"
#include "pathstar/tokenizer.hpp"

namespace pathstar {

// Unique next node moving away from the start; v must be a non-final arm
// node or the start itself (which has no unique successor).
inline int arm_successor(const PathStarGraph& g, int v) {
    for (const auto& arm : g.arms)
        for (std::size_t i = 0; i + 1 < arm.size(); ++i)
            if (arm[i] == v) return arm[i + 1];
    throw std::invalid_argument("node has no unique successor");
}

// Unique next node moving toward the start (the start itself for leading nodes).
inline int arm_predecessor(const PathStarGraph& g, int v) {
    for (const auto& arm : g.arms) {
        if (arm.front() == v) return g.start;
        for (std::size_t i = 1; i < arm.size(); ++i)
            if (arm[i] == v) return arm[i - 1];
    }
    throw std::invalid_argument("node has no predecessor");
}

// Predict the target token at position prefix.size() of a forward target
// R_t = [s, l_t, ..., t]. predict_final_t additionally lets the predictor
// copy t from Q at the last position (position M-1), since fixed-M data
// makes that position identifiable.
inline int chc_predict(const std::vector<int>& prefix, const TaskInstance& inst, Rng& rng,
                       bool predict_final_t = false) {
    const PathStarGraph& g = inst.graph;
    const std::size_t pos = prefix.size();
    if (pos == 0) return g.start;
    if (predict_final_t && pos == static_cast<std::size_t>(g.arm_len()) - 1) return inst.target;
    if (pos == 1) {
        const auto leads = g.leading_nodes();
        return leads[rng.below(static_cast<std::uint64_t>(leads.size()))];
    }
    return arm_successor(g, prefix.back());
}

// Reversed targets: t is given in Q, every later step is a predecessor
// lookup; no randomness involved.
inline int chc_predict_reversed(const std::vector<int>& prefix, const TaskInstance& inst, Rng&) {
    if (prefix.empty()) return inst.target;
    return arm_predecessor(inst.graph, prefix.back());
}

struct PositionReport {
    std::vector<double> position_accuracy;  // per target position
    double sequence_accuracy = 0.0;
    int sample_count = 0;
};

using Predictor = std::function<int(const std::vector<int>&, const TokenizedSample&, Rng&)>;

// Variant-aware wrapper: LeadingOnly targets hold just l_t, so position 0
// is the leading guess; Reversed targets use the deterministic walk.
inline Predictor chc_predictor(bool predict_final_t = false) {
    return [predict_final_t](const std::vector<int>& prefix, const TokenizedSample& s, Rng& rng) {
        switch (s.options.target_variant) {
            case TargetVariant::FullForward:
                return chc_predict(prefix, s.instance, rng, predict_final_t);
            case TargetVariant::Reversed:
                return chc_predict_reversed(prefix, s.instance, rng);
            case TargetVariant::LeadingOnly: {
                const auto leads = s.instance.graph.leading_nodes();
                return leads[rng.below(static_cast<std::uint64_t>(leads.size()))];
            }
        }
        throw std::logic_error("bad variant");
    };
}

// Every prediction conditions on the true prefix, never on model output;
// a sample counts as correct only if all its positions are correct.
inline PositionReport teacher_forced_eval(const Predictor& predict,
                                          const std::vector<TokenizedSample>& dataset, Rng& rng) {
    PositionReport rep;
    if (dataset.empty()) return rep;
    std::vector<long long> hits;
    std::vector<long long> totals;
    long long seq_hits = 0;
    for (const auto& s : dataset) {
        const auto first = s.tokens.begin() + s.prefix_len;
        const std::vector<int> truth(first, first + s.target_len);
        std::vector<int> prefix;
        bool all_ok = true;
        for (std::size_t p = 0; p < truth.size(); ++p) {
            if (hits.size() <= p) { hits.push_back(0); totals.push_back(0); }
            const int guess = predict(prefix, s, rng);
            ++totals[p];
            if (guess == truth[p]) ++hits[p];
            else all_ok = false;
            prefix.push_back(truth[p]);
        }
        seq_hits += all_ok;
        ++rep.sample_count;
    }
    for (std::size_t p = 0; p < hits.size(); ++p)
        rep.position_accuracy.push_back(static_cast<double>(hits[p]) / static_cast<double>(totals[p]));
    rep.sequence_accuracy = static_cast<double>(seq_hits) / static_cast<double>(rep.sample_count);
    return rep;
}

}  // namespace pathstar

// solvers.hpp — the six select/aggregate programs that solve the path-star
// task, plus shared lane masks and the validity predicate.
//
// All programs operate on the Q+G region only (BOS/EOS and the target region
// are stripped). Two sentinels keep value lookups honest: NULL_A marks holes
// in the static positional lanes, NULL_B marks empty dynamic state, so a
// state query can never accidentally match a lane hole.
//
// A run is valid when some contiguous window of edge arity in the final
// state contains both the target node t and its leading node l_t.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "pathstar/rasp.hpp"
#include "pathstar/tokenizer.hpp"

namespace pathstar {

struct SolverInput {
    static constexpr int kNullA = -99;  // static lane holes
    static constexpr int kNullB = -89;  // empty dynamic state

    Seq tokens;        // Q+G only
    int g_start = 0;   // 4 when Q precedes G, else 0
    int marker_count = 1;
    int D = 0;
    int M = 0;

    int stride() const { return 2 + marker_count; }
    bool q_first() const { return g_start > 0; }
    int length() const { return static_cast<int>(tokens.size()); }

    static SolverInput from_sample(const TokenizedSample& s) {
        SolverInput in;
        const std::size_t lo = s.options.include_bos_eos ? 1 : 0;
        in.tokens.assign(s.tokens.begin() + static_cast<std::ptrdiff_t>(lo),
                         s.tokens.begin() + s.prefix_len);
        in.g_start = s.options.q_position == QPosition::Start ? 4 : 0;
        in.marker_count = s.options.edge_marker_count;
        in.D = s.instance.graph.arm_count();
        in.M = s.instance.graph.arm_len();
        return in;
    }
};

struct SolverReport {
    Seq final_state;
    bool valid = false;
    int kqv_count = 0;
    int loop_iterations = 0;
    ExecutionTrace trace;
};

enum class SolverKind { BackTarget, BackwardTargets, ForwardStart, LogDoubling, ArmsConstant, Causal };

inline const char* solver_name(SolverKind k) {
    switch (k) {
        case SolverKind::BackTarget: return "back_target";
        case SolverKind::BackwardTargets: return "backward_targets";
        case SolverKind::ForwardStart: return "forward_start";
        case SolverKind::LogDoubling: return "log_doubling";
        case SolverKind::ArmsConstant: return "arms_constant";
        case SolverKind::Causal: return "causal";
    }
    return "?";
}

inline std::optional<SolverKind> solver_from_name(const std::string& name) {
    for (SolverKind k : {SolverKind::BackTarget, SolverKind::BackwardTargets,
                         SolverKind::ForwardStart, SolverKind::LogDoubling,
                         SolverKind::ArmsConstant, SolverKind::Causal})
        if (name == solver_name(k)) return k;
    return std::nullopt;
}

// Positional lanes derived once per input: the sequence with Q blanked out,
// and the edge-offset-0 (i) and offset-1 (j) node lanes.
struct Lanes {
    Seq idx, masked, i_nodes, j_nodes;
};

inline Lanes node_lanes(const SolverInput& in) {
    const int n = in.length();
    const int stride = in.stride();
    if ((n - 4) % stride != 0 || n < 4 + stride)
        throw std::invalid_argument("sequence length does not fit the edge stride");
    const int q_lo = in.q_first() ? 0 : n - 4;
    const int g_lo = in.q_first() ? 4 : 0;
    const int g_hi = in.q_first() ? n : n - 4;
    Lanes l;
    l.idx.resize(static_cast<std::size_t>(n));
    l.masked.resize(static_cast<std::size_t>(n));
    l.i_nodes.assign(static_cast<std::size_t>(n), SolverInput::kNullA);
    l.j_nodes.assign(static_cast<std::size_t>(n), SolverInput::kNullA);
    for (int i = 0; i < n; ++i) {
        l.idx[static_cast<std::size_t>(i)] = i;
        const bool in_q = i >= q_lo && i < q_lo + 4;
        l.masked[static_cast<std::size_t>(i)] =
            in_q ? SolverInput::kNullA : in.tokens[static_cast<std::size_t>(i)];
        if (i >= g_lo && i < g_hi) {
            const int off = (i - g_lo) % stride;
            if (off == 0) l.i_nodes[static_cast<std::size_t>(i)] = l.masked[static_cast<std::size_t>(i)];
            if (off == 1) l.j_nodes[static_cast<std::size_t>(i)] = l.masked[static_cast<std::size_t>(i)];
        }
    }
    return l;
}

inline bool validate_output(const Seq& state, const SolverInput& in, const TaskInstance& inst) {
    if (static_cast<int>(state.size()) != in.length())
        throw std::invalid_argument("state length mismatch");
    const int w = in.stride();
    const int t = inst.target, lt = inst.leading();
    for (int i = 0; i + w <= static_cast<int>(state.size()); ++i) {
        bool has_t = false, has_l = false;
        for (int k = 0; k < w; ++k) {
            if (state[static_cast<std::size_t>(i + k)] == t) has_t = true;
            if (state[static_cast<std::size_t>(i + k)] == lt) has_l = true;
        }
        if (has_t && has_l) return true;
    }
    return false;
}

namespace detail {

constexpr int NA = SolverInput::kNullA;
constexpr int NB = SolverInput::kNullB;

inline std::vector<bool> ok(const Seq& a) { return Rasp::is_true(a, -1); }

inline std::vector<bool> eq_mask(Rasp& r, const Seq& a, const Seq& b) {
    return Rasp::is_true(r.seq_map(a, b, [](int x, int y) { return x == y ? 1 : 0; }), 0);
}

// A node is final iff it occurs exactly once in the Q-masked sequence.
inline std::vector<bool> finality(Rasp& r, const Seq& masked) {
    Seq counts = r.sel_width(r.select(masked, masked, Pred::Equals));
    std::vector<bool> out(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) out[i] = counts[i] == 1;
    return out;
}

inline void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline int ceil_log2(int x) {  // smallest d with 2^d >= x, x >= 1
    int d = 0;
    while ((1 << d) < x) ++d;
    return d;
}

}  // namespace detail

// Walks the queried target node back edge-by-edge in a single scratch slot
// (sequence position 0); after M-2 steps the slot holds l_t. Needs Q first
// so the final window at positions 0..2 pairs the slot with t.
inline SolverReport solve_back_target(const SolverInput& in, const TaskInstance& inst) {
    using namespace detail;
    require(in.marker_count == 1, "back_target needs single edge markers");
    require(in.q_first(), "back_target needs Q before G");
    Rasp r;
    const Lanes L = node_lanes(in);
    const Seq& idx = L.idx;
    std::vector<bool> wm(static_cast<std::size_t>(in.length()), false);
    wm[0] = true;
    Seq t_val = r.kqv(idx, r.full(idx, in.g_start - 2), in.tokens, Pred::Equals, NB);
    Seq cur = r.where(wm, t_val, in.tokens);
    for (int step = 0; step < in.M - 2; ++step) {
        Seq val = r.where(wm, cur, r.full(cur, NB));
        Seq p = r.kqv(L.j_nodes, val, idx, Pred::Equals, NB);
        Seq u = r.kqv(idx, r.shifted(p, -1), L.i_nodes, Pred::Equals, NB);
        cur = r.where(wm, u, cur);
    }
    SolverReport rep{cur, validate_output(cur, in, inst), r.trace.kqv_count(), in.M - 2,
                     std::move(r.trace)};
    return rep;
}

// Walks all D final nodes back in parallel, each riding the marker slot of
// its own final edge; after M-2 steps every final edge's marker slot holds
// that arm's leading node.
inline SolverReport solve_backward_targets(const SolverInput& in, const TaskInstance& inst) {
    using namespace detail;
    require(in.marker_count == 1, "backward_targets needs single edge markers");
    Rasp r;
    const Lanes L = node_lanes(in);
    const Seq& idx = L.idx;
    std::vector<bool> is_final = finality(r, L.masked);
    Seq final_nodes = r.where(is_final, L.j_nodes, r.full(idx, NB));
    Seq walked = r.kqv(r.shifted(idx, 1), idx, final_nodes, Pred::Equals, NB);
    std::vector<bool> is_fslash = ok(walked);
    Seq cur = in.tokens;
    for (int step = 0; step < in.M - 2; ++step) {
        Seq p = r.kqv(L.j_nodes, walked, idx, Pred::Equals, NB);
        Seq back = r.kqv(idx, r.shifted(p, -1), L.i_nodes, Pred::Equals, NB);
        walked = r.where(is_fslash, back, r.full(idx, NB));
    }
    cur = r.where(is_fslash, walked, in.tokens);
    SolverReport rep{cur, validate_output(cur, in, inst), r.trace.kqv_count(), in.M - 2,
                     std::move(r.trace)};
    return rep;
}

// Walks all D leading nodes forward in parallel, each riding its start-edge
// row; after M-2 steps every start row holds that arm's final node.
inline SolverReport solve_forward_start(const SolverInput& in, const TaskInstance& inst) {
    using namespace detail;
    require(in.marker_count == 1, "forward_start needs single edge markers");
    Rasp r;
    const Lanes L = node_lanes(in);
    const Seq& idx = L.idx;
    const int s_pos = in.q_first() ? in.g_start - 3 : in.length() - 3;
    Seq s_val = r.kqv(idx, r.full(idx, s_pos), in.tokens, Pred::Equals, NB);
    std::vector<bool> is_start = eq_mask(r, L.i_nodes, s_val);
    Seq startq = r.where(is_start, r.shifted(idx, 1), r.full(idx, NB));
    Seq walked = r.kqv(idx, startq, L.j_nodes, Pred::Equals, NB);
    Seq cur = r.where(is_start, walked, in.tokens);
    for (int step = 0; step < in.M - 2; ++step) {
        Seq p = r.kqv(L.i_nodes, walked, idx, Pred::Equals, NB);
        Seq fwd = r.kqv(idx, r.shifted(p, 1), L.j_nodes, Pred::Equals, NB);
        walked = r.where(is_start, fwd, r.full(idx, NB));
        cur = r.where(is_start, walked, in.tokens);
    }
    SolverReport rep{cur, validate_output(cur, in, inst), r.trace.kqv_count(), in.M - 2,
                     std::move(r.trace)};
    return rep;
}

// Pointer doubling over 4-token edges (i, j, |, |). The first marker slot
// carries a backward frontier seeded with i, the second a forward frontier
// seeded with j; each of the ceil(log2(M-1)) rounds composes a one-hop step
// with the stored frontier of the reached edge, so frontier reach at least
// doubles per round. The backward frontier saturates at the leading node
// (it refuses to step onto the start node), the forward one at the final
// node; the final edge's window then pairs t with l_t.
inline SolverReport solve_log(const SolverInput& in, const TaskInstance& inst) {
    using namespace detail;
    require(in.marker_count == 2, "log_doubling needs double edge markers");
    Rasp r;
    const Lanes L = node_lanes(in);
    const Seq& idx = L.idx;
    const int n = in.length();
    const int s_pos = in.q_first() ? in.g_start - 3 : n - 3;
    Seq s_val = r.kqv(idx, r.full(idx, s_pos), in.tokens, Pred::Equals, NB);

    // lane-slot position maps: ipos/jpos defined only at i/j rows
    Seq ipos(static_cast<std::size_t>(n), NA), jpos(static_cast<std::size_t>(n), NA);
    for (int i = 0; i < n; ++i) {
        if (L.i_nodes[static_cast<std::size_t>(i)] != NA) ipos[static_cast<std::size_t>(i)] = i;
        if (L.j_nodes[static_cast<std::size_t>(i)] != NA) jpos[static_cast<std::size_t>(i)] = i;
    }
    auto offset_keys = [&](const Seq& pos, int delta) {
        Seq k(pos.size(), NA);
        for (std::size_t i = 0; i < pos.size(); ++i)
            if (pos[i] != NA) k[i] = pos[i] + delta;
        return k;
    };
    Seq k1 = r.kqv(offset_keys(ipos, 2), idx, L.i_nodes, Pred::Equals, NB);
    Seq k2 = r.kqv(offset_keys(jpos, 2), idx, L.j_nodes, Pred::Equals, NB);

    const int steps = in.M > 2 ? ceil_log2(in.M - 1) : 0;
    for (int step = 0; step < steps; ++step) {
        // forward frontier: hop one edge, then adopt that edge's frontier
        Seq m = r.kqv(L.i_nodes, k2, idx, Pred::Equals, NB);
        Seq mv = r.kqv(idx, r.shifted(m, 1), L.j_nodes, Pred::Equals, NB);
        Seq hop = r.where(ok(mv), mv, k2);
        Seq p2 = r.kqv(L.j_nodes, hop, idx, Pred::Equals, NB);
        Seq nf = r.kqv(idx, r.shifted(p2, 2), k2, Pred::Equals, NB);
        k2 = r.where(ok(nf), nf, k2);
        // backward frontier: same trick toward the start, stopping at the
        // leading node (a frontier equal to s would match every start edge)
        Seq mb = r.kqv(L.j_nodes, k1, idx, Pred::Equals, NB);
        Seq mbv = r.kqv(idx, r.shifted(mb, -1), L.i_nodes, Pred::Equals, NB);
        mbv = r.where(eq_mask(r, mbv, s_val), k1, mbv);
        Seq hopb = r.where(ok(mbv), mbv, k1);
        hopb = r.where(eq_mask(r, hopb, s_val), r.full(idx, NB), hopb);
        Seq p1 = r.kqv(L.i_nodes, hopb, idx, Pred::Equals, NB);
        Seq nb = r.kqv(idx, r.shifted(p1, 2), k1, Pred::Equals, NB);
        k1 = r.where(ok(nb), nb, k1);
    }
    Seq cur = r.where(ok(k1), k1, in.tokens);
    cur = r.where(ok(k2), k2, cur);
    SolverReport rep{cur, validate_output(cur, in, inst), r.trace.kqv_count(), steps,
                     std::move(r.trace)};
    return rep;
}

// Constant-depth arm-wise program: find final edges, jump back the fixed
// offset to that arm's leading node, and park it in the marker slot after
// the final node. The offset only lands correctly when each arm is a
// contiguous block, so edge-wise inputs fail by design.
inline SolverReport solve_arms_constant(const SolverInput& in, const TaskInstance& inst) {
    using namespace detail;
    require(in.marker_count == 1, "arms_constant needs single edge markers");
    Rasp r;
    const Lanes L = node_lanes(in);
    const Seq& idx = L.idx;
    std::vector<bool> is_final = finality(r, L.masked);
    Seq final_idx = r.where(is_final, idx, r.full(idx, NB));
    const int off = (in.M - 3) * 3 + 1;
    Seq lead_q = r.shifted(final_idx, -off);
    for (std::size_t i = 0; i < lead_q.size(); ++i)
        if (final_idx[i] == NB) lead_q[i] = NB;
    Seq lead = r.kqv(idx, lead_q, L.i_nodes, Pred::Equals, NB);
    Seq lead_sh = r.kqv(r.shifted(idx, 1), idx, lead, Pred::Equals, NB);
    Seq fin01(is_final.size());
    for (std::size_t i = 0; i < is_final.size(); ++i) fin01[i] = is_final[i] ? 1 : 0;
    Seq fslash = r.kqv(r.shifted(idx, 1), idx, fin01, Pred::Equals, 0);
    std::vector<bool> cond(fslash.size());
    for (std::size_t i = 0; i < cond.size(); ++i) cond[i] = fslash[i] == 1 && lead_sh[i] >= 0;
    Seq cur = r.where(cond, lead_sh, in.tokens);
    SolverReport rep{cur, validate_output(cur, in, inst), r.trace.kqv_count(), 0,
                     std::move(r.trace)};
    return rep;
}

// Causal variant: every attention op is lower-triangular, so information
// only flows forward. The start edges seed a frontier (the leading node of
// their arm, parked in their marker slot); each round either pulls a value
// from a connecting edge that appeared earlier (rule 1) or pushes the
// frontier into a connecting edge that appears later (rule 2). Needs Q
// first so s is known before any edge is read.
inline SolverReport solve_causal(const SolverInput& in, const TaskInstance& inst) {
    using namespace detail;
    require(in.marker_count == 1, "causal needs single edge markers");
    require(in.q_first(), "causal needs Q before G");
    constexpr bool C = true;
    Rasp r;
    const Lanes L = node_lanes(in);
    const Seq& idx = L.idx;
    Seq s_val = r.kqv(idx, r.full(idx, 1), in.tokens, Pred::Equals, NB, C);
    std::vector<bool> is_start = eq_mask(r, L.i_nodes, s_val);
    Seq start_idx = r.where(is_start, idx, r.full(idx, NA));
    Seq leading_idx = r.kqv(r.shifted(start_idx, 2), idx, r.shifted(idx, 1), Pred::Equals, NB, C);
    Seq leading = r.kqv(idx, leading_idx, L.j_nodes, Pred::Equals, NB, C);
    Seq cur = r.where(ok(leading), leading, in.tokens);
    Seq cur_j_idx = r.kqv(r.shifted(start_idx, 1), idx, r.shifted(idx, 1), Pred::Equals, NB, C);
    Seq cur_k = leading;
    Seq cur_j = r.where(ok(cur_j_idx), L.j_nodes, r.full(idx, NB));
    for (int step = 0; step < in.M - 1; ++step) {
        // rule 1: the connecting edge is earlier; pull its j value here
        Seq before_w = r.sel_width(r.select(L.i_nodes, cur_j, Pred::Equals, C));
        Seq ci = r.kqv(L.i_nodes, cur_j, idx, Pred::Equals, NB, C);
        Seq cn = r.kqv(r.shifted(idx, -1), ci, L.j_nodes, Pred::Equals, NB, C);
        std::vector<bool> r1(cn.size());
        for (std::size_t i = 0; i < r1.size(); ++i) r1[i] = before_w[i] == 1 && cn[i] >= 0;
        cur_j = r.where(r1, cn, cur_j);
        cur = r.where(r1, cn, cur);
        // rule 2: the connecting edge is later; push the frontier into its
        // marker slot, then let that row pick up the chase
        Seq ci2 = r.kqv(cur_j, L.i_nodes, idx, Pred::Equals, NB, C);
        Seq ck_idx = r.kqv(r.shifted(idx, 2), idx, ci2, Pred::Equals, NB, C);
        Seq ck = r.kqv(idx, r.shifted(ck_idx, 1), cur_k, Pred::Equals, NB, C);
        std::vector<bool> got = ok(ck);
        cur_k = r.where(got, ck, cur_k);
        Seq after_w = r.sel_width(r.select(cur_j, L.i_nodes, Pred::Equals, C));
        Seq cj_at_i(after_w.size(), NA);
        for (std::size_t i = 0; i < cj_at_i.size(); ++i)
            if (after_w[i] == 1) cj_at_i[i] = static_cast<int>(i) + 1;
        Seq cj_idx = r.kqv(cj_at_i, idx, r.shifted(idx, 1), Pred::Equals, NB, C);
        std::vector<bool> claim(cj_idx.size());
        for (std::size_t i = 0; i < claim.size(); ++i)
            claim[i] = cj_idx[i] >= 0 && cur_j[i] < 0;  // do not clobber live rows
        cur_j = r.where(claim, L.j_nodes, cur_j);
        cur = r.where(got, cur_k, cur);
    }
    SolverReport rep{cur, validate_output(cur, in, inst), r.trace.kqv_count(), in.M - 1,
                     std::move(r.trace)};
    return rep;
}

inline SolverReport run_solver(SolverKind k, const SolverInput& in, const TaskInstance& inst) {
    switch (k) {
        case SolverKind::BackTarget: return solve_back_target(in, inst);
        case SolverKind::BackwardTargets: return solve_backward_targets(in, inst);
        case SolverKind::ForwardStart: return solve_forward_start(in, inst);
        case SolverKind::LogDoubling: return solve_log(in, inst);
        case SolverKind::ArmsConstant: return solve_arms_constant(in, inst);
        case SolverKind::Causal: return solve_causal(in, inst);
    }
    throw std::logic_error("bad solver kind");
}

// The tokenization regime each program is designed for. Running outside it
// is allowed (that is how the negative results are reproduced) but callers
// should surface the mismatch.
inline std::optional<std::string> regime_mismatch(SolverKind k, const TokenizationOptions& o) {
    auto bad = [](const std::string& m) { return std::optional<std::string>(m); };
    const bool q_start = o.q_position == QPosition::Start;
    switch (k) {
        case SolverKind::BackTarget:
            if (o.edge_marker_count != 1) return bad("back_target expects markers=1");
            if (!q_start) return bad("back_target expects qpos=start");
            break;
        case SolverKind::BackwardTargets:
        case SolverKind::ForwardStart:
            if (o.edge_marker_count != 1) return bad(std::string(solver_name(k)) + " expects markers=1");
            break;
        case SolverKind::LogDoubling:
            if (o.edge_marker_count != 2) return bad("log_doubling expects markers=2");
            break;
        case SolverKind::ArmsConstant:
            if (o.edge_marker_count != 1) return bad("arms_constant expects markers=1");
            if (o.perm_mode == PermMode::EdgeWise)
                return bad("arms_constant expects perm=arm (edge-wise inputs defeat the fixed offset)");
            break;
        case SolverKind::Causal:
            if (o.edge_marker_count != 1) return bad("causal expects markers=1");
            if (!q_start) return bad("causal expects qpos=start");
            break;
    }
    return std::nullopt;
}

}  // namespace pathstar

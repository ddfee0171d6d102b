// rasp.hpp — restricted select/aggregate interpreter with execution tracing.
//
// Values are fixed-length integer sequences. select builds a boolean
// attention matrix from a predicate over (key, query) pairs, optionally
// causally masked; aggr_mean averages selected values per row, truncating
// toward zero. kqv composes the two and is the unit of layer accounting.
//
// The trace records every operation so callers can audit causality, count
// attention-equivalent ops, and verify that no row ever averages unequal
// values (correct programs only aggregate singletons or equal values).
#pragma once

#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathstar {

using Seq = std::vector<int>;

enum class Pred { Equals, NotEquals, Less, Greater, True };

inline const char* to_string(Pred p) {
    switch (p) {
        case Pred::Equals: return "equals";
        case Pred::NotEquals: return "not_equals";
        case Pred::Less: return "less";
        case Pred::Greater: return "greater";
        case Pred::True: return "true";
    }
    return "?";
}

inline bool apply_pred(Pred p, int key, int query) {
    switch (p) {
        case Pred::Equals: return key == query;
        case Pred::NotEquals: return key != query;
        case Pred::Less: return key < query;
        case Pred::Greater: return key > query;
        case Pred::True: return true;
    }
    return false;
}

struct SelMatrix {
    std::size_t n = 0;
    std::vector<bool> cells;  // row-major, (query, key)
    bool causal = false;

    bool at(std::size_t qi, std::size_t kj) const { return cells[qi * n + kj]; }
};

enum class OpKind { Select, SelWidth, AggrMean, Kqv, Map };

struct TraceRecord {
    OpKind kind = OpKind::Select;
    Pred pred = Pred::True;
    bool causal = false;
    int max_row_width = 0;        // largest per-row selected count seen
    bool singleton_or_equal = true;
    bool truncated = false;       // some row averaged to a non-integer mean
};

struct ExecutionTrace {
    std::vector<TraceRecord> records;
    int nonunit_index_shifts = 0;  // positional arithmetic beyond +/-1

    int kqv_count() const {
        int n = 0;
        for (const auto& r : records) n += r.kind == OpKind::Kqv;
        return n;
    }
    int noncausal_attention_count() const {
        int n = 0;
        for (const auto& r : records)
            n += (r.kind == OpKind::Select || r.kind == OpKind::Kqv) && !r.causal;
        return n;
    }
    bool all_singleton_or_equal() const {
        for (const auto& r : records)
            if (!r.singleton_or_equal) return false;
        return true;
    }
    bool truncation_occurred() const {
        for (const auto& r : records)
            if (r.truncated) return true;
        return false;
    }
};

// One interpreter per program run; the trace accumulates across calls.
class Rasp {
public:
    ExecutionTrace trace;

    static Seq full(const Seq& tmpl, int c) { return Seq(tmpl.size(), c); }

    static Seq indices(const Seq& tmpl) {
        Seq out(tmpl.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(i);
        return out;
    }

    SelMatrix select(const Seq& keys, const Seq& queries, Pred pred, bool causal = false) {
        check_len(keys, queries);
        SelMatrix m;
        m.n = keys.size();
        m.causal = causal;
        m.cells.assign(m.n * m.n, false);
        for (std::size_t qi = 0; qi < m.n; ++qi)
            for (std::size_t kj = 0; kj < m.n; ++kj)
                if (!causal || kj <= qi)
                    m.cells[qi * m.n + kj] = apply_pred(pred, keys[kj], queries[qi]);
        trace.records.push_back({OpKind::Select, pred, causal, row_max(m), true, false});
        return m;
    }

    Seq sel_width(const SelMatrix& m) {
        Seq out(m.n, 0);
        for (std::size_t qi = 0; qi < m.n; ++qi)
            for (std::size_t kj = 0; kj < m.n; ++kj) out[qi] += m.at(qi, kj);
        trace.records.push_back({OpKind::SelWidth, Pred::True, m.causal, row_max(m), true, false});
        return out;
    }

    Seq aggr_mean(const SelMatrix& m, const Seq& values, int dflt = 0) {
        if (values.size() != m.n) throw std::invalid_argument("aggr_mean size mismatch");
        TraceRecord rec{OpKind::AggrMean, Pred::True, m.causal, 0, true, false};
        Seq out(m.n, dflt);
        for (std::size_t qi = 0; qi < m.n; ++qi) {
            long long sum = 0;
            int count = 0;
            bool equal = true;
            int first = 0;
            for (std::size_t kj = 0; kj < m.n; ++kj) {
                if (!m.at(qi, kj)) continue;
                int v = values[kj];
                if (count == 0) first = v;
                else if (v != first) equal = false;
                sum += v;
                ++count;
            }
            if (count == 0) continue;
            out[qi] = static_cast<int>(sum / count);  // truncates toward zero
            if (sum % count != 0) rec.truncated = true;
            if (count > 1 && !equal) rec.singleton_or_equal = false;
            rec.max_row_width = std::max(rec.max_row_width, count);
        }
        trace.records.push_back(rec);
        return out;
    }

    Seq kqv(const Seq& keys, const Seq& queries, const Seq& values, Pred pred,
            int dflt = 0, bool causal = false) {
        SelMatrix m = select(keys, queries, pred, causal);
        Seq out = aggr_mean(m, values, dflt);
        // fold the pair into one attention-equivalent record
        TraceRecord agg = trace.records.back();
        trace.records.pop_back();
        trace.records.pop_back();
        trace.records.push_back({OpKind::Kqv, pred, causal, agg.max_row_width,
                                 agg.singleton_or_equal, agg.truncated});
        return out;
    }

    Seq seq_map(const Seq& a, const Seq& b, const std::function<int(int, int)>& fn) {
        check_len(a, b);
        Seq out(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a[i], b[i]);
        trace.records.push_back({OpKind::Map, Pred::True, false, 0, true, false});
        return out;
    }

    Seq where(const std::vector<bool>& cond, const Seq& a, const Seq& b) {
        if (cond.size() != a.size() || a.size() != b.size())
            throw std::invalid_argument("where size mismatch");
        Seq out(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = cond[i] ? a[i] : b[i];
        trace.records.push_back({OpKind::Map, Pred::True, false, 0, true, false});
        return out;
    }

    // Positional arithmetic helper; shifts beyond one position are legal here
    // but counted, so the single-increment restriction is auditable.
    Seq shifted(const Seq& a, int delta) {
        if (std::abs(delta) > 1) ++trace.nonunit_index_shifts;
        Seq out(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + delta;
        return out;
    }

    static std::vector<bool> is_true(const Seq& a, int dflt = 0) {
        std::vector<bool> out(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] > dflt;
        return out;
    }

private:
    static void check_len(const Seq& a, const Seq& b) {
        if (a.size() != b.size()) throw std::invalid_argument("sequence length mismatch");
    }
    static int row_max(const SelMatrix& m) {
        int best = 0;
        for (std::size_t qi = 0; qi < m.n; ++qi) {
            int c = 0;
            for (std::size_t kj = 0; kj < m.n; ++kj) c += m.at(qi, kj);
            best = std::max(best, c);
        }
        return best;
    }
};

}  // namespace pathstar

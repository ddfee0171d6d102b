// tokenizer.hpp — serialization of task instances to token sequences and
// back, covering every variant axis: edge-wise / arm-wise / no permutation,
// Q at start or end, forward / reversed / leading-only targets, one or two
// edge markers, optional BOS/EOS.
//
// Canonical file format: one sample per line of space-separated surface
// tokens (node ids displayed 1-based, as in the figures), preceded by a
// '#' header line recording the generation parameters.
#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pathstar/graph.hpp"
#include "pathstar/rng.hpp"

namespace pathstar {

// Node ids 0..|V|-1 followed by the five specials, in this order.
struct Vocabulary {
    int node_count = 0;

    int edge_mark() const { return node_count; }      // '|'
    int q_open() const { return node_count + 1; }     // '/'
    int q_close() const { return node_count + 2; }    // '='
    int bos() const { return node_count + 3; }
    int eos() const { return node_count + 4; }
    int size() const { return node_count + 5; }

    std::string surface(int id) const {
        if (id >= 0 && id < node_count) return std::to_string(id + 1);  // 1-based display
        if (id == edge_mark()) return "|";
        if (id == q_open()) return "/";
        if (id == q_close()) return "=";
        if (id == bos()) return "BOS";
        if (id == eos()) return "EOS";
        throw std::invalid_argument("unknown token id " + std::to_string(id));
    }

    std::optional<int> id_of(std::string_view word) const {
        if (word == "|") return edge_mark();
        if (word == "/") return q_open();
        if (word == "=") return q_close();
        if (word == "BOS") return bos();
        if (word == "EOS") return eos();
        int v = 0;
        for (char c : word) {
            if (c < '0' || c > '9') return std::nullopt;
            v = v * 10 + (c - '0');
        }
        if (word.empty() || v < 1 || v > node_count) return std::nullopt;
        return v - 1;
    }
};

enum class PermMode { EdgeWise, ArmWise, None };
enum class QPosition { Start, End };
enum class TargetVariant { FullForward, Reversed, LeadingOnly };

struct TokenizationOptions {
    PermMode perm_mode = PermMode::EdgeWise;
    QPosition q_position = QPosition::End;
    TargetVariant target_variant = TargetVariant::FullForward;
    int edge_marker_count = 1;  // 2 only used by the log-depth solver layout
    bool include_bos_eos = true;
};

struct TokenizedSample {
    std::vector<int> tokens;
    int prefix_len = 0;   // index of the first target token
    int target_len = 0;   // number of target tokens (EOS excluded)
    TaskInstance instance;
    TokenizationOptions options;

    Vocabulary vocab() const { return Vocabulary{instance.graph.vocab_size}; }
};

namespace detail {

inline std::vector<int> target_tokens(const TaskInstance& inst, TargetVariant variant) {
    std::vector<int> r = inst.target_path();
    switch (variant) {
        case TargetVariant::FullForward: return r;
        case TargetVariant::Reversed: return {r.rbegin(), r.rend()};
        case TargetVariant::LeadingOnly: return {inst.leading()};
    }
    throw std::logic_error("bad variant");
}

}  // namespace detail

// Serialize with an explicit edge order (indices into instance.graph.edges()).
// The random paths below draw the order and delegate here; tests can pin it.
inline TokenizedSample tokenize_with_order(const TaskInstance& inst,
                                           const TokenizationOptions& opt,
                                           const std::vector<int>& edge_order) {
    const auto& g = inst.graph;
    const Vocabulary vocab{g.vocab_size};
    const auto edges = g.edges();
    if (edge_order.size() != edges.size())
        throw std::invalid_argument("edge order size mismatch");
    if (opt.edge_marker_count != 1 && opt.edge_marker_count != 2)
        throw std::invalid_argument("edge_marker_count must be 1 or 2");

    std::vector<int> gtoks;
    for (int e : edge_order) {
        auto [u, v] = edges[static_cast<std::size_t>(e)];
        gtoks.push_back(u);
        gtoks.push_back(v);
        gtoks.push_back(vocab.edge_mark());
        if (opt.edge_marker_count == 2) gtoks.push_back(vocab.edge_mark());
    }
    const std::vector<int> q{vocab.q_open(), g.start, inst.target, vocab.q_close()};

    TokenizedSample s;
    s.instance = inst;
    s.options = opt;
    if (opt.include_bos_eos) s.tokens.push_back(vocab.bos());
    if (opt.q_position == QPosition::Start) {
        s.tokens.insert(s.tokens.end(), q.begin(), q.end());
        s.tokens.insert(s.tokens.end(), gtoks.begin(), gtoks.end());
    } else {
        s.tokens.insert(s.tokens.end(), gtoks.begin(), gtoks.end());
        s.tokens.insert(s.tokens.end(), q.begin(), q.end());
    }
    s.prefix_len = static_cast<int>(s.tokens.size());
    const auto tgt = detail::target_tokens(inst, opt.target_variant);
    s.target_len = static_cast<int>(tgt.size());
    s.tokens.insert(s.tokens.end(), tgt.begin(), tgt.end());
    if (opt.include_bos_eos) s.tokens.push_back(vocab.eos());
    return s;
}

inline std::vector<int> draw_edge_order(const PathStarGraph& g, PermMode mode, Rng& rng) {
    const int D = g.arm_count();
    const int per_arm = g.arm_len() - 1;
    std::vector<int> order(static_cast<std::size_t>(D * per_arm));
    std::iota(order.begin(), order.end(), 0);
    if (mode == PermMode::EdgeWise) {
        rng.shuffle(order);
    } else if (mode == PermMode::ArmWise) {
        std::vector<int> arm_order(static_cast<std::size_t>(D));
        std::iota(arm_order.begin(), arm_order.end(), 0);
        rng.shuffle(arm_order);
        std::size_t k = 0;
        for (int a : arm_order)
            for (int e = 0; e < per_arm; ++e) order[k++] = a * per_arm + e;
    }
    return order;
}

inline TokenizedSample tokenize(const TaskInstance& inst, const TokenizationOptions& opt, Rng& rng) {
    return tokenize_with_order(inst, opt, draw_edge_order(inst.graph, opt.perm_mode, rng));
}

inline std::string detokenize(const TokenizedSample& s) {
    const Vocabulary vocab = s.vocab();
    std::string out;
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        if (i) out += ' ';
        out += vocab.surface(s.tokens[i]);
    }
    return out;
}

// Parse one line of the canonical format back into a sample. The graph and
// target are reconstructed from the edges and Q; q_position, marker count
// and target variant are inferred from the token layout.
inline TokenizedSample parse_sample(const std::string& line, const Vocabulary& vocab) {
    std::istringstream in(line);
    std::vector<int> toks;
    std::string word;
    while (in >> word) {
        auto id = vocab.id_of(word);
        if (!id) throw std::invalid_argument("token out of vocabulary: '" + word + "'");
        toks.push_back(*id);
    }
    if (toks.empty()) throw std::invalid_argument("empty sample line");

    const bool has_bos = toks.front() == vocab.bos();
    const bool has_eos = toks.back() == vocab.eos();
    std::size_t lo = has_bos ? 1 : 0;
    std::size_t hi = toks.size() - (has_eos ? 1 : 0);

    // locate Q by its delimiters
    std::size_t q_open_pos = std::string::npos;
    for (std::size_t i = lo; i < hi; ++i)
        if (toks[i] == vocab.q_open()) { q_open_pos = i; break; }
    if (q_open_pos == std::string::npos || q_open_pos + 3 >= hi ||
        toks[q_open_pos + 3] != vocab.q_close())
        throw std::invalid_argument("missing Q delimiters");
    const int s_node = toks[q_open_pos + 1];
    const int t_node = toks[q_open_pos + 2];
    if (s_node >= vocab.node_count || t_node >= vocab.node_count)
        throw std::invalid_argument("Q must name two nodes");
    const bool q_at_start = q_open_pos == lo;

    // edge region and target region
    std::size_t g_lo = q_at_start ? q_open_pos + 4 : lo;
    std::size_t g_hi;  // one past last edge token
    if (q_at_start) {
        // edges run until the last edge marker; the rest is the target
        std::size_t last_bar = std::string::npos;
        for (std::size_t i = g_lo; i < hi; ++i)
            if (toks[i] == vocab.edge_mark()) last_bar = i;
        if (last_bar == std::string::npos) throw std::invalid_argument("no edges found");
        g_hi = last_bar + 1;
    } else {
        g_hi = q_open_pos;
    }

    // split edge region on markers
    std::vector<std::pair<int, int>> edges;
    int marker_count = 0;
    std::vector<int> cur;
    int bars = 0;
    for (std::size_t i = g_lo; i < g_hi; ++i) {
        if (toks[i] == vocab.edge_mark()) {
            ++bars;
            bool edge_done = (i + 1 == g_hi) || toks[i + 1] != vocab.edge_mark();
            if (edge_done) {
                if (cur.size() != 2) throw std::invalid_argument("malformed edge");
                if (cur[0] == cur[1]) throw std::invalid_argument("duplicate node within an edge");
                if (marker_count == 0) marker_count = bars;
                else if (bars != marker_count) throw std::invalid_argument("inconsistent edge markers");
                edges.emplace_back(cur[0], cur[1]);
                cur.clear();
                bars = 0;
            }
        } else {
            if (toks[i] >= vocab.node_count) throw std::invalid_argument("malformed edge");
            cur.push_back(toks[i]);
        }
    }
    if (!cur.empty() || bars != 0) throw std::invalid_argument("malformed edge");
    if (edges.empty()) throw std::invalid_argument("no edges found");
    if (marker_count > 2) throw std::invalid_argument("too many edge markers");

    // rebuild the graph: start = edge head that never appears as a tail
    std::unordered_map<int, int> next;  // u -> v along each edge
    std::unordered_set<int> tails;
    for (auto [u, v] : edges) {
        if (!next.emplace(u, v).second && u != s_node)
            throw std::invalid_argument("node repeats as edge head");
        tails.insert(v);
    }
    PathStarGraph g;
    g.vocab_size = vocab.node_count;
    g.start = s_node;
    if (tails.count(s_node)) throw std::invalid_argument("start node appears as an edge tail");
    std::vector<int> leading;
    for (auto [u, v] : edges)
        if (u == s_node) leading.push_back(v);
    if (leading.size() < 2) throw std::invalid_argument("fewer than two arms");
    for (int l : leading) {
        std::vector<int> arm{l};
        int c = l;
        while (true) {
            auto it = next.find(c);
            if (it == next.end()) break;
            c = it->second;
            arm.push_back(c);
        }
        g.arms.push_back(std::move(arm));
    }
    const std::size_t per_arm = g.arms.front().size();
    std::size_t total = 1;
    for (const auto& a : g.arms) {
        if (a.size() != per_arm) throw std::invalid_argument("arms have unequal length");
        total += a.size();
    }
    if (total != edges.size() + 1) throw std::invalid_argument("edges do not form a path-star graph");

    TaskInstance inst = make_instance(g, t_node);

    // target region and variant
    std::size_t tgt_lo = q_at_start ? g_hi : q_open_pos + 4;
    std::vector<int> tgt(toks.begin() + static_cast<std::ptrdiff_t>(tgt_lo),
                         toks.begin() + static_cast<std::ptrdiff_t>(hi));
    TokenizationOptions opt;
    opt.q_position = q_at_start ? QPosition::Start : QPosition::End;
    opt.edge_marker_count = marker_count;
    opt.include_bos_eos = has_bos;
    opt.perm_mode = PermMode::EdgeWise;  // the order itself carries the permutation
    if (tgt.size() == 1) opt.target_variant = TargetVariant::LeadingOnly;
    else if (!tgt.empty() && tgt.front() == s_node) opt.target_variant = TargetVariant::FullForward;
    else opt.target_variant = TargetVariant::Reversed;
    if (tgt != detail::target_tokens(inst, opt.target_variant))
        throw std::invalid_argument("target region does not match the graph");

    TokenizedSample s;
    s.tokens = std::move(toks);
    s.prefix_len = static_cast<int>(tgt_lo);
    s.target_len = static_cast<int>(tgt.size());
    s.instance = std::move(inst);
    s.options = opt;
    return s;
}

// The original sample plus S more over the same graph with pairwise-distinct
// alternative targets (uniform over the other final nodes). Each sample gets
// a fresh edge permutation.
inline std::vector<TokenizedSample> structured_expand(const TaskInstance& inst, int S,
                                                      const TokenizationOptions& opt, Rng& rng) {
    const int D = inst.graph.arm_count();
    if (S < 1 || S > D - 1) throw std::invalid_argument("S must be in [1, D-1]");
    std::vector<int> others;
    for (int d = 0; d < D; ++d)
        if (d != inst.target_arm_index) others.push_back(d);
    rng.shuffle(others);
    std::vector<TokenizedSample> out;
    out.push_back(tokenize(inst, opt, rng));
    for (int i = 0; i < S; ++i) {
        TaskInstance alt = make_instance(inst.graph,
                                         inst.graph.arms[static_cast<std::size_t>(others[static_cast<std::size_t>(i)])].back());
        out.push_back(tokenize(alt, opt, rng));
    }
    return out;
}

// Redraw the G serialization order of each sample; Q and target are untouched.
inline void epoch_reshuffle(std::vector<TokenizedSample>& samples, Rng& rng) {
    for (auto& s : samples)
        s = tokenize_with_order(s.instance, s.options,
                                draw_edge_order(s.instance.graph, s.options.perm_mode, rng));
}

// ---- file format helpers (shared by the CLI and tests) ----

inline const char* to_string(PermMode m) {
    switch (m) {
        case PermMode::EdgeWise: return "edge";
        case PermMode::ArmWise: return "arm";
        case PermMode::None: return "none";
    }
    return "?";
}
inline const char* to_string(QPosition q) { return q == QPosition::Start ? "start" : "end"; }
inline const char* to_string(TargetVariant v) {
    switch (v) {
        case TargetVariant::FullForward: return "forward";
        case TargetVariant::Reversed: return "reversed";
        case TargetVariant::LeadingOnly: return "leading";
    }
    return "?";
}

struct DatasetHeader {
    int D = 0, M = 0, vocab_size = 0, structured = 0;
    std::uint64_t seed = 0;
    TokenizationOptions options;

    std::string line() const {
        std::ostringstream out;
        out << "# D=" << D << " M=" << M << " V=" << vocab_size
            << " perm=" << to_string(options.perm_mode)
            << " qpos=" << to_string(options.q_position)
            << " target=" << to_string(options.target_variant)
            << " markers=" << options.edge_marker_count
            << " S=" << structured << " seed=" << seed;
        return out.str();
    }

    static DatasetHeader parse(const std::string& text) {
        if (text.empty() || text[0] != '#') throw std::invalid_argument("missing dataset header");
        DatasetHeader h;
        std::istringstream in(text.substr(1));
        std::string kv;
        while (in >> kv) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
            if (k == "D") h.D = std::stoi(v);
            else if (k == "M") h.M = std::stoi(v);
            else if (k == "V") h.vocab_size = std::stoi(v);
            else if (k == "markers") h.options.edge_marker_count = std::stoi(v);
            else if (k == "S") h.structured = std::stoi(v);
            else if (k == "seed") h.seed = std::stoull(v);
            else if (k == "perm")
                h.options.perm_mode = v == "edge" ? PermMode::EdgeWise
                                    : v == "arm" ? PermMode::ArmWise : PermMode::None;
            else if (k == "qpos")
                h.options.q_position = v == "start" ? QPosition::Start : QPosition::End;
            else if (k == "target")
                h.options.target_variant = v == "forward" ? TargetVariant::FullForward
                                         : v == "reversed" ? TargetVariant::Reversed
                                         : TargetVariant::LeadingOnly;
        }
        if (h.D == 0 || h.M == 0 || h.vocab_size == 0)
            throw std::invalid_argument("dataset header missing D/M/V");
        return h;
    }
};

}  // namespace pathstar

// graph.hpp — path-star graphs, uniform sampling, and the brute-force
// oracle (BFS distances, arm reconstruction, exact instance counting).
//
// A path-star graph is one start node with D disjoint arms of M-1 nodes
// each (M counts the start). Node ids are 0-based indices into [0, |V|).
#pragma once

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "pathstar/rng.hpp"

namespace pathstar {

using BigInt = boost::multiprecision::cpp_int;

struct PathStarGraph {
    int start = 0;
    std::vector<std::vector<int>> arms;  // arms[d][0] = leading node, arms[d].back() = final node
    int vocab_size = 0;

    int arm_count() const { return static_cast<int>(arms.size()); }          // D
    int arm_len() const { return static_cast<int>(arms[0].size()) + 1; }     // M
    int node_count() const { return arm_count() * (arm_len() - 1) + 1; }

    std::vector<int> final_nodes() const {
        std::vector<int> f;
        for (const auto& a : arms) f.push_back(a.back());
        return f;
    }
    std::vector<int> leading_nodes() const {
        std::vector<int> l;
        for (const auto& a : arms) l.push_back(a.front());
        return l;
    }

    bool contains(int v) const {
        if (v == start) return true;
        for (const auto& a : arms)
            if (std::find(a.begin(), a.end(), v) != a.end()) return true;
        return false;
    }

    // Edges ordered arm-major, each arm near-to-far from the start.
    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> es;
        for (const auto& arm : arms) {
            int prev = start;
            for (int v : arm) {
                es.emplace_back(prev, v);
                prev = v;
            }
        }
        return es;
    }
};

struct TaskInstance {
    PathStarGraph graph;
    int target = 0;           // final node named by Q
    int target_arm_index = 0;

    int leading() const { return graph.arms[static_cast<std::size_t>(target_arm_index)].front(); }

    // R_t: start followed by the target arm, length M.
    std::vector<int> target_path() const {
        std::vector<int> r{graph.start};
        const auto& arm = graph.arms[static_cast<std::size_t>(target_arm_index)];
        r.insert(r.end(), arm.begin(), arm.end());
        return r;
    }
};

inline void check_dims(int vocab_size, int D, int M) {
    if (D < 2) throw std::invalid_argument("D must be >= 2");
    if (M < 2) throw std::invalid_argument("M must be >= 2");
    if (vocab_size < D * (M - 1) + 1)
        throw std::invalid_argument("vocab_size too small for (D, M): need at least " +
                                    std::to_string(D * (M - 1) + 1));
}

// Uniform sample: Fisher-Yates over [0, vocab_size), first D(M-1)+1 ids
// assigned in order (start, arm 0 positions, arm 1 positions, ...).
inline PathStarGraph sample_graph(int vocab_size, int D, int M, Rng& rng) {
    check_dims(vocab_size, D, M);
    const int need = D * (M - 1) + 1;
    std::vector<int> ids = rng.sample_ids(vocab_size, need);
    PathStarGraph g;
    g.vocab_size = vocab_size;
    g.start = ids[0];
    g.arms.resize(static_cast<std::size_t>(D));
    std::size_t k = 1;
    for (auto& arm : g.arms) {
        arm.assign(ids.begin() + static_cast<std::ptrdiff_t>(k),
                   ids.begin() + static_cast<std::ptrdiff_t>(k + static_cast<std::size_t>(M - 1)));
        k += static_cast<std::size_t>(M - 1);
    }
    return g;
}

inline TaskInstance make_instance(const PathStarGraph& g, int target) {
    for (int d = 0; d < g.arm_count(); ++d)
        if (g.arms[static_cast<std::size_t>(d)].back() == target)
            return TaskInstance{g, target, d};
    throw std::invalid_argument("target is not a final node");
}

// Target drawn uniformly over the final nodes.
inline TaskInstance sample_target(const PathStarGraph& g, Rng& rng) {
    int d = static_cast<int>(rng.below(static_cast<std::uint64_t>(g.arm_count())));
    return TaskInstance{g, g.arms[static_cast<std::size_t>(d)].back(), d};
}

namespace detail {
inline std::unordered_map<int, std::vector<int>> adjacency(const PathStarGraph& g) {
    std::unordered_map<int, std::vector<int>> adj;
    for (auto [u, v] : g.edges()) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    return adj;
}
}  // namespace detail

// Shortest-path hop count over the undirected edge set (BFS).
inline int graph_distance(const PathStarGraph& g, int u, int v) {
    if (!g.contains(u) || !g.contains(v)) throw std::invalid_argument("node not in graph");
    if (u == v) return 0;
    auto adj = detail::adjacency(g);
    std::unordered_map<int, int> dist{{u, 0}};
    std::deque<int> queue{u};
    while (!queue.empty()) {
        int x = queue.front();
        queue.pop_front();
        for (int y : adj[x]) {
            if (dist.count(y)) continue;
            dist[y] = dist[x] + 1;
            if (y == v) return dist[y];
            queue.push_back(y);
        }
    }
    throw std::logic_error("disconnected path-star graph");
}

// R_t from its set definition: the nodes at least as close to t as to any
// other final node, sorted by distance from the start. Independent of the
// arms array layout; used to cross-check it.
inline std::vector<int> target_arm_oracle(const PathStarGraph& g, int t) {
    const auto finals = g.final_nodes();
    if (std::find(finals.begin(), finals.end(), t) == finals.end())
        throw std::invalid_argument("t is not a final node");
    std::vector<int> nodes{g.start};
    for (const auto& a : g.arms) nodes.insert(nodes.end(), a.begin(), a.end());
    std::vector<std::pair<int, int>> members;  // (dist from start, node)
    for (int r : nodes) {
        bool in = true;
        int dt = graph_distance(g, r, t);
        for (int f : finals)
            if (graph_distance(g, r, f) < dt) { in = false; break; }
        if (in) members.emplace_back(graph_distance(g, g.start, r), r);
    }
    std::sort(members.begin(), members.end());
    std::vector<int> out;
    for (auto& [d, r] : members) out.push_back(r);
    return out;
}

// Z = |V|! / (|V| - D(M-1) - 1)! * D, exact.
inline BigInt count_instances(int vocab_size, int D, int M) {
    check_dims(vocab_size, D, M);
    const int slots = D * (M - 1) + 1;
    BigInt z = 1;
    for (int k = 0; k < slots; ++k) z *= vocab_size - k;
    return z * D;
}

}  // namespace pathstar

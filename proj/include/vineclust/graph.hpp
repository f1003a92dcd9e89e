#pragma once

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vineclust/core.hpp"

namespace vineclust {

/// Simple undirected graph on nodes 1..n, no self-loops, no multi-edges.
class UndirectedGraph {
  public:
    UndirectedGraph() = default;
    explicit UndirectedGraph(int n) : adj_(static_cast<std::size_t>(n) + 1) {
        if (n < 1) throw data_error("graph: need at least one node");
    }

    int num_nodes() const { return static_cast<int>(adj_.size()) - 1; }

    void add_edge(int i, int j) {
        check_node(i);
        check_node(j);
        if (i == j) throw data_error("graph: self-loops not allowed");
        if (has_edge(i, j)) return;
        adj_[i].insert(j);
        adj_[j].insert(i);
    }

    bool has_edge(int i, int j) const {
        check_node(i);
        check_node(j);
        return adj_[i].count(j) > 0;
    }

    const std::set<int>& neighbors(int i) const {
        check_node(i);
        return adj_[i];
    }

    std::size_t num_edges() const {
        std::size_t s = 0;
        for (const auto& a : adj_) s += a.size();
        return s / 2;
    }

    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        for (int i = 1; i <= num_nodes(); ++i)
            for (int j : adj_[i])
                if (i < j) out.emplace_back(i, j);
        return out;
    }

    IMat adjacency_matrix() const {
        const int n = num_nodes();
        IMat a = IMat::Zero(n, n);
        for (const auto& [i, j] : edges()) a(i - 1, j - 1) = a(j - 1, i - 1) = 1;
        return a;
    }

    /// Parses "i j" lines (1-based ids, optional trailing weight ignored).
    static UndirectedGraph from_edge_list(const std::string& text, int n) {
        UndirectedGraph g(n);
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            int i, j;
            if (!(ls >> i >> j)) throw data_error("edge list: bad line: " + line);
            g.add_edge(i, j);
        }
        return g;
    }

    std::string to_edge_list() const {
        std::ostringstream out;
        for (const auto& [i, j] : edges()) out << i << ' ' << j << '\n';
        return out.str();
    }

  private:
    void check_node(int i) const {
        if (i < 1 || i > num_nodes())
            throw data_error("graph: node " + std::to_string(i) + " out of range");
    }

    std::vector<std::set<int>> adj_;
};

/// Connected components, ordered by size descending then smallest member
/// ascending; members sorted ascending.
inline std::vector<std::vector<int>> connected_components(const UndirectedGraph& g) {
    const int n = g.num_nodes();
    std::vector<int> comp(static_cast<std::size_t>(n) + 1, 0);
    std::vector<std::vector<int>> parts;
    for (int s = 1; s <= n; ++s) {
        if (comp[s]) continue;
        std::vector<int> members;
        std::deque<int> q{s};
        comp[s] = 1;
        while (!q.empty()) {
            const int v = q.front();
            q.pop_front();
            members.push_back(v);
            for (int w : g.neighbors(v))
                if (!comp[w]) {
                    comp[w] = 1;
                    q.push_back(w);
                }
        }
        std::sort(members.begin(), members.end());
        parts.push_back(std::move(members));
    }
    std::sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a.front() < b.front();
    });
    return parts;
}

struct WeightedEdge {
    int a;
    int b;
    double weight;
};

/// Maximum spanning tree over the given node set (Kruskal). Ties broken by
/// the lexicographically smallest sorted node pair. Throws when the edges do
/// not connect all nodes, naming the unreachable ones.
inline std::vector<WeightedEdge> max_spanning_tree(const std::vector<int>& nodes,
                                                   std::vector<WeightedEdge> edges) {
    if (nodes.empty()) throw data_error("max_spanning_tree: empty node set");
    for (auto& e : edges)
        if (e.a > e.b) std::swap(e.a, e.b);
    std::sort(edges.begin(), edges.end(), [](const WeightedEdge& x, const WeightedEdge& y) {
        if (x.weight != y.weight) return x.weight > y.weight;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });

    std::vector<int> sorted_nodes(nodes);
    std::sort(sorted_nodes.begin(), sorted_nodes.end());
    auto rank_of = [&](int v) {
        const auto it = std::lower_bound(sorted_nodes.begin(), sorted_nodes.end(), v);
        if (it == sorted_nodes.end() || *it != v)
            throw data_error("max_spanning_tree: edge endpoint outside node set");
        return static_cast<int>(it - sorted_nodes.begin());
    };

    std::vector<int> parent(sorted_nodes.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    std::vector<WeightedEdge> tree;
    for (const auto& e : edges) {
        const int ra = find(rank_of(e.a)), rb = find(rank_of(e.b));
        if (ra == rb) continue;
        parent[ra] = rb;
        tree.push_back(e);
        if (tree.size() + 1 == sorted_nodes.size()) break;
    }
    if (tree.size() + 1 != sorted_nodes.size()) {
        const int root = find(0);
        std::ostringstream msg;
        msg << "max_spanning_tree: graph disconnected; unreachable nodes:";
        for (std::size_t k = 0; k < sorted_nodes.size(); ++k)
            if (find(static_cast<int>(k)) != root) msg << ' ' << sorted_nodes[k];
        throw data_error(msg.str());
    }
    return tree;
}

/// True when every path from j to l passes through d_set (i.e. removing
/// d_set disconnects them). j and l must be distinct and outside d_set.
inline bool separates(const UndirectedGraph& g, int j, int l, const std::vector<int>& d_set) {
    if (j == l) throw data_error("separates: endpoints must differ");
    std::set<int> blocked(d_set.begin(), d_set.end());
    if (blocked.count(j) || blocked.count(l))
        throw data_error("separates: endpoints must lie outside the separator");
    std::vector<char> seen(static_cast<std::size_t>(g.num_nodes()) + 1, 0);
    std::deque<int> q{j};
    seen[j] = 1;
    while (!q.empty()) {
        const int v = q.front();
        q.pop_front();
        if (v == l) return false;
        for (int w : g.neighbors(v)) {
            if (seen[w] || blocked.count(w)) continue;
            seen[w] = 1;
            q.push_back(w);
        }
    }
    return true;
}

}  // namespace vineclust

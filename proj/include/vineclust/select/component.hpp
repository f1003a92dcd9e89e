#pragma once

// Vine structure selection on a variable set: the Dissmann baseline and the
// graph-guided variant. Both walk the trees bottom-up, carrying each chosen
// edge's h-function outputs as pseudo-observations for the next level. The
// guided variant forces independence on pairs outside the screening graph
// (tree 1) and on pairs separated by their conditioning set (higher trees),
// so only the remaining candidates are estimated.

#include <algorithm>
#include <chrono>
#include <exception>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vineclust/bicop/fit.hpp"
#include "vineclust/core.hpp"
#include "vineclust/graph.hpp"
#include "vineclust/rvine/matrix.hpp"
#include "vineclust/rvine/model.hpp"
#include "vineclust/stats.hpp"

namespace vineclust {

/// Counters for the selection work. Open trees are those with more
/// proximity candidates than edges to choose; every candidate there is
/// either estimated (fitted) or set to independence upfront (forced).
/// Trees whose candidate set already is the spanning tree leave no choice;
/// their estimations are tallied separately as structural.
struct FitTrace {
    long long fitted = 0;
    long long forced = 0;
    long long structural = 0;
    double seconds = 0.0;

    void merge(const FitTrace& o) {
        fitted += o.fitted;
        forced += o.forced;
        structural += o.structural;
        seconds += o.seconds;
    }
};

struct SelectionConfig {
    int d_max = 50;       // largest component size accepted from the solution path
    int fill_level = -1;  // trees estimated between components; -1 = ceil(log d)
    std::vector<BicopFamily> families = {BicopFamily::gaussian, BicopFamily::student,
                                         BicopFamily::clayton,  BicopFamily::gumbel,
                                         BicopFamily::frank,    BicopFamily::joe};
    std::vector<BicopFamily> fill_families;  // empty: families, one-parametric when d > 500
    FitMetric metric = FitMetric::aic;
    std::optional<double> indep_alpha;
    int truncation = 0;  // 0 = none
    int n_lambda = 30;
    std::vector<double> lambda_override;
    int threads = 1;
};

/// A fitted sub-vine. The model is labeled 1..nu in the order of vars, so
/// local label k stands for global variable vars[k-1].
struct SelectedComponent {
    RVineModel model;
    std::vector<int> vars;  // sorted global labels
    FitTrace trace;
};

namespace detail {

// a chosen edge of the previous tree, acting as a node of the current one
struct LevelNode {
    VineEdge edge;
    int end1 = 0, end2 = 0;  // ids of the edge's endpoints one level down
    Vec h_a;                 // F(a | cond + b)
    Vec h_b;                 // F(b | cond + a)

    const Vec& pseudo(int var) const {
        if (var == edge.a) return h_a;
        if (var == edge.b) return h_b;
        throw numeric_error("pseudo-observations for variable " + std::to_string(var) +
                            " are not carried by this edge");
    }
};

struct EdgeCandidate {
    int n1 = 0, n2 = 0;  // node indices in the current level
    int x = 0, y = 0;    // conditioned pair: x from n1, y from n2
    std::vector<int> cond;
    double weight = 0.0;
    std::optional<FitResult> fit;
    std::exception_ptr error;
};

// pairs of previous-tree edges sharing an endpoint, in index order
inline std::vector<EdgeCandidate> proximity_candidates(const std::vector<LevelNode>& nodes) {
    std::vector<EdgeCandidate> out;
    const int m = static_cast<int>(nodes.size());
    for (int i = 0; i < m; ++i) {
        const auto ci = nodes[i].edge.constraint();
        for (int j = i + 1; j < m; ++j) {
            const auto& a = nodes[i];
            const auto& b = nodes[j];
            if (a.end1 != b.end1 && a.end1 != b.end2 && a.end2 != b.end1 && a.end2 != b.end2)
                continue;
            const auto cj = nodes[j].edge.constraint();
            EdgeCandidate c;
            c.n1 = i;
            c.n2 = j;
            std::set_intersection(ci.begin(), ci.end(), cj.begin(), cj.end(),
                                  std::back_inserter(c.cond));
            for (int v : ci)
                if (!std::binary_search(cj.begin(), cj.end(), v)) c.x = v;
            for (int v : cj)
                if (!std::binary_search(ci.begin(), ci.end(), v)) c.y = v;
            if (c.x == 0 || c.y == 0)
                throw numeric_error("joinable edges with identical constraint sets");
            out.push_back(std::move(c));
        }
    }
    return out;
}

inline void fit_candidates(std::vector<EdgeCandidate>& cands, const std::vector<LevelNode>& nodes,
                           const std::vector<const Vec*>& tree1_cols,
                           const SelectionConfig& cfg) {
    parallel_for(
        cands.size(),
        [&](std::size_t k) {
            EdgeCandidate& c = cands[k];
            if (c.fit || c.error) return;  // pre-forced candidates carry a fit already
            try {
                const Vec& ux = tree1_cols.empty() ? nodes[c.n1].pseudo(c.x) : *tree1_cols[c.n1];
                const Vec& uy = tree1_cols.empty() ? nodes[c.n2].pseudo(c.y) : *tree1_cols[c.n2];
                const Vec& ua = (c.x < c.y) ? ux : uy;
                const Vec& ub = (c.x < c.y) ? uy : ux;
                c.fit = select_pair_copula(ua, ub, cfg.families, cfg.metric, cfg.indep_alpha);
                c.weight = c.fit->mu;
            } catch (...) {
                c.error = std::current_exception();
            }
        },
        cfg.threads);
    for (const auto& c : cands)
        if (c.error) std::rethrow_exception(c.error);
}

// deterministic edge pick: maximum spanning tree over candidate indices
inline std::vector<int> choose_tree(const std::vector<EdgeCandidate>& cands, int n_nodes) {
    std::vector<int> nodes(n_nodes);
    std::iota(nodes.begin(), nodes.end(), 0);
    std::map<std::pair<int, int>, int> index;
    std::vector<WeightedEdge> edges;
    edges.reserve(cands.size());
    for (int k = 0; k < static_cast<int>(cands.size()); ++k) {
        index[{cands[k].n1, cands[k].n2}] = k;
        edges.push_back({cands[k].n1, cands[k].n2, cands[k].weight});
    }
    std::vector<int> chosen;
    for (const auto& e : max_spanning_tree(nodes, edges)) chosen.push_back(index.at({e.a, e.b}));
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

inline LevelNode make_level_node(const EdgeCandidate& c, const PairCopula& pc,
                                 const std::vector<LevelNode>& nodes,
                                 const std::vector<const Vec*>& tree1_cols) {
    const Vec& ux = tree1_cols.empty() ? nodes[c.n1].pseudo(c.x) : *tree1_cols[c.n1];
    const Vec& uy = tree1_cols.empty() ? nodes[c.n2].pseudo(c.y) : *tree1_cols[c.n2];
    LevelNode nn;
    nn.edge = VineEdge(c.x, c.y, c.cond);
    nn.end1 = c.n1;
    nn.end2 = c.n2;
    const Vec& ua = (c.x < c.y) ? ux : uy;
    const Vec& ub = (c.x < c.y) ? uy : ux;
    nn.h_a = pc.hfunc1(ua, ub);
    nn.h_b = pc.hfunc2(ua, ub);
    return nn;
}

struct StopWatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

}  // namespace detail

struct SelectedVine {
    RVineModel model;
    FitTrace trace;
};

namespace detail {

inline RVineModel assemble_model(const std::vector<int>& vars, const TreeSequence& trees,
                                 const std::map<VineEdge, PairCopula>& copulas, int truncation) {
    const IMat m = matrix_from_trees(vars, trees);
    RVineModel model(m, truncation);
    const int d = static_cast<int>(vars.size());
    for (int j = 0; j < d - 1; ++j) {
        for (int i = j + 1; i < d; ++i) {
            const VineEdge e = cell_edge(m, i, j);
            const auto it = copulas.find(e);
            if (it == copulas.end())
                throw numeric_error("no copula recorded for a selected edge");
            const bool diag_first = m(j, j) == it->first.a;
            model.set_pair(i, j, diag_first ? it->second : swap_arguments(it->second));
        }
    }
    return model;
}

}  // namespace detail

/// Classical greedy selection: per tree, a maximum spanning tree under
/// absolute empirical Kendall tau, then one copula estimation per chosen
/// edge. Estimates exactly d(d-1)/2 copulas without truncation.
inline SelectedVine dissmann_select(const Mat& u_in, const SelectionConfig& cfg = {}) {
    const int d = static_cast<int>(u_in.cols());
    if (d < 2) throw data_error("dissmann_select: need at least 2 variables");
    if (u_in.rows() < 2) throw data_error("dissmann_select: need at least 2 observations");
    const detail::StopWatch clock;

    Mat u = u_in;
    for (Eigen::Index r = 0; r < u.rows(); ++r)
        for (int c = 0; c < d; ++c) u(r, c) = clamp_unit(u(r, c));

    const int trunc = (cfg.truncation >= 1 && cfg.truncation <= d - 1) ? cfg.truncation : d - 1;
    FitTrace trace;
    TreeSequence trees;
    std::map<VineEdge, PairCopula> copulas;

    std::vector<Vec> cols(d);
    for (int v = 0; v < d; ++v) cols[v] = u.col(v);

    std::vector<detail::LevelNode> nodes;
    for (int t = 1; t <= d - 1; ++t) {
        std::vector<detail::EdgeCandidate> cands;
        std::vector<const Vec*> tree1_cols;
        if (t == 1) {
            for (int a = 1; a <= d; ++a)
                for (int b = a + 1; b <= d; ++b) {
                    detail::EdgeCandidate c;
                    c.n1 = a - 1;
                    c.n2 = b - 1;
                    c.x = a;
                    c.y = b;
                    cands.push_back(std::move(c));
                }
            tree1_cols.resize(d);
            for (int v = 0; v < d; ++v) tree1_cols[v] = &cols[v];
        } else {
            cands = detail::proximity_candidates(nodes);
        }

        const int n_nodes = t == 1 ? d : static_cast<int>(nodes.size());
        for (auto& c : cands) {
            const Vec& ux = t == 1 ? *tree1_cols[c.n1] : nodes[c.n1].pseudo(c.x);
            const Vec& uy = t == 1 ? *tree1_cols[c.n2] : nodes[c.n2].pseudo(c.y);
            c.weight = std::abs(kendall_tau(ux, uy));
        }
        const std::vector<int> chosen = detail::choose_tree(cands, n_nodes);

        std::vector<detail::LevelNode> next;
        std::vector<VineEdge> tree_edges;
        if (t <= trunc) {
            std::vector<detail::EdgeCandidate> picked;
            picked.reserve(chosen.size());
            for (int k : chosen) picked.push_back(cands[k]);
            detail::fit_candidates(picked, nodes, tree1_cols, cfg);
            trace.fitted += static_cast<long long>(picked.size());
            for (const auto& c : picked) {
                next.push_back(detail::make_level_node(c, c.fit->copula, nodes, tree1_cols));
                tree_edges.push_back(next.back().edge);
                copulas[next.back().edge] = c.fit->copula;
            }
        } else {
            for (int k : chosen) {
                const auto& c = cands[k];
                next.push_back(detail::make_level_node(c, PairCopula::independence(), nodes,
                                                       tree1_cols));
                tree_edges.push_back(next.back().edge);
                copulas[next.back().edge] = PairCopula::independence();
            }
        }
        trees.push_back(std::move(tree_edges));
        nodes = std::move(next);
    }

    std::vector<int> vars(d);
    std::iota(vars.begin(), vars.end(), 1);
    SelectedVine out{detail::assemble_model(vars, trees, copulas, cfg.truncation), trace};
    out.trace.seconds = clock.seconds();
    return out;
}

/// Graph-guided selection on one connected component. vars holds 1-based
/// global variable labels; h is the screening graph on the same labels.
/// Tree 1 estimates only pairs joined in h; higher trees skip candidates
/// whose conditioning set separates them in h. Candidates on trees without a
/// structural choice are tallied apart and never enter the spanning-tree
/// weighting.
inline SelectedComponent select_component_rvine(const Mat& u_in, const std::vector<int>& vars_in,
                                                const UndirectedGraph& h,
                                                const SelectionConfig& cfg) {
    std::vector<int> vars = vars_in;
    std::sort(vars.begin(), vars.end());
    const int nu = static_cast<int>(vars.size());
    if (nu < 2) throw data_error("select_component_rvine: need at least 2 variables");
    if (std::adjacent_find(vars.begin(), vars.end()) != vars.end())
        throw data_error("select_component_rvine: duplicate variable label");
    if (vars.front() < 1 || vars.back() > static_cast<int>(u_in.cols()))
        throw data_error("select_component_rvine: variable label outside the data");
    if (vars.back() > h.num_nodes())
        throw data_error("select_component_rvine: graph does not cover the variable labels");
    const detail::StopWatch clock;

    // the component must be connected inside the screening graph
    {
        const std::set<int> want(vars.begin(), vars.end());
        std::set<int> seen{vars.front()};
        std::vector<int> stack{vars.front()};
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w : h.neighbors(v)) {
                if (!want.count(w) || seen.count(w)) continue;
                seen.insert(w);
                stack.push_back(w);
            }
        }
        if (static_cast<int>(seen.size()) != nu)
            throw data_error("select_component_rvine: variables are not connected in the graph");
    }

    const Eigen::Index n = u_in.rows();
    std::map<int, Vec> cols;
    for (int v : vars) {
        Vec c(n);
        for (Eigen::Index r = 0; r < n; ++r) c[r] = clamp_unit(u_in(r, v - 1));
        cols[v] = std::move(c);
    }

    const int trunc = (cfg.truncation >= 1 && cfg.truncation <= nu - 1) ? cfg.truncation : nu - 1;
    FitTrace trace;
    TreeSequence trees;
    std::map<VineEdge, PairCopula> copulas;

    std::vector<detail::LevelNode> nodes;
    for (int t = 1; t <= nu - 1; ++t) {
        std::vector<detail::EdgeCandidate> cands;
        std::vector<const Vec*> tree1_cols;
        int n_nodes;
        if (t == 1) {
            n_nodes = nu;
            tree1_cols.resize(nu);
            for (int k = 0; k < nu; ++k) tree1_cols[k] = &cols.at(vars[k]);
            for (int i = 0; i < nu; ++i)
                for (int j = i + 1; j < nu; ++j) {
                    detail::EdgeCandidate c;
                    c.n1 = i;
                    c.n2 = j;
                    c.x = vars[i];
                    c.y = vars[j];
                    cands.push_back(std::move(c));
                }
        } else {
            n_nodes = static_cast<int>(nodes.size());
            cands = detail::proximity_candidates(nodes);
        }

        const bool structural = static_cast<int>(cands.size()) == n_nodes - 1;
        long long forced_here = 0;
        if (t <= trunc) {
            for (auto& c : cands) {
                const bool independent =
                    t == 1 ? !h.has_edge(c.x, c.y) : separates(h, c.x, c.y, c.cond);
                if (independent) {
                    c.fit = FitResult{PairCopula::independence(), 0.0, 0, 0.0, true};
                    c.weight = 0.0;
                    ++forced_here;
                }
            }
            detail::fit_candidates(cands, nodes, tree1_cols, cfg);
            const long long estimated = static_cast<long long>(cands.size()) - forced_here;
            if (structural) {
                trace.structural += estimated;
            } else {
                trace.fitted += estimated;
                trace.forced += forced_here;
            }
        } else {
            for (auto& c : cands) {
                c.fit = FitResult{PairCopula::independence(), 0.0, 0, 0.0, true};
                c.weight = 0.0;
            }
        }

        std::vector<int> chosen;
        if (structural) {
            chosen.resize(cands.size());
            std::iota(chosen.begin(), chosen.end(), 0);
        } else {
            chosen = detail::choose_tree(cands, n_nodes);
        }

        std::vector<detail::LevelNode> next;
        std::vector<VineEdge> tree_edges;
        for (int k : chosen) {
            const auto& c = cands[k];
            next.push_back(detail::make_level_node(c, c.fit->copula, nodes, tree1_cols));
            tree_edges.push_back(next.back().edge);
            copulas[next.back().edge] = c.fit->copula;
        }
        trees.push_back(std::move(tree_edges));
        nodes = std::move(next);
    }

    // relabel to 1..nu for a self-contained sub-model; vars is ascending, so
    // the conditioned-pair ordering inside each edge is preserved
    const auto local = [&](int v) {
        return static_cast<int>(std::lower_bound(vars.begin(), vars.end(), v) - vars.begin()) + 1;
    };
    TreeSequence local_trees;
    std::map<VineEdge, PairCopula> local_copulas;
    for (const auto& level : trees) {
        std::vector<VineEdge> edges;
        for (const auto& e : level) {
            std::vector<int> cond(e.cond.size());
            std::transform(e.cond.begin(), e.cond.end(), cond.begin(), local);
            edges.emplace_back(local(e.a), local(e.b), std::move(cond));
            local_copulas[edges.back()] = copulas.at(e);
        }
        local_trees.push_back(std::move(edges));
    }
    std::vector<int> local_vars(nu);
    std::iota(local_vars.begin(), local_vars.end(), 1);
    SelectedComponent out{
        detail::assemble_model(local_vars, local_trees, local_copulas, cfg.truncation), vars,
        trace};
    out.trace.seconds = clock.seconds();
    return out;
}

}  // namespace vineclust

// Independent reference implementations used only by tests. Everything here
// is deliberately brute-force: pair enumeration, numeric integration of the
// density, exhaustive tree search. Values asserted in the suites were frozen
// from these oracles.
#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "vineclust/bicop/bicop.hpp"
#include "vineclust/core.hpp"
#include "vineclust/rvine/matrix.hpp"

namespace oracle {

using vineclust::Vec;

/// O(n^2) tie-corrected Kendall tau by direct pair enumeration.
inline double kendall_tau_naive(const Vec& x, const Vec& y) {
    const Eigen::Index n = x.size();
    long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j], dy = y[i] - y[j];
            if (dx == 0.0 && dy == 0.0) continue;
            if (dx == 0.0) {
                ++ties_x;
            } else if (dy == 0.0) {
                ++ties_y;
            } else if (dx * dy > 0.0) {
                ++concordant;
            } else {
                ++discordant;
            }
        }
    }
    const double n0 = 0.5 * static_cast<double>(n) * (n - 1);
    const double tx = n0 - (concordant + discordant + ties_y);
    const double ty = n0 - (concordant + discordant + ties_x);
    return (concordant - discordant) / std::sqrt((n0 - tx) * (n0 - ty));
}

/// Copula cdf by nested adaptive quadrature of the density.
inline double cdf_numeric(const vineclust::PairCopula& pc, double u, double v,
                          double tol = 1e-10) {
    namespace q = boost::math::quadrature;
    auto outer = [&](double s) {
        auto inner = [&](double t) { return pc.pdf(s, t); };
        return q::gauss_kronrod<double, 31>::integrate(inner, 0.0, v, 12, tol);
    };
    return q::gauss_kronrod<double, 31>::integrate(outer, 0.0, u, 12, tol);
}

/// dC/dv by central finite difference on the numeric cdf.
inline double h1_numeric(const vineclust::PairCopula& pc, double u, double v,
                         double eps = 1e-4, double tol = 1e-10) {
    return (cdf_numeric(pc, u, v + eps, tol) - cdf_numeric(pc, u, v - eps, tol)) /
           (2.0 * eps);
}

/// Population Kendall tau from the density alone, via
/// tau = 1 - 4 int int dC/du * dC/dv du dv where each partial derivative is a
/// one-dimensional integral of the density.
inline double tau_functional(const vineclust::PairCopula& pc, double tol = 1e-7) {
    namespace q = boost::math::quadrature;
    auto du = [&](double u, double v) {
        auto f = [&](double y) { return pc.pdf(u, y); };
        return q::gauss_kronrod<double, 15>::integrate(f, 0.0, v, 10, tol);
    };
    auto dv = [&](double u, double v) {
        auto f = [&](double x) { return pc.pdf(x, v); };
        return q::gauss_kronrod<double, 15>::integrate(f, 0.0, u, 10, tol);
    };
    auto outer = [&](double u) {
        auto inner = [&](double v) { return du(u, v) * dv(u, v); };
        return q::gauss_kronrod<double, 15>::integrate(inner, 0.0, 1.0, 9, 1e-6);
    };
    const double e = q::gauss_kronrod<double, 15>::integrate(outer, 0.0, 1.0, 9, 1e-6);
    return 1.0 - 4.0 * e;
}

/// Integral of the pair density over the unit square.
inline double density_mass(const vineclust::PairCopula& pc, double tol = 1e-7) {
    namespace q = boost::math::quadrature;
    auto outer = [&](double s) {
        auto inner = [&](double t) { return pc.pdf(s, t); };
        return q::gauss_kronrod<double, 31>::integrate(inner, 0.0, 1.0, 11, tol);
    };
    return q::gauss_kronrod<double, 31>::integrate(outer, 0.0, 1.0, 11, tol);
}

/// Weight of the best spanning tree by exhaustive enumeration of all
/// (n-1)-subsets of the edge list. Usable for tiny n only.
inline double best_tree_weight_exhaustive(int n_nodes,
                                          const std::vector<std::array<double, 3>>& edges) {
    const std::size_t m = edges.size();
    const std::size_t need = static_cast<std::size_t>(n_nodes) - 1;
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> pick(need);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start,
                                                            std::size_t depth) {
        if (depth == need) {
            std::vector<int> parent(n_nodes);
            std::iota(parent.begin(), parent.end(), 0);
            std::function<int(int)> find = [&](int x) {
                while (parent[x] != x) x = parent[x] = parent[parent[x]];
                return x;
            };
            double w = 0.0;
            int joins = 0;
            for (std::size_t k : pick) {
                const int a = static_cast<int>(edges[k][0]) - 1;
                const int b = static_cast<int>(edges[k][1]) - 1;
                const int ra = find(a), rb = find(b);
                if (ra != rb) {
                    parent[ra] = rb;
                    ++joins;
                }
                w += edges[k][2];
            }
            if (joins == n_nodes - 1 && w > best) best = w;
            return;
        }
        for (std::size_t e = start; e + (need - depth) <= m; ++e) {
            pick[depth] = e;
            rec(e + 1, depth + 1);
        }
    };
    rec(0, 0);
    return best;
}

/// Verifies the vine tree axioms directly on a tree sequence: tree 1 spans
/// the node set, every higher edge decomposes into exactly two edges of the
/// tree below with the right conditioned/conditioning split, and each level
/// is itself a tree over the level below.
inline bool valid_tree_sequence(const std::vector<int>& nodes,
                                const vineclust::TreeSequence& trees) {
    using vineclust::VineEdge;
    const int d = static_cast<int>(nodes.size());
    if (static_cast<int>(trees.size()) != d - 1) return false;
    if (d < 2) return d == 1;

    std::vector<int> parent(nodes.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto index_of = [&](int label) {
        const auto it = std::find(nodes.begin(), nodes.end(), label);
        return it == nodes.end() ? -1 : static_cast<int>(it - nodes.begin());
    };

    if (static_cast<int>(trees[0].size()) != d - 1) return false;
    for (const VineEdge& e : trees[0]) {
        if (!e.cond.empty()) return false;
        const int ia = index_of(e.a), ib = index_of(e.b);
        if (ia < 0 || ib < 0 || ia == ib) return false;
        const int ra = find(ia), rb = find(ib);
        if (ra == rb) return false;  // cycle
        parent[ra] = rb;
    }

    for (int t = 2; t <= d - 1; ++t) {
        const auto& level = trees[t - 1];
        const auto& prev = trees[t - 2];
        if (static_cast<int>(level.size()) != d - t) return false;

        std::vector<int> uf(prev.size());
        std::iota(uf.begin(), uf.end(), 0);
        std::function<int(int)> pfind = [&](int x) {
            while (uf[x] != x) x = uf[x] = uf[uf[x]];
            return x;
        };
        std::vector<std::vector<int>> constraints;
        for (const VineEdge& p : prev) constraints.push_back(p.constraint());

        for (const VineEdge& e : level) {
            const std::vector<int> s = e.constraint();
            std::vector<int> kids;
            for (std::size_t i = 0; i < prev.size(); ++i)
                if (std::includes(s.begin(), s.end(), constraints[i].begin(),
                                  constraints[i].end()))
                    kids.push_back(static_cast<int>(i));
            if (kids.size() != 2) return false;

            const auto& c1 = constraints[kids[0]];
            const auto& c2 = constraints[kids[1]];
            std::vector<int> inter, sym;
            std::set_intersection(c1.begin(), c1.end(), c2.begin(), c2.end(),
                                  std::back_inserter(inter));
            std::set_symmetric_difference(c1.begin(), c1.end(), c2.begin(), c2.end(),
                                          std::back_inserter(sym));
            if (inter != e.cond) return false;
            if (sym != std::vector<int>{e.a, e.b}) return false;

            const int r1 = pfind(kids[0]), r2 = pfind(kids[1]);
            if (r1 == r2) return false;
            uf[r1] = r2;
        }
    }
    return true;
}

inline Vec make_vec(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index k = 0;
    for (double x : xs) v[k++] = x;
    return v;
}

/// Deterministic uniforms in (0,1).
inline Vec runif(std::size_t n, unsigned long seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec out(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) out[static_cast<Eigen::Index>(i)] =
        vineclust::clamp_unit(u(rng));
    return out;
}

/// Samples (U, V) from a pair copula by conditional inversion, exercising
/// hinv1: V ~ U(0,1), U = hinv1(W, V).
inline std::pair<Vec, Vec> sample_pair(const vineclust::PairCopula& pc, std::size_t n,
                                       unsigned long seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec u(static_cast<Eigen::Index>(n)), v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double vv = vineclust::clamp_unit(unif(rng));
        const double w = vineclust::clamp_unit(unif(rng));
        v[static_cast<Eigen::Index>(i)] = vv;
        u[static_cast<Eigen::Index>(i)] = pc.hinv1(w, vv);
    }
    return {u, v};
}

}  // namespace oracle

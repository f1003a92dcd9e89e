#pragma once

// Lower-triangular R-vine matrices. The diagonal holds variable labels and
// cell (i,j), i > j, encodes the edge (M(j,j), M(i,j) | M(i+1,j)..M(d-1,j))
// in tree d - i. Labels are arbitrary distinct positive integers so the same
// machinery serves full models and sub-vines on variable subsets.

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "vineclust/core.hpp"

namespace vineclust {

struct VineEdge {
    int a = 0, b = 0;       // conditioned pair, a < b
    std::vector<int> cond;  // conditioning set, sorted

    VineEdge() = default;
    VineEdge(int x, int y, std::vector<int> d = {})
        : a(std::min(x, y)), b(std::max(x, y)), cond(std::move(d)) {
        std::sort(cond.begin(), cond.end());
    }

    std::vector<int> constraint() const {
        std::vector<int> s = cond;
        s.push_back(a);
        s.push_back(b);
        std::sort(s.begin(), s.end());
        return s;
    }

    friend bool operator==(const VineEdge& l, const VineEdge& r) {
        return l.a == r.a && l.b == r.b && l.cond == r.cond;
    }
    friend bool operator<(const VineEdge& l, const VineEdge& r) {
        if (l.a != r.a) return l.a < r.a;
        if (l.b != r.b) return l.b < r.b;
        return l.cond < r.cond;
    }
};

// trees[t-1] holds the edges of tree t
using TreeSequence = std::vector<std::vector<VineEdge>>;

struct MatrixCheck {
    bool ok = true;
    std::string violation;
};

// 1-based tree number encoded by row i of a d-dimensional matrix
inline int tree_of_row(int i, int d) { return d - i; }

inline VineEdge cell_edge(const IMat& M, int i, int j) {
    const int d = static_cast<int>(M.rows());
    if (j < 0 || i <= j || i >= d) throw data_error("cell_edge: not a below-diagonal cell");
    std::vector<int> cond;
    for (int r = i + 1; r < d; ++r) cond.push_back(M(r, j));
    return VineEdge(M(j, j), M(i, j), std::move(cond));
}

namespace detail {

inline std::string cell_name(int i, int j) {
    return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
}

}  // namespace detail

/// Checks the three matrix conditions: diagonal labels distinct, every column
/// drawn from the diagonal labels to its right without repetition, and the
/// proximity condition: the set at cell (i,j) together with the entries below
/// it matches diagonal + tail of some column k in (j, i].
inline MatrixCheck validate_rvine_matrix(const IMat& M) {
    const int d = static_cast<int>(M.rows());
    if (d == 0 || M.cols() != d) return {false, "matrix is not square"};

    for (int j = 0; j < d; ++j)
        for (int i = 0; i < j; ++i)
            if (M(i, j) != 0)
                return {false, "cell " + detail::cell_name(i, j) + " above the diagonal is nonzero"};

    std::set<int> diag;
    for (int j = 0; j < d; ++j) {
        if (M(j, j) <= 0)
            return {false, "diagonal entry " + detail::cell_name(j, j) + " is not positive"};
        if (!diag.insert(M(j, j)).second)
            return {false, "diagonal value " + std::to_string(M(j, j)) + " repeats"};
    }

    for (int j = 0; j < d - 1; ++j) {
        std::set<int> right;
        for (int k = j + 1; k < d; ++k) right.insert(M(k, k));
        std::set<int> seen;
        for (int i = j + 1; i < d; ++i) {
            const int v = M(i, j);
            if (!right.count(v))
                return {false, "cell " + detail::cell_name(i, j) + " value " + std::to_string(v) +
                                   " is not a diagonal value right of column " + std::to_string(j + 1)};
            if (!seen.insert(v).second)
                return {false, "column " + std::to_string(j + 1) + " repeats value " +
                                   std::to_string(v) + " at cell " + detail::cell_name(i, j)};
        }
    }

    // proximity: rows above the bottom one
    for (int j = 0; j < d - 2; ++j) {
        for (int i = j + 1; i < d - 1; ++i) {
            std::set<int> want;
            for (int r = i; r < d; ++r) want.insert(M(r, j));
            bool found = false;
            for (int k = j + 1; k <= i && !found; ++k) {
                std::set<int> have;
                have.insert(M(k, k));
                for (int r = i + 1; r < d; ++r) have.insert(M(r, k));
                found = (have == want);
            }
            if (!found)
                return {false, "cell " + detail::cell_name(i, j) +
                                   " violates the proximity condition: no column in (" +
                                   std::to_string(j + 1) + "," + std::to_string(i + 1) +
                                   "] matches its constraint set"};
        }
    }
    return {true, ""};
}

/// Decodes the matrix into its tree sequence; trees ordered 1..d-1, edges
/// within a tree ordered by source column.
inline TreeSequence matrix_trees(const IMat& M) {
    const int d = static_cast<int>(M.rows());
    TreeSequence trees(d >= 1 ? d - 1 : 0);
    for (int j = 0; j < d - 1; ++j)
        for (int i = j + 1; i < d; ++i)
            trees[tree_of_row(i, d) - 1].push_back(cell_edge(M, i, j));
    return trees;
}

/// Values placeable at empty cell (i,j) of a partially filled matrix (zeros
/// mark empty cells). Requires the rows below i and all diagonals to be
/// filled. Bottom row: any unused diagonal value to the right. Higher rows:
/// values whose resulting constraint set matches diagonal + tail of a column
/// k in (j, i]. Ordered by the source column, left to right.
inline std::vector<int> admissible_entries(const IMat& M, int i, int j) {
    const int d = static_cast<int>(M.rows());
    if (j < 0 || i <= j || i >= d) throw data_error("admissible_entries: not a below-diagonal cell");

    std::set<int> used;
    for (int r = j + 1; r < d; ++r)
        if (M(r, j) > 0) used.insert(M(r, j));

    std::vector<int> out;
    if (i == d - 1) {
        for (int k = j + 1; k < d; ++k)
            if (!used.count(M(k, k))) out.push_back(M(k, k));
        return out;
    }

    std::set<int> tail;
    for (int r = i + 1; r < d; ++r) {
        if (M(r, j) == 0) throw data_error("admissible_entries: column below the cell is not filled");
        tail.insert(M(r, j));
    }
    for (int k = j + 1; k <= i; ++k) {
        std::set<int> have;
        have.insert(M(k, k));
        for (int r = i + 1; r < d; ++r) {
            if (M(r, k) == 0) throw data_error("admissible_entries: column below the cell is not filled");
            have.insert(M(r, k));
        }
        if (have.size() != tail.size() + 1) continue;
        int extra = 0;
        bool subset = true;
        for (int v : have) {
            if (tail.count(v)) continue;
            if (extra != 0) {
                subset = false;
                break;
            }
            extra = v;
        }
        if (!subset || extra == 0) continue;
        if (used.count(extra)) continue;
        if (std::find(out.begin(), out.end(), extra) == out.end()) out.push_back(extra);
    }
    return out;
}

/// Builds a matrix from a tree sequence by repeatedly extracting the smaller
/// conditioned variable of the top edge: its partners down the trees form one
/// column, the walked edges are removed, and the reduced sequence recurses.
inline IMat matrix_from_trees(const std::vector<int>& nodes, const TreeSequence& trees) {
    const int d = static_cast<int>(nodes.size());
    if (d < 1) throw data_error("matrix_from_trees: empty node set");
    if (static_cast<int>(trees.size()) != d - 1)
        throw data_error("matrix_from_trees: expected " + std::to_string(d - 1) + " trees");
    for (int t = 1; t <= d - 1; ++t)
        if (static_cast<int>(trees[t - 1].size()) != d - t)
            throw data_error("matrix_from_trees: tree " + std::to_string(t) + " must have " +
                             std::to_string(d - t) + " edges");

    IMat M = IMat::Zero(d, d);
    if (d == 1) {
        M(0, 0) = nodes[0];
        return M;
    }

    TreeSequence seq = trees;
    int last = 0;
    for (int j = 0; j < d - 1; ++j) {
        const int nvars = d - j;
        auto& top = seq[nvars - 2];
        if (top.size() != 1)
            throw data_error("matrix_from_trees: reduced top tree is not a single edge");
        VineEdge e = top.front();
        top.clear();
        const int x = std::min(e.a, e.b);
        last = std::max(e.a, e.b);
        M(j, j) = x;
        M(j + 1, j) = last;

        std::vector<int> s = e.constraint();
        for (int t = nvars - 2; t >= 1; --t) {
            auto& level = seq[t - 1];
            auto it = std::find_if(level.begin(), level.end(), [&](const VineEdge& f) {
                if (f.a != x && f.b != x) return false;
                const auto c = f.constraint();
                return std::includes(s.begin(), s.end(), c.begin(), c.end());
            });
            if (it == level.end())
                throw data_error("matrix_from_trees: no edge of tree " + std::to_string(t) +
                                 " descends from the conditioned variable " + std::to_string(x));
            M(d - t, j) = (it->a == x) ? it->b : it->a;
            s = it->constraint();
            level.erase(it);
        }
    }
    M(d - 1, d - 1) = last;
    const MatrixCheck check = validate_rvine_matrix(M);
    if (!check.ok)
        throw data_error("matrix_from_trees: input is not a vine tree sequence: " + check.violation);
    return M;
}

}  // namespace vineclust

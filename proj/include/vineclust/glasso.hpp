#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "vineclust/core.hpp"
#include "vineclust/graph.hpp"
#include "vineclust/stats.hpp"

namespace vineclust {

/// Probit transform of copula data, clamped away from 0 and 1.
inline Mat to_z_scale(const Mat& u) {
    Mat z(u.rows(), u.cols());
    for (Eigen::Index j = 0; j < u.cols(); ++j)
        for (Eigen::Index i = 0; i < u.rows(); ++i)
            z(i, j) = norm_quantile(clamp_unit(u(i, j)));
    return z;
}

/// Column-centered covariance with 1/n normalization.
inline Mat sample_covariance(const Mat& x) {
    const Eigen::Index n = x.rows();
    if (n < 2) throw data_error("sample_covariance: need at least 2 rows");
    Mat c = x.rowwise() - x.colwise().mean();
    return c.transpose() * c / static_cast<double>(n);
}

inline Mat sample_correlation(const Mat& x) {
    Mat s = sample_covariance(x);
    Vec sd = s.diagonal().cwiseSqrt();
    for (Eigen::Index j = 0; j < sd.size(); ++j)
        if (!(sd(j) > 0.0))
            throw data_error("sample_correlation: column " + std::to_string(j + 1) +
                             " has zero variance");
    s.array() /= (sd * sd.transpose()).array();
    s.diagonal().setOnes();
    return s;
}

/// Screening graph: vertices i and j are adjacent iff |s_ij| >= lambda.
inline UndirectedGraph screening_graph(const Mat& s, double lambda) {
    const int d = static_cast<int>(s.rows());
    if (s.cols() != d) throw data_error("screening_graph: matrix must be square");
    UndirectedGraph g(d);
    for (int i = 1; i <= d; ++i)
        for (int j = i + 1; j <= d; ++j)
            if (std::abs(s(i - 1, j - 1)) >= lambda) g.add_edge(i, j);
    return g;
}

struct GlassoResult {
    Mat w;      // covariance estimate, diagonal s_ii + lambda
    Mat theta;  // sparse precision estimate
    int sweeps = 0;
};

namespace detail {

inline double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

/// Blockwise coordinate descent on one dense block. w and b are updated in
/// place; b holds the lasso coefficients of each column.
inline int glasso_block(const Mat& s, double lambda, Mat& w, Mat& b, double tol,
                        int max_sweeps) {
    const int m = static_cast<int>(s.rows());
    w = s;
    w.diagonal().array() += lambda;
    b = Mat::Zero(m, m);
    if (m == 1) return 0;

    const double inner_tol = 1e-12;
    const int max_inner = 10000;

    auto solve_column = [&](int j) {
        double moved = 0.0;
        for (int pass = 0; pass < max_inner; ++pass) {
            double step = 0.0;
            for (int k = 0; k < m; ++k) {
                if (k == j) continue;
                double r = s(k, j);
                for (int l = 0; l < m; ++l) {
                    if (l == j || l == k) continue;
                    r -= w(k, l) * b(l, j);
                }
                const double nb = soft_threshold(r, lambda) / w(k, k);
                step = std::max(step, std::abs(nb - b(k, j)));
                b(k, j) = nb;
            }
            moved = step;
            if (step < inner_tol) break;
        }
        return moved;
    };

    auto refresh_column = [&](int j) {
        double change = 0.0;
        for (int k = 0; k < m; ++k) {
            if (k == j) continue;
            double wk = 0.0;
            for (int l = 0; l < m; ++l) {
                if (l == j) continue;
                wk += w(k, l) * b(l, j);
            }
            change = std::max(change, std::abs(wk - w(k, j)));
            w(k, j) = wk;
            w(j, k) = wk;
        }
        return change;
    };

    double scale = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) scale += std::abs(s(i, j));
    scale = std::max(scale / (m * (m - 1) / 2.0), 1e-12);

    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double change = 0.0;
        for (int j = 0; j < m; ++j) {
            solve_column(j);
            change = std::max(change, refresh_column(j));
        }
        if (change < tol * scale) break;
    }
    // polish so the recovered precision matches the final w
    for (int j = 0; j < m; ++j) {
        solve_column(j);
        refresh_column(j);
    }
    return sweep + 1;
}

}  // namespace detail

/// Graphical lasso: minimizes -log det(T) + tr(ST) + lambda ||T||_1 over
/// precision matrices T, diagonal included in the penalty. Solved per
/// connected component of the screening graph; cross-component cells are
/// exactly zero. lambda = 0 reduces to direct inversion.
inline GlassoResult glasso_fit(const Mat& s, double lambda, double tol = 1e-9,
                               int max_sweeps = 2000) {
    const int d = static_cast<int>(s.rows());
    if (s.cols() != d) throw data_error("glasso_fit: matrix must be square");
    if (lambda < 0.0) throw data_error("glasso_fit: lambda must be nonnegative");

    GlassoResult out;
    out.w = Mat::Zero(d, d);
    out.theta = Mat::Zero(d, d);

    if (lambda == 0.0) {
        Eigen::LLT<Mat> llt(s);
        if (llt.info() != Eigen::Success)
            throw numeric_error("glasso_fit: covariance is not positive definite");
        out.w = s;
        out.theta = llt.solve(Mat::Identity(d, d));
        return out;
    }

    const auto components = connected_components(screening_graph(s, lambda));
    for (const auto& comp : components) {
        const int m = static_cast<int>(comp.size());
        Mat sc(m, m);
        for (int a = 0; a < m; ++a)
            for (int c = 0; c < m; ++c) sc(a, c) = s(comp[a] - 1, comp[c] - 1);

        Mat w, b;
        out.sweeps = std::max(out.sweeps, detail::glasso_block(sc, lambda, w, b, tol, max_sweeps));

        Mat theta = Mat::Zero(m, m);
        for (int j = 0; j < m; ++j) {
            double quad = 0.0;
            for (int k = 0; k < m; ++k)
                if (k != j) quad += w(k, j) * b(k, j);
            const double tjj = 1.0 / (w(j, j) - quad);
            if (!(tjj > 0.0)) throw numeric_error("glasso_fit: block is not positive definite");
            theta(j, j) = tjj;
            for (int k = 0; k < m; ++k)
                if (k != j) theta(k, j) = -b(k, j) * tjj;
        }
        theta = ((theta + theta.transpose()) / 2.0).eval();

        for (int a = 0; a < m; ++a)
            for (int c = 0; c < m; ++c) {
                out.w(comp[a] - 1, comp[c] - 1) = w(a, c);
                out.theta(comp[a] - 1, comp[c] - 1) = theta(a, c);
            }
    }
    return out;
}

struct PathPoint {
    double lambda = 0.0;
    UndirectedGraph graph{1};
    std::vector<std::vector<int>> components;  // largest first, ties by smallest member
    int n_components = 0;
    int max_size = 0;
};

/// Screening solution path: n_lambda points log-spaced from the largest
/// absolute off-diagonal entry down to a tenth of it. The first point sits
/// just above the maximum so the densest pair is still excluded and the top
/// graph has no edges.
inline std::vector<PathPoint> glasso_path(const Mat& s, int n_lambda = 30) {
    const int d = static_cast<int>(s.rows());
    if (s.cols() != d) throw data_error("glasso_path: matrix must be square");
    if (d < 2) throw data_error("glasso_path: need at least 2 variables");
    if (n_lambda < 1) throw data_error("glasso_path: need at least one point");

    double lambda_max = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) lambda_max = std::max(lambda_max, std::abs(s(i, j)));
    if (lambda_max <= 0.0)
        throw data_error("glasso_path: no off-diagonal dependence to screen");

    const double lambda_min = 0.1 * lambda_max;
    std::vector<PathPoint> path;
    path.reserve(n_lambda);
    for (int j = 0; j < n_lambda; ++j) {
        const double f = n_lambda == 1 ? 0.0 : static_cast<double>(j) / (n_lambda - 1);
        double lambda = std::exp(std::log(lambda_max) +
                                 f * (std::log(lambda_min) - std::log(lambda_max)));
        if (j == 0) lambda *= 1.0 + 1e-12;
        PathPoint pt;
        pt.lambda = lambda;
        pt.graph = screening_graph(s, lambda);
        pt.components = connected_components(pt.graph);
        pt.n_components = static_cast<int>(pt.components.size());
        pt.max_size = static_cast<int>(pt.components.front().size());
        path.push_back(std::move(pt));
    }
    return path;
}

struct PartitionChoice {
    int index = 0;  // 1-based position in the path
    double lambda = 0.0;
    std::vector<std::vector<int>> components;
};

/// Picks the path point with the largest maximal component size that still
/// fits under the threshold; among equals the densest graph wins.
inline PartitionChoice select_partition(const std::vector<PathPoint>& path, int d_threshold) {
    if (path.empty()) throw data_error("select_partition: empty path");
    if (d_threshold < 1) throw data_error("select_partition: threshold must be positive");
    int best = -1;
    for (int j = 0; j < static_cast<int>(path.size()); ++j) {
        if (path[j].max_size > d_threshold) continue;
        if (best < 0 || path[j].max_size >= path[best].max_size) best = j;
    }
    if (best < 0)
        throw data_error("select_partition: no partition fits the threshold " +
                         std::to_string(d_threshold));
    PartitionChoice choice;
    choice.index = best + 1;
    choice.lambda = path[best].lambda;
    choice.components = path[best].components;
    return choice;
}

}  // namespace vineclust

#pragma once

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "vineclust/core.hpp"

namespace vineclust {

inline double norm_pdf(double x) {
    static const boost::math::normal_distribution<double> n01;
    return boost::math::pdf(n01, x);
}

inline double norm_cdf(double x) {
    static const boost::math::normal_distribution<double> n01;
    return boost::math::cdf(n01, x);
}

inline double norm_quantile(double p) {
    static const boost::math::normal_distribution<double> n01;
    return boost::math::quantile(n01, clamp_unit(p));
}

inline double t_pdf(double x, double df) {
    return boost::math::pdf(boost::math::students_t_distribution<double>(df), x);
}

inline double t_cdf(double x, double df) {
    return boost::math::cdf(boost::math::students_t_distribution<double>(df), x);
}

inline double t_quantile(double p, double df) {
    return boost::math::quantile(boost::math::students_t_distribution<double>(df),
                                 clamp_unit(p));
}

/// Average ranks (ties share the mean rank), 1-based.
inline Vec average_ranks(const Vec& x) {
    const Eigen::Index n = x.size();
    std::vector<Eigen::Index> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](Eigen::Index a, Eigen::Index b) { return x[a] < x[b]; });
    Vec r(n);
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (Eigen::Index k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

namespace detail {

// Merge sort over the v-sequence counting inversions (discordant swaps).
inline std::uint64_t count_inversions(std::vector<double>& v, std::vector<double>& buf,
                                      std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t swaps = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            swaps += mid - i;
            buf[k++] = v[j++];
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) buf[k++] = v[i++];
    while (j < hi) buf[k++] = v[j++];
    std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
    return swaps;
}

inline std::uint64_t tied_pairs(const std::vector<double>& sorted) {
    std::uint64_t total = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const std::uint64_t run = j - i + 1;
        total += run * (run - 1) / 2;
        i = j + 1;
    }
    return total;
}

}  // namespace detail

/// Tie-corrected Kendall correlation (tau-b), O(n log n).
/// With no ties this equals (concordant - discordant) / (n choose 2).
inline double kendall_tau(const Vec& x, const Vec& y) {
    const std::size_t n = static_cast<std::size_t>(x.size());
    if (y.size() != x.size()) throw data_error("kendall_tau: length mismatch");
    if (n < 2) throw data_error("kendall_tau: need at least 2 observations");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });

    // Pairs tied in x, and pairs tied in both x and y.
    std::uint64_t n1 = 0, n3 = 0;
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
            const std::uint64_t run = j - i + 1;
            n1 += run * (run - 1) / 2;
            std::size_t a = i;
            while (a <= j) {
                std::size_t b = a;
                while (b + 1 <= j && y[idx[b + 1]] == y[idx[a]]) ++b;
                const std::uint64_t jr = b - a + 1;
                n3 += jr * (jr - 1) / 2;
                a = b + 1;
            }
            i = j + 1;
        }
    }

    std::vector<double> v(n), buf(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = y[idx[i]];
    const std::uint64_t swaps = detail::count_inversions(v, buf, 0, n);

    std::vector<double> ys(v);  // already sorted by count_inversions
    const std::uint64_t n2 = detail::tied_pairs(ys);

    const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    const double concordant_minus_discordant =
        static_cast<double>(n0) - static_cast<double>(n1) - static_cast<double>(n2) +
        static_cast<double>(n3) - 2.0 * static_cast<double>(swaps);
    const double den1 = static_cast<double>(n0 - n1);
    const double den2 = static_cast<double>(n0 - n2);
    if (den1 <= 0.0 || den2 <= 0.0)
        throw numeric_error("kendall_tau: degenerate sample (a margin is constant)");
    return concordant_minus_discordant / std::sqrt(den1 * den2);
}

/// Asymptotic test statistic |tau| * sqrt(9 n (n-1) / (2 (2n+5))).
inline double kendall_tau_statistic(double tau, std::size_t n) {
    const double nn = static_cast<double>(n);
    return std::abs(tau) * std::sqrt(9.0 * nn * (nn - 1.0) / (2.0 * (2.0 * nn + 5.0)));
}

}  // namespace vineclust

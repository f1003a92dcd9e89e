#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "vineclust/bicop/bicop.hpp"
#include "vineclust/core.hpp"
#include "vineclust/rvine/matrix.hpp"

namespace vineclust {

/// Full vine copula model: validated matrix over variables 1..d, one pair
/// copula per below-diagonal cell, truncation level (d-1 = none). Immutable
/// once assembled; loglik and simulation live as free functions.
class RVineModel {
  public:
    explicit RVineModel(const IMat& m, int truncation_level = 0)
        : m_(m), d_(static_cast<int>(m.rows())) {
        const MatrixCheck check = validate_rvine_matrix(m);
        if (!check.ok) throw data_error("RVineModel: " + check.violation);
        // diagonal entries are distinct by validation, so in-range means permutation
        for (int j = 0; j < d_; ++j) {
            if (m_(j, j) < 1 || m_(j, j) > d_)
                throw data_error("RVineModel: diagonal must be a permutation of 1.." +
                                 std::to_string(d_));
        }
        trunc_ = (truncation_level <= 0 || truncation_level > d_ - 1) ? d_ - 1
                                                                      : truncation_level;
        grid_.assign(static_cast<std::size_t>(d_) * d_, PairCopula::independence());
        names_.reserve(d_);
        for (int v = 1; v <= d_; ++v) names_.push_back("V" + std::to_string(v));
    }

    int dim() const { return d_; }
    const IMat& matrix() const { return m_; }
    int truncation() const { return trunc_; }

    const PairCopula& pair(int i, int j) const {
        check_cell(i, j);
        return grid_[static_cast<std::size_t>(i) * d_ + j];
    }

    void set_pair(int i, int j, const PairCopula& pc) {
        check_cell(i, j);
        if (tree_of_row(i, d_) > trunc_ && pc.family() != BicopFamily::indep)
            throw data_error("set_pair: cell lies above the truncation level");
        grid_[static_cast<std::size_t>(i) * d_ + j] = pc;
    }

    const std::vector<std::string>& names() const { return names_; }
    void set_names(std::vector<std::string> names) {
        if (static_cast<int>(names.size()) != d_)
            throw data_error("set_names: need " + std::to_string(d_) + " names");
        names_ = std::move(names);
    }

    int count_parameters() const {
        int p = 0;
        for (int j = 0; j < d_ - 1; ++j)
            for (int i = j + 1; i < d_; ++i) p += family_nparams(pair(i, j).family());
        return p;
    }

  private:
    void check_cell(int i, int j) const {
        if (j < 0 || i <= j || i >= d_) throw data_error("not a below-diagonal cell");
    }

    IMat m_;
    int d_;
    int trunc_;
    std::vector<PairCopula> grid_;
    std::vector<std::string> names_;
};

/// Truncated copy: all cells in trees above k become Independence.
inline RVineModel truncate(const RVineModel& model, int k) {
    const int d = model.dim();
    if (k < 1 || k > d - 1) throw data_error("truncate: level out of range");
    RVineModel out(model.matrix(), k);
    out.set_names(model.names());
    for (int j = 0; j < d - 1; ++j)
        for (int i = j + 1; i < d; ++i)
            if (tree_of_row(i, d) <= k) out.set_pair(i, j, model.pair(i, j));
    return out;
}

struct InfoCriteria {
    double aic = 0.0, bic = 0.0, gic = 0.0;
};

/// AIC/BIC and the generalized criterion with penalty log(log n) log(p) p;
/// models with p <= 1 take GIC = -2L since the penalty vanishes.
inline InfoCriteria information_criteria(double loglik, int nparams, std::size_t n) {
    if (n < 2) throw data_error("information_criteria: need n >= 2");
    if (nparams < 0) throw data_error("information_criteria: negative parameter count");
    InfoCriteria ic;
    const double p = nparams;
    ic.aic = -2.0 * loglik + 2.0 * p;
    ic.bic = -2.0 * loglik + std::log(static_cast<double>(n)) * p;
    ic.gic = -2.0 * loglik;
    if (nparams > 1)
        ic.gic += std::log(std::log(static_cast<double>(n))) * std::log(p) * p;
    return ic;
}

namespace detail {

// one level of pseudo-observations, keyed by (variable, conditioning set)
using PseudoKey = std::pair<int, std::vector<int>>;
using PseudoLevel = std::map<PseudoKey, Vec>;

inline std::vector<int> column_tail(const IMat& m, int below_row, int j) {
    std::vector<int> d;
    for (int r = below_row; r < static_cast<int>(m.rows()); ++r) d.push_back(m(r, j));
    std::sort(d.begin(), d.end());
    return d;
}

inline const Vec& fetch_pseudo(const PseudoLevel& level, int var, const std::vector<int>& cond) {
    const auto it = level.find({var, cond});
    if (it == level.end())
        throw numeric_error("pseudo-observation for variable " + std::to_string(var) +
                            " with |D|=" + std::to_string(cond.size()) +
                            " is unavailable; matrix is inconsistent");
    return it->second;
}

}  // namespace detail

struct LoglikResult {
    double loglik = 0.0;
    Vec per_obs;
    Mat cell_loglik;  // summed log-density per matrix cell
};

/// u-scale log-likelihood: evaluates every cell tree by tree, generating each
/// tree's pseudo-observations from the h-functions of the tree below.
/// Truncated trees contribute nothing and are not evaluated.
inline LoglikResult rvine_loglik(const RVineModel& model, const Mat& u_in) {
    const int d = model.dim();
    if (static_cast<int>(u_in.cols()) != d) throw data_error("rvine_loglik: dimension mismatch");
    const Eigen::Index n = u_in.rows();
    if (n == 0) throw data_error("rvine_loglik: empty sample");
    Mat u = u_in;
    for (Eigen::Index r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) u(r, c) = clamp_unit(u(r, c));

    LoglikResult res;
    res.per_obs = Vec::Zero(n);
    res.cell_loglik = Mat::Zero(d, d);

    const IMat& m = model.matrix();
    detail::PseudoLevel prev, cur;
    for (int t = 1; t <= model.truncation(); ++t) {
        const int i = d - t;
        for (int j = 0; j < i; ++j) {
            const std::vector<int> cond = detail::column_tail(m, i + 1, j);
            const int a = m(j, j), b = m(i, j);
            Vec raw1, raw2;
            const Vec *u1p, *u2p;
            if (t == 1) {
                raw1 = u.col(a - 1);
                raw2 = u.col(b - 1);
                u1p = &raw1;
                u2p = &raw2;
            } else {
                u1p = &detail::fetch_pseudo(prev, a, cond);
                u2p = &detail::fetch_pseudo(prev, b, cond);
            }
            const Vec& u1 = *u1p;
            const Vec& u2 = *u2p;
            const PairCopula& pc = model.pair(i, j);

            KahanSum cell;
            for (Eigen::Index r = 0; r < n; ++r) {
                const double lp = pc.logpdf(u1[r], u2[r]);
                res.per_obs[r] += lp;
                cell.add(lp);
            }
            res.cell_loglik(i, j) = cell.value();

            if (t < model.truncation()) {
                std::vector<int> ca = cond, cb = cond;
                ca.insert(std::lower_bound(ca.begin(), ca.end(), b), b);
                cb.insert(std::lower_bound(cb.begin(), cb.end(), a), a);
                cur[{a, ca}] = pc.hfunc1(u1, u2);
                cur[{b, cb}] = pc.hfunc2(u1, u2);
            }
        }
        prev = std::move(cur);
        cur.clear();
    }
    res.loglik = kahan_total(res.per_obs);
    return res;
}

/// Inverse-Rosenblatt sampling along the matrix: variables are generated
/// right to left, each column inverting its h-function chain top to bottom,
/// then the column's h-outputs are cached for the columns to its left.
/// Deterministic given the seed.
inline Mat rvine_simulate(const RVineModel& model, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw data_error("rvine_simulate: need n >= 1");
    const int d = model.dim();
    const IMat& m = model.matrix();
    const Eigen::Index nn = static_cast<Eigen::Index>(n);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Mat w(nn, d);
    for (Eigen::Index r = 0; r < nn; ++r)
        for (int c = 0; c < d; ++c) w(r, c) = clamp_unit(unif(rng));

    Mat out(nn, d);
    detail::PseudoLevel cache;

    for (int j = d - 1; j >= 0; --j) {
        const int v = m(j, j);
        // chain[i] = F(v | tail below row i); chain[j+1] is fully conditioned
        std::vector<Vec> chain(d + 1);
        std::vector<const Vec*> partners(d, nullptr);
        chain[j + 1] = w.col(j);
        for (int i = j + 1; i < d; ++i) {
            const std::vector<int> cond = detail::column_tail(m, i + 1, j);
            partners[i] = &detail::fetch_pseudo(cache, m(i, j), cond);
            chain[i + 1] = model.pair(i, j).hinv1(chain[i], *partners[i]);
        }
        out.col(v - 1) = chain[d];
        cache[{v, {}}] = chain[d];

        for (int i = d - 1; i > j; --i) {
            const int b = m(i, j);
            std::vector<int> cond = detail::column_tail(m, i + 1, j);
            std::vector<int> ca = cond, cb = cond;
            ca.insert(std::lower_bound(ca.begin(), ca.end(), b), b);
            cb.insert(std::lower_bound(cb.begin(), cb.end(), v), v);
            cache[{v, ca}] = chain[i];
            cache[{b, cb}] = model.pair(i, j).hfunc2(chain[i + 1], *partners[i]);
        }
    }
    return out;
}

}  // namespace vineclust

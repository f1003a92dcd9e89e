#pragma once

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "vineclust/bicop/bicop.hpp"
#include "vineclust/core.hpp"
#include "vineclust/stats.hpp"

namespace vineclust {

enum class FitMetric { loglik, aic, bic };

inline std::string metric_name(FitMetric m) {
    switch (m) {
        case FitMetric::loglik: return "loglik";
        case FitMetric::aic: return "aic";
        case FitMetric::bic: return "bic";
    }
    throw data_error("unknown metric");
}

inline FitMetric metric_from_name(const std::string& s) {
    if (s == "loglik") return FitMetric::loglik;
    if (s == "aic") return FitMetric::aic;
    if (s == "bic") return FitMetric::bic;
    throw data_error("unknown metric: " + s);
}

/// Edge weight used for tree selection: loglik, -AIC or -BIC.
inline double metric_mu(FitMetric m, double loglik, int nparams, std::size_t n) {
    switch (m) {
        case FitMetric::loglik: return loglik;
        case FitMetric::aic: return -(-2.0 * loglik + 2.0 * nparams);
        case FitMetric::bic:
            return -(-2.0 * loglik + std::log(static_cast<double>(n)) * nparams);
    }
    throw data_error("unknown metric");
}

struct FitResult {
    PairCopula copula;
    double loglik = 0.0;
    int nparams = 0;
    double mu = 0.0;
    bool independent = false;  // true when the independence test kept the cell
};

/// Asymptotic Kendall-tau independence test.
/// Rejects when |tau| sqrt(9n(n-1)/(2(2n+5))) exceeds the normal quantile.
inline bool independence_test(const Vec& u, const Vec& v, double alpha) {
    if (alpha <= 0.0 || alpha >= 1.0) throw data_error("alpha must lie in (0,1)");
    if (u.size() < 10) throw data_error("independence_test: need at least 10 observations");
    const double tau = kendall_tau(u, v);
    const double stat = kendall_tau_statistic(tau, static_cast<std::size_t>(u.size()));
    return stat > norm_quantile(1.0 - alpha / 2.0);
}

namespace detail {

struct BrentResult {
    double x;
    double negloglik;
};

template <class F>
BrentResult brent_min(F f, double lo, double hi) {
    const auto r = boost::math::tools::brent_find_minima(f, lo, hi, 35);
    return {r.first, r.second};
}

// Bounded 1-d maximum-likelihood search: full-interval pass plus a restart on
// each half, keeping the best. Derivative-free, deterministic.
template <class F>
BrentResult restarted_min(F f, double lo, double hi) {
    BrentResult best = brent_min(f, lo, hi);
    const double mid = 0.5 * (lo + hi);
    for (const auto& [a, b] : {std::pair{lo, mid}, std::pair{mid, hi}}) {
        const BrentResult r = brent_min(f, a, b);
        if (r.negloglik < best.negloglik) best = r;
    }
    return best;
}

inline void check_fit_sample(const Vec& u, const Vec& v, double tau_hat) {
    if (u.size() != v.size()) throw data_error("fit: length mismatch");
    if (u.size() < 10) throw data_error("fit: need at least 10 observations");
    if (std::abs(tau_hat) > 1.0 - 1e-12)
        throw numeric_error("fit: sample is (anti)monotone, likelihood unbounded");
}

inline FitResult fit_student(const Vec& u, const Vec& v, double tau_hat, FitMetric metric) {
    const double rho_cap = 0.99999;
    auto nll = [&](double rho, double df) {
        PairCopula pc(BicopFamily::student, Rotation::deg0, rho, df);
        return -pc.loglik(u, v);
    };
    double rho = std::clamp(std::sin(M_PI * tau_hat / 2.0), -rho_cap, rho_cap);
    double best_rho = rho, best_df = 8.0, best_nll = nll(rho, 8.0);
    for (const double df0 : {4.0, 8.0, 20.0}) {
        double r = rho, d = df0;
        for (int sweep = 0; sweep < 3; ++sweep) {
            const auto rd = brent_min([&](double x) { return nll(r, x); },
                                      student_df_min, student_df_max);
            d = rd.x;
            const auto rr = brent_min([&](double x) { return nll(x, d); }, -rho_cap, rho_cap);
            r = rr.x;
            if (rr.negloglik < best_nll) {
                best_nll = rr.negloglik;
                best_rho = r;
                best_df = d;
            }
        }
    }
    // Hitting the df ceiling means the fit is indistinguishable from Gaussian.
    if (best_df > student_df_max - 0.02) {
        PairCopula pc(BicopFamily::gaussian, Rotation::deg0, best_rho);
        const double ll = pc.loglik(u, v);
        return {pc, ll, 1, metric_mu(metric, ll, 1, u.size()), false};
    }
    PairCopula pc(BicopFamily::student, Rotation::deg0, best_rho, best_df);
    const double ll = -best_nll;
    return {pc, ll, 2, metric_mu(metric, ll, 2, u.size()), false};
}

}  // namespace detail

/// Maximum-likelihood fit of one family/rotation on copula-scale pairs.
/// Bounded derivative-free search started from the tau-inversion point; the
/// returned loglik never falls below the start point's.
inline FitResult fit_pair_copula_mle(const Vec& u_in, const Vec& v_in, BicopFamily family,
                                     Rotation rot = Rotation::deg0,
                                     FitMetric metric = FitMetric::aic) {
    const Vec u = clamp_unit(u_in), v = clamp_unit(v_in);
    const double tau_hat = kendall_tau(u, v);
    detail::check_fit_sample(u, v, tau_hat);

    if (family == BicopFamily::indep)
        return {PairCopula::independence(), 0.0, 0, metric_mu(metric, 0.0, 0, u.size()), false};

    if (family == BicopFamily::student) {
        if (rot != Rotation::deg0) throw data_error("student: rotation not defined");
        return detail::fit_student(u, v, tau_hat, metric);
    }

    auto [lo, hi] = family_param_bounds(family);
    if (family == BicopFamily::clayton) lo = 1e-4;       // keep the box away from blowup
    if (family == BicopFamily::joe) lo = 1.0 + 1e-6;

    auto nll = [&](double theta) {
        // frank degenerates to independence at theta = 0; the search interval
        // straddles it, so return the limit instead of constructing the copula
        if (family == BicopFamily::frank && theta == 0.0) return 0.0;
        PairCopula pc(family, rot, theta);
        return -pc.loglik(u, v);
    };

    // tau-inversion start, clamped into the search box
    double start = 0.5 * (lo + hi);
    try {
        start = std::clamp(tau_to_parameter(family, rot, tau_hat), lo, hi);
    } catch (const numeric_error&) {
        // tau sign unattainable for this rotation; keep the midpoint
    }
    const double start_nll = nll(start);

    detail::BrentResult best = detail::restarted_min(nll, lo, hi);
    if (start_nll < best.negloglik) best = {start, start_nll};

    PairCopula pc(family, rot, best.x);
    const double ll = -best.negloglik;
    const int p = family_nparams(family);
    return {pc, ll, p, metric_mu(metric, ll, p, u.size()), false};
}

/// Candidate list entry: family plus explicit rotation.
struct FamilyCandidate {
    BicopFamily family;
    Rotation rot = Rotation::deg0;
};

/// Expands a family set into concrete candidates for the observed tau sign:
/// single-sign families get 0/180 rotations for positive tau, 90/270 for
/// negative; symmetric families are used as-is.
inline std::vector<FamilyCandidate> expand_candidates(const std::vector<BicopFamily>& families,
                                                      double tau_hat) {
    std::vector<FamilyCandidate> out;
    for (BicopFamily f : families) {
        if (f == BicopFamily::indep) continue;
        if (!family_rotatable(f)) {
            out.push_back({f, Rotation::deg0});
        } else if (tau_hat >= 0.0) {
            out.push_back({f, Rotation::deg0});
            out.push_back({f, Rotation::deg180});
        } else {
            out.push_back({f, Rotation::deg90});
            out.push_back({f, Rotation::deg270});
        }
    }
    return out;
}

/// Family selection: optional independence test first, then the best fitted
/// candidate by the metric. Ties keep the earlier candidate.
inline FitResult select_pair_copula(const Vec& u, const Vec& v,
                                    const std::vector<BicopFamily>& families,
                                    FitMetric metric = FitMetric::aic,
                                    std::optional<double> alpha = std::nullopt) {
    if (families.empty()) throw data_error("select_pair_copula: empty candidate set");
    if (alpha && !independence_test(u, v, *alpha))
        return {PairCopula::independence(), 0.0, 0, 0.0, true};

    const double tau_hat = kendall_tau(clamp_unit(u), clamp_unit(v));
    const auto candidates = expand_candidates(families, tau_hat);
    if (candidates.empty())
        return {PairCopula::independence(), 0.0, 0, 0.0, false};

    std::optional<FitResult> best;
    for (const auto& c : candidates) {
        try {
            FitResult r = fit_pair_copula_mle(u, v, c.family, c.rot, metric);
            if (!best || r.mu > best->mu) best = r;
        } catch (const numeric_error&) {
            // a candidate may fail on extreme samples; others can still win
        }
    }
    if (!best) throw numeric_error("select_pair_copula: every candidate fit failed");
    return *best;
}

}  // namespace vineclust

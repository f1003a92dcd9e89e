#pragma once

#include <cmath>
#include <string>

#include "vineclust/bicop/family.hpp"
#include "vineclust/core.hpp"
#include "vineclust/stats.hpp"

namespace vineclust {

namespace detail {

inline double logsumexp2(double a, double b) {
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// ---- Gaussian ----

inline double gauss_logpdf(double u, double v, double rho) {
    const double x = norm_quantile(u), y = norm_quantile(v);
    const double r2 = rho * rho, s2 = 1.0 - r2;
    return -0.5 * std::log(s2) - (r2 * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * s2);
}

inline double gauss_h1(double u, double v, double rho) {
    const double x = norm_quantile(u), y = norm_quantile(v);
    return norm_cdf((x - rho * y) / std::sqrt(1.0 - rho * rho));
}

inline double gauss_h1inv(double p, double v, double rho) {
    const double y = norm_quantile(v);
    return norm_cdf(std::sqrt(1.0 - rho * rho) * norm_quantile(p) + rho * y);
}

// ---- Student t ----

inline double student_logpdf(double u, double v, double rho, double df) {
    const double x = t_quantile(u, df), y = t_quantile(v, df);
    const double s2 = 1.0 - rho * rho;
    const double q = x * x - 2.0 * rho * x * y + y * y;
    const double log_f2 = std::lgamma((df + 2.0) / 2.0) - std::lgamma(df / 2.0) -
                          std::log(df * M_PI) - 0.5 * std::log(s2) -
                          (df + 2.0) / 2.0 * std::log1p(q / (df * s2));
    auto log_f1 = [df](double z) {
        return std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
               0.5 * std::log(df * M_PI) - (df + 1.0) / 2.0 * std::log1p(z * z / df);
    };
    return log_f2 - log_f1(x) - log_f1(y);
}

inline double student_h1(double u, double v, double rho, double df) {
    const double x = t_quantile(u, df), y = t_quantile(v, df);
    const double scale = std::sqrt((df + y * y) * (1.0 - rho * rho) / (df + 1.0));
    return t_cdf((x - rho * y) / scale, df + 1.0);
}

inline double student_h1inv(double p, double v, double rho, double df) {
    const double y = t_quantile(v, df);
    const double scale = std::sqrt((df + y * y) * (1.0 - rho * rho) / (df + 1.0));
    return t_cdf(t_quantile(p, df + 1.0) * scale + rho * y, df);
}

// ---- Clayton ----

// log(u^-t + v^-t - 1) computed from the log-scale terms.
inline double clayton_log_a(double u, double v, double t) {
    const double e1 = -t * std::log(u), e2 = -t * std::log(v);
    const double m = std::max(e1, e2);
    return m + std::log(std::exp(e1 - m) + std::exp(e2 - m) - std::exp(-m));
}

inline double clayton_logpdf(double u, double v, double t) {
    return std::log1p(t) - (1.0 + t) * (std::log(u) + std::log(v)) -
           (2.0 + 1.0 / t) * clayton_log_a(u, v, t);
}

inline double clayton_h1(double u, double v, double t) {
    return std::exp(-(t + 1.0) * std::log(v) - (1.0 + 1.0 / t) * clayton_log_a(u, v, t));
}

inline double clayton_h1inv(double p, double v, double t) {
    // u = [ (p v^(t+1))^(-t/(t+1)) - v^-t + 1 ]^(-1/t)
    const double e1 = -t / (t + 1.0) * std::log(p) - t * std::log(v);
    const double e2 = -t * std::log(v);  // e1 >= e2
    const double log_b = e1 + std::log1p(-std::exp(e2 - e1) + std::exp(-e1));
    return clamp_unit(std::exp(-log_b / t));
}

// ---- Gumbel ----

inline double gumbel_logpdf(double u, double v, double t) {
    const double t1 = -std::log(u), t2 = -std::log(v);
    const double lS = logsumexp2(t * std::log(t1), t * std::log(t2));
    const double s_pow = std::exp(lS / t);  // S^(1/t)
    return -s_pow + t1 + t2 + (2.0 / t - 2.0) * lS +
           (t - 1.0) * (std::log(t1) + std::log(t2)) + std::log1p((t - 1.0) / s_pow);
}

inline double gumbel_h1(double u, double v, double t) {
    const double t1 = -std::log(u), t2 = -std::log(v);
    const double lS = logsumexp2(t * std::log(t1), t * std::log(t2));
    return std::exp(-std::exp(lS / t) + t2 + (t - 1.0) * std::log(t2) +
                    (1.0 / t - 1.0) * lS);
}

// ---- Frank ----

inline double frank_logpdf(double u, double v, double t) {
    // c = t (1-e^-t) e^(-t(u+v)) / [ (1-e^-t) - (1-e^-tu)(1-e^-tv) ]^2
    const double a = -std::expm1(-t);
    const double d = a - std::expm1(-t * u) * std::expm1(-t * v);
    return std::log(t * a) - t * (u + v) - 2.0 * std::log(std::abs(d));
}

inline double frank_h1(double u, double v, double t) {
    const double eu = std::expm1(-t * u), ev = std::expm1(-t * v), e1 = std::expm1(-t);
    return (1.0 + ev) * eu / (e1 + eu * ev);
}

inline double frank_h1inv(double p, double v, double t) {
    const double ev = std::expm1(-t * v), e1 = std::expm1(-t);
    const double eu = p * e1 / (1.0 + (1.0 - p) * ev);
    return clamp_unit(-std::log1p(eu) / t);
}

// ---- Joe ----

inline double joe_logpdf(double u, double v, double t) {
    const double lu = std::log1p(-u), lv = std::log1p(-v);  // log(1-u), log(1-v)
    const double x = std::exp(t * lu), y = std::exp(t * lv);
    const double a = x + y - x * y;
    return (1.0 / t - 2.0) * std::log(a) + (t - 1.0) * (lu + lv) + std::log(t - 1.0 + a);
}

inline double joe_h1(double u, double v, double t) {
    const double lu = std::log1p(-u), lv = std::log1p(-v);
    const double x = std::exp(t * lu), y = std::exp(t * lv);
    const double a = x + y - x * y;
    return std::exp((1.0 / t - 1.0) * std::log(a) + (t - 1.0) * lv) * (1.0 - x);
}

template <class H>
double h1inv_bisect(H h1, double p) {
    double lo = u_eps, hi = 1.0 - u_eps;
    for (int it = 0; it < 70; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (h1(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// A parametric bivariate copula cell: family, rotation, parameters.
/// h1(u,v) = dC/dv is the conditional cdf of the first argument given the
/// second; h2 is the mirror. hinv1 inverts h1 in its first argument.
class PairCopula {
  public:
    PairCopula() = default;  // independence

    PairCopula(BicopFamily family, Rotation rot, double theta, double theta2 = 0.0)
        : family_(family), rot_(rot), theta_(theta), theta2_(theta2) {
        validate();
    }

    static PairCopula independence() { return PairCopula(); }

    BicopFamily family() const { return family_; }
    Rotation rotation() const { return rot_; }
    double theta() const { return theta_; }
    double theta2() const { return theta2_; }
    int nparams() const { return family_nparams(family_); }
    std::string code() const { return family_code(family_, rot_); }

    /// Population Kendall tau (sign flipped for 90/270 rotations).
    double tau() const {
        const double t = family_model_tau(family_, theta_, theta2_);
        return (rot_ == Rotation::deg90 || rot_ == Rotation::deg270) ? -t : t;
    }

    double logpdf(double u, double v) const {
        u = clamp_unit(u);
        v = clamp_unit(v);
        switch (rot_) {
            case Rotation::deg0: break;
            case Rotation::deg90: u = 1.0 - u; break;
            case Rotation::deg180: u = 1.0 - u; v = 1.0 - v; break;
            case Rotation::deg270: v = 1.0 - v; break;
        }
        return base_logpdf(u, v);
    }

    double pdf(double u, double v) const { return std::exp(logpdf(u, v)); }

    double hfunc1(double u, double v) const {
        u = clamp_unit(u);
        v = clamp_unit(v);
        double r;
        switch (rot_) {
            case Rotation::deg0: r = base_h1(u, v); break;
            case Rotation::deg90: r = 1.0 - base_h1(1.0 - u, v); break;
            case Rotation::deg180: r = 1.0 - base_h1(1.0 - u, 1.0 - v); break;
            case Rotation::deg270: r = base_h1(u, 1.0 - v); break;
            default: r = u;
        }
        return clamp_unit(r);
    }

    double hfunc2(double u, double v) const {
        u = clamp_unit(u);
        v = clamp_unit(v);
        double r;
        switch (rot_) {
            case Rotation::deg0: r = base_h2(u, v); break;
            case Rotation::deg90: r = base_h2(1.0 - u, v); break;
            case Rotation::deg180: r = 1.0 - base_h2(1.0 - u, 1.0 - v); break;
            case Rotation::deg270: r = 1.0 - base_h2(u, 1.0 - v); break;
            default: r = v;
        }
        return clamp_unit(r);
    }

    double hinv1(double p, double v) const {
        p = clamp_unit(p);
        v = clamp_unit(v);
        double r;
        switch (rot_) {
            case Rotation::deg0: r = base_h1inv(p, v); break;
            case Rotation::deg90: r = 1.0 - base_h1inv(1.0 - p, v); break;
            case Rotation::deg180: r = 1.0 - base_h1inv(1.0 - p, 1.0 - v); break;
            case Rotation::deg270: r = base_h1inv(p, 1.0 - v); break;
            default: r = p;
        }
        return clamp_unit(r);
    }

    /// Sum of log densities over paired vectors (compensated).
    double loglik(const Vec& u, const Vec& v) const {
        if (u.size() != v.size()) throw data_error("loglik: length mismatch");
        if (family_ == BicopFamily::indep) return 0.0;
        KahanSum s;
        for (Eigen::Index i = 0; i < u.size(); ++i) s.add(logpdf(u[i], v[i]));
        return s.value();
    }

    Vec hfunc1(const Vec& u, const Vec& v) const {
        Vec out(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = hfunc1(u[i], v[i]);
        return out;
    }

    Vec hfunc2(const Vec& u, const Vec& v) const {
        Vec out(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = hfunc2(u[i], v[i]);
        return out;
    }

    Vec hinv1(const Vec& p, const Vec& v) const {
        Vec out(p.size());
        for (Eigen::Index i = 0; i < p.size(); ++i) out[i] = hinv1(p[i], v[i]);
        return out;
    }

    bool operator==(const PairCopula& o) const {
        return family_ == o.family_ && rot_ == o.rot_ && theta_ == o.theta_ &&
               theta2_ == o.theta2_;
    }

  private:
    void validate() const {
        if (rot_ != Rotation::deg0 && !family_rotatable(family_) &&
            family_ != BicopFamily::indep)
            throw data_error("rotation only defined for clayton/gumbel/joe: " + code());
        switch (family_) {
            case BicopFamily::indep: return;
            case BicopFamily::gaussian:
                if (std::abs(theta_) >= 1.0)
                    throw data_error("gaussian: |rho| must be < 1");
                return;
            case BicopFamily::student:
                if (std::abs(theta_) >= 1.0)
                    throw data_error("student: |rho| must be < 1");
                if (theta2_ < student_df_min || theta2_ > student_df_max)
                    throw data_error("student: df must lie in [2.01, 30]");
                return;
            case BicopFamily::clayton:
                if (theta_ <= 0.0 || theta_ > 100.0)
                    throw data_error("clayton: theta must be positive");
                return;
            case BicopFamily::gumbel:
                if (theta_ < 1.0 || theta_ > 100.0)
                    throw data_error("gumbel: theta must be >= 1");
                return;
            case BicopFamily::frank:
                if (theta_ == 0.0 || std::abs(theta_) > 50.0)
                    throw data_error("frank: theta must be nonzero with |theta| <= 50");
                return;
            case BicopFamily::joe:
                if (theta_ < 1.0 || theta_ > 100.0)
                    throw data_error("joe: theta must be >= 1");
                return;
        }
        throw data_error("unknown family");
    }

    double base_logpdf(double u, double v) const {
        switch (family_) {
            case BicopFamily::indep: return 0.0;
            case BicopFamily::gaussian: return detail::gauss_logpdf(u, v, theta_);
            case BicopFamily::student: return detail::student_logpdf(u, v, theta_, theta2_);
            case BicopFamily::clayton: return detail::clayton_logpdf(u, v, theta_);
            case BicopFamily::gumbel: return detail::gumbel_logpdf(u, v, theta_);
            case BicopFamily::frank: return detail::frank_logpdf(u, v, theta_);
            case BicopFamily::joe: return detail::joe_logpdf(u, v, theta_);
        }
        throw data_error("unknown family");
    }

    double base_h1(double u, double v) const {
        switch (family_) {
            case BicopFamily::indep: return u;
            case BicopFamily::gaussian: return detail::gauss_h1(u, v, theta_);
            case BicopFamily::student: return detail::student_h1(u, v, theta_, theta2_);
            case BicopFamily::clayton: return detail::clayton_h1(u, v, theta_);
            case BicopFamily::gumbel: return detail::gumbel_h1(u, v, theta_);
            case BicopFamily::frank: return detail::frank_h1(u, v, theta_);
            case BicopFamily::joe: return detail::joe_h1(u, v, theta_);
        }
        throw data_error("unknown family");
    }

    // h2 of the base family is h1 with the arguments swapped (all base
    // families here are exchangeable).
    double base_h2(double u, double v) const { return base_h1(v, u); }

    double base_h1inv(double p, double v) const {
        switch (family_) {
            case BicopFamily::indep: return p;
            case BicopFamily::gaussian: return detail::gauss_h1inv(p, v, theta_);
            case BicopFamily::student: return detail::student_h1inv(p, v, theta_, theta2_);
            case BicopFamily::clayton: return detail::clayton_h1inv(p, v, theta_);
            case BicopFamily::frank: return detail::frank_h1inv(p, v, theta_);
            case BicopFamily::gumbel:
            case BicopFamily::joe:
                return detail::h1inv_bisect(
                    [&](double u) { return base_h1(u, v); }, p);
        }
        throw data_error("unknown family");
    }

    BicopFamily family_ = BicopFamily::indep;
    Rotation rot_ = Rotation::deg0;
    double theta_ = 0.0;
    double theta2_ = 0.0;
};

/// The same copula with its arguments exchanged: density c'(u,v) = c(v,u),
/// h1' = h2 with swapped inputs and vice versa. The base families are
/// exchangeable, so only the 90/270 rotations trade places.
inline PairCopula swap_arguments(const PairCopula& pc) {
    switch (pc.rotation()) {
        case Rotation::deg90:
            return PairCopula(pc.family(), Rotation::deg270, pc.theta(), pc.theta2());
        case Rotation::deg270:
            return PairCopula(pc.family(), Rotation::deg90, pc.theta(), pc.theta2());
        default:
            return pc;
    }
}

}  // namespace vineclust

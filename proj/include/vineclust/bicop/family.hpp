#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <string>
#include <utility>

#include "vineclust/core.hpp"

namespace vineclust {

enum class BicopFamily { indep, gaussian, student, clayton, gumbel, frank, joe };

/// Quarter-turn rotations; 90/270 cover negative dependence for the
/// single-sign Archimedean families, 180 is the survival copula.
enum class Rotation { deg0 = 0, deg90 = 90, deg180 = 180, deg270 = 270 };

inline int rotation_degrees(Rotation r) { return static_cast<int>(r); }

inline Rotation rotation_from_degrees(int deg) {
    switch (deg) {
        case 0: return Rotation::deg0;
        case 90: return Rotation::deg90;
        case 180: return Rotation::deg180;
        case 270: return Rotation::deg270;
        default: throw data_error("rotation must be one of 0/90/180/270");
    }
}

inline std::string family_name(BicopFamily f) {
    switch (f) {
        case BicopFamily::indep: return "indep";
        case BicopFamily::gaussian: return "gaussian";
        case BicopFamily::student: return "student";
        case BicopFamily::clayton: return "clayton";
        case BicopFamily::gumbel: return "gumbel";
        case BicopFamily::frank: return "frank";
        case BicopFamily::joe: return "joe";
    }
    throw data_error("unknown family");
}

inline BicopFamily family_from_name(const std::string& s) {
    if (s == "indep" || s == "independence") return BicopFamily::indep;
    if (s == "gaussian") return BicopFamily::gaussian;
    if (s == "student" || s == "t") return BicopFamily::student;
    if (s == "clayton") return BicopFamily::clayton;
    if (s == "gumbel") return BicopFamily::gumbel;
    if (s == "frank") return BicopFamily::frank;
    if (s == "joe") return BicopFamily::joe;
    throw data_error("unknown copula family: " + s);
}

/// Serialized cell code: family name with the rotation appended ("clayton90").
inline std::string family_code(BicopFamily f, Rotation r) {
    std::string s = family_name(f);
    if (r != Rotation::deg0) s += std::to_string(rotation_degrees(r));
    return s;
}

inline std::pair<BicopFamily, Rotation> parse_family_code(const std::string& code) {
    std::size_t cut = code.size();
    while (cut > 0 && std::isdigit(static_cast<unsigned char>(code[cut - 1]))) --cut;
    const std::string name = code.substr(0, cut);
    const std::string deg = code.substr(cut);
    return {family_from_name(name), deg.empty() ? Rotation::deg0
                                                : rotation_from_degrees(std::stoi(deg))};
}

inline int family_nparams(BicopFamily f) {
    switch (f) {
        case BicopFamily::indep: return 0;
        case BicopFamily::student: return 2;
        default: return 1;
    }
}

inline bool family_rotatable(BicopFamily f) {
    return f == BicopFamily::clayton || f == BicopFamily::gumbel || f == BicopFamily::joe;
}

/// MLE search box for the first parameter.
inline std::pair<double, double> family_param_bounds(BicopFamily f) {
    switch (f) {
        case BicopFamily::gaussian:
        case BicopFamily::student: return {-0.99999, 0.99999};
        case BicopFamily::clayton: return {1e-8, 28.0};
        case BicopFamily::gumbel: return {1.0, 50.0};
        case BicopFamily::frank: return {-35.0, 35.0};
        case BicopFamily::joe: return {1.0, 30.0};
        case BicopFamily::indep: return {0.0, 0.0};
    }
    throw data_error("unknown family");
}

inline constexpr double student_df_min = 2.01;
inline constexpr double student_df_max = 30.0;

namespace detail {

/// Debye function D1(theta) = (1/theta) * int_0^theta t / (e^t - 1) dt, theta > 0.
inline double debye1(double theta) {
    auto f = [](double t) { return t <= 1e-12 ? 1.0 - t / 2.0 : t / std::expm1(t); };
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, theta, 10, 1e-12);
    return integral / theta;
}

inline double frank_tau_from_theta(double theta) {
    if (std::abs(theta) < 1e-10) return 0.0;
    const double a = std::abs(theta);
    const double tau = 1.0 - 4.0 / a * (1.0 - debye1(a));
    return theta > 0 ? tau : -tau;
}

inline double joe_tau_from_theta(double theta) {
    // tau = 1 - 4 * sum_{k>=1} 1 / (k (theta k + 2) (theta (k-1) + 2))
    double s = 0.0;
    for (int k = 1; k <= 200000; ++k) {
        const double kk = k;
        const double term = 1.0 / (kk * (theta * kk + 2.0) * (theta * (kk - 1.0) + 2.0));
        s += term;
        if (term < 1e-14 * (1.0 + s) && k > 50) break;
    }
    return 1.0 - 4.0 * s;
}

/// Monotone bisection for f(x) = target on [lo, hi], f increasing.
template <class F>
double bisect_increasing(F f, double lo, double hi, double target, double tol = 1e-12) {
    double flo = f(lo) - target, fhi = f(hi) - target;
    if (flo > 0.0 || fhi < 0.0) throw numeric_error("bisection: target outside bracket");
    for (int it = 0; it < 200 && hi - lo > tol * (1.0 + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) - target <= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Population Kendall tau of the base (unrotated) family at the given parameters.
inline double family_model_tau(BicopFamily f, double theta, double theta2 = 0.0) {
    (void)theta2;
    switch (f) {
        case BicopFamily::indep: return 0.0;
        case BicopFamily::gaussian:
        case BicopFamily::student: return 2.0 * std::asin(theta) / M_PI;
        case BicopFamily::clayton: return theta / (theta + 2.0);
        case BicopFamily::gumbel: return 1.0 - 1.0 / theta;
        case BicopFamily::frank: return detail::frank_tau_from_theta(theta);
        case BicopFamily::joe: return detail::joe_tau_from_theta(theta);
    }
    throw data_error("unknown family");
}

/// Inverts the family's tau relation; the rotation decides which sign of tau
/// is attainable. Throws numeric_error outside the attainable range.
inline double tau_to_parameter(BicopFamily f, Rotation rot, double tau) {
    if (f == BicopFamily::indep) {
        if (std::abs(tau) > 1e-12)
            throw numeric_error("tau_to_parameter: independence attains only tau = 0");
        return 0.0;
    }
    const bool flipped = rot == Rotation::deg90 || rot == Rotation::deg270;
    double t = flipped ? -tau : tau;
    switch (f) {
        case BicopFamily::gaussian:
        case BicopFamily::student:
            if (std::abs(t) >= 1.0)
                throw numeric_error("tau_to_parameter: |tau| must be < 1");
            return std::sin(M_PI * t / 2.0);
        case BicopFamily::clayton:
            if (t <= 0.0 || t >= 1.0)
                throw numeric_error("tau_to_parameter: clayton attains tau in (0,1), got " +
                                    std::to_string(tau));
            return 2.0 * t / (1.0 - t);
        case BicopFamily::gumbel:
            if (t < 0.0 || t >= 1.0)
                throw numeric_error("tau_to_parameter: gumbel attains tau in [0,1)");
            return 1.0 / (1.0 - t);
        case BicopFamily::frank: {
            if (std::abs(t) >= 0.9999)
                throw numeric_error("tau_to_parameter: |tau| too large for frank");
            if (std::abs(t) < 1e-10) return 1e-10;
            const double mag = detail::bisect_increasing(
                [](double th) { return detail::frank_tau_from_theta(th); }, 1e-9, 100.0,
                std::abs(t), 1e-13);
            return t > 0 ? mag : -mag;
        }
        case BicopFamily::joe:
            if (t < 0.0 || t >= detail::joe_tau_from_theta(100.0))
                throw numeric_error("tau_to_parameter: tau outside joe range");
            if (t < 1e-10) return 1.0 + 1e-10;
            return detail::bisect_increasing(
                [](double th) { return detail::joe_tau_from_theta(th); }, 1.0, 100.0, t, 1e-13);
        case BicopFamily::indep: break;
    }
    throw data_error("unknown family");
}

}  // namespace vineclust

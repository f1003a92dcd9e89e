#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace vineclust {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IMat = Eigen::MatrixXi;

/// Copula-scale inputs are clamped into [u_eps, 1 - u_eps].
inline constexpr double u_eps = 1e-10;

inline double clamp_unit(double u) {
    return std::min(1.0 - u_eps, std::max(u_eps, u));
}

inline Vec clamp_unit(Vec v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = clamp_unit(v[i]);
    return v;
}

/// Malformed or inconsistent input data (bad cells, dimension mismatches).
struct data_error : std::runtime_error {
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure (singular matrix, divergent optimization, degenerate sample).
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Compensated (Kahan) accumulator; keeps reductions order-stable in practice.
class KahanSum {
  public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0.0;
    double c_ = 0.0;
};

inline double kahan_total(const Vec& v) {
    KahanSum acc;
    for (Eigen::Index i = 0; i < v.size(); ++i) acc.add(v[i]);
    return acc.value();
}

/// Runs fn(i) for i in [0, count) on up to n_threads threads.
/// Results must be written to per-index slots; chunking is contiguous, so the
/// outcome is identical to the serial loop.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                         int n_threads) {
    if (n_threads <= 0) n_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(n_threads, count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace vineclust

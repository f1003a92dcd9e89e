#pragma once

// Combining fitted sub-vines into one joint matrix. Each component occupies
// its own columns with its below-diagonal cells pushed to the bottom rows,
// so a component's tree k lands in the joint matrix's tree k. The cells
// between blocks stay open; the fill step completes them bottom-up, fitting
// copulas in the first k_F trees and closing everything above with a first
// admissible entry and the independence copula.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "vineclust/select/component.hpp"

namespace vineclust {

/// Joint matrix under construction: 0 marks cells the merge left open.
/// pairs(i,j) is meaningful wherever m(i,j) is set.
struct PartialVine {
    IMat m;
    std::vector<std::vector<PairCopula>> pairs;
};

/// Arranges sub-vines and isolated variables into one d-dimensional matrix:
/// isolated variables leftmost in ascending order, then components by
/// increasing size (ties by smallest member), each keeping its internal
/// structure. Inter-block cells are left open.
inline PartialVine merge_subvines(const std::vector<SelectedComponent>& comps,
                                  const std::vector<int>& isolated, int d) {
    if (d < 1) throw data_error("merge_subvines: need d >= 1");
    std::vector<int> seen;
    for (int v : isolated) seen.push_back(v);
    for (const auto& c : comps) seen.insert(seen.end(), c.vars.begin(), c.vars.end());
    std::sort(seen.begin(), seen.end());
    if (static_cast<int>(seen.size()) != d || seen.front() != 1 || seen.back() != d ||
        std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw data_error("merge_subvines: components and isolated variables must partition 1.." +
                         std::to_string(d));

    std::vector<int> iso = isolated;
    std::sort(iso.begin(), iso.end());
    std::vector<const SelectedComponent*> order;
    for (const auto& c : comps) {
        if (c.vars.size() < 2) throw data_error("merge_subvines: component below 2 variables");
        if (static_cast<int>(c.vars.size()) != c.model.dim())
            throw data_error("merge_subvines: model dimension does not match its variable list");
        order.push_back(&c);
    }
    std::sort(order.begin(), order.end(), [](const SelectedComponent* a,
                                             const SelectedComponent* b) {
        if (a->vars.size() != b->vars.size()) return a->vars.size() < b->vars.size();
        return a->vars.front() < b->vars.front();
    });

    PartialVine out;
    out.m = IMat::Zero(d, d);
    out.pairs.assign(d, std::vector<PairCopula>(d));

    int c0 = 0;
    for (int v : iso) out.m(c0, c0) = v, ++c0;
    for (const SelectedComponent* comp : order) {
        const IMat& ms = comp->model.matrix();
        const int nu = comp->model.dim();
        for (int js = 0; js < nu; ++js) {
            out.m(c0 + js, c0 + js) = comp->vars[ms(js, js) - 1];
            for (int is = js + 1; is < nu; ++is) {
                out.m(d - nu + is, c0 + js) = comp->vars[ms(is, js) - 1];
                out.pairs[d - nu + is][c0 + js] = comp->model.pair(is, js);
            }
        }
        c0 += nu;
    }
    return out;
}

/// Completes a merged matrix bottom-up. Open cells in the first k_F trees
/// are estimated: every proximity-admissible entry is fitted against the
/// column's diagonal variable on the tree's pseudo-observations and the best
/// weight wins. Open cells above k_F take the first admissible entry with
/// the independence copula. k_F < 0 means ceil(log d).
inline SelectedVine fill_between_components(const PartialVine& partial, const Mat& u_in,
                                            const SelectionConfig& cfg) {
    const int d = static_cast<int>(partial.m.rows());
    if (partial.m.cols() != d || d < 1) throw data_error("fill: malformed matrix");
    if (static_cast<int>(u_in.cols()) != d) throw data_error("fill: dimension mismatch");
    for (int j = 0; j < d; ++j)
        if (partial.m(j, j) < 1) throw data_error("fill: diagonal must be set");
    const detail::StopWatch clock;

    int kf = cfg.fill_level < 0
                 ? std::min(d - 1, static_cast<int>(std::ceil(std::log(double(d)))))
                 : std::min(cfg.fill_level, d - 1);
    if (cfg.truncation >= 1) kf = std::min(kf, cfg.truncation);
    std::vector<BicopFamily> fill_fams = cfg.fill_families;
    if (fill_fams.empty()) {
        fill_fams = cfg.families;
        if (d > 500) {
            // one-parametric families only; a second parameter per filled
            // cell is rarely worth the estimation cost out here
            std::erase(fill_fams, BicopFamily::student);
        }
    }
    SelectionConfig fill_cfg = cfg;
    fill_cfg.families = fill_fams;

    const Eigen::Index n = u_in.rows();
    Mat u = u_in;
    for (Eigen::Index r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) u(r, c) = clamp_unit(u(r, c));

    IMat m = partial.m;
    auto pairs = partial.pairs;
    FitTrace trace;

    detail::PseudoLevel prev, cur;
    for (int t = 1; t <= d - 1; ++t) {
        const int i = d - t;
        for (int j = 0; j < i; ++j) {
            if (m(i, j) != 0) continue;
            const std::vector<int> cand = admissible_entries(m, i, j);
            if (cand.empty())
                throw numeric_error("fill: no admissible entry for cell (" + std::to_string(i) +
                                    "," + std::to_string(j) + "); merged matrix is inconsistent");
            if (t > kf) {
                m(i, j) = cand.front();
                pairs[i][j] = PairCopula::independence();
                continue;
            }

            const int a = m(j, j);
            const std::vector<int> cond = detail::column_tail(m, i + 1, j);
            Vec raw;
            const Vec* u1 = nullptr;
            if (t == 1) {
                raw = u.col(a - 1);
                u1 = &raw;
            } else {
                u1 = &detail::fetch_pseudo(prev, a, cond);
            }
            std::vector<std::optional<FitResult>> fits(cand.size());
            std::vector<std::exception_ptr> errors(cand.size());
            parallel_for(
                cand.size(),
                [&](std::size_t k) {
                    try {
                        Vec raw2;
                        const Vec* u2 = nullptr;
                        if (t == 1) {
                            raw2 = u.col(cand[k] - 1);
                            u2 = &raw2;
                        } else {
                            u2 = &detail::fetch_pseudo(prev, cand[k], cond);
                        }
                        fits[k] = select_pair_copula(*u1, *u2, fill_cfg.families, fill_cfg.metric,
                                                     fill_cfg.indep_alpha);
                    } catch (...) {
                        errors[k] = std::current_exception();
                    }
                },
                fill_cfg.threads);
            for (const auto& e : errors)
                if (e) std::rethrow_exception(e);

            trace.fitted += static_cast<long long>(cand.size());
            std::size_t best = 0;
            for (std::size_t k = 1; k < cand.size(); ++k)
                if (fits[k]->mu > fits[best]->mu) best = k;
            m(i, j) = cand[best];
            pairs[i][j] = fits[best]->copula;
        }

        if (t < kf) {
            for (int j = 0; j < i; ++j) {
                const int a = m(j, j), b = m(i, j);
                const std::vector<int> cond = detail::column_tail(m, i + 1, j);
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
                std::vector<int> ca = cond, cb = cond;
                ca.insert(std::lower_bound(ca.begin(), ca.end(), b), b);
                cb.insert(std::lower_bound(cb.begin(), cb.end(), a), a);
                const PairCopula& pc = pairs[i][j];
                cur[{a, ca}] = pc.hfunc1(*u1p, *u2p);
                cur[{b, cb}] = pc.hfunc2(*u1p, *u2p);
            }
            prev = std::move(cur);
            cur.clear();
        }
    }

    const MatrixCheck check = validate_rvine_matrix(m);
    if (!check.ok) throw numeric_error("fill: completed matrix is invalid: " + check.violation);
    RVineModel model(m, cfg.truncation);
    for (int j = 0; j < d - 1; ++j)
        for (int i = j + 1; i < d; ++i) model.set_pair(i, j, pairs[i][j]);
    SelectedVine out{std::move(model), trace};
    out.trace.seconds = clock.seconds();
    return out;
}

}  // namespace vineclust

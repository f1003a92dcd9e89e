#pragma once

// The full pipeline: probit-transform the copula data, screen a correlation
// solution path, pick the densest partition whose largest component fits the
// threshold, fit a guided sub-vine per component, then merge and fill.

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vineclust/glasso.hpp"
#include "vineclust/select/component.hpp"
#include "vineclust/select/merge.hpp"

namespace vineclust {

struct ClusterSelection {
    RVineModel model;
    FitTrace component_trace;  // summed over components
    FitTrace fill_trace;
    double screening_seconds = 0.0;
    int partition_index = 0;  // 1-based position in the solution path
    double lambda = 0.0;
    std::vector<std::vector<int>> components;  // 1-based labels, singletons included
    std::vector<int> component_dims;           // sizes of the fitted components
};

inline ClusterSelection rvine_cluster_select(const Mat& u, const SelectionConfig& cfg = {}) {
    const int d = static_cast<int>(u.cols());
    if (d < 2) throw data_error("rvine_cluster_select: need at least 2 variables");
    if (u.rows() < 10) throw data_error("rvine_cluster_select: need at least 10 observations");

    const char* stage = "screening";
    try {
        const detail::StopWatch screen_clock;
        const Mat z = to_z_scale(u);
        const Mat s = sample_correlation(z);

        std::vector<PathPoint> path;
        if (cfg.lambda_override.empty()) {
            path = glasso_path(s, cfg.n_lambda);
        } else {
            std::vector<double> lambdas = cfg.lambda_override;
            std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
            for (double lam : lambdas) {
                PathPoint p;
                p.lambda = lam;
                p.graph = screening_graph(s, lam);
                p.components = connected_components(p.graph);
                p.n_components = static_cast<int>(p.components.size());
                p.max_size = 0;
                for (const auto& c : p.components)
                    p.max_size = std::max(p.max_size, static_cast<int>(c.size()));
                path.push_back(std::move(p));
            }
        }
        const PartitionChoice choice = select_partition(path, cfg.d_max);
        const UndirectedGraph& graph = path[choice.index - 1].graph;
        const double screening_seconds = screen_clock.seconds();

        stage = "component selection";
        std::vector<std::vector<int>> components = choice.components;
        for (auto& vars : components) std::sort(vars.begin(), vars.end());
        std::sort(components.begin(), components.end());

        FitTrace component_trace;
        std::vector<int> component_dims;
        std::vector<SelectedComponent> fitted;
        std::vector<int> isolated;
        for (const auto& vars : components) {
            if (vars.size() < 2) {
                isolated.push_back(vars.front());
                continue;
            }
            fitted.push_back(select_component_rvine(u, vars, graph, cfg));
            component_trace.merge(fitted.back().trace);
            component_dims.push_back(static_cast<int>(vars.size()));
        }

        stage = "merge";
        const PartialVine partial = merge_subvines(fitted, isolated, d);

        stage = "fill";
        SelectedVine filled = fill_between_components(partial, u, cfg);

        ClusterSelection out{std::move(filled.model),
                             component_trace,
                             filled.trace,
                             screening_seconds,
                             choice.index,
                             choice.lambda,
                             std::move(components),
                             std::move(component_dims)};
        return out;
    } catch (const data_error& e) {
        throw data_error("cluster-select [" + std::string(stage) + "]: " + e.what());
    } catch (const numeric_error& e) {
        throw numeric_error("cluster-select [" + std::string(stage) + "]: " + e.what());
    }
}

struct SectorShare {
    std::vector<int> component;
    std::string sector;  // most frequent sector in the component
    int modal_count = 0;
    double rho = 0.0;    // modal_count / component size
};

/// Concentration of the dominant sector per component. Ties pick the
/// lexicographically smallest sector name.
inline std::vector<SectorShare> sector_concentration(
    const std::vector<std::vector<int>>& partition, const std::map<int, std::string>& labels) {
    std::vector<SectorShare> out;
    for (const auto& comp : partition) {
        if (comp.empty()) throw data_error("sector_concentration: empty component");
        std::map<std::string, int> counts;
        for (int v : comp) {
            const auto it = labels.find(v);
            if (it == labels.end())
                throw data_error("sector_concentration: no sector label for variable " +
                                 std::to_string(v));
            ++counts[it->second];
        }
        SectorShare share;
        share.component = comp;
        for (const auto& [sector, count] : counts) {
            if (count > share.modal_count) {
                share.modal_count = count;
                share.sector = sector;
            }
        }
        share.rho = static_cast<double>(share.modal_count) / static_cast<double>(comp.size());
        out.push_back(std::move(share));
    }
    return out;
}

}  // namespace vineclust

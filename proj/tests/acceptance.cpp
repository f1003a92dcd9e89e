// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
// with its wall time; criteria with a time budget fail when they exceed it.
// Exit code is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vineclust/select/cluster.hpp"

using namespace vineclust;

namespace {

struct Checker {
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) notes.push_back(what);
    }

    template <typename T>
    void equal(const T& got, const T& want, const std::string& what) {
        if (got == want) return;
        std::ostringstream s;
        s << what << ": got " << got << ", want " << want;
        notes.push_back(s.str());
    }

    void equal(const std::vector<int>& got, const std::vector<int>& want,
               const std::string& what) {
        if (got == want) return;
        auto render = [](const std::vector<int>& v) {
            std::ostringstream s;
            for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
            return s.str();
        };
        notes.push_back(what + ": got {" + render(got) + "}, want {" + render(want) + "}");
    }

    void close(double got, double want, double tol, const std::string& what) {
        if (std::abs(got - want) <= tol) return;
        std::ostringstream s;
        s << what << ": got " << got << ", want " << want << " +/- " << tol;
        notes.push_back(s.str());
    }
};

// --- shared fixtures -------------------------------------------------------

// six-variable correlation with one strong cluster {4,5,6} that variable 1
// joins at looser thresholds
Mat golden_correlation() {
    Mat s(6, 6);
    s << 1.0000, 0.2058, 0.1794, 0.7340, 0.7298, 0.7167,  //
        0.2058, 1.0000, 0.3212, 0.2643, 0.3158, 0.2848,   //
        0.1794, 0.3212, 1.0000, 0.1895, 0.2105, 0.2327,   //
        0.7340, 0.2643, 0.1895, 1.0000, 0.9606, 0.9089,   //
        0.7298, 0.3158, 0.2105, 0.9606, 1.0000, 0.9378,   //
        0.7167, 0.2848, 0.2327, 0.9089, 0.9378, 1.0000;
    return s;
}

const std::vector<double> golden_lambdas = {0.9607, 0.7438, 0.3452, 0.2070};

std::vector<PathPoint> golden_path() {
    const Mat s = golden_correlation();
    std::vector<PathPoint> path;
    for (double lambda : golden_lambdas) {
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

UndirectedGraph complete_graph(int d) {
    UndirectedGraph g(d);
    for (int i = 1; i <= d; ++i)
        for (int j = i + 1; j <= d; ++j) g.add_edge(i, j);
    return g;
}

SelectionConfig gaussian_config() {
    SelectionConfig cfg;
    cfg.families = {BicopFamily::gaussian};
    return cfg;
}

// C-vine whose star data keeps hub edges dominant at every level: the
// partials decay fast enough (r_{t+1} < r_t/(1+r_t)) that the accumulated
// leaf-leaf association never overtakes a hub pair
RVineModel cvine6() {
    TreeSequence trees;
    for (int t = 1; t <= 5; ++t) {
        std::vector<int> cond;
        for (int c = 1; c < t; ++c) cond.push_back(c);
        std::vector<VineEdge> level;
        for (int j = t + 1; j <= 6; ++j) level.emplace_back(t, j, cond);
        trees.push_back(std::move(level));
    }
    RVineModel model(matrix_from_trees({1, 2, 3, 4, 5, 6}, trees));
    const double rho[5] = {0.8, 0.3, 0.16, 0.0, 0.0};
    for (int j = 0; j < 5; ++j)
        for (int i = j + 1; i < 6; ++i)
            model.set_pair(i, j, PairCopula(BicopFamily::gaussian, Rotation::deg0,
                                            rho[tree_of_row(i, 6) - 1]));
    return model;
}

RVineModel dvine6() {
    TreeSequence trees;
    for (int t = 1; t <= 5; ++t) {
        std::vector<VineEdge> level;
        for (int j = 1; j + t <= 6; ++j) {
            std::vector<int> cond;
            for (int c = j + 1; c < j + t; ++c) cond.push_back(c);
            level.emplace_back(j, j + t, cond);
        }
        trees.push_back(std::move(level));
    }
    RVineModel model(matrix_from_trees({1, 2, 3, 4, 5, 6}, trees));
    const double rho[5] = {0.8, 0.2, 0.1, 0.05, 0.02};
    for (int j = 0; j < 5; ++j)
        for (int i = j + 1; i < 6; ++i)
            model.set_pair(i, j, PairCopula(BicopFamily::gaussian, Rotation::deg0,
                                            rho[tree_of_row(i, 6) - 1]));
    return model;
}

// five-variable C-vine, two estimated trees, the rest independence
RVineModel block5() {
    TreeSequence trees;
    for (int t = 1; t <= 4; ++t) {
        std::vector<int> cond;
        for (int c = 1; c < t; ++c) cond.push_back(c);
        std::vector<VineEdge> level;
        for (int j = t + 1; j <= 5; ++j) level.emplace_back(t, j, cond);
        trees.push_back(std::move(level));
    }
    RVineModel model(matrix_from_trees({1, 2, 3, 4, 5}, trees));
    for (int j = 0; j < 4; ++j)
        for (int i = j + 1; i < 5; ++i) {
            const int t = tree_of_row(i, 5);
            if (t > 2) continue;
            model.set_pair(i, j, PairCopula(BicopFamily::gaussian, Rotation::deg0,
                                            t == 1 ? 0.6 : 0.4));
        }
    return model;
}

Mat block_columns(int n_blocks, int n, unsigned seed) {
    const RVineModel block = block5();
    Mat u(n, 5 * n_blocks);
    for (int b = 0; b < n_blocks; ++b)
        u.middleCols(5 * b, 5) = rvine_simulate(block, n, seed + 131 * b);
    return u;
}

SelectedComponent component_146() {
    IMat m = IMat::Zero(3, 3);
    m(0, 0) = 1;
    m(1, 0) = 3, m(1, 1) = 2;
    m(2, 0) = 2, m(2, 1) = 3, m(2, 2) = 3;
    RVineModel model(m);
    model.set_pair(2, 0, PairCopula(BicopFamily::clayton, Rotation::deg0, 3.0));
    model.set_pair(2, 1, PairCopula(BicopFamily::gumbel, Rotation::deg90, 1.5));
    model.set_pair(1, 0, PairCopula(BicopFamily::frank, Rotation::deg0, 2.0));
    return {std::move(model), {1, 4, 6}, {}};
}

SelectedComponent component_25() {
    IMat m = IMat::Zero(2, 2);
    m(0, 0) = 1;
    m(1, 0) = 2, m(1, 1) = 2;
    RVineModel model(m);
    model.set_pair(1, 0, PairCopula(BicopFamily::gaussian, Rotation::deg0, 0.7));
    return {std::move(model), {2, 5}, {}};
}

Mat clustered8(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> norm;
    Mat z(n, 8);
    for (int i = 0; i < n; ++i) {
        const double f1 = norm(rng), f2 = norm(rng);
        for (int j = 0; j < 8; ++j) {
            const double shared = j < 4 ? f1 : f2;
            z(i, j) = 0.8 * shared + 0.6 * norm(rng);
        }
    }
    return z;
}

UndirectedGraph support_graph(const Mat& theta, double eps = 1e-10) {
    const int d = static_cast<int>(theta.rows());
    UndirectedGraph g(d);
    for (int i = 1; i <= d; ++i)
        for (int j = i + 1; j <= d; ++j)
            if (std::abs(theta(i - 1, j - 1)) > eps) g.add_edge(i, j);
    return g;
}

double kkt_residual(const Mat& s, double lambda, const GlassoResult& fit) {
    const int d = static_cast<int>(s.rows());
    double r = (fit.w - fit.w.transpose()).cwiseAbs().maxCoeff();
    r = std::max(r, (fit.theta - fit.theta.transpose()).cwiseAbs().maxCoeff());
    r = std::max(r, (fit.w * fit.theta - Mat::Identity(d, d)).cwiseAbs().maxCoeff());
    for (int i = 0; i < d; ++i) {
        r = std::max(r, std::abs(fit.w(i, i) - s(i, i) - lambda));
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            const double gap = fit.w(i, j) - s(i, j);
            if (std::abs(fit.theta(i, j)) > 1e-9)
                r = std::max(r, std::abs(gap - lambda * (fit.theta(i, j) > 0 ? 1.0 : -1.0)));
            else
                r = std::max(r, std::max(0.0, std::abs(gap) - lambda));
        }
    }
    return r;
}

// Gauss-Legendre rule mapped to (0,1)
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = 0.5 * (1.0 + x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string join_components(const std::vector<std::vector<int>>& comps) {
    std::ostringstream s;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        if (i) s << " | ";
        for (std::size_t j = 0; j < comps[i].size(); ++j) {
            if (j) s << ",";
            s << comps[i][j];
        }
    }
    return s.str();
}

// --- criteria --------------------------------------------------------------

void screening_ladder(Checker& c) {
    const std::vector<PathPoint> path = golden_path();
    const int want_p[4] = {6, 4, 3, 1};
    const int want_delta[4] = {1, 3, 4, 6};
    for (int t = 0; t < 4; ++t) {
        c.equal(path[t].n_components, want_p[t],
                "component count at lambda " + std::to_string(golden_lambdas[t]));
        c.equal(path[t].max_size, want_delta[t],
                "largest component at lambda " + std::to_string(golden_lambdas[t]));
    }

    IMat want_adj = IMat::Zero(6, 6);
    want_adj(3, 4) = want_adj(4, 3) = 1;
    want_adj(3, 5) = want_adj(5, 3) = 1;
    want_adj(4, 5) = want_adj(5, 4) = 1;
    const IMat adj = path[1].graph.adjacency_matrix();
    c.require((adj.array() == want_adj.array()).all(),
              "adjacency at lambda 0.7438 is not the {4,5,6} triangle");
}

void threshold_partition(Checker& c) {
    const PartitionChoice choice = select_partition(golden_path(), 4);
    c.equal(choice.index, 3, "path index under threshold 4");
    c.close(choice.lambda, 0.3452, 1e-12, "selected lambda");
    const std::vector<std::vector<int>> want = {{1, 4, 5, 6}, {2}, {3}};
    if (choice.components != want)
        c.notes.push_back("partition: got " + join_components(choice.components) +
                          ", want " + join_components(want));
}

void merge_and_admissible(Checker& c) {
    PartialVine pv = merge_subvines({component_146(), component_25()}, {3}, 6);

    const int want_diag[6] = {3, 2, 5, 1, 4, 6};
    for (int j = 0; j < 6; ++j)
        c.equal(pv.m(j, j), want_diag[j], "diagonal entry " + std::to_string(j));

    c.equal(admissible_entries(pv.m, 5, 0), std::vector<int>{2, 5, 1, 4, 6},
            "tree-1 admissible set for column 0");
    c.equal(admissible_entries(pv.m, 5, 2), std::vector<int>{1, 4, 6},
            "tree-1 admissible set for column 2");

    pv.m(5, 0) = 2;
    pv.m(5, 2) = 1;
    c.equal(admissible_entries(pv.m, 4, 0), std::vector<int>{5}, "tree-2 entry, column 0");
    c.equal(admissible_entries(pv.m, 4, 1), std::vector<int>{1}, "tree-2 entry, column 1");
    c.equal(admissible_entries(pv.m, 4, 2), std::vector<int>{4}, "tree-2 entry, column 2");

    for (int t = 1; t <= 5; ++t) {
        const int i = 6 - t;
        for (int j = 0; j < i; ++j) {
            if (pv.m(i, j) != 0) continue;
            const std::vector<int> cand = admissible_entries(pv.m, i, j);
            if (cand.empty()) {
                c.notes.push_back("no admissible entry for open cell (" + std::to_string(i) +
                                  "," + std::to_string(j) + ")");
                return;
            }
            pv.m(i, j) = cand.front();
        }
    }
    const MatrixCheck check = validate_rvine_matrix(pv.m);
    c.require(check.ok, "completed matrix is invalid: " + check.violation);
}

void candidate_counters(Checker& c) {
    const Mat uc = rvine_simulate(cvine6(), 3000, 47);
    const SelectedComponent star =
        select_component_rvine(uc, {1, 2, 3, 4, 5, 6}, complete_graph(6), gaussian_config());
    c.equal(star.trace.fitted, 34LL, "C-vine candidate fits ((nu^3-nu)/6 - 1)");
    c.equal(star.trace.forced, 0LL, "C-vine forced pairs");

    const Mat ud = rvine_simulate(dvine6(), 2000, 53);
    const SelectedComponent path =
        select_component_rvine(ud, {1, 2, 3, 4, 5, 6}, complete_graph(6), gaussian_config());
    c.require(path.trace.fitted <= 15, "D-vine candidate fits exceed nu(nu-1)/2 = 15: " +
                                           std::to_string(path.trace.fitted));
}

void glasso_correctness(Checker& c) {
    std::mt19937_64 rng(404);
    std::normal_distribution<double> norm;
    Mat a(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) a(i, j) = norm(rng);
    Mat s0 = a * a.transpose() + 5.0 * Mat::Identity(5, 5);
    const Vec scale = s0.diagonal().array().sqrt().inverse();
    const Mat s5 = scale.asDiagonal() * s0 * scale.asDiagonal();

    const GlassoResult unpenalized = glasso_fit(s5, 0.0);
    const double inv_err = (unpenalized.theta - s5.inverse()).cwiseAbs().maxCoeff();
    c.require(inv_err < 1e-6,
              "lambda=0 inverse error " + std::to_string(inv_err) + " exceeds 1e-6");

    for (double lambda : {0.1, 0.3}) {
        for (const Mat& s : {s5, golden_correlation()}) {
            const double r = kkt_residual(s, lambda, glasso_fit(s, lambda));
            c.require(r <= 1e-6, "KKT residual " + std::to_string(r) + " at lambda " +
                                     std::to_string(lambda));
        }
    }

    int mismatches = 0;
    for (unsigned seed = 1; seed <= 100; ++seed) {
        const Mat s = sample_correlation(clustered8(400, seed));
        for (double lambda : {0.15, 0.4, 0.7}) {
            const auto screened = connected_components(screening_graph(s, lambda));
            const auto support =
                connected_components(support_graph(glasso_fit(s, lambda).theta));
            if (screened != support) ++mismatches;
        }
    }
    c.equal(mismatches, 0, "screening/support component mismatches over 100 trials");
}

void density_normalization(Checker& c) {
    TreeSequence trees{{VineEdge(1, 2), VineEdge(2, 3)}, {VineEdge(1, 3, {2})}};
    RVineModel model(matrix_from_trees({1, 2, 3}, trees));
    model.set_pair(2, 0, PairCopula(BicopFamily::clayton, Rotation::deg0, 0.8));
    model.set_pair(2, 1, PairCopula(BicopFamily::gumbel, Rotation::deg0, 1.3));
    model.set_pair(1, 0, PairCopula(BicopFamily::frank, Rotation::deg0, 2.0));

    const int nq = 96;
    std::vector<double> nodes, weights;
    gauss_legendre(nq, nodes, weights);

    Mat grid(nq * nq * nq, 3);
    Vec w(nq * nq * nq);
    Eigen::Index r = 0;
    for (int i = 0; i < nq; ++i)
        for (int j = 0; j < nq; ++j)
            for (int k = 0; k < nq; ++k) {
                grid(r, 0) = nodes[i];
                grid(r, 1) = nodes[j];
                grid(r, 2) = nodes[k];
                w[r++] = weights[i] * weights[j] * weights[k];
            }

    const LoglikResult res = rvine_loglik(model, grid);
    const double integral = (res.per_obs.array().exp() * w.array()).sum();
    c.close(integral, 1.0, 1e-2, "density integral over the unit cube");
}

void simulation_fidelity(Checker& c) {
    IMat m2(2, 2);
    m2 << 1, 0, 2, 2;

    RVineModel gauss(m2);
    gauss.set_pair(1, 0, PairCopula(BicopFamily::gaussian, Rotation::deg0, 0.7));
    const Mat ug = rvine_simulate(gauss, 10000, 7);
    c.close(kendall_tau(ug.col(0), ug.col(1)), 0.4936, 0.02, "gaussian rho=0.7 tau");

    RVineModel clayton(m2);
    clayton.set_pair(1, 0, PairCopula(BicopFamily::clayton, Rotation::deg0, 2.0));
    const Mat uc = rvine_simulate(clayton, 10000, 9);
    c.close(kendall_tau(uc.col(0), uc.col(1)), 0.5, 0.02, "clayton theta=2 tau");
}

void independence_calibration(Checker& c) {
    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int trials = 1000, n = 200;
    int rejections = 0;
    Vec u(n), v(n);
    for (int t = 0; t < trials; ++t) {
        for (int i = 0; i < n; ++i) {
            u[i] = unif(rng);
            v[i] = unif(rng);
        }
        rejections += independence_test(u, v, 0.05) ? 1 : 0;
    }
    c.close(rejections / double(trials), 0.05, 0.02, "rejection rate under independence");
}

void block_recovery(Checker& c) {
    const int p_true = 4 * 7;
    int closer = 0;
    std::vector<double> gic_cluster, gic_global;

    for (int rep = 0; rep < 10; ++rep) {
        const Mat u = block_columns(4, 1000, 9001 + 977 * rep);
        const std::size_t n = static_cast<std::size_t>(u.rows());

        SelectionConfig cfg = gaussian_config();
        cfg.d_max = 20;
        cfg.fill_level = 3;
        const ClusterSelection cluster = rvine_cluster_select(u, cfg);
        const int p_c = static_cast<int>(cluster.model.count_parameters());
        gic_cluster.push_back(
            information_criteria(rvine_loglik(cluster.model, u).loglik, p_c, n).gic);

        const SelectedVine global = dissmann_select(u, gaussian_config());
        const int p_d = static_cast<int>(global.model.count_parameters());
        gic_global.push_back(
            information_criteria(rvine_loglik(global.model, u).loglik, p_d, n).gic);

        if (std::abs(p_c - p_true) < std::abs(p_d - p_true)) ++closer;
    }

    c.require(closer >= 7, "cluster parameter count closer to truth in only " +
                               std::to_string(closer) + "/10 replications");
    const double mc = median(gic_cluster), mg = median(gic_global);
    c.require(mc <= mg, "median GIC: cluster " + std::to_string(mc) + " vs global " +
                            std::to_string(mg));
}

void counter_scaling(Checker& c) {
    const Mat u100 = block_columns(20, 500, 20001);
    std::vector<int> dims = {25, 50, 100};
    std::vector<double> cluster_counts, global_counts;

    for (int d : dims) {
        const Mat u = u100.leftCols(d);

        SelectionConfig cfg = gaussian_config();
        cfg.d_max = 25;
        cfg.fill_level = 0;
        cfg.lambda_override = {0.5, 0.35, 0.2};
        const ClusterSelection cluster = rvine_cluster_select(u, cfg);
        cluster_counts.push_back(double(cluster.component_trace.fitted +
                                        cluster.component_trace.structural +
                                        cluster.fill_trace.fitted));

        const SelectedVine global = dissmann_select(u, gaussian_config());
        global_counts.push_back(double(global.trace.fitted));
        c.equal(global.trace.fitted, static_cast<long long>(d) * (d - 1) / 2,
                "global fit count at d=" + std::to_string(d));
    }

    const double slope = std::log(cluster_counts[2] / cluster_counts[0]) /
                         std::log(double(dims[2]) / dims[0]);
    c.require(slope <= 1.5, "cluster counter log-log slope " + std::to_string(slope) +
                                " exceeds 1.5");
    c.require(cluster_counts[2] < global_counts[2],
              "cluster performs more fits than the global method at d=100");
}

void sector_unit_cases(Checker& c) {
    const std::map<int, std::string> labels{{1, "energy"}, {2, "energy"}, {3, "tech"},
                                            {4, "tech"},   {5, "tech"},  {6, "energy"}};
    const auto shares = sector_concentration({{1, 2, 6}, {3, 4, 5}, {1, 2, 3}}, labels);
    c.equal(shares.size(), std::size_t{3}, "share count");
    if (shares.size() != 3) return;
    c.require(shares[0].rho == 1.0 && shares[0].sector == "energy",
              "pure energy component must have rho exactly 1");
    c.require(shares[1].rho == 1.0 && shares[1].sector == "tech",
              "pure tech component must have rho exactly 1");
    c.require(shares[2].rho == 2.0 / 3.0 && shares[2].modal_count == 2,
              "mixed component must have rho exactly 2/3");
}

struct Criterion {
    std::string name;
    double budget;  // seconds; 0 = no budget
    std::function<void(Checker&)> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"screening ladder on the six-variable golden matrix", 1.0, screening_ladder},
        {"threshold 4 selects the three-part partition", 0.0, threshold_partition},
        {"merge layout, admissible sets, and completion", 0.0, merge_and_admissible},
        {"candidate-fit counters for forced structures", 10.0, candidate_counters},
        {"glasso inverse, KKT residuals, support equivalence", 30.0, glasso_correctness},
        {"three-dimensional density integrates to one", 60.0, density_normalization},
        {"simulation fidelity on known tau", 0.0, simulation_fidelity},
        {"independence test calibration at the 5% level", 0.0, independence_calibration},
        {"block-structured d=20 study beats the global fit", 1200.0, block_recovery},
        {"fit counters scale subquadratically on nested data", 1800.0, counter_scaling},
        {"sector concentration unit cases", 0.0, sector_unit_cases},
    };

    int failures = 0;
    for (const Criterion& crit : criteria) {
        Checker check;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            crit.run(check);
        } catch (const std::exception& e) {
            check.notes.push_back(std::string("exception: ") + e.what());
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (crit.budget > 0.0 && seconds > crit.budget) {
            std::ostringstream s;
            s << "took " << seconds << " s, budget " << crit.budget << " s";
            check.notes.push_back(s.str());
        }
        const bool ok = check.notes.empty();
        std::printf("%s  %-55s %9.2f s\n", ok ? "PASS" : "FAIL", crit.name.c_str(), seconds);
        for (const std::string& note : check.notes) std::printf("      - %s\n", note.c_str());
        failures += ok ? 0 : 1;
    }

    std::printf("\n%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
    return failures;
}

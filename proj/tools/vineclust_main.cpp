// vineclust: fit, evaluate, compare, and simulate vine copula models from
// the command line. Subcommands write model documents as JSON and reports
// as tab-separated key/value text. Exit codes: 0 success, 1 usage error,
// 2 data error, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vineclust/data.hpp"
#include "vineclust/rvine/serialize.hpp"
#include "vineclust/select/cluster.hpp"

namespace vc = vineclust;

namespace {

struct FitFlags {
    std::string data_path;
    std::string scale = "u";
    std::string method = "cluster";
    std::string out_path;
    std::string report_path;
    std::string metric = "aic";
    std::vector<std::string> families;
    std::vector<std::string> fill_families;
    std::vector<double> lambdas;
    double indep_alpha = 0.0;
    int d_max = 50;
    int fill_level = -1;
    int truncation = 0;
    int n_lambda = 30;
    int threads = 1;
    bool no_timestamp = false;
};

std::vector<vc::BicopFamily> parse_families(const std::vector<std::string>& names) {
    std::vector<vc::BicopFamily> out;
    for (const auto& n : names) out.push_back(vc::family_from_name(n));
    return out;
}

vc::SelectionConfig make_config(const FitFlags& f) {
    vc::SelectionConfig cfg;
    cfg.d_max = f.d_max;
    cfg.fill_level = f.fill_level;
    if (!f.families.empty()) cfg.families = parse_families(f.families);
    if (!f.fill_families.empty()) cfg.fill_families = parse_families(f.fill_families);
    cfg.metric = vc::metric_from_name(f.metric);
    if (f.indep_alpha > 0.0) cfg.indep_alpha = f.indep_alpha;
    cfg.truncation = f.truncation;
    cfg.n_lambda = f.n_lambda;
    cfg.lambda_override = f.lambdas;
    cfg.threads = f.threads;
    return cfg;
}

std::string iso_timestamp() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        vc::atomic_write(path, text);
}

std::string format_number(double v) {
    std::ostringstream s;
    s << std::setprecision(12) << v;
    return s.str();
}

// family histogram and student degrees of freedom over all cells
void model_summary_lines(const vc::RVineModel& model, std::ostringstream& out) {
    std::map<std::string, int> hist;
    std::vector<double> dofs;
    for (int j = 0; j < model.dim() - 1; ++j)
        for (int i = j + 1; i < model.dim(); ++i) {
            const vc::PairCopula& pc = model.pair(i, j);
            ++hist[vc::family_name(pc.family())];
            if (pc.family() == vc::BicopFamily::student) dofs.push_back(pc.theta2());
        }
    for (const auto& [name, count] : hist) out << "family_" << name << '\t' << count << '\n';
    if (!dofs.empty()) {
        out << "student_dof";
        for (std::size_t k = 0; k < dofs.size(); ++k)
            out << (k ? "," : "\t") << format_number(dofs[k]);
        out << '\n';
    }
}

void criteria_lines(double loglik, int nparams, std::size_t n, std::ostringstream& out) {
    const vc::InfoCriteria ic = vc::information_criteria(loglik, nparams, n);
    out << "loglik\t" << format_number(loglik) << '\n';
    out << "nparams\t" << nparams << '\n';
    out << "aic\t" << format_number(ic.aic) << '\n';
    out << "bic\t" << format_number(ic.bic) << '\n';
    out << "gic\t" << format_number(ic.gic) << '\n';
}

int run_fit(const FitFlags& f) {
    const vc::Dataset ds = vc::ingest_csv(f.data_path, f.scale);
    if (ds.clamped > 0)
        std::cerr << "warning: " << ds.clamped << " boundary value(s) clamped into (0,1)\n";
    const vc::SelectionConfig cfg = make_config(f);

    std::ostringstream report;
    report << "key\tvalue\n";
    report << "method\t" << f.method << '\n';
    report << "n\t" << ds.u.rows() << '\n';
    report << "d\t" << ds.u.cols() << '\n';

    vc::IMat placeholder(2, 2);
    placeholder << 1, 0, 2, 2;
    vc::RVineModel model(placeholder);
    if (f.method == "cluster") {
        const vc::ClusterSelection sel = vc::rvine_cluster_select(ds.u, cfg);
        model = sel.model;
        int delta = 1;
        for (const auto& comp : sel.components)
            delta = std::max(delta, static_cast<int>(comp.size()));
        report << "T\t" << sel.partition_index << '\n';
        report << "lambda_T\t" << format_number(sel.lambda) << '\n';
        report << "p_T\t" << sel.components.size() << '\n';
        report << "delta_T\t" << delta << '\n';
        std::ostringstream parts;
        for (std::size_t c = 0; c < sel.components.size(); ++c) {
            if (c) parts << '|';
            for (std::size_t k = 0; k < sel.components[c].size(); ++k)
                parts << (k ? "," : "") << sel.components[c][k];
        }
        report << "partition\t" << parts.str() << '\n';
        report << "fits_component\t" << sel.component_trace.fitted << '\n';
        report << "forced_component\t" << sel.component_trace.forced << '\n';
        report << "structural_component\t" << sel.component_trace.structural << '\n';
        report << "fits_fill\t" << sel.fill_trace.fitted << '\n';
        report << "seconds_screening\t" << format_number(sel.screening_seconds) << '\n';
        report << "seconds_components\t" << format_number(sel.component_trace.seconds) << '\n';
        report << "seconds_fill\t" << format_number(sel.fill_trace.seconds) << '\n';
    } else {
        const vc::SelectedVine sel = vc::dissmann_select(ds.u, cfg);
        model = sel.model;
        report << "fits\t" << sel.trace.fitted << '\n';
        report << "seconds_fit\t" << format_number(sel.trace.seconds) << '\n';
    }
    model.set_names(ds.names);

    const vc::LoglikResult ll = vc::rvine_loglik(model, ds.u);
    const int p = model.count_parameters();
    const std::size_t n = static_cast<std::size_t>(ds.u.rows());
    criteria_lines(ll.loglik, p, n, report);
    model_summary_lines(model, report);

    vc::FitMetadata meta;
    meta.n = n;
    meta.loglik = ll.loglik;
    meta.ic = vc::information_criteria(ll.loglik, p, n);
    nlohmann::json extra = nlohmann::json::object();
    if (!f.no_timestamp) extra["created"] = iso_timestamp();
    vc::save_model(f.out_path, model, meta, extra);
    report << "model_file\t" << f.out_path << '\n';

    emit(f.report_path, report.str());
    return 0;
}

int run_simulate(const std::string& model_path, long long n, unsigned long long seed,
                 const std::string& out_path) {
    const vc::RVineModel model = vc::load_model(model_path);
    std::vector<std::string> names = model.names();
    if (names.empty())
        for (int j = 1; j <= model.dim(); ++j) names.push_back("V" + std::to_string(j));
    const vc::Mat u = n == 0 ? vc::Mat(0, model.dim())
                             : vc::rvine_simulate(model, static_cast<std::size_t>(n), seed);
    emit(out_path, vc::format_csv(names, u));
    return 0;
}

int run_evaluate(const std::string& model_path, const std::string& data_path,
                 const std::string& scale, const std::string& report_path) {
    const vc::RVineModel model = vc::load_model(model_path);
    const vc::Dataset ds = vc::ingest_csv(data_path, scale);
    if (model.dim() != static_cast<int>(ds.u.cols()))
        throw vc::data_error("evaluate: model has " + std::to_string(model.dim()) +
                             " variables, data has " + std::to_string(ds.u.cols()));
    const vc::LoglikResult ll = vc::rvine_loglik(model, ds.u);
    std::ostringstream report;
    report << "key\tvalue\n";
    report << "model\t" << model_path << '\n';
    report << "n\t" << ds.u.rows() << '\n';
    report << "d\t" << ds.u.cols() << '\n';
    criteria_lines(ll.loglik, model.count_parameters(), static_cast<std::size_t>(ds.u.rows()),
                   report);
    model_summary_lines(model, report);
    emit(report_path, report.str());
    return 0;
}

int run_compare(const std::vector<std::string>& model_paths, const std::string& data_path,
                const std::string& scale, const std::string& out_path,
                const std::string& long_path) {
    const vc::Dataset ds = vc::ingest_csv(data_path, scale);
    std::ostringstream table, longf;
    table << "model\tloglik\tnparams\taic\tbic\tgic\tseconds\n";
    longf << "model\tmetric\tvalue\n";
    for (const auto& path : model_paths) {
        const vc::RVineModel model = vc::load_model(path);
        if (model.dim() != static_cast<int>(ds.u.cols()))
            throw vc::data_error("compare: model " + path + " has " +
                                 std::to_string(model.dim()) + " variables, data has " +
                                 std::to_string(ds.u.cols()));
        const auto t0 = std::chrono::steady_clock::now();
        const vc::LoglikResult ll = vc::rvine_loglik(model, ds.u);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                .count();
        const int p = model.count_parameters();
        const vc::InfoCriteria ic =
            vc::information_criteria(ll.loglik, p, static_cast<std::size_t>(ds.u.rows()));
        table << path << '\t' << format_number(ll.loglik) << '\t' << p << '\t'
              << format_number(ic.aic) << '\t' << format_number(ic.bic) << '\t'
              << format_number(ic.gic) << '\t' << format_number(secs) << '\n';
        longf << path << "\tloglik\t" << format_number(ll.loglik) << '\n';
        longf << path << "\tnparams\t" << p << '\n';
        longf << path << "\taic\t" << format_number(ic.aic) << '\n';
        longf << path << "\tbic\t" << format_number(ic.bic) << '\n';
        longf << path << "\tgic\t" << format_number(ic.gic) << '\n';
    }
    emit(out_path, table.str());
    if (!long_path.empty()) vc::atomic_write(long_path, longf.str());
    return 0;
}

int run_glasso_path(const std::string& data_path, const std::string& scale, int n_lambda,
                    const std::vector<double>& lambdas, const std::string& out_path) {
    const vc::Dataset ds = vc::ingest_csv(data_path, scale);
    const vc::Mat s = vc::sample_correlation(vc::to_z_scale(ds.u));
    std::vector<vc::PathPoint> path;
    if (lambdas.empty()) {
        path = vc::glasso_path(s, n_lambda);
    } else {
        std::vector<double> sorted = lambdas;
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        for (double lam : sorted) {
            vc::PathPoint pt;
            pt.lambda = lam;
            pt.graph = vc::screening_graph(s, lam);
            pt.components = vc::connected_components(pt.graph);
            pt.n_components = static_cast<int>(pt.components.size());
            for (const auto& c : pt.components)
                pt.max_size = std::max(pt.max_size, static_cast<int>(c.size()));
            path.push_back(std::move(pt));
        }
    }
    std::ostringstream out;
    out << "T\tlambda\tp\tdelta\tcomponents\n";
    for (std::size_t j = 0; j < path.size(); ++j) {
        out << j + 1 << '\t' << format_number(path[j].lambda) << '\t' << path[j].n_components
            << '\t' << path[j].max_size << '\t';
        for (std::size_t c = 0; c < path[j].components.size(); ++c) {
            if (c) out << '|';
            for (std::size_t k = 0; k < path[j].components[c].size(); ++k)
                out << (k ? "," : "") << path[j].components[c][k];
        }
        out << '\n';
    }
    emit(out_path, out.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vine copula fitting with graphical-model clustering"};
    app.require_subcommand(1);

    FitFlags fit;
    CLI::App* cmd_fit = app.add_subcommand("fit", "fit a vine copula model to a data file");
    cmd_fit->add_option("--data", fit.data_path, "input data file")->required();
    cmd_fit->add_option("--scale", fit.scale, "data scale: u (copula) or x (ranks)")
        ->check(CLI::IsMember({"u", "x"}))
        ->capture_default_str();
    cmd_fit->add_option("--method", fit.method, "selection method")
        ->check(CLI::IsMember({"cluster", "dissmann"}))
        ->capture_default_str();
    cmd_fit->add_option("--out", fit.out_path, "model output file")->required();
    cmd_fit->add_option("--report", fit.report_path, "report file (default: stdout)");
    cmd_fit->add_option("--d-max", fit.d_max, "largest component size accepted")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd_fit->add_option("--fill-level", fit.fill_level,
                        "trees estimated between components (-1: ceil(log d))");
    const CLI::IsMember family_names(
        std::vector<std::string>{"gaussian", "student", "clayton", "gumbel", "frank", "joe"});
    cmd_fit->add_option("--families", fit.families, "candidate pair-copula families")
        ->delimiter(',')
        ->check(family_names);
    cmd_fit->add_option("--fill-families", fit.fill_families, "families for the fill trees")
        ->delimiter(',')
        ->check(family_names);
    cmd_fit->add_option("--indep-alpha", fit.indep_alpha,
                        "independence pre-test level (0: off)");
    cmd_fit->add_option("--truncation", fit.truncation, "truncation level (0: none)");
    cmd_fit->add_option("--metric", fit.metric, "edge weight: loglik, aic, or bic")
        ->check(CLI::IsMember({"loglik", "aic", "bic"}))
        ->capture_default_str();
    cmd_fit->add_option("--nlambda", fit.n_lambda, "screening path length")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd_fit->add_option("--lambda", fit.lambdas, "explicit screening thresholds")
        ->delimiter(',');
    cmd_fit->add_option("--threads", fit.threads, "worker thread cap")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd_fit->add_flag("--no-timestamp", fit.no_timestamp,
                      "omit the created field from the model file");

    std::string sim_model, sim_out;
    long long sim_n = 0;
    unsigned long long sim_seed = 1;
    CLI::App* cmd_sim = app.add_subcommand("simulate", "sample from a saved model");
    cmd_sim->add_option("--model", sim_model, "model file")->required();
    cmd_sim->add_option("--n", sim_n, "number of observations")
        ->check(CLI::NonNegativeNumber)
        ->required();
    cmd_sim->add_option("--seed", sim_seed, "random seed")->capture_default_str();
    cmd_sim->add_option("--out", sim_out, "output data file")->required();

    std::string eval_model, eval_data, eval_scale = "u", eval_report;
    CLI::App* cmd_eval = app.add_subcommand("evaluate", "evaluate a saved model on data");
    cmd_eval->add_option("--model", eval_model, "model file")->required();
    cmd_eval->add_option("--data", eval_data, "data file")->required();
    cmd_eval->add_option("--scale", eval_scale, "data scale")
        ->check(CLI::IsMember({"u", "x"}))
        ->capture_default_str();
    cmd_eval->add_option("--report", eval_report, "report file (default: stdout)");

    std::vector<std::string> cmp_models;
    std::string cmp_data, cmp_scale = "u", cmp_out, cmp_long;
    CLI::App* cmd_cmp = app.add_subcommand("compare", "evaluate several models on one dataset");
    cmd_cmp->add_option("--models", cmp_models, "model files")->required()->expected(-1);
    cmd_cmp->add_option("--data", cmp_data, "data file")->required();
    cmd_cmp->add_option("--scale", cmp_scale, "data scale")
        ->check(CLI::IsMember({"u", "x"}))
        ->capture_default_str();
    cmd_cmp->add_option("--out", cmp_out, "table output (default: stdout)");
    cmd_cmp->add_option("--long", cmp_long, "long-format metric rows output");

    std::string gp_data, gp_scale = "u", gp_out;
    int gp_nlambda = 30;
    std::vector<double> gp_lambdas;
    CLI::App* cmd_gp = app.add_subcommand("glasso-path", "emit the screening solution path");
    cmd_gp->add_option("--data", gp_data, "data file")->required();
    cmd_gp->add_option("--scale", gp_scale, "data scale")
        ->check(CLI::IsMember({"u", "x"}))
        ->capture_default_str();
    cmd_gp->add_option("--nlambda", gp_nlambda, "path length")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd_gp->add_option("--lambda", gp_lambdas, "explicit thresholds")->delimiter(',');
    cmd_gp->add_option("--out", gp_out, "output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 1;
    }

    try {
        if (*cmd_fit) return run_fit(fit);
        if (*cmd_sim) return run_simulate(sim_model, sim_n, sim_seed, sim_out);
        if (*cmd_eval) return run_evaluate(eval_model, eval_data, eval_scale, eval_report);
        if (*cmd_cmp) return run_compare(cmp_models, cmp_data, cmp_scale, cmp_out, cmp_long);
        if (*cmd_gp) return run_glasso_path(gp_data, gp_scale, gp_nlambda, gp_lambdas, gp_out);
    } catch (const vc::data_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const vc::numeric_error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 1;
}

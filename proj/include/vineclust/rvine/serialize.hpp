#pragma once

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "vineclust/rvine/model.hpp"

namespace vineclust {

struct FitMetadata {
    std::size_t n = 0;
    double loglik = 0.0;
    InfoCriteria ic;
};

/// Model document: matrix and copula grids as row-major lists over the full
/// d x d shape, families as rotation-suffixed codes. Deterministic output:
/// no timestamps and no environment-dependent fields.
inline nlohmann::json serialize_model(const RVineModel& model,
                                      const std::optional<FitMetadata>& fit = std::nullopt) {
    const int d = model.dim();
    nlohmann::json doc;
    doc["d"] = d;
    doc["names"] = model.names();
    doc["truncation"] = model.truncation();

    std::vector<int> matrix;
    std::vector<std::string> families;
    std::vector<double> params1, params2;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            matrix.push_back(model.matrix()(i, j));
            if (i > j) {
                const PairCopula& pc = model.pair(i, j);
                families.push_back(pc.code());
                params1.push_back(pc.theta());
                params2.push_back(pc.theta2());
            } else {
                families.push_back("");
                params1.push_back(0.0);
                params2.push_back(0.0);
            }
        }
    }
    doc["matrix"] = matrix;
    doc["families"] = families;
    doc["params1"] = params1;
    doc["params2"] = params2;

    if (fit) {
        doc["fit"] = {{"n", fit->n},
                      {"loglik", fit->loglik},
                      {"aic", fit->ic.aic},
                      {"bic", fit->ic.bic},
                      {"gic", fit->ic.gic},
                      {"nparams", model.count_parameters()}};
    }
    return doc;
}

inline RVineModel deserialize_model(const nlohmann::json& doc) {
    if (!doc.contains("d") || !doc.contains("matrix") || !doc.contains("families"))
        throw data_error("model document: missing d/matrix/families");
    const int d = doc.at("d").get<int>();
    if (d < 2) throw data_error("model document: d must be at least 2");

    const auto matrix = doc.at("matrix").get<std::vector<int>>();
    const auto families = doc.at("families").get<std::vector<std::string>>();
    const auto params1 = doc.at("params1").get<std::vector<double>>();
    const auto params2 = doc.at("params2").get<std::vector<double>>();
    const std::size_t cells = static_cast<std::size_t>(d) * d;
    if (matrix.size() != cells || families.size() != cells || params1.size() != cells ||
        params2.size() != cells)
        throw data_error("model document: grids must hold d*d entries");

    IMat m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = matrix[static_cast<std::size_t>(i) * d + j];

    const int trunc = doc.value("truncation", d - 1);
    RVineModel model(m, trunc);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < i; ++j) {
            const std::size_t k = static_cast<std::size_t>(i) * d + j;
            const auto [fam, rot] = parse_family_code(families[k]);
            model.set_pair(i, j, fam == BicopFamily::indep
                                     ? PairCopula::independence()
                                     : PairCopula(fam, rot, params1[k], params2[k]));
        }
    }
    if (doc.contains("names")) model.set_names(doc.at("names").get<std::vector<std::string>>());
    return model;
}

/// Writes text to path atomically: temp file in the same directory, then rename.
inline void atomic_write(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw data_error("cannot open " + tmp + " for writing");
        out << text;
        if (!out.flush()) throw data_error("write to " + tmp + " failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw data_error("cannot move " + tmp + " into place");
    }
}

inline void save_model(const std::string& path, const RVineModel& model,
                       const std::optional<FitMetadata>& fit = std::nullopt,
                       nlohmann::json extra = nlohmann::json::object()) {
    nlohmann::json doc = serialize_model(model, fit);
    for (auto& [key, value] : extra.items()) doc[key] = value;
    atomic_write(path, doc.dump(2) + "\n");
}

inline RVineModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open model file " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw data_error("model file " + path + " is not valid JSON: " + e.what());
    }
    return deserialize_model(doc);
}

}  // namespace vineclust

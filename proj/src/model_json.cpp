#include "fhinf/model_json.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fhinf {

using nlohmann::json;

namespace {

Matrix matrix_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) {
        throw std::runtime_error(path + ": expected a nonempty array of rows");
    }
    // Accept [[..],[..]] for matrices and [..] as a single-column vector.
    if (!j[0].is_array()) {
        Matrix m(static_cast<Eigen::Index>(j.size()), 1);
        for (std::size_t r = 0; r < j.size(); ++r) {
            m(static_cast<Eigen::Index>(r), 0) = j[r].get<double>();
        }
        return m;
    }
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            throw std::runtime_error(path + ": ragged rows");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
        }
    }
    return m;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(row);
    }
    return rows;
}

GradeFamily family_from_string(const std::string& s) {
    if (s == "logistic_complement") return GradeFamily::LogisticComplement;
    if (s == "logistic") return GradeFamily::Logistic;
    if (s == "gaussian") return GradeFamily::Gaussian;
    if (s == "triangular") return GradeFamily::Triangular;
    if (s == "constant") return GradeFamily::Constant;
    if (s == "table") return GradeFamily::Table;
    throw std::runtime_error("unknown membership grade family: " + s);
}

std::string family_to_string(GradeFamily f) {
    switch (f) {
        case GradeFamily::LogisticComplement: return "logistic_complement";
        case GradeFamily::Logistic: return "logistic";
        case GradeFamily::Gaussian: return "gaussian";
        case GradeFamily::Triangular: return "triangular";
        case GradeFamily::Constant: return "constant";
        case GradeFamily::Table: return "table";
    }
    return "unknown";
}

Grade grade_from_json(const json& j, const std::string& path) {
    Grade g;
    g.family = family_from_string(j.at("family").get<std::string>());
    const json params = j.value("params", json::object());
    g.a = params.value("a", 0.0);
    g.b = params.value("b", 0.0);
    g.c = params.value("c", 0.0);
    if (g.family == GradeFamily::Table) {
        if (!params.contains("breakpoints") || !params.contains("values")) {
            throw std::runtime_error(path + ": table grade needs breakpoints and values");
        }
        g.breakpoints = params.at("breakpoints").get<std::vector<double>>();
        g.values = params.at("values").get<std::vector<double>>();
    }
    return g;
}

json grade_to_json(const Grade& g) {
    json params;
    switch (g.family) {
        case GradeFamily::LogisticComplement:
        case GradeFamily::Logistic:
            params = {{"a", g.a}, {"b", g.b}, {"c", g.c}};
            break;
        case GradeFamily::Gaussian:
            params = {{"a", g.a}, {"b", g.b}};
            break;
        case GradeFamily::Triangular:
            params = {{"a", g.a}, {"b", g.b}, {"c", g.c}};
            break;
        case GradeFamily::Constant:
            params = {{"a", g.a}};
            break;
        case GradeFamily::Table:
            params = {{"breakpoints", g.breakpoints}, {"values", g.values}};
            break;
    }
    return {{"family", family_to_string(g.family)}, {"params", params}};
}

}  // namespace

TsDelayModel parse_model(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("model JSON parse error: ") + e.what());
    }

    TsDelayModel model;
    try {
        model.n = j.at("n").get<int>();
        model.n_w = j.at("n_w").get<int>();
        model.n_y = j.at("n_y").get<int>();
        model.n_z = j.at("n_z").get<int>();

        const json& rules = j.at("rules");
        for (std::size_t i = 0; i < rules.size(); ++i) {
            const json& r = rules[i];
            const std::string base = "rules[" + std::to_string(i) + "].";
            RuleMatrices m;
            m.A = matrix_from_json(r.at("A"), base + "A");
            m.A_tau = matrix_from_json(r.at("A_tau"), base + "A_tau");
            m.B = matrix_from_json(r.at("B"), base + "B");
            m.C = matrix_from_json(r.at("C"), base + "C");
            m.C_tau = matrix_from_json(r.at("C_tau"), base + "C_tau");
            m.D = matrix_from_json(r.at("D"), base + "D");
            m.E = matrix_from_json(r.at("E"), base + "E");
            m.E_tau = matrix_from_json(r.at("E_tau"), base + "E_tau");
            model.rules.push_back(std::move(m));
        }

        const json& delay = j.at("delay");
        model.delay.h = delay.at("h").get<double>();
        model.delay.rho = delay.at("rho").get<double>();

        const json& membership = j.at("membership");
        model.membership.premise_index = membership.at("premise_index").get<int>();
        const json& grades = membership.at("grades");
        for (std::size_t i = 0; i < grades.size(); ++i) {
            model.membership.grades.push_back(grade_from_json(
                grades[i], "membership.grades[" + std::to_string(i) + "]"));
        }
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("model JSON structure error: ") + e.what());
    }

    const std::vector<std::string> violations = validate_model(model);
    if (!violations.empty()) {
        std::ostringstream oss;
        oss << "model validation failed:";
        for (const std::string& v : violations) {
            oss << "\n  - " << v;
        }
        throw std::runtime_error(oss.str());
    }
    return model;
}

TsDelayModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open model file: " + path);
    }
    std::ostringstream oss;
    oss << in.rdbuf();
    return parse_model(oss.str());
}

std::string model_to_json(const TsDelayModel& model) {
    json rules = json::array();
    for (const RuleMatrices& r : model.rules) {
        rules.push_back({{"A", matrix_to_json(r.A)},
                         {"A_tau", matrix_to_json(r.A_tau)},
                         {"B", matrix_to_json(r.B)},
                         {"C", matrix_to_json(r.C)},
                         {"C_tau", matrix_to_json(r.C_tau)},
                         {"D", matrix_to_json(r.D)},
                         {"E", matrix_to_json(r.E)},
                         {"E_tau", matrix_to_json(r.E_tau)}});
    }
    json grades = json::array();
    for (const Grade& g : model.membership.grades) {
        grades.push_back(grade_to_json(g));
    }
    json j = {{"n", model.n},
              {"n_w", model.n_w},
              {"n_y", model.n_y},
              {"n_z", model.n_z},
              {"rules", rules},
              {"delay", {{"h", model.delay.h}, {"rho", model.delay.rho}}},
              {"membership", {{"premise_index", model.membership.premise_index},
                              {"grades", grades}}}};
    return j.dump(2) + "\n";
}

void save_filter(const std::string& path, const FilterFile& file) {
    json mats_a = json::array();
    json mats_b = json::array();
    json mats_c = json::array();
    for (int jdx = 0; jdx < file.filter.rule_count(); ++jdx) {
        mats_a.push_back(matrix_to_json(file.filter.A_hat[static_cast<std::size_t>(jdx)]));
        mats_b.push_back(matrix_to_json(file.filter.B_hat[static_cast<std::size_t>(jdx)]));
        mats_c.push_back(matrix_to_json(file.filter.C_hat[static_cast<std::size_t>(jdx)]));
    }
    json j = {{"gamma", file.gamma},
              {"A_hat", mats_a},
              {"B_hat", mats_b},
              {"C_hat", mats_c},
              {"certificate", file.certificate}};
    if (!file.settings_json.empty()) {
        j["settings"] = json::parse(file.settings_json);
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write filter file: " + path);
    }
    out << j.dump(2) << "\n";
}

FilterFile load_filter(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open filter file: " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("filter JSON parse error: ") + e.what());
    }
    FilterFile file;
    try {
        file.gamma = j.at("gamma").get<double>();
        const json& a = j.at("A_hat");
        const json& b = j.at("B_hat");
        const json& c = j.at("C_hat");
        if (a.size() != b.size() || a.size() != c.size()) {
            throw std::runtime_error("filter file: A_hat/B_hat/C_hat lengths differ");
        }
        for (std::size_t k = 0; k < a.size(); ++k) {
            const std::string base = "filter rule " + std::to_string(k);
            file.filter.A_hat.push_back(matrix_from_json(a[k], base + ".A_hat"));
            file.filter.B_hat.push_back(matrix_from_json(b[k], base + ".B_hat"));
            file.filter.C_hat.push_back(matrix_from_json(c[k], base + ".C_hat"));
        }
        file.certificate = j.value("certificate", std::string());
        if (j.contains("settings")) {
            file.settings_json = j.at("settings").dump();
        }
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("filter JSON structure error: ") + e.what());
    }
    return file;
}

}  // namespace fhinf

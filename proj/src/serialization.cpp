#include "spcalda/serialization.hpp"

#include "spcalda/errors.hpp"

#include <fstream>

namespace spcalda {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json data = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    const json& data = j.at("data");
    if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols) {
        throw ParseError("matrix data length does not match its dimensions");
    }
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index c = 0; c < cols; ++c) m(i, c) = data[static_cast<std::size_t>(i * cols + c)].get<double>();
    }
    return m;
}

namespace {

json vector_to_json(const Vector& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Vector vector_from_json(const json& a) {
    Vector v(static_cast<Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Index>(i)) = a[i].get<double>();
    return v;
}

void check_version(const json& j, const std::string& kind) {
    if (!j.contains("format_version") || j.at("format_version").get<int>() != kFormatVersion) {
        throw ParseError(kind + ": unsupported or missing format_version");
    }
    if (j.value("kind", "") != kind) throw ParseError("expected a '" + kind + "' document");
}

}  // namespace

json gamma_to_json(double gamma) {
    if (is_gamma_infinity(gamma)) return "inf";
    return gamma;
}

double gamma_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return kGammaInfinity;
        throw ParseError("gamma must be a number or \"inf\"");
    }
    return j.get<double>();
}

json model_to_json(const ReducedLDAModel& model) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "reduced_lda_model";
    j["method_tag"] = to_string(model.method);
    j["num_features"] = model.num_features();
    j["num_classes"] = model.num_classes();
    j["centering"] = vector_to_json(model.centering);
    j["identity_basis"] = model.identity_basis;
    if (model.identity_basis) {
        j["basis"] = nullptr;
    } else {
        j["basis"] = {{"directions", matrix_to_json(model.basis.directions)},
                      {"eigenvalues", vector_to_json(model.basis.eigenvalues)},
                      {"gamma", gamma_to_json(model.basis.gamma)},
                      {"requested_q", model.basis.requested_q},
                      {"numerical_rank", model.basis.numerical_rank},
                      {"rank_deficient", model.basis.rank_deficient}};
    }
    j["reduced_centroids"] = matrix_to_json(model.reduced_centroids);
    j["within_factor"] = matrix_to_json(model.within_factor);
    j["diagonal_within"] = model.diagonal_within;
    j["log_priors"] = vector_to_json(model.log_priors);
    j["ridge_used"] = model.ridge_used;
    j["degenerate"] = model.degenerate;
    j["warnings"] = model.warnings;
    return j;
}

ReducedLDAModel model_from_json(const json& j) {
    check_version(j, "reduced_lda_model");
    ReducedLDAModel m;
    try {
        m.method = method_from_string(j.at("method_tag").get<std::string>());
        m.centering = vector_from_json(j.at("centering"));
        m.identity_basis = j.at("identity_basis").get<bool>();
        if (!m.identity_basis) {
            const json& b = j.at("basis");
            m.basis.directions = matrix_from_json(b.at("directions"));
            m.basis.eigenvalues = vector_from_json(b.at("eigenvalues"));
            m.basis.gamma = gamma_from_json(b.at("gamma"));
            m.basis.requested_q = b.at("requested_q").get<Index>();
            m.basis.numerical_rank = b.at("numerical_rank").get<Index>();
            m.basis.rank_deficient = b.at("rank_deficient").get<bool>();
        }
        m.reduced_centroids = matrix_from_json(j.at("reduced_centroids"));
        m.within_factor = matrix_from_json(j.at("within_factor"));
        m.diagonal_within = j.at("diagonal_within").get<bool>();
        m.log_priors = vector_from_json(j.at("log_priors"));
        m.ridge_used = j.at("ridge_used").get<double>();
        m.degenerate = j.value("degenerate", false);
        m.warnings = j.value("warnings", std::vector<std::string>{});
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed model document: ") + e.what());
    }
    const Index q = m.identity_basis ? m.num_features() : m.basis.directions.cols();
    if ((!m.identity_basis && m.basis.directions.rows() != m.num_features()) ||
        m.reduced_centroids.rows() != m.num_classes() || m.reduced_centroids.cols() != q) {
        throw ParseError("model document has inconsistent dimensions");
    }
    return m;
}

json cv_report_to_json(const CVReport& r) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "cv_report";
    j["method"] = to_string(r.method);
    j["priors"] = to_string(r.priors);
    json gammas = json::array();
    for (double g : r.gammas) gammas.push_back(gamma_to_json(g));
    j["gammas"] = std::move(gammas);
    j["qs"] = r.qs;
    j["folds"] = r.folds;
    j["seed"] = r.seed;
    j["error_table"] = matrix_to_json(r.error_table);
    json folds = json::array();
    for (const auto& f : r.fold_errors) folds.push_back(matrix_to_json(f));
    j["fold_errors"] = std::move(folds);
    j["fold_assignments"] = r.fold_assignments;
    j["selected"] = {{"gamma", gamma_to_json(r.selected_gamma)},
                     {"q", r.selected_q},
                     {"error", r.selected_error}};
    json ties = json::array();
    for (const auto& [g, q] : r.tie_trace) ties.push_back({{"gamma", gamma_to_json(g)}, {"q", q}});
    j["tie_trace"] = std::move(ties);
    j["class_dropout"] = r.class_dropout;
    j["notes"] = r.notes;
    j["model"] = model_to_json(r.model);
    return j;
}

CVReport cv_report_from_json(const json& j) {
    check_version(j, "cv_report");
    CVReport r;
    try {
        r.method = method_from_string(j.at("method").get<std::string>());
        r.priors = priors_from_string(j.at("priors").get<std::string>());
        for (const auto& g : j.at("gammas")) r.gammas.push_back(gamma_from_json(g));
        r.qs = j.at("qs").get<std::vector<Index>>();
        r.folds = j.at("folds").get<int>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.error_table = matrix_from_json(j.at("error_table"));
        for (const auto& f : j.at("fold_errors")) r.fold_errors.push_back(matrix_from_json(f));
        r.fold_assignments = j.at("fold_assignments").get<std::vector<int>>();
        r.selected_gamma = gamma_from_json(j.at("selected").at("gamma"));
        r.selected_q = j.at("selected").at("q").get<Index>();
        r.selected_error = j.at("selected").at("error").get<double>();
        for (const auto& t : j.at("tie_trace")) {
            r.tie_trace.emplace_back(gamma_from_json(t.at("gamma")), t.at("q").get<Index>());
        }
        r.class_dropout = j.at("class_dropout").get<bool>();
        r.notes = j.at("notes").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed CV report: ") + e.what());
    }
    r.model = model_from_json(j.at("model"));
    return r;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << j.dump(1) << "\n";
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

}  // namespace spcalda

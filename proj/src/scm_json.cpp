#include "decon/scm_json.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "decon/errors.hpp"

namespace decon {

namespace {

constexpr const char* kFormat = "decon-scm/1";

nlohmann::json matrix_to_flat(const Matrix& m) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
    return arr;
}

Matrix matrix_from_flat(const nlohmann::json& arr, std::size_t p, const char* field) {
    if (!arr.is_array() || arr.size() != p * p)
        throw SchemaError(std::string(field) + " must be a flat row-major array of length " +
                          std::to_string(p * p));
    Matrix m(p, p);
    std::size_t i = 0;
    for (std::size_t r = 0; r < p; ++r)
        for (std::size_t c = 0; c < p; ++c) m(r, c) = arr[i++].get<double>();
    return m;
}

}  // namespace

std::string scm_to_json(const LinearScm& scm) {
    nlohmann::json j;
    j["format"] = kFormat;
    j["names"] = scm.names;
    nlohmann::json roles = nlohmann::json::array();
    for (const Role r : scm.roles) roles.push_back(role_name(r));
    j["roles"] = roles;
    j["theta"] = matrix_to_flat(scm.theta);
    j["mu"] = scm.mu;
    j["error_cov"] = matrix_to_flat(scm.error_cov);
    return j.dump(2) + "\n";
}

LinearScm scm_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
    try {
        if (!j.contains("format") || j["format"].get<std::string>() != kFormat)
            throw SchemaError(std::string("expected format \"") + kFormat + "\"");
        LinearScm scm;
        scm.names = j.at("names").get<std::vector<std::string>>();
        const std::size_t p = scm.names.size();
        for (const auto& r : j.at("roles")) scm.roles.push_back(role_from_name(r.get<std::string>()));
        if (scm.roles.size() != p) throw SchemaError("roles length does not match names");
        scm.theta = matrix_from_flat(j.at("theta"), p, "theta");
        scm.mu = j.at("mu").get<std::vector<double>>();
        if (scm.mu.size() != p) throw SchemaError("mu length does not match names");
        scm.error_cov = matrix_from_flat(j.at("error_cov"), p, "error_cov");
        return scm;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed scm document: ") + e.what());
    }
}

LinearScm load_scm_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw SchemaError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return scm_from_json(ss.str());
}

void save_scm_file(const LinearScm& scm, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw SchemaError("cannot open '" + path + "' for writing");
    os << scm_to_json(scm);
    if (!os) throw SchemaError("failed writing '" + path + "'");
}

}  // namespace decon

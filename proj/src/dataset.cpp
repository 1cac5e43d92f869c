#include "decon/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "decon/errors.hpp"

namespace decon {

const char* role_name(Role r) {
    switch (r) {
        case Role::Feature:
            return "feature";
        case Role::Confounder:
            return "confounder";
        case Role::Mediator:
            return "mediator";
        case Role::Response:
            return "response";
    }
    return "unknown";
}

Role role_from_name(const std::string& name) {
    if (name == "feature") return Role::Feature;
    if (name == "confounder") return Role::Confounder;
    if (name == "mediator") return Role::Mediator;
    if (name == "response") return Role::Response;
    throw SchemaError("unknown role '" + name + "'");
}

Dataset::Dataset(std::vector<std::string> names, std::vector<Role> roles, std::size_t n,
                 std::string provenance)
    : names_(std::move(names)), roles_(std::move(roles)), n_(n),
      provenance_(std::move(provenance)) {
    if (names_.size() != roles_.size())
        throw ShapeError("dataset: names and roles disagree in length");
    if (n_ == 0) throw InputError("dataset must contain at least one row");
    data_.assign(names_.size() * n_, 0.0);
}

std::span<double> Dataset::column(std::size_t i) { return {data_.data() + i * n_, n_}; }

std::span<const double> Dataset::column(std::size_t i) const {
    return {data_.data() + i * n_, n_};
}

std::ptrdiff_t Dataset::find(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<std::ptrdiff_t>(i);
    return -1;
}

std::span<const double> Dataset::column_by_name(const std::string& name) const {
    const std::ptrdiff_t i = find(name);
    if (i < 0) throw MissingColumnError("dataset has no column named '" + name + "'");
    return column(static_cast<std::size_t>(i));
}

std::vector<std::size_t> Dataset::role_indices(Role r) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < roles_.size(); ++i)
        if (roles_[i] == r) idx.push_back(i);
    return idx;
}

void Dataset::check_finite() const {
    if (n_ == 0 || names_.empty()) throw InputError("dataset is empty");
    for (const double v : data_)
        if (!std::isfinite(v)) throw InputError("dataset contains a non-finite value");
}

namespace {

void format_double(double v, std::string& out) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

}  // namespace

void write_csv(const Dataset& d, std::ostream& os) {
    std::string line;
    line += "# provenance: ";
    line += d.provenance();
    line += '\n';
    for (std::size_t c = 0; c < d.n_cols(); ++c) {
        if (c) line += ',';
        line += d.names()[c];
        line += ':';
        line += role_name(d.roles()[c]);
    }
    line += '\n';
    os << line;
    for (std::size_t r = 0; r < d.n(); ++r) {
        line.clear();
        for (std::size_t c = 0; c < d.n_cols(); ++c) {
            if (c) line += ',';
            format_double(d.column(c)[r], line);
        }
        line += '\n';
        os << line;
    }
}

void write_csv_file(const Dataset& d, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw SchemaError("cannot open '" + path + "' for writing");
    write_csv(d, os);
    if (!os) throw SchemaError("failed writing '" + path + "'");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (const char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

Dataset read_csv(std::istream& is) {
    std::string line;
    std::string provenance = "loaded";

    // metadata comments, then header
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        if (line[0] == '#') {
            const auto pos = line.find("provenance:");
            if (pos != std::string::npos) {
                std::string v = line.substr(pos + 11);
                while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.erase(v.begin());
                while (!v.empty() && (v.back() == '\r' || v.back() == ' ')) v.pop_back();
                if (!v.empty()) provenance = v;
            }
            continue;
        }
        break;
    }
    if (line.empty() || line[0] == '#') throw SchemaError("csv: missing header row");

    std::vector<std::string> names;
    std::vector<Role> roles;
    for (const std::string& cell : split_csv_line(line)) {
        const auto pos = cell.rfind(':');
        if (pos == std::string::npos)
            throw SchemaError("csv header cell '" + cell + "' is not name:role");
        names.push_back(cell.substr(0, pos));
        roles.push_back(role_from_name(cell.substr(pos + 1)));
    }

    std::vector<std::vector<double>> cols(names.size());
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != names.size())
            throw SchemaError("csv row has " + std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(names.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            const std::string& s = cells[c];
            const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc() || res.ptr != s.data() + s.size())
                throw SchemaError("csv: cannot parse value '" + s + "'");
            cols[c].push_back(v);
        }
    }
    if (cols.empty() || cols[0].empty()) throw SchemaError("csv: no data rows");

    Dataset d(std::move(names), std::move(roles), cols[0].size(), provenance);
    for (std::size_t c = 0; c < d.n_cols(); ++c) {
        auto dst = d.column(c);
        for (std::size_t r = 0; r < d.n(); ++r) dst[r] = cols[c][r];
    }
    d.check_finite();
    return d;
}

Dataset read_csv_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw SchemaError("cannot open '" + path + "'");
    return read_csv(is);
}

}  // namespace decon

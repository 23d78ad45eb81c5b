#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "subloc/errors.hpp"
#include "subloc/model.hpp"
#include "subloc/schedule.hpp"

namespace subloc {

inline constexpr const char* kVersion = "0.1.0";

// Doubles are dumped as hex floats so text round-trips are bit exact.
inline std::string hex_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return std::string(buf);
}

inline double parse_double(const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw Error("parse_double: not a number: " + s);
    return v;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, ',')) out.push_back(cur);
    return out;
}

inline std::vector<int> parse_index_list(const std::vector<std::string>& fields, int from) {
    std::vector<int> out;
    for (std::size_t i = from; i < fields.size(); ++i) {
        if (!fields[i].empty()) out.push_back(std::stoi(fields[i]));
    }
    return out;
}

inline void write_matrix_rows(std::ostream& out, const Eigen::MatrixXd& W) {
    for (int i = 0; i < W.rows(); ++i) {
        out << "W";
        for (int j = 0; j < W.cols(); ++j) out << ',' << hex_double(W(i, j));
        out << '\n';
    }
}

struct TaggedLines {
    std::vector<std::pair<std::string, std::vector<std::string>>> lines;

    const std::vector<std::string>& get(const std::string& tag) const {
        for (const auto& [t, f] : lines) {
            if (t == tag) return f;
        }
        throw Error("instance file is missing a '" + tag + "' line");
    }
};

inline TaggedLines read_tagged(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    TaggedLines out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv(line);
        std::string tag = fields.front();
        fields.erase(fields.begin());
        out.lines.emplace_back(tag, std::move(fields));
    }
    return out;
}

inline Eigen::MatrixXd collect_matrix(const TaggedLines& t, int rows, int cols) {
    Eigen::MatrixXd W(rows, cols);
    int r = 0;
    for (const auto& [tag, f] : t.lines) {
        if (tag != "W") continue;
        if (r >= rows || static_cast<int>(f.size()) != cols) {
            throw Error("instance file matrix shape mismatch");
        }
        for (int j = 0; j < cols; ++j) W(r, j) = parse_double(f[j]);
        ++r;
    }
    if (r != rows) throw Error("instance file matrix shape mismatch");
    return W;
}

}  // namespace detail

// Plain CSV dump: header lines (tag,value...), support as an index list,
// then the matrix row-major with one W line per row.
inline void save_instance(const PlantedInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "format,subloc-instance-v1,symmetric\n";
    out << "version," << kVersion << '\n';
    out << "n," << inst.n << "\nK," << inst.K << '\n';
    out << "mu," << hex_double(inst.mu) << '\n';
    out << "seed," << inst.seed << '\n';
    out << "noiseless," << (inst.noiseless ? 1 : 0) << '\n';
    out << "support";
    for (int i : inst.support) out << ',' << i;
    out << '\n';
    detail::write_matrix_rows(out, inst.W);
}

inline PlantedInstance load_instance(const std::string& path) {
    auto t = detail::read_tagged(path);
    const auto& fmt = t.get("format");
    if (fmt.size() < 2 || fmt[0] != "subloc-instance-v1" || fmt[1] != "symmetric") {
        throw Error("not a symmetric instance file: " + path);
    }
    PlantedInstance inst;
    inst.n = std::stoi(t.get("n").at(0));
    inst.K = std::stoi(t.get("K").at(0));
    inst.mu = parse_double(t.get("mu").at(0));
    inst.seed = std::stoull(t.get("seed").at(0));
    inst.noiseless = std::stoi(t.get("noiseless").at(0)) != 0;
    inst.support = detail::parse_index_list(t.get("support"), 0);
    inst.W = detail::collect_matrix(t, inst.n, inst.n);
    return inst;
}

inline void save_instance(const BiclusterInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "format,subloc-instance-v1,bicluster\n";
    out << "version," << kVersion << '\n';
    out << "n1," << inst.n1 << "\nn2," << inst.n2 << '\n';
    out << "K1," << inst.K1 << "\nK2," << inst.K2 << '\n';
    out << "mu," << hex_double(inst.mu) << '\n';
    out << "seed," << inst.seed << '\n';
    out << "noiseless," << (inst.noiseless ? 1 : 0) << '\n';
    out << "row_support";
    for (int i : inst.row_support) out << ',' << i;
    out << "\ncol_support";
    for (int j : inst.col_support) out << ',' << j;
    out << '\n';
    detail::write_matrix_rows(out, inst.W);
}

inline BiclusterInstance load_bicluster_instance(const std::string& path) {
    auto t = detail::read_tagged(path);
    const auto& fmt = t.get("format");
    if (fmt.size() < 2 || fmt[0] != "subloc-instance-v1" || fmt[1] != "bicluster") {
        throw Error("not a bicluster instance file: " + path);
    }
    BiclusterInstance inst;
    inst.n1 = std::stoi(t.get("n1").at(0));
    inst.n2 = std::stoi(t.get("n2").at(0));
    inst.K1 = std::stoi(t.get("K1").at(0));
    inst.K2 = std::stoi(t.get("K2").at(0));
    inst.mu = parse_double(t.get("mu").at(0));
    inst.seed = std::stoull(t.get("seed").at(0));
    inst.noiseless = std::stoi(t.get("noiseless").at(0)) != 0;
    inst.row_support = detail::parse_index_list(t.get("row_support"), 0);
    inst.col_support = detail::parse_index_list(t.get("col_support"), 0);
    inst.W = detail::collect_matrix(t, inst.n1, inst.n2);
    return inst;
}

// Schedules serialize to JSON; numeric fields use the library's shortest
// round-trip formatting, so reloading reproduces identical doubles.
inline nlohmann::json schedule_to_json(const NonlinearitySchedule& s) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["d"] = s.d;
    j["variant"] = variant_name(s.variant);
    j["lambda1"] = s.lambda1;
    j["lambda2"] = s.lambda2;
    j["t_star"] = s.t_star;
    j["mu_hat"] = s.mu_hat;
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& c : s.coeffs) {
        coeffs.push_back(nlohmann::json{{"d", c.d}, {"a", c.a}});
    }
    j["coeffs"] = coeffs;
    return j;
}

inline NonlinearitySchedule schedule_from_json(const nlohmann::json& j) {
    NonlinearitySchedule s;
    s.d = j.at("d").get<int>();
    s.variant = variant_from_name(j.at("variant").get<std::string>());
    s.lambda1 = j.at("lambda1").get<double>();
    s.lambda2 = j.at("lambda2").get<double>();
    s.t_star = j.at("t_star").get<int>();
    s.mu_hat = j.at("mu_hat").get<std::vector<double>>();
    for (const auto& c : j.at("coeffs")) {
        HermiteCoeffs hc;
        hc.d = c.at("d").get<int>();
        hc.a = c.at("a").get<std::vector<double>>();
        s.coeffs.push_back(std::move(hc));
    }
    return s;
}

inline void save_schedule(const NonlinearitySchedule& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << schedule_to_json(s).dump(2) << '\n';
}

inline NonlinearitySchedule load_schedule(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return schedule_from_json(j);
}

}  // namespace subloc

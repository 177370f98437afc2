#pragma once

// CSV configuration files, provenance sidecars and JSON forms of reports.
// CSV numbers are written with 17 significant digits, which round-trips
// every double exactly.

#include <grainflow/configuration.hpp>
#include <grainflow/continuum.hpp>
#include <grainflow/energy.hpp>
#include <grainflow/error.hpp>
#include <grainflow/optimize.hpp>

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace grainflow {

using Json = nlohmann::json;

/// Shortest form that is still 17 significant digits when needed.
inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view field, std::size_t line, const char* what)
{
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size() || field.empty())
        throw ParseError("line " + std::to_string(line) + ": cannot parse " + what + " value '" + std::string(field) + "'");
    if (!std::isfinite(v)) throw ParseError("line " + std::to_string(line) + ": " + what + " is not finite");
    return v;
}

} // namespace detail

inline void write_csv(std::ostream& os, const Configuration& c)
{
    os << "x,y\n";
    for (const auto& p : c.points()) os << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

/// Parses a configuration. Values of y outside (-pi, pi] are wrapped and
/// reported in `warnings`.
inline Configuration read_csv(std::istream& is, std::vector<std::string>* warnings = nullptr)
{
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    std::vector<CylPoint> pts;
    std::vector<std::size_t> lines;
    while (std::getline(is, line)) {
        ++lineno;
        const auto body = detail::trim(line);
        if (body.empty()) continue;
        if (!header_seen) {
            if (body != "x,y") throw ParseError("line " + std::to_string(lineno) + ": expected header 'x,y', got '" + std::string(body) + "'");
            header_seen = true;
            continue;
        }
        const auto comma = body.find(',');
        if (comma == std::string_view::npos || body.find(',', comma + 1) != std::string_view::npos)
            throw ParseError("line " + std::to_string(lineno) + ": expected two comma-separated values");
        const double x = detail::parse_double(body.substr(0, comma), lineno, "x");
        double y = detail::parse_double(body.substr(comma + 1), lineno, "y");
        const double wrapped = wrap_angle(y);
        if (wrapped != y && warnings)
            warnings->push_back("line " + std::to_string(lineno) + ": y = " + format_double(y) + " wrapped to " +
                                format_double(wrapped));
        pts.push_back({x, wrapped});
        lines.push_back(lineno);
    }
    if (pts.empty()) throw ParseError("no points");
    try {
        return Configuration(std::move(pts), Provenance{"file", 0, {}});
    } catch (const CoincidentPointsError& e) {
        throw ParseError("duplicate point: lines " + std::to_string(lines[e.first]) + " and " +
                         std::to_string(lines[e.second]));
    }
}

inline Json provenance_json(const Provenance& p)
{
    Json params = Json::object();
    for (const auto& [k, v] : p.params) params[k] = v;
    return {{"generator", p.generator}, {"seed", p.seed}, {"params", params}, {"rng", p.rng}};
}

inline Provenance provenance_from_json(const Json& j)
{
    try {
        Provenance p;
        p.generator = j.at("generator").get<std::string>();
        p.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& [k, v] : j.at("params").items()) p.params[k] = v.get<double>();
        if (j.contains("rng")) p.rng = j.at("rng").get<std::string>();
        return p;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed provenance: ") + e.what());
    }
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv)
{
    return std::filesystem::path(csv.string() + ".json");
}

/// Writes `path` and its provenance sidecar `<path>.json`.
inline void save_csv(const Configuration& c, const std::filesystem::path& path)
{
    {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw Error("cannot open " + path.string() + " for writing");
        write_csv(os, c);
        if (!os) throw Error("failed writing " + path.string());
    }
    std::ofstream side(sidecar_path(path), std::ios::binary);
    if (!side) throw Error("cannot open " + sidecar_path(path).string() + " for writing");
    side << provenance_json(c.provenance()).dump(2) << '\n';
}

/// Reads `path`; the sidecar, when present, restores the provenance.
inline Configuration load_csv(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError("cannot open " + path.string());
    Configuration c = read_csv(is, warnings);
    std::ifstream side(sidecar_path(path), std::ios::binary);
    if (!side) return c;
    Json j;
    try {
        j = Json::parse(side);
    } catch (const Json::exception& e) {
        throw ParseError("malformed sidecar " + sidecar_path(path).string() + ": " + e.what());
    }
    return c.with_provenance(provenance_from_json(j));
}

inline Json to_json(const EnergyReport& r)
{
    Json j = {{"n", r.n},
              {"alpha", r.alpha},
              {"beta", r.beta},
              {"t", r.t},
              {"interaction", r.interaction},
              {"bounds", {{"lower", r.lower}, {"equispaced", r.equispaced}}}};
    j["gradient_norm"] = r.gradient_norm ? Json(*r.gradient_norm) : Json(nullptr);
    return j;
}

inline Json to_json(const CertificateReport& r)
{
    return {{"n", r.n},
            {"alpha", r.alpha},
            {"t", r.t},
            {"interaction", r.interaction},
            {"quadratic_form", r.quadratic_form},
            {"w0", r.w0},
            {"w0_stated", r.w0_stated},
            {"log_inv_t", r.log_inv_t},
            {"chain_rhs", r.chain_rhs},
            {"final_bound", r.final_bound},
            {"lower", r.lower},
            {"links",
             {{"a", r.link_a},
              {"b", r.link_b},
              {"b_repaired", r.link_b_repaired},
              {"c", r.link_c},
              {"positive_semidefinite", r.positive_semidefinite}}}};
}

inline Json to_json(const Configuration& c)
{
    Json pts = Json::array();
    for (const auto& p : c.points()) pts.push_back({p.x, p.y});
    return {{"points", pts}, {"provenance", provenance_json(c.provenance())}};
}

inline Json to_json(const MinimizeReport& r)
{
    Json restarts = Json::array();
    for (const auto& rr : r.restarts)
        restarts.push_back({{"seed", rr.seed},
                            {"initial_energy", rr.initial_energy},
                            {"final_energy", rr.final_energy},
                            {"iterations", rr.iterations},
                            {"grad_max", rr.grad_max},
                            {"converged", rr.converged}});
    Json j = {{"n", r.n},
              {"alpha", r.alpha},
              {"beta", r.beta},
              {"best_energy", r.best_energy},
              {"gap", r.gap},
              {"best_restart", r.best_restart},
              {"converged", r.converged},
              {"violation", r.violation},
              {"lower_bound", lower_bound(r.n)},
              {"equispaced_energy", equispaced_energy(r.n)},
              {"restarts", restarts}};
    j["best_configuration"] = r.best ? to_json(*r.best) : Json(nullptr);
    return j;
}

inline Json to_json(const ScanFit& f)
{
    return {{"c_hat", f.c_hat}, {"residual_stddev", f.residual_stddev}, {"rows", f.rows}};
}

inline void write_scan_csv(std::ostream& os, std::span<const ScanRow> rows)
{
    os << "n,best_energy,residual_per_n,converged\n";
    for (const auto& r : rows)
        os << r.n << ',' << format_double(r.best_energy) << ',' << format_double(r.residual_per_n) << ','
           << (r.converged ? "true" : "false") << '\n';
}

inline Json family_json(const MeasureFamily& mu)
{
    Json params = Json::object();
    for (const auto& [k, v] : family_params(mu)) params[k] = v;
    if (const auto* p = std::get_if<Product>(&mu)) {
        params["atoms"] = p->atoms;
        params["weights"] = p->weights;
    }
    return {{"kind", family_name(mu)}, {"params", params}};
}

} // namespace grainflow

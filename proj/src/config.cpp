#include "hermflow/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hermflow/errors.hpp"

namespace hermflow {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& where) {
    std::vector<double> out;
    for (const auto& tok : split(s, ',')) {
        if (tok.empty()) continue;
        try {
            out.push_back(std::stod(tok));
        } catch (...) {
            throw ConfigError(where + ": not a number: '" + tok + "'");
        }
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& where) {
    std::vector<int> out;
    for (double v : parse_double_list(s, where)) out.push_back(static_cast<int>(v));
    return out;
}

} // namespace

IniFile IniFile::parse_string(const std::string& text) {
    IniFile ini;
    std::istringstream is(text);
    std::string line, section = "";
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            ini.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        ini.sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return ini;
}

IniFile IniFile::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_string(ss.str());
}

bool IniFile::has(const std::string& section, const std::string& key) const {
    const auto s = sections.find(section);
    return s != sections.end() && s->second.count(key) > 0;
}

std::string IniFile::get(const std::string& section, const std::string& key, const std::string& fallback) const {
    const auto s = sections.find(section);
    if (s == sections.end()) return fallback;
    const auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

void IniFile::set(const std::string& section, const std::string& key, const std::string& value) {
    sections[section][key] = value;
}

std::string IniFile::dump() const {
    std::ostringstream os;
    for (const auto& [sec, kv] : sections) {
        os << "[" << sec << "]\n";
        for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
        os << "\n";
    }
    return os.str();
}

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::SolveMa: return "solve-ma";
        case ExperimentKind::Envelope: return "envelope";
        case ExperimentKind::Flow: return "flow";
        case ExperimentKind::Volume: return "volume";
        case ExperimentKind::NullLocus: return "null-locus";
    }
    return "?";
}

GeometryPtr geometry_from_ini(const IniFile& ini) {
    const std::string kind = ini.get("geometry", "kind");
    const auto grid = parse_int_list(ini.get("geometry", "grid"), "geometry.grid");
    if (kind == "torus1") {
        if (grid.size() != 2) throw ConfigError("geometry.grid: torus1 needs 2 sizes");
        return make_torus1(grid[0], grid[1]);
    }
    if (kind == "torus2") {
        if (grid.size() != 4) throw ConfigError("geometry.grid: torus2 needs 4 sizes");
        return make_torus2(grid[0], grid[1], grid[2], grid[3]);
    }
    if (kind == "hopf") {
        if (grid.size() != 1) throw ConfigError("geometry.grid: hopf needs 1 size");
        const double factor = ini.has("geometry", "contraction")
                                  ? std::stod(ini.get("geometry", "contraction"))
                                  : 2.0;
        auto g = make_hopf(grid[0], factor);
        if (ini.has("geometry", "period")) {
            const double p = std::stod(ini.get("geometry", "period"));
            if (std::abs(p - g->period) > 1e-12)
                throw ConfigError("geometry.period: hopf period must equal 2*log(contraction)");
        }
        return g;
    }
    if (kind == "blowup-calabi") {
        if (grid.size() != 1) throw ConfigError("geometry.grid: blowup-calabi needs 1 size");
        const auto interval = parse_double_list(ini.get("geometry", "interval", "-7.5,7.5"), "geometry.interval");
        if (interval.size() != 2 || !(interval[1] > 0.0) || interval[0] != -interval[1])
            throw ConfigError("geometry.interval: expected -R,R");
        const auto slopes = parse_double_list(ini.get("geometry", "slopes", "1,4"), "geometry.slopes");
        if (slopes.size() != 2) throw ConfigError("geometry.slopes: expected a_E,b_line");
        return make_blowup(grid[0], interval[1], slopes[0], slopes[1]);
    }
    throw ConfigError("geometry.kind: unknown kind '" + kind +
                      "' (allowed: torus1, torus2, hopf, blowup-calabi)");
}

void geometry_to_ini(const ModelGeometry& g, IniFile& ini) {
    ini.set("geometry", "kind", to_string(g.kind));
    std::string grid;
    for (std::size_t i = 0; i < g.grid.size(); ++i)
        grid += (i ? "," : "") + std::to_string(g.grid[i]);
    ini.set("geometry", "grid", grid);
    char buf[64];
    if (g.kind == GeometryKind::Hopf) {
        std::snprintf(buf, sizeof buf, "%.17g", g.period);
        ini.set("geometry", "period", buf);
        std::snprintf(buf, sizeof buf, "%.17g", g.contraction_factor);
        ini.set("geometry", "contraction", buf);
    }
    if (g.kind == GeometryKind::BlowupCalabi) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", g.rho_min, g.rho_max);
        ini.set("geometry", "interval", buf);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", g.slope_e, g.slope_line);
        ini.set("geometry", "slopes", buf);
    }
    std::string tracked;
    for (std::size_t i = 0; i < g.tracked.size(); ++i)
        tracked += (i ? "," : "") + to_string(g.tracked[i].kind);
    ini.set("geometry", "tracked", tracked);
}

ValidationReport validate_config_text(const IniFile& ini) {
    ValidationReport rep;
    auto issue = [&](const std::string& where, const std::string& msg) {
        rep.ok = false;
        rep.issues.push_back({where, msg});
    };

    const std::string kind = ini.get("experiment", "kind");
    const bool known_kind = kind == "solve-ma" || kind == "envelope" || kind == "flow" ||
                            kind == "volume" || kind == "null-locus";
    if (!known_kind)
        issue("experiment.kind", "unknown experiment '" + kind +
                                     "' (allowed: solve-ma, envelope, flow, volume, null-locus)");

    GeometryPtr geo;
    try {
        geo = geometry_from_ini(ini);
    } catch (const std::exception& e) {
        issue("geometry", e.what());
    }

    if (kind == "solve-ma" && !ini.has("data", "f")) issue("data.f", "solve-ma requires a density key 'f'");
    if (kind == "envelope" && !ini.has("data", "f")) issue("data.f", "envelope requires an obstacle key 'f'");

    auto positive = [&](const std::string& sec, const std::string& key) {
        if (!ini.has(sec, key)) return;
        try {
            if (!(std::stod(ini.get(sec, key)) > 0.0)) issue(sec + "." + key, "must be positive");
        } catch (...) {
            issue(sec + "." + key, "not a number");
        }
    };
    positive("solver", "tol");
    positive("solver", "dt_initial");
    positive("solver", "dt_min");
    positive("solver", "margin_floor");
    positive("solver", "t_max");
    positive("thresholds", "curvature");

    if (ini.has("solver", "betas")) {
        try {
            const auto betas = parse_double_list(ini.get("solver", "betas"), "solver.betas");
            for (std::size_t i = 1; i < betas.size(); ++i)
                if (!(betas[i] > betas[i - 1])) issue("solver.betas", "ladder must increase");
            if (!betas.empty() && betas.front() < 1.0) issue("solver.betas", "beta must be >= 1");
        } catch (const std::exception& e) {
            issue("solver.betas", e.what());
        }
    }
    if (ini.has("solver", "epsilons")) {
        try {
            const auto eps = parse_double_list(ini.get("solver", "epsilons"), "solver.epsilons");
            for (std::size_t i = 1; i < eps.size(); ++i)
                if (!(eps[i] < eps[i - 1])) issue("solver.epsilons", "ladder must decrease");
        } catch (const std::exception& e) {
            issue("solver.epsilons", e.what());
        }
    }
    return rep;
}

ValidationReport validate_config_file(const std::string& path) {
    try {
        return validate_config_text(IniFile::parse_file(path));
    } catch (const std::exception& e) {
        ValidationReport rep;
        rep.ok = false;
        rep.issues.push_back({"config", e.what()});
        return rep;
    }
}

ExperimentConfig load_config(const IniFile& ini) {
    const auto rep = validate_config_text(ini);
    if (!rep.ok) throw ConfigError(rep.issues.front().where + ": " + rep.issues.front().message);

    ExperimentConfig cfg;
    cfg.raw = ini;
    const std::string kind = ini.get("experiment", "kind");
    if (kind == "solve-ma") cfg.kind = ExperimentKind::SolveMa;
    else if (kind == "envelope") cfg.kind = ExperimentKind::Envelope;
    else if (kind == "flow") cfg.kind = ExperimentKind::Flow;
    else if (kind == "volume") cfg.kind = ExperimentKind::Volume;
    else cfg.kind = ExperimentKind::NullLocus;

    cfg.seed = ini.has("experiment", "seed") ? std::stoull(ini.get("experiment", "seed")) : 1;
    cfg.geometry = geometry_from_ini(ini);

    cfg.theta_preset = ini.get("data", "theta", "reference");
    cfg.f_preset = ini.get("data", "f", "one");
    cfg.omega0_preset = ini.get("data", "omega0", "reference");

    auto num = [&](const std::string& sec, const std::string& key, double fallback) {
        return ini.has(sec, key) ? std::stod(ini.get(sec, key)) : fallback;
    };
    cfg.tol = num("solver", "tol", 1e-10);
    cfg.dt_initial = num("solver", "dt_initial", 5e-3);
    cfg.dt_min = num("solver", "dt_min", 1e-7);
    cfg.dt_max = num("solver", "dt_max", 2e-2);
    cfg.margin_floor = num("solver", "margin_floor", 1e-6);
    cfg.t_max = num("solver", "t_max", 1.0);
    cfg.samples = static_cast<int>(num("solver", "samples", 50));
    cfg.refine_iters = static_cast<int>(num("solver", "refine_iters", 40));
    if (ini.has("solver", "betas")) cfg.betas = parse_double_list(ini.get("solver", "betas"), "solver.betas");
    if (ini.has("solver", "epsilons"))
        cfg.epsilons = parse_double_list(ini.get("solver", "epsilons"), "solver.epsilons");
    if (ini.has("solver", "t_ladder"))
        cfg.t_ladder = parse_double_list(ini.get("solver", "t_ladder"), "solver.t_ladder");

    cfg.curvature_threshold = num("thresholds", "curvature", 50.0);
    cfg.z_margin_ratio = num("thresholds", "z_margin_ratio", 0.05);
    cfg.z_rate_factor = num("thresholds", "z_rate_factor", 100.0);
    cfg.cauchy_window = static_cast<int>(num("thresholds", "cauchy_window", 8));
    cfg.e_neighborhood = num("thresholds", "e_neighborhood", 0.3);

    cfg.probe_rho_p = num("probe", "rho_p", 1.0);
    cfg.probe_rho_q = num("probe", "rho_q", 5.0);

    cfg.out_dir = ini.get("output", "dir", "out");
    cfg.write_phi = ini.get("output", "write_phi", "true") != "false";
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) { return load_config(IniFile::parse_file(path)); }

std::uint64_t fnv1a_hash(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace hermflow

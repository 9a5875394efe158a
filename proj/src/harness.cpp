#include "exflow/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "exflow/errors.hpp"

namespace exflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct Doc {
    std::vector<std::pair<std::string, std::string>> items;
};

Doc parse_doc(const std::string& text) {
    Doc doc;
    std::map<std::string, int> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ParseError("line " + std::to_string(lineno) + ": expected 'key = value', got '" +
                             t + "'");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ParseError("line " + std::to_string(lineno) + ": empty key");
        if (value.empty()) throw ParseError("empty value for key " + key);
        if (seen.count(key)) throw ParseError("duplicate key: " + key);
        seen[key] = lineno;
        doc.items.emplace_back(key, value);
    }
    return doc;
}

double parse_double_value(const std::string& key, const std::string& s) {
    const char* b = s.c_str();
    char* e = nullptr;
    errno = 0;
    const double v = std::strtod(b, &e);
    if (s.empty() || e != b + s.size() || errno == ERANGE) {
        throw ParseError("invalid number for key " + key + ": '" + s + "'");
    }
    return v;
}

long long parse_int_value(const std::string& key, const std::string& s) {
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw ParseError("invalid integer for key " + key + ": '" + s + "'");
    }
    return v;
}

std::uint64_t parse_u64_value(const std::string& key, const std::string& s) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw ParseError("invalid unsigned integer for key " + key + ": '" + s + "'");
    }
    return v;
}

bool parse_bool_value(const std::string& key, const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ParseError("invalid boolean for key " + key + ": '" + s + "' (use true/false)");
}

Vec2 parse_vec2_value(const std::string& key, const std::string& s) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(s);
    } catch (const nlohmann::json::exception&) {
        throw ParseError("invalid [x,y] array for key " + key + ": '" + s + "'");
    }
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ParseError("key " + key + " must be a 2-element numeric array");
    }
    return Vec2{j[0].get<double>(), j[1].get<double>()};
}

std::vector<Complex> parse_coeffs_value(const std::string& key, const std::string& s) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(s);
    } catch (const nlohmann::json::exception&) {
        throw ParseError("invalid [[re,im],...] array for key " + key + ": '" + s + "'");
    }
    if (!j.is_array()) throw ParseError("key " + key + " must be an array of [re,im] pairs");
    std::vector<Complex> out;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
            throw ParseError("key " + key + " must be an array of [re,im] pairs");
        }
        out.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    return out;
}

struct PatchDraft {
    std::optional<Vec2> center;
    std::optional<double> radius;
    std::optional<PatchProfile> profile;
    std::optional<double> total_mass;
    std::optional<int> grid_n;
};

// Splits "patch[i].field" into (i, field); nullopt for non-patch keys.
std::optional<std::pair<int, std::string>> split_patch_key(const std::string& key) {
    if (key.rfind("patch[", 0) != 0) return std::nullopt;
    const auto close = key.find(']');
    if (close == std::string::npos || close + 1 >= key.size() || key[close + 1] != '.') {
        throw ParseError("malformed patch key: " + key);
    }
    const std::string idx = key.substr(6, close - 6);
    long long i = 0;
    const auto [p, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), i);
    if (ec != std::errc{} || p != idx.data() + idx.size() || i < 0) {
        throw ParseError("malformed patch index in key: " + key);
    }
    return std::make_pair(static_cast<int>(i), key.substr(close + 2));
}

std::string normalize_preset(const std::string& s) {
    if (s == "disk") return "disk";
    if (s.rfind("ellipse:", 0) == 0) {
        const double c = parse_double_value("map.preset", s.substr(8));
        return "ellipse:" + format_double(c);
    }
    throw ParseError("unknown map preset: '" + s + "' (expected disk or ellipse:<c>)");
}

ExteriorMapSpec preset_map(const std::string& normalized) {
    if (normalized == "disk") return disk_map();
    return ellipse_map(parse_double_value("map.preset", normalized.substr(8)));
}

void validate_patch_exterior(const ExteriorMapSpec& map, const PatchSpec& p) {
    if (!(p.radius > 0.0)) throw ValidationError("patch radius must be positive");
    if (!(p.total_mass > 0.0)) throw ValidationError("patch total_mass must be positive");
    if (p.grid_n < 1) throw ValidationError("patch grid_n must be >= 1");
    if (!patch_is_exterior(map, p)) {
        throw ValidationError("patch disk at (" + format_double(p.center.x) + ", " +
                              format_double(p.center.y) + ") with radius " +
                              format_double(p.radius) + " intersects the obstacle");
    }
}

void validate_even_patches(const std::vector<PatchSpec>& patches) {
    std::vector<bool> used(patches.size(), false);
    for (std::size_t i = 0; i < patches.size(); ++i) {
        if (used[i]) continue;
        bool found = false;
        for (std::size_t j = i + 1; j < patches.size(); ++j) {
            const PatchSpec& a = patches[i];
            const PatchSpec& b = patches[j];
            if (!used[j] && a.center.x == -b.center.x && a.center.y == -b.center.y &&
                a.radius == b.radius && a.profile == b.profile && a.total_mass == b.total_mass &&
                a.grid_n == b.grid_n) {
                used[i] = used[j] = true;
                found = true;
                break;
            }
        }
        if (!found) {
            throw ValidationError("even_symmetric mode: patch " + std::to_string(i) +
                                  " has no mirror partner under x -> -x");
        }
    }
}

// Applies a parsed document over a base config (or over defaults when absent)
// and returns the validated, fully materialized result.
SimulationConfig resolve(const Doc& doc, const std::optional<SimulationConfig>& base) {
    SimulationConfig cfg = base.value_or(SimulationConfig{});
    bool have_map = base.has_value();
    bool have_dt = base.has_value();
    bool have_t_end = base.has_value();

    std::optional<std::string> preset;
    std::optional<double> beta;
    std::optional<std::vector<Complex>> coeffs;
    std::optional<double> newton_tol;
    std::optional<int> newton_max_iter;
    std::map<int, PatchDraft> drafts;

    for (const auto& [key, value] : doc.items) {
        if (const auto pk = split_patch_key(key)) {
            PatchDraft& d = drafts[pk->first];
            const std::string& f = pk->second;
            if (f == "center") {
                d.center = parse_vec2_value(key, value);
            } else if (f == "radius") {
                d.radius = parse_double_value(key, value);
            } else if (f == "profile") {
                d.profile = patch_profile_from_string(value);
            } else if (f == "total_mass") {
                d.total_mass = parse_double_value(key, value);
            } else if (f == "grid_n") {
                d.grid_n = static_cast<int>(parse_int_value(key, value));
            } else {
                throw ParseError("unknown key: " + key);
            }
        } else if (key == "map.preset") {
            preset = normalize_preset(value);
        } else if (key == "map.beta") {
            beta = parse_double_value(key, value);
        } else if (key == "map.inverse_coeffs") {
            coeffs = parse_coeffs_value(key, value);
        } else if (key == "map.newton_tol") {
            newton_tol = parse_double_value(key, value);
        } else if (key == "map.newton_max_iter") {
            newton_max_iter = static_cast<int>(parse_int_value(key, value));
        } else if (key == "boundary_circulation") {
            cfg.boundary_circulation = parse_double_value(key, value);
        } else if (key == "dt") {
            cfg.dt = parse_double_value(key, value);
            have_dt = true;
        } else if (key == "t_end") {
            cfg.t_end = parse_double_value(key, value);
            have_t_end = true;
        } else if (key == "diagnostic_stride") {
            cfg.diagnostic_stride = static_cast<int>(parse_int_value(key, value));
        } else if (key == "blob_delta") {
            cfg.blob_delta = parse_double_value(key, value);
            if (cfg.blob_delta < 0.0) {
                throw ValidationError("blob_delta must be nonnegative");
            }
        } else if (key == "even_symmetric") {
            cfg.even_symmetric = parse_bool_value(key, value);
        } else if (key == "seed") {
            cfg.seed = parse_u64_value(key, value);
        } else {
            throw ParseError("unknown key: " + key);
        }
    }

    if (preset && (beta || coeffs)) {
        throw ParseError("map.preset conflicts with map.beta/map.inverse_coeffs");
    }
    if (preset) {
        cfg.map = preset_map(*preset);
        cfg.map_preset = *preset;
        have_map = true;
    } else if (beta || coeffs) {
        cfg.map = ExteriorMapSpec{};
        if (beta) cfg.map.beta = *beta;
        if (coeffs) cfg.map.inverse_coeffs = *coeffs;
        cfg.map_preset.clear();
        have_map = true;
    }
    if (newton_tol) cfg.map.newton_tol = *newton_tol;
    if (newton_max_iter) cfg.map.newton_max_iter = *newton_max_iter;

    if (!drafts.empty()) {
        cfg.patches.clear();
        int expect = 0;
        for (const auto& [idx, d] : drafts) {
            if (idx != expect) {
                throw ParseError("patch indices must be contiguous from 0; missing patch[" +
                                 std::to_string(expect) + "]");
            }
            ++expect;
            if (!d.center) throw ParseError("missing required key: patch[" +
                                            std::to_string(idx) + "].center");
            if (!d.radius) throw ParseError("missing required key: patch[" +
                                            std::to_string(idx) + "].radius");
            PatchSpec p;
            p.center = *d.center;
            p.radius = *d.radius;
            p.profile = d.profile.value_or(PatchProfile::Uniform);
            p.total_mass = d.total_mass.value_or(1.0);
            p.grid_n = d.grid_n.value_or(24);
            cfg.patches.push_back(p);
        }
    }

    if (!have_map) throw ParseError("missing required key: map.preset (or map.beta)");
    if (!have_dt) throw ParseError("missing required key: dt");
    if (!have_t_end) throw ParseError("missing required key: t_end");
    if (cfg.patches.empty()) throw ParseError("at least one patch[i] section is required");

    cfg.map.require_valid();
    if (!(cfg.dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(cfg.t_end >= 0.0)) throw ValidationError("t_end must be nonnegative");
    if (cfg.diagnostic_stride < 1) throw ValidationError("diagnostic_stride must be >= 1");
    for (const PatchSpec& p : cfg.patches) validate_patch_exterior(cfg.map, p);
    if (cfg.even_symmetric) {
        if (!cfg.map.is_identity()) {
            throw ValidationError("even_symmetric mode requires the disk map");
        }
        validate_even_patches(cfg.patches);
    }
    // blob_delta < 0 (never set) is materialized by the caller, after any
    // grid_n overrides have settled.
    return cfg;
}

// Preset configs; blob_delta = -1 marks "derive from grid spacing" so that a
// --n override still recomputes it.
SimulationConfig scenario_config_raw(const std::string& name) {
    SimulationConfig cfg;
    cfg.blob_delta = -1.0;

    auto patch = [](Vec2 c, double r, double mass, int n) {
        PatchSpec p;
        p.center = c;
        p.radius = r;
        p.profile = PatchProfile::Uniform;
        p.total_mass = mass;
        p.grid_n = n;
        return p;
    };

    if (name == "disk-generic") {
        cfg.map = disk_map();
        cfg.map_preset = "disk";
        cfg.patches = {patch({2.0, 0.0}, 0.5, 1.0, 36)};
        cfg.dt = 5e-3;
        cfg.t_end = 10.0;
        cfg.diagnostic_stride = 10;
        cfg.seed = 1;
    } else if (name == "disk-even") {
        cfg.map = disk_map();
        cfg.map_preset = "disk";
        cfg.patches = {patch({2.0, 0.0}, 0.5, 0.5, 25), patch({-2.0, 0.0}, 0.5, 0.5, 25)};
        cfg.even_symmetric = true;
        cfg.dt = 5e-3;
        cfg.t_end = 20.0;
        cfg.diagnostic_stride = 20;
        cfg.seed = 2;
    } else if (name == "ellipse-theta1") {
        cfg.map = ellipse_map(0.5);
        cfg.map_preset = "ellipse:0.5";
        cfg.patches = {patch({3.0, 0.0}, 0.5, 1.0, 25)};
        cfg.dt = 5e-3;
        cfg.t_end = 20.0;
        cfg.diagnostic_stride = 20;
        cfg.seed = 3;
    } else if (name == "ellipse-theta2-negative-alpha") {
        cfg.map = ellipse_map(0.5);
        cfg.map_preset = "ellipse:0.5";
        cfg.patches = {patch({3.0, 0.0}, 0.5, 1.0, 25)};
        cfg.boundary_circulation = -2.0;  // alpha = -m
        cfg.dt = 5e-3;
        cfg.t_end = 20.0;
        cfg.diagnostic_stride = 20;
        cfg.seed = 4;
    } else if (name == "ellipse-theta2-large-alpha") {
        cfg.map = ellipse_map(0.5);
        cfg.map_preset = "ellipse:0.5";
        cfg.patches = {patch({3.0, 0.0}, 0.5, 1.0, 25)};
        cfg.boundary_circulation = 1.0;  // alpha = 2m > m
        cfg.dt = 5e-3;
        cfg.t_end = 20.0;
        cfg.diagnostic_stride = 20;
        cfg.seed = 5;
    } else if (name == "orbit-regression") {
        cfg.map = disk_map();
        cfg.map_preset = "disk";
        cfg.patches = {patch({2.0, 0.0}, 0.05, kTwoPi, 1)};
        cfg.boundary_circulation = -kTwoPi;  // alpha = 0
        cfg.dt = 1e-3;
        cfg.t_end = 18.85;  // just under three full orbits of period 6*pi
        cfg.diagnostic_stride = 10;
        cfg.blob_delta = 0.0;
        cfg.seed = 6;
    } else {
        throw ValidationError("unknown scenario: '" + name + "'");
    }
    return cfg;
}

}  // namespace

const char* to_string(PatchProfile p) {
    switch (p) {
        case PatchProfile::Uniform:
            return "uniform";
        case PatchProfile::CosineBump:
            return "cosine-bump";
    }
    return "uniform";
}

PatchProfile patch_profile_from_string(const std::string& s) {
    if (s == "uniform") return PatchProfile::Uniform;
    if (s == "cosine-bump") return PatchProfile::CosineBump;
    throw ParseError("unknown patch profile: '" + s + "' (expected uniform or cosine-bump)");
}

std::vector<std::string> scenario_names() {
    return {"disk-even",     "disk-generic",
            "ellipse-theta1", "ellipse-theta2-negative-alpha",
            "ellipse-theta2-large-alpha", "orbit-regression"};
}

SimulationConfig scenario_config(const std::string& name) {
    SimulationConfig cfg = scenario_config_raw(name);
    if (cfg.blob_delta < 0.0) cfg.blob_delta = default_blob_delta(cfg.map, cfg.patches);
    return cfg;
}

Scenario make_scenario(const std::string& name, const std::optional<std::string>& config_text,
                       const ConfigOverrides& overrides) {
    std::optional<SimulationConfig> base;
    if (!name.empty()) base = scenario_config_raw(name);

    SimulationConfig cfg;
    if (config_text) {
        // Document keys override the preset; resolution re-validates everything.
        const Doc doc = parse_doc(*config_text);
        cfg = resolve(doc, base);
    } else if (base) {
        cfg = *base;
    } else {
        throw ParseError("either a scenario name or a config file is required");
    }

    if (overrides.dt) cfg.dt = *overrides.dt;
    if (overrides.t_end) cfg.t_end = *overrides.t_end;
    if (overrides.seed) cfg.seed = *overrides.seed;
    if (overrides.grid_n) {
        for (PatchSpec& p : cfg.patches) p.grid_n = *overrides.grid_n;
    }
    if (cfg.blob_delta < 0.0) cfg.blob_delta = default_blob_delta(cfg.map, cfg.patches);

    // Re-run the physical checks that depend on overridden values.
    if (!(cfg.dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(cfg.t_end >= 0.0)) throw ValidationError("t_end must be nonnegative");
    for (const PatchSpec& p : cfg.patches) validate_patch_exterior(cfg.map, p);
    if (cfg.even_symmetric) validate_even_patches(cfg.patches);

    return Scenario{name.empty() ? "custom" : name, cfg};
}

SimulationConfig parse_config(const std::string& text) {
    SimulationConfig cfg = resolve(parse_doc(text), std::nullopt);
    if (cfg.blob_delta < 0.0) cfg.blob_delta = default_blob_delta(cfg.map, cfg.patches);
    return cfg;
}

SimulationConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ExteriorMapSpec map_from_config(const std::string& text) {
    const Doc doc = parse_doc(text);
    std::optional<std::string> preset;
    std::optional<double> beta;
    std::optional<std::vector<Complex>> coeffs;
    std::optional<double> newton_tol;
    std::optional<int> newton_max_iter;
    for (const auto& [key, value] : doc.items) {
        if (key == "map.preset") {
            preset = normalize_preset(value);
        } else if (key == "map.beta") {
            beta = parse_double_value(key, value);
        } else if (key == "map.inverse_coeffs") {
            coeffs = parse_coeffs_value(key, value);
        } else if (key == "map.newton_tol") {
            newton_tol = parse_double_value(key, value);
        } else if (key == "map.newton_max_iter") {
            newton_max_iter = static_cast<int>(parse_int_value(key, value));
        } else if (key == "boundary_circulation" || key == "dt" || key == "t_end" ||
                   key == "diagnostic_stride" || key == "blob_delta" || key == "even_symmetric" ||
                   key == "seed" || split_patch_key(key)) {
            continue;  // simulation keys, not needed here
        } else {
            throw ParseError("unknown key: " + key);
        }
    }
    if (preset && (beta || coeffs)) {
        throw ParseError("map.preset conflicts with map.beta/map.inverse_coeffs");
    }
    if (!preset && !beta && !coeffs) {
        throw ParseError("missing required key: map.preset (or map.beta)");
    }
    ExteriorMapSpec spec = preset ? preset_map(*preset) : ExteriorMapSpec{};
    if (beta) spec.beta = *beta;
    if (coeffs) spec.inverse_coeffs = *coeffs;
    if (newton_tol) spec.newton_tol = *newton_tol;
    if (newton_max_iter) spec.newton_max_iter = *newton_max_iter;
    spec.require_valid();
    return spec;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string write_config(const SimulationConfig& cfg) {
    std::ostringstream os;
    if (!cfg.map_preset.empty()) {
        os << "map.preset = " << cfg.map_preset << "\n";
    } else {
        os << "map.beta = " << format_double(cfg.map.beta) << "\n";
        os << "map.inverse_coeffs = [";
        for (std::size_t i = 0; i < cfg.map.inverse_coeffs.size(); ++i) {
            if (i) os << ",";
            os << "[" << format_double(cfg.map.inverse_coeffs[i].real()) << ","
               << format_double(cfg.map.inverse_coeffs[i].imag()) << "]";
        }
        os << "]\n";
    }
    os << "map.newton_tol = " << format_double(cfg.map.newton_tol) << "\n";
    os << "map.newton_max_iter = " << cfg.map.newton_max_iter << "\n";
    os << "boundary_circulation = " << format_double(cfg.boundary_circulation) << "\n";
    os << "dt = " << format_double(cfg.dt) << "\n";
    os << "t_end = " << format_double(cfg.t_end) << "\n";
    os << "diagnostic_stride = " << cfg.diagnostic_stride << "\n";
    os << "blob_delta = " << format_double(cfg.blob_delta) << "\n";
    os << "even_symmetric = " << (cfg.even_symmetric ? "true" : "false") << "\n";
    os << "seed = " << cfg.seed << "\n";
    for (std::size_t i = 0; i < cfg.patches.size(); ++i) {
        const PatchSpec& p = cfg.patches[i];
        const std::string pre = "patch[" + std::to_string(i) + "].";
        os << pre << "center = [" << format_double(p.center.x) << "," << format_double(p.center.y)
           << "]\n";
        os << pre << "radius = " << format_double(p.radius) << "\n";
        os << pre << "profile = " << to_string(p.profile) << "\n";
        os << pre << "total_mass = " << format_double(p.total_mass) << "\n";
        os << pre << "grid_n = " << p.grid_n << "\n";
    }
    return os.str();
}

std::string csv_string(const std::vector<DiagnosticRecord>& records,
                       const std::optional<double>& abort_time) {
    std::string out =
        "# t,mass,alpha,energy,log_moment,j_theta1,j_theta2,inertia,center_x,center_y,"
        "r_support_phys,r_support_mapped,f_2,f_4,f_8,f_16,theta\n";
    for (const DiagnosticRecord& r : records) {
        out += format_double(r.t);
        out += ',';
        out += format_double(r.mass);
        out += ',';
        out += format_double(r.alpha);
        out += ',';
        out += format_double(r.energy);
        out += ',';
        out += format_double(r.log_moment);
        out += ',';
        out += format_double(r.j_theta1);
        out += ',';
        out += format_double(r.j_theta2);
        out += ',';
        out += format_double(r.inertia);
        out += ',';
        out += format_double(r.center.x);
        out += ',';
        out += format_double(r.center.y);
        out += ',';
        out += format_double(r.r_support_phys);
        out += ',';
        out += format_double(r.r_support_mapped);
        for (const auto& [rr, f] : r.tail_mass) {
            out += ',';
            out += format_double(f);
        }
        out += ',';
        out += std::to_string(r.theta);
        out += '\n';
    }
    if (abort_time) {
        out += "# ABORTED t=" + format_double(*abort_time) + "\n";
    }
    return out;
}

std::vector<std::pair<double, double>> CsvTable::series(const std::string& t_col,
                                                        const std::string& r_col) const {
    auto idx = [this](const std::string& name) {
        const auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) throw ParseError("CSV has no column named '" + name + "'");
        return static_cast<std::size_t>(it - columns.begin());
    };
    const std::size_t ti = idx(t_col);
    const std::size_t ri = idx(r_col);
    std::vector<std::pair<double, double>> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.emplace_back(row[ti], row[ri]);
    return out;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open CSV file: " + path);
    CsvTable table;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            if (table.columns.empty()) {
                std::istringstream hs(trim(t.substr(1)));
                std::string col;
                while (std::getline(hs, col, ',')) table.columns.push_back(trim(col));
            }
            continue;  // trailing comments (e.g. ABORTED) are not data
        }
        std::vector<double> row;
        std::istringstream rs(t);
        std::string cell;
        while (std::getline(rs, cell, ',')) {
            row.push_back(parse_double_value("csv", trim(cell)));
        }
        if (!table.columns.empty() && row.size() != table.columns.size()) {
            throw ParseError("CSV row with " + std::to_string(row.size()) + " cells, expected " +
                             std::to_string(table.columns.size()));
        }
        table.rows.push_back(std::move(row));
    }
    if (table.columns.empty()) throw ParseError("CSV has no header line");
    return table;
}

double estimate_orbit_period(const std::vector<DiagnosticRecord>& records) {
    if (records.size() < 2) throw FitError("orbit period needs at least two records");
    double prev = std::atan2(records.front().center.y, records.front().center.x);
    double total = 0.0;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const double a = std::atan2(records[i].center.y, records[i].center.x);
        double da = a - prev;
        while (da > std::numbers::pi) da -= kTwoPi;
        while (da < -std::numbers::pi) da += kTwoPi;
        total += da;
        prev = a;
    }
    if (total == 0.0) throw FitError("orbit period undefined: no angular motion");
    const double span = records.back().t - records.front().t;
    return kTwoPi * span / std::abs(total);
}

int run_scenario(const Scenario& scenario, const std::string& out_dir) {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);

    const RunResult res = run(scenario.config);

    {
        std::ofstream csv(dir / "diagnostics.csv", std::ios::binary);
        csv << csv_string(res.records, res.aborted() ? std::optional<double>(res.abort_time)
                                                     : std::nullopt);
    }
    {
        std::ofstream rc(dir / "config.resolved", std::ios::binary);
        rc << write_config(scenario.config);
    }

    std::ostringstream fit;
    for (const bool mapped : {false, true}) {
        const std::string col = mapped ? "r_support_mapped" : "r_support_phys";
        std::vector<std::pair<double, double>> series;
        for (const DiagnosticRecord& r : res.records) {
            series.emplace_back(r.t, mapped ? r.r_support_mapped : r.r_support_phys);
        }
        try {
            const GrowthFit g = fit_growth_exponent(series, 1.0, scenario.config.t_end);
            fit << col << " p=" << format_double(g.exponent) << " M=" << format_double(g.prefactor)
                << " window=[" << format_double(g.t_lo) << "," << format_double(g.t_hi)
                << "] residual=" << format_double(g.residual) << "\n";
        } catch (const Error& e) {
            fit << col << " unavailable: " << e.what() << "\n";
        }
    }
    if (!res.aborted() && res.final_ensemble.size() == 1 && res.records.size() >= 2) {
        // Single point vortex: compare against the closed-form image-vortex orbit.
        const double rho0 = res.records.front().r_support_phys;
        const double gamma = res.records.front().mass;
        const double alpha = res.records.front().alpha;
        const double omega =
            -gamma / (kTwoPi * (rho0 * rho0 - 1.0)) + alpha / (kTwoPi * rho0 * rho0);
        try {
            const double period = estimate_orbit_period(res.records);
            const double expected = kTwoPi / std::abs(omega);
            fit << "orbit_period simulated=" << format_double(period)
                << " expected=" << format_double(expected)
                << " rel_error=" << format_double(std::abs(period - expected) / expected) << "\n";
        } catch (const Error& e) {
            fit << "orbit_period unavailable: " << e.what() << "\n";
        }
    }
    {
        std::ofstream ft(dir / "fit.txt", std::ios::binary);
        ft << fit.str();
    }
    return res.aborted() ? 1 : 0;
}

}  // namespace exflow

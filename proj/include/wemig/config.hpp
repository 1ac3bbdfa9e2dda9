#pragma once

// INI run configuration: "[section]" headers, "key = value" lines, '#'
// comments. Unknown keys, duplicate sections and duplicate keys are errors;
// every key has a default. Cross-section checks run in validate().

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wemig/angle.hpp"
#include "wemig/annihilator.hpp"
#include "wemig/synthetics.hpp"

namespace wemig {

struct AcquisitionConfig {
    std::size_t nt = 512;
    double dt = 0.004;
    double z_max = 0.0;  // 0: bottom of the model
};

struct AngleSection {
    double p_min = -1.0e-4;
    double p_max = 1.0e-4;
    std::size_t np = 21;
    double radius = 200.0;
    double flat_fraction = 0.5;
    std::size_t x_first = 0;
    std::size_t x_count = 0;
    std::size_t x_stride = 1;

    AngleConfig to_config() const {
        AngleConfig c;
        c.p = p_axis(p_min, p_max, np);
        c.chi_radius = radius;
        c.chi_flat_fraction = flat_fraction;
        c.x_first = x_first;
        c.x_count = x_count;
        c.x_stride = x_stride;
        return c;
    }
};

struct ReconSection {
    ReconWeights weights;
    bool phi_normalize = false;
    NormalizeOptions normalize;
};

struct AnnihilatorSection {
    double scan_lo = 0.9;
    double scan_hi = 1.1;
    double scan_step = 0.01;
};

struct RunSection {
    int threads = 0;  // 0: library default
    std::uint64_t seed = 20240601;
    double dot_tolerance = 1e-8;
};

struct RunConfig {
    SceneSpec scene;
    AcquisitionConfig acquisition;
    TaperConfig taper;
    MuteConfig mute;
    AngleSection angle;
    ReconSection recon;
    AnnihilatorSection annihilator;
    RunSection run;
    std::string source_text;  // echo of the parsed file

    /// Geometry for a model built from this configuration.
    AcquisitionGeometry geometry_for(const Grid2D& model) const {
        AcquisitionGeometry g = geometry_for_model(model, acquisition.nt, acquisition.dt);
        if (acquisition.z_max > 0.0) {
            g.z_max = acquisition.z_max;
            g.validate();
            check_geometry(g, model);
        }
        return g;
    }

    Scene build() const {
        SceneSpec sp = scene;
        sp.nt = acquisition.nt;
        sp.dt = acquisition.dt;
        Scene sc = build_scene(sp);
        sc.geometry = geometry_for(sc.model);
        return sc;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

inline double to_double(const std::string& v, const std::string& where) {
    double x = 0.0;
    const auto* b = v.data();
    const auto [p, ec] = std::from_chars(b, b + v.size(), x);
    if (ec != std::errc() || p != b + v.size() || !std::isfinite(x))
        throw ConfigError(where + ": expected a finite number, got '" + v + "'");
    return x;
}

template <class I>
I to_integer(const std::string& v, const std::string& where) {
    I x{};
    const auto* b = v.data();
    const auto [p, ec] = std::from_chars(b, b + v.size(), x);
    if (ec != std::errc() || p != b + v.size())
        throw ConfigError(where + ": expected an integer, got '" + v + "'");
    return x;
}

inline bool to_bool(const std::string& v, const std::string& where) {
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError(where + ": expected a boolean, got '" + v + "'");
}

inline std::vector<double> to_tuple(const std::string& v, const std::string& where, std::size_t min_n,
                                    std::size_t max_n) {
    std::vector<double> out;
    for (const auto& f : split(v, ':')) out.push_back(to_double(f, where));
    if (out.size() < min_n || out.size() > max_n)
        throw ConfigError(where + ": expected " + std::to_string(min_n) + ".." + std::to_string(max_n) +
                          " ':'-separated fields, got '" + v + "'");
    return out;
}

inline std::vector<std::string> list_items(const std::string& v) {
    std::vector<std::string> out;
    for (auto& s : split(v, ';'))
        if (!s.empty()) out.push_back(s);
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string& value, const std::string& where)>;
using KeyTable = std::map<std::string, std::map<std::string, Setter>>;

#define WEMIG_DBL(sec, key, field) \
    t[sec][key] = [](RunConfig& c, const std::string& v, const std::string& w) { c.field = to_double(v, w); }
#define WEMIG_SIZE(sec, key, field) \
    t[sec][key] = [](RunConfig& c, const std::string& v, const std::string& w) { \
        c.field = to_integer<std::size_t>(v, w); \
    }
#define WEMIG_BOOL(sec, key, field) \
    t[sec][key] = [](RunConfig& c, const std::string& v, const std::string& w) { c.field = to_bool(v, w); }
#define WEMIG_HZ(sec, key, field) \
    t[sec][key] = [](RunConfig& c, const std::string& v, const std::string& w) { \
        c.field = 2.0 * M_PI * to_double(v, w); \
    }

inline const KeyTable& key_table() {
    static const KeyTable table = [] {
        KeyTable t;
        t["scene"]["kind"] = [](RunConfig& c, const std::string& v, const std::string& w) {
            if (v == "constant") c.scene.kind = ModelKind::constant;
            else if (v == "gradient") c.scene.kind = ModelKind::gradient;
            else if (v == "lens") c.scene.kind = ModelKind::lens;
            else throw ConfigError(w + ": expected constant, gradient or lens, got '" + v + "'");
        };
        WEMIG_DBL("scene", "velocity", scene.velocity);
        WEMIG_DBL("scene", "gradient", scene.gradient);
        WEMIG_DBL("scene", "lens_x", scene.lens_x);
        WEMIG_DBL("scene", "lens_z", scene.lens_z);
        WEMIG_DBL("scene", "lens_radius", scene.lens_radius);
        WEMIG_DBL("scene", "lens_amplitude", scene.lens_amplitude);
        WEMIG_SIZE("scene", "nx", scene.nx);
        WEMIG_SIZE("scene", "nz", scene.nz);
        WEMIG_DBL("scene", "dx", scene.dx);
        WEMIG_DBL("scene", "dz", scene.dz);
        WEMIG_DBL("scene", "x0", scene.x0);
        WEMIG_DBL("scene", "clearance", scene.clearance);
        t["scene"]["points"] = [](RunConfig& c, const std::string& v, const std::string& w) {
            c.scene.points.clear();
            for (const auto& item : list_items(v)) {
                const auto f = to_tuple(item, w, 2, 3);
                c.scene.points.push_back({f[0], f[1], f.size() > 2 ? f[2] : 1.0});
            }
        };
        t["scene"]["bands"] = [](RunConfig& c, const std::string& v, const std::string& w) {
            c.scene.bands.clear();
            for (const auto& item : list_items(v)) {
                const auto f = to_tuple(item, w, 3, 6);
                if (f.size() == 5) throw ConfigError(w + ": band x limits come in pairs");
                ReflectorBand b{f[0], f[1], f[2], f.size() > 3 ? f[3] : 0.0, {}, {}};
                if (f.size() == 6) {
                    b.x_min = f[4];
                    b.x_max = f[5];
                }
                c.scene.bands.push_back(b);
            }
        };
        t["scene"]["segments"] = [](RunConfig& c, const std::string& v, const std::string& w) {
            c.scene.segments.clear();
            for (const auto& item : list_items(v)) {
                const auto f = to_tuple(item, w, 5, 6);
                c.scene.segments.push_back({f[0], f[1], f[2], f[3], f[4], f.size() > 5 ? f[5] : 1.0});
            }
        };

        WEMIG_SIZE("acquisition", "nt", acquisition.nt);
        WEMIG_DBL("acquisition", "dt", acquisition.dt);
        WEMIG_DBL("acquisition", "z_max", acquisition.z_max);

        WEMIG_DBL("propagator", "q_lo", taper.q_lo);
        WEMIG_DBL("propagator", "q_hi", taper.q_hi);
        WEMIG_DBL("propagator", "phi_max", taper.phi_max);
        WEMIG_SIZE("propagator", "edge_width", taper.edge_width);
        WEMIG_DBL("propagator", "edge_decay", taper.edge_decay);
        t["propagator"]["policy"] = [](RunConfig& c, const std::string& v, const std::string& w) {
            if (v == "zero") c.taper.policy = EvanescentPolicy::zero;
            else if (v == "damp") c.taper.policy = EvanescentPolicy::damp;
            else throw ConfigError(w + ": expected zero or damp, got '" + v + "'");
        };

        WEMIG_DBL("mute", "slowness_cut", mute.slowness_cut);
        WEMIG_HZ("mute", "f_min", mute.omega_min);
        WEMIG_HZ("mute", "f_max", mute.omega_max);
        WEMIG_DBL("mute", "omega_taper", mute.omega_taper);
        WEMIG_DBL("mute", "dip_taper", mute.dip_taper);
        WEMIG_BOOL("mute", "time_mute", mute.time_mute);
        WEMIG_DBL("mute", "t_min0", mute.t_min0);
        WEMIG_DBL("mute", "t_min_slope", mute.t_min_slope);
        WEMIG_DBL("mute", "t_max0", mute.t_max0);
        WEMIG_DBL("mute", "t_max_slope", mute.t_max_slope);
        WEMIG_DBL("mute", "t_taper", mute.t_taper);

        WEMIG_DBL("angle", "pmin", angle.p_min);
        WEMIG_DBL("angle", "pmax", angle.p_max);
        WEMIG_SIZE("angle", "np", angle.np);
        WEMIG_DBL("angle", "radius", angle.radius);
        WEMIG_DBL("angle", "flat_fraction", angle.flat_fraction);
        WEMIG_SIZE("angle", "x_first", angle.x_first);
        WEMIG_SIZE("angle", "x_count", angle.x_count);
        WEMIG_SIZE("angle", "x_stride", angle.x_stride);

        WEMIG_BOOL("recon", "xi", recon.weights.xi_mode);
        WEMIG_BOOL("recon", "q_inverse", recon.weights.q_inverse_mode);
        t["recon"]["dt_power"] = [](RunConfig& c, const std::string& v, const std::string& w) {
            c.recon.weights.dt_inverse_power = to_integer<int>(v, w);
        };
        WEMIG_HZ("recon", "f_floor", recon.weights.omega_floor);
        WEMIG_BOOL("recon", "phi_normalize", recon.phi_normalize);
        t["recon"]["direction"] = [](RunConfig& c, const std::string& v, const std::string& w) {
            if (v == "vertical") c.recon.normalize.mode = DirectionMode::vertical_only;
            else if (v == "local_dip") c.recon.normalize.mode = DirectionMode::local_dip;
            else throw ConfigError(w + ": expected vertical or local_dip, got '" + v + "'");
        };
        WEMIG_SIZE("recon", "phi_stride", recon.normalize.stride);
        WEMIG_SIZE("recon", "n_theta", recon.normalize.phi.n_theta);
        WEMIG_DBL("recon", "ray_dz", recon.normalize.phi.ray_dz);

        WEMIG_DBL("annihilator", "scan_lo", annihilator.scan_lo);
        WEMIG_DBL("annihilator", "scan_hi", annihilator.scan_hi);
        WEMIG_DBL("annihilator", "scan_step", annihilator.scan_step);

        t["run"]["threads"] = [](RunConfig& c, const std::string& v, const std::string& w) {
            c.run.threads = to_integer<int>(v, w);
        };
        t["run"]["seed"] = [](RunConfig& c, const std::string& v, const std::string& w) {
            c.run.seed = to_integer<std::uint64_t>(v, w);
        };
        WEMIG_DBL("run", "dot_tolerance", run.dot_tolerance);
        return t;
    }();
    return table;
}

#undef WEMIG_DBL
#undef WEMIG_SIZE
#undef WEMIG_BOOL
#undef WEMIG_HZ

}  // namespace detail

/// Cross-section checks; all run before any compute.
inline void validate(const RunConfig& c) {
    auto fail = [](const std::string& key, const std::string& what) { throw ConfigError(key + ": " + what); };
    const auto& sp = c.scene;
    if (sp.nx < 2 || sp.nz < 2) fail("[scene] nx/nz", "need at least 2 samples per axis");
    if (!(sp.dx > 0.0) || !(sp.dz > 0.0)) fail("[scene] dx/dz", "must be positive");
    if (c.acquisition.nt < 4) fail("[acquisition] nt", "need at least 4 samples");
    if (!(c.acquisition.dt > 0.0)) fail("[acquisition] dt", "must be positive");
    const double depth = sp.dz * static_cast<double>(sp.nz - 1);
    if (c.acquisition.z_max < 0.0) fail("[acquisition] z_max", "must be nonnegative");
    if (c.acquisition.z_max > 0.0) {
        const double steps = c.acquisition.z_max / sp.dz;
        if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
            fail("[acquisition] z_max", "must be a whole multiple of [scene] dz");
        if (c.acquisition.z_max > depth * (1.0 + 1e-12)) fail("[acquisition] z_max", "lies below the model");
    }
    try {
        c.taper.validate();
    } catch (const Error& e) {
        fail("[propagator]", e.what());
    }
    try {
        c.mute.validate();
    } catch (const Error& e) {
        fail("[mute]", e.what());
    }
    if (c.mute.omega_max > nyquist(c.acquisition.dt) * (1.0 + 1e-12))
        fail("[mute] f_max", "band must stay inside the Nyquist frequency of [acquisition] dt");

    // Background velocity extremes on the grid nodes.
    double c_min = std::numeric_limits<double>::infinity(), c_max = 0.0;
    for (std::size_t j = 0; j < sp.nz; ++j)
        for (std::size_t i = 0; i < sp.nx; ++i) {
            const double v = background_velocity(sp, sp.x0 + sp.dx * static_cast<double>(i),
                                                 sp.dz * static_cast<double>(j));
            c_min = std::min(c_min, v);
            c_max = std::max(c_max, v);
        }
    if (!(c_min > 0.0)) fail("[scene] velocity", "background velocity must stay positive");
    if (!(c.mute.slowness_cut < 1.0 / c_min)) fail("[mute] slowness_cut", "must be below 1 / min(c0)");

    const auto& a = c.angle;
    if (a.np == 0) fail("[angle] np", "must be positive");
    if (a.np > 1 && !(a.p_max > a.p_min)) fail("[angle] pmax", "must exceed pmin");
    if (!(a.radius >= 0.0)) fail("[angle] radius", "must be nonnegative");
    if (!(a.flat_fraction >= 0.0 && a.flat_fraction <= 1.0)) fail("[angle] flat_fraction", "must lie in [0, 1]");
    if (a.x_stride == 0) fail("[angle] x_stride", "must be positive");
    if (a.x_first >= sp.nx) fail("[angle] x_first", "lies outside the lateral grid");
    const double bound = 0.5 / c_max;
    if (!(std::max(std::abs(a.p_min), std::abs(a.p_max)) < bound))
        fail("[angle] pmax", "max |p| must stay strictly below the aperture bound 1/(2 max c0) = " +
                                 std::to_string(bound) + " s/m");

    const auto& r = c.recon;
    const double floor = r.weights.omega_floor > 0.0 ? r.weights.omega_floor : c.mute.omega_min;
    if (r.weights.omega_floor < 0.0) fail("[recon] f_floor", "must be nonnegative");
    if (c.mute.omega_min < floor * (1.0 - 1e-12)) fail("[recon] f_floor", "must not exceed [mute] f_min");
    if (r.normalize.stride == 0) fail("[recon] phi_stride", "must be positive");
    if (r.normalize.phi.n_theta < 2) fail("[recon] n_theta", "need at least 2 nodes");
    if (!(r.normalize.phi.ray_dz > 0.0)) fail("[recon] ray_dz", "must be positive");

    const auto& an = c.annihilator;
    if (!(an.scan_lo > 0.0) || !(an.scan_hi >= an.scan_lo) || !(an.scan_step > 0.0))
        fail("[annihilator] scan_lo/scan_hi/scan_step", "need 0 < scan_lo <= scan_hi and scan_step > 0");
    if (c.run.threads < 0) fail("[run] threads", "must be nonnegative");
    if (!(c.run.dot_tolerance > 0.0)) fail("[run] dot_tolerance", "must be positive");
}

inline RunConfig parse_config_text(const std::string& text) {
    RunConfig c;
    c.source_text = text;
    const auto& table = detail::key_table();
    std::set<std::string> seen_sections;
    std::set<std::string> seen_keys;
    std::string section;
    std::istringstream is(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const std::string at = "line " + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(at + ": malformed section header '" + line + "'");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (!table.contains(section)) throw ConfigError(at + ": unknown section [" + section + "]");
            if (!seen_sections.insert(section).second)
                throw ConfigError(at + ": duplicate section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(at + ": expected 'key = value', got '" + line + "'");
        if (section.empty()) throw ConfigError(at + ": key outside of any section");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const std::string where = "[" + section + "] " + key;
        const auto& keys = table.at(section);
        const auto it = keys.find(key);
        if (it == keys.end()) throw ConfigError(at + ": unknown key " + where);
        if (!seen_keys.insert(section + "." + key).second) throw ConfigError(at + ": duplicate key " + where);
        it->second(c, value, where);
    }
    validate(c);
    return c;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config_text(os.str());
}

}  // namespace wemig

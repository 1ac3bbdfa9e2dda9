// wemig command-line driver.
//
//   wemig <subcommand> [--config FILE] [--out DIR] [flags]
//
// Exit codes: 0 ok, 2 configuration error, 3 numerical-contract failure,
// 4 I/O error. WEMIG_THREADS overrides [run] threads.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wemig/manifest.hpp"
#include "wemig/wemig.hpp"

namespace fs = std::filesystem;
using namespace wemig;

namespace {

enum Exit { kOk = 0, kUnexpected = 1, kConfig = 2, kContract = 3, kIo = 4 };

struct Common {
    std::string config;
    std::string out = ".";
    std::string model;  // optional background override
};

struct Run {
    RunConfig cfg;
    Manifest manifest;
    std::string out;

    std::string path(const std::string& name) const { return (fs::path(out) / name).string(); }

    void save(const std::string& name, const Dataset& ds) {
        const auto p = path(name);
        write_container(ds, p);
        manifest.add_output(p);
    }

    void save_text(const std::string& name, const std::string& text) {
        const auto p = path(name);
        {
            std::ofstream f(p, std::ios::trunc);
            if (!f) throw IoError("cannot open '" + p + "' for writing");
            f << text;
            f.close();
            if (!f) throw IoError("write to '" + p + "' failed");
        }
        manifest.add_output(p);
    }

    void finish() {
        manifest.set_threads(thread_count());
        std::cout << "manifest: " << manifest.write(out) << '\n';
    }
};

int configured_threads(const RunConfig& cfg) {
    if (const char* env = std::getenv("WEMIG_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) throw ConfigError("WEMIG_THREADS must be a positive integer");
        return static_cast<int>(v);
    }
    return cfg.run.threads;
}

Run start(const std::string& name, const Common& c, const std::vector<std::string>& argv) {
    RunConfig cfg = c.config.empty() ? parse_config_text("") : parse_config(c.config);
    if (const int t = configured_threads(cfg); t > 0) set_threads(t);
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec || !fs::is_directory(c.out)) throw IoError("cannot create output directory '" + c.out + "'");
    Run run{std::move(cfg), Manifest(name), c.out};
    run.manifest.set_command_line(argv);
    run.manifest.set_config(c.config, run.cfg.source_text);
    if (!c.config.empty()) run.manifest.add_input(c.config);
    return run;
}

/// Scene from the config, with the background optionally read from a file.
Scene load_scene(Run& run, const Common& c) {
    Scene sc = run.cfg.build();
    if (!c.model.empty()) {
        sc.model = read_grid(c.model);
        run.manifest.add_input(c.model);
        sc.geometry = run.cfg.geometry_for(sc.model);
    }
    return sc;
}

DataCube load_data(Run& run, const std::string& given) {
    const std::string p = given.empty() ? run.path("data.weg") : given;
    DataCube d = read_cube(p);
    run.manifest.add_input(p);
    return d;
}

std::string csv_line(std::initializer_list<double> v) {
    std::ostringstream os;
    os << std::setprecision(17);
    bool first = true;
    for (double x : v) {
        if (!first) os << ',';
        os << x;
        first = false;
    }
    os << '\n';
    return os.str();
}

/// Location of max |image| and its offset in cells from the first scene point.
void record_peak(Run& run, const Grid2D& img) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < img.size(); ++k)
        if (std::abs(img.values()[k]) > std::abs(img.values()[best])) best = k;
    const Axis &az = img.axis(0), &ax = img.axis(1);
    const std::size_t j = best / ax.n, i = best % ax.n;
    auto& r = run.manifest.results();
    r["peak"] = {{"x", ax.coord(i)}, {"z", az.coord(j)}, {"value", img.values()[best]}};
    if (!run.cfg.scene.points.empty()) {
        const auto& p = run.cfg.scene.points.front();
        r["peak_offset_cells"] = {{"x", (ax.coord(i) - p.x) / ax.delta}, {"z", (az.coord(j) - p.z) / az.delta}};
        std::cout << "peak offset from first point: " << (ax.coord(i) - p.x) / ax.delta << " x-cells, "
                  << (az.coord(j) - p.z) / az.delta << " z-cells\n";
    }
}

int cmd_model(const Common& c, const std::vector<std::string>& argv) {
    Run run = start("model", c, argv);
    const Scene sc = run.cfg.build();
    run.save("model.weg", to_dataset(sc.model));
    run.save("dc.weg", to_dataset(sc.dc));
    run.finish();
    return kOk;
}

int cmd_born(const Common& c, const std::string& dc_path, const std::vector<std::string>& argv) {
    Run run = start("born", c, argv);
    Scene sc = load_scene(run, c);
    if (!dc_path.empty()) {
        sc.dc = read_grid(dc_path);
        run.manifest.add_input(dc_path);
    }
    const DsrEngine eng(sc.model, sc.geometry, run.cfg.taper, run.cfg.mute);
    run.save("data.weg", to_dataset(born_model(eng, sc.dc)));
    run.finish();
    return kOk;
}

int cmd_migrate(const Common& c, const std::string& data_path, bool true_amp, bool phi_norm,
                const std::vector<std::string>& argv) {
    Run run = start("migrate", c, argv);
    const Scene sc = load_scene(run, c);
    const DataCube d = load_data(run, data_path);
    const DsrEngine eng(sc.model, sc.geometry, run.cfg.taper, run.cfg.mute);
    phi_norm = phi_norm || run.cfg.recon.phi_normalize;
    if (phi_norm && !true_amp) throw ConfigError("--phi-normalize requires --true-amplitude");
    Grid2D img = true_amp ? reconstruct(eng, d, run.cfg.recon.weights) : migrate_adjoint(eng, d);
    if (phi_norm) img = normalize_by_phi(img, sc.model, sc.geometry, run.cfg.mute, run.cfg.taper, run.cfg.recon.normalize);
    run.manifest.results()["mode"] = true_amp ? (phi_norm ? "reconstruct+phi" : "reconstruct") : "adjoint";
    record_peak(run, img);
    run.save("image.weg", to_dataset(img));
    run.finish();
    return kOk;
}

struct AngleFlags {
    std::optional<double> pmin, pmax, radius, x_center;
    std::optional<std::size_t> np;
    bool tilde = false;
    std::string data;
};

int cmd_angle(const Common& c, const AngleFlags& f, const std::vector<std::string>& argv) {
    Run run = start("angle", c, argv);
    auto& a = run.cfg.angle;
    if (f.pmin) a.p_min = *f.pmin;
    if (f.pmax) a.p_max = *f.pmax;
    if (f.np) a.np = *f.np;
    if (f.radius) a.radius = *f.radius;
    if (f.pmax && !f.pmin) a.p_min = -a.p_max;
    validate(run.cfg);  // the aperture bound is rechecked after the overrides
    const Scene sc = load_scene(run, c);
    const AngleConfig ac = a.to_config();
    const GuardReport guard = guard_pmax(sc.model, ac.p, ac.chi_radius);
    if (guard.r_warning)
        std::cerr << "warning: radius heuristic R C1 C0^2 = " << guard.r_proxy
                  << " exceeds 0.1; the gather may contain artifacts\n";
    const DataCube d = load_data(run, f.data);
    const DsrEngine eng(sc.model, sc.geometry, run.cfg.taper, run.cfg.mute);
    const AngleGather g = f.tilde ? awe_tilde_transform(eng, d, ac, run.cfg.recon.weights) : awe_transform(eng, d, ac);
    run.save("gather.weg", to_dataset(g));

    const Axis& gx = g.axis(1);
    double xc = gx.coord(gx.n / 2);
    if (!run.cfg.scene.points.empty()) xc = run.cfg.scene.points.front().x;
    if (f.x_center) xc = *f.x_center;
    const auto ic = static_cast<long long>(std::llround(gx.index_of(xc)));
    const auto lo = static_cast<std::size_t>(std::clamp<long long>(ic - 2, 0, static_cast<long long>(gx.n) - 1));
    const auto hi = static_cast<std::size_t>(std::clamp<long long>(ic + 3, 1, static_cast<long long>(gx.n)));
    const Flatness fl = flatness_metric(g, lo, std::max(hi, lo + 1));
    std::string csv = "p,z_peak\n";
    for (std::size_t ip = 0; ip < g.axis(2).n; ++ip) csv += csv_line({g.axis(2).coord(ip), fl.z_peak[ip]});
    run.save_text("zpeak.csv", csv);
    auto& r = run.manifest.results();
    r["guard"] = {{"c_max", guard.c_max}, {"bound", guard.bound}, {"p_abs_max", guard.p_abs_max},
                  {"c1", guard.c1}, {"r_proxy", guard.r_proxy}, {"r_warning", guard.r_warning}};
    r["flatness_cells"] = fl.metric;
    r["x_window"] = {gx.coord(lo), gx.coord(std::max(hi, lo + 1) - 1)};
    std::cout << "flatness: " << fl.metric << " cells\n";
    run.finish();
    return kOk;
}

std::vector<double> parse_scan(const std::string& spec) {
    std::vector<double> f;
    std::istringstream is(spec);
    std::string tok;
    while (std::getline(is, tok, ':')) {
        try {
            std::size_t used = 0;
            f.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError("--scan: expected lo:hi:step, got '" + spec + "'");
        }
    }
    if (f.size() != 3) throw ConfigError("--scan: expected lo:hi:step, got '" + spec + "'");
    try {
        return scan_scales(f[0], f[1], f[2]);
    } catch (const RangeError& e) {
        throw ConfigError(std::string("--scan: ") + e.what());
    }
}

int cmd_annihilate(const Common& c, const std::string& data_path, const std::string& scan, bool residual,
                   const std::vector<std::string>& argv) {
    Run run = start("annihilate", c, argv);
    const std::vector<double> scales = scan.empty() ? std::vector<double>{} : parse_scan(scan);
    const Scene sc = load_scene(run, c);
    const DataCube d = load_data(run, data_path);
    auto& r = run.manifest.results();
    if (!scales.empty()) {
        const SemblanceScan s = semblance_scan(d, sc.model, sc.geometry, run.cfg.mute, run.cfg.taper, scales,
                                               run.cfg.recon.weights);
        std::string csv = "scale,J\n";
        for (const auto& p : s.points) csv += csv_line({p.scale, p.j});
        run.save_text("scan.csv", csv);
        const double best = s.points[s.argmin].scale;
        r["argmin"] = best;
        std::cout << "argmin scale: " << std::fixed << std::setprecision(2) << best << '\n';
    }
    if (residual || scales.empty()) {
        const DsrEngine eng(sc.model, sc.geometry, run.cfg.taper, run.cfg.mute);
        const AnnihilatorResidual res = annihilator_residual(eng, d, run.cfg.recon.weights);
        if (residual) run.save("residual.weg", to_dataset(res.wd));
        r["residual"] = {{"norm_wd", res.norm_wd}, {"norm_kk", res.norm_kk}, {"h_ref", res.h_ref},
                         {"ratio", res.ratio}};
        std::cout << "residual ratio: " << res.ratio << '\n';
    }
    run.finish();
    return kOk;
}

int cmd_rays(const Common& c, const std::vector<std::string>& argv) {
    Run run = start("rays", c, argv);
    const Scene sc = load_scene(run, c);
    const VelocityModel m(sc.model);
    std::string events = "x,z,s,r,t_total,sigma,rho\n";
    std::string health = "point,angle_deg,max_drift\n";
    double worst = 0.0;
    for (std::size_t k = 0; k < run.cfg.scene.points.size(); ++k) {
        const auto& p = run.cfg.scene.points[k];
        for (const auto& e : predict_events(m, p.x, p.z, sc.geometry))
            events += csv_line({e.x, e.z, e.s, e.r, e.t_total, e.sigma, e.rho});
        for (int deg = -60; deg <= 60; deg += 10) {
            const double th = deg * M_PI / 180.0;
            const RayState st = on_shell_state(m, p.x, p.z, std::sin(th), -std::cos(th), 1.0);
            double drift = 0.0;
            for (const auto& s : trace_ray_time(m, st, 1e-3, p.z / m(p.x, p.z)))
                drift = std::max(drift, hamiltonian_drift(m, s));
            worst = std::max(worst, drift);
            health += csv_line({static_cast<double>(k), static_cast<double>(deg), drift});
        }
    }
    run.save_text("events.csv", events);
    run.save_text("ray_health.csv", health);
    run.manifest.results()["max_hamiltonian_drift"] = worst;
    std::cout << "max Hamiltonian drift: " << worst << '\n';
    run.finish();
    return worst < 1e-6 ? kOk : kContract;
}

int cmd_dottest(const Common& c, const std::vector<std::string>& argv) {
    Run run = start("dottest", c, argv);
    const Scene sc = load_scene(run, c);
    const DsrEngine eng(sc.model, sc.geometry, run.cfg.taper, run.cfg.mute);
    const auto results = dot_test_suite(eng, run.cfg.run.seed);
    const double tol = run.cfg.run.dot_tolerance;
    std::string csv = "pair,lhs_re,lhs_im,rhs_re,rhs_im,rel\n";
    bool ok = true;
    auto& r = run.manifest.results();
    for (const auto& d : results) {
        std::ostringstream os;
        os << std::setprecision(17) << d.name << ',' << d.lhs.real() << ',' << d.lhs.imag() << ',' << d.rhs.real()
           << ',' << d.rhs.imag() << ',' << d.rel << '\n';
        csv += os.str();
        const bool pass = d.rel < tol;
        ok = ok && pass;
        r[d.name] = d.rel;
        std::cout << (pass ? "PASS " : "FAIL ") << std::left << std::setw(16) << d.name << " rel = " << std::scientific
                  << std::setprecision(3) << d.rel << '\n';
    }
    r["tolerance"] = tol;
    r["pass"] = ok;
    run.save_text("dottest.csv", csv);
    run.finish();
    return ok ? kOk : kContract;
}

int cmd_export(const std::string& in, const std::string& out, const std::vector<std::string>& slices) {
    std::vector<std::pair<std::size_t, std::size_t>> fixed;
    for (const auto& s : slices) {
        const auto eq = s.find('=');
        std::size_t d = 0, i = 0;
        try {
            if (eq == std::string::npos) throw std::invalid_argument(s);
            std::size_t u1 = 0, u2 = 0;
            d = std::stoul(s.substr(0, eq), &u1);
            i = std::stoul(s.substr(eq + 1), &u2);
            if (u1 != eq || u2 != s.size() - eq - 1) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw ConfigError("--slice: expected DIM=INDEX, got '" + s + "'");
        }
        fixed.emplace_back(d, i);
    }
    const Dataset ds = slice_dataset(read_container(in), fixed);
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw IoError("cannot open '" + out + "' for writing");
    f << dataset_to_csv(ds);
    f.close();
    if (!f) throw IoError("write to '" + out + "' failed");
    return kOk;
}

int exit_code_for(const std::exception_ptr& ep) {
    try {
        std::rethrow_exception(ep);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const RangeError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const FormatError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const LengthError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const DataError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const AxisError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const Error& e) {
        std::cerr << "numerical contract failure: " << e.what() << '\n';
        return kContract;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUnexpected;
    }
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    CLI::App app{"wemig: 2D double-square-root wave-equation imaging"};
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub, bool with_model = true) {
        sub->add_option("--config", common.config, "INI run configuration (defaults when omitted)");
        sub->add_option("--out", common.out, "output directory")->capture_default_str();
        if (with_model) sub->add_option("--model", common.model, "background velocity container");
    };

    auto* model = app.add_subcommand("model", "build the scene containers");
    add_common(model, false);

    std::string dc_path;
    auto* born = app.add_subcommand("born", "Born modeling of the scene perturbation");
    add_common(born);
    born->add_option("--dc", dc_path, "perturbation container (default: scene)");

    std::string data_path;
    bool true_amp = false, phi_norm = false;
    auto* migrate = app.add_subcommand("migrate", "adjoint migration or amplitude-true reconstruction");
    add_common(migrate);
    migrate->add_option("--data", data_path, "data cube (default OUT/data.weg)");
    migrate->add_flag("--true-amplitude", true_amp, "apply the reconstruction weights");
    migrate->add_flag("--phi-normalize", phi_norm, "divide by the Phi symbol at the band centre");

    AngleFlags af;
    auto* angle = app.add_subcommand("angle", "angle-domain common image gathers");
    add_common(angle);
    angle->add_option("--data", af.data, "data cube (default OUT/data.weg)");
    angle->add_option("--pmin", af.pmin, "smallest p (s/m); defaults to -pmax when only pmax is given");
    angle->add_option("--pmax", af.pmax, "largest p (s/m)");
    angle->add_option("--np", af.np, "number of p samples");
    angle->add_option("--radius", af.radius, "offset radius R of the cutoff (m)");
    angle->add_option("--x-center", af.x_center, "lateral centre of the flatness window (m)");
    angle->add_flag("--tilde", af.tilde, "amplitude-corrected transform");

    std::string scan;
    bool residual = false;
    auto* annihilate = app.add_subcommand("annihilate", "annihilator residual and semblance scan");
    add_common(annihilate);
    annihilate->add_option("--data", data_path, "data cube (default OUT/data.weg)");
    annihilate->add_option("--scan", scan, "velocity scale scan lo:hi:step");
    annihilate->add_flag("--residual", residual, "write the W d cube");

    auto* rays = app.add_subcommand("rays", "ray-oracle event tables for the scene points");
    add_common(rays);

    auto* dottest = app.add_subcommand("dottest", "adjoint tests of every operator pair");
    add_common(dottest);

    std::string ex_in, ex_out;
    std::vector<std::string> slices;
    auto* exp = app.add_subcommand("export", "CSV export of a container slice");
    exp->add_option("--in", ex_in, "container")->required();
    exp->add_option("--csv", ex_out, "output CSV path")->required();
    exp->add_option("--slice", slices, "fix dimension DIM at INDEX (DIM=INDEX, repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*model) return cmd_model(common, args);
        if (*born) return cmd_born(common, dc_path, args);
        if (*migrate) return cmd_migrate(common, data_path, true_amp, phi_norm, args);
        if (*angle) return cmd_angle(common, af, args);
        if (*annihilate) return cmd_annihilate(common, data_path, scan, residual, args);
        if (*rays) return cmd_rays(common, args);
        if (*dottest) return cmd_dottest(common, args);
        if (*exp) return cmd_export(ex_in, ex_out, slices);
    } catch (...) {
        return exit_code_for(std::current_exception());
    }
    return kUnexpected;
}

#pragma once

// Command-line front end. run() is kept in a header so the test suite can
// drive it in-process.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ptlattice/ptlattice.hpp"

namespace ptlattice::cli {

using nlohmann::json;

/// Radians, or literals such as pi, -pi/4, 3pi/2, 0.5*pi.
inline double parse_angle(std::string s, const std::string& flag) {
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    auto fail = [&]() -> double {
        throw ValidationError(flag + ": cannot parse angle '" + s + "' (radians or literals like pi/2, -pi/4)");
    };
    auto number = [&](const std::string& t) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            fail();
        }
        if (used != t.size()) fail();
        return v;
    };
    const auto pos = s.find("pi");
    if (pos == std::string::npos) return number(s);
    std::string pre = s.substr(0, pos), post = s.substr(pos + 2);
    if (!pre.empty() && pre.back() == '*') pre.pop_back();
    double coef = 1.0;
    if (pre == "-") coef = -1.0;
    else if (pre == "+" || pre.empty()) coef = 1.0;
    else coef = number(pre);
    double den = 1.0;
    if (!post.empty()) {
        if (post[0] != '/') fail();
        den = number(post.substr(1));
        if (den == 0.0) fail();
    }
    return coef * std::numbers::pi / den;
}

struct OutputFile {
    std::string name;
    std::string content;
};

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const LatticeParams& p) {
    return {{"kappa", p.kappa()}, {"sigma", p.sigma()}, {"rho", p.rho()}, {"phi", p.phi()}, {"g", p.g()}};
}

inline json to_json(const DriveParams& d) {
    return {{"kappa1", d.kappa1()}, {"kappa2", d.kappa2()}, {"kappa3", d.kappa3()}, {"g", d.g()},
            {"M", d.M()},           {"Gamma", d.Gamma()},   {"drive_phase", d.drive_phase()},
            {"omega", d.omega()}};
}

inline json to_json(const ClassificationReport& r) {
    json j{{"regime", to_string(r.regime)},
           {"method", to_string(r.method)},
           {"g_th", r.g_th},
           {"epsilon", r.epsilon},
           {"v_g", r.v_g},
           {"critical_speed", r.critical_speed},
           {"validated", r.validated},
           {"note", r.note}};
    if (r.saddle_v0) {
        const auto& s = *r.saddle_v0;
        j["saddle_v0"] = {{"q_s", to_json(s.q_s)},       {"root", to_json(s.root)},
                          {"energy", to_json(s.energy)}, {"order", s.order},
                          {"growth_rate", s.growth_rate}, {"velocity", s.velocity}};
    } else {
        j["saddle_v0"] = nullptr;
    }
    return j;
}

inline json to_json(const ComplexSpectrum& s) {
    const double bound = spectrum_residual_bound * s.matrix_norm;
    return {{"size", s.eigenvalues.size()},
            {"max_abs_imag", s.max_abs_imag},
            {"max_residual", s.max_residual},
            {"pairing_defect", s.pairing_defect},
            {"matrix_norm", s.matrix_norm},
            {"residual_bound", bound},
            {"residuals_ok", s.max_residual <= bound},
            {"pairing_ok", s.pairing_defect <= bound},
            {"real_within_1e-6", s.max_abs_imag <= 1e-6}};
}

// ---- computations shared by the subcommands and `reproduce` ----

inline std::vector<double> q_grid(int nq) {
    if (nq < 2) throw ValidationError("--nq must be >= 2");
    std::vector<double> q(nq);
    for (int i = 0; i < nq; ++i) q[i] = two_pi * i / nq;
    return q;
}

inline std::string bands_csv(const LatticeParams& p, int nq) {
    const auto q = q_grid(nq);
    std::vector<cplx> ep, em;
    for (double x : q) {
        const auto e = dispersion(p, x);
        ep.push_back(e.plus);
        em.push_back(e.minus);
    }
    std::ostringstream os;
    io::write_bands(os, q, ep, em);
    return os.str();
}

struct PropagationSetup {
    std::optional<LatticeParams> lattice;
    std::optional<DriveParams> drive;
    int N = 400;
    double w = 10.0;
    double q0 = std::numbers::pi;
    double t_end = 100.0;
    double dt = 0.01;
    double snapshot_dt = 0.5;
    std::vector<double> rays;
    double fit_t_min = 40.0;
    Boundary boundary = Boundary::open;
    RayObservable observable = RayObservable::total;
};

inline std::vector<OutputFile> run_propagation(const PropagationSetup& s, const std::string& prefix) {
    auto field = gaussian_packet(s.N, s.w, s.q0);
    if (!(s.snapshot_dt > 0.0)) throw ValidationError("--snapshot-dt must be > 0");
    const int every = std::max(1, static_cast<int>(std::lround(s.snapshot_dt / s.dt)));

    std::ostringstream snap;
    snap << io::snapshot_header << '\n';
    std::vector<WavePacketField> frames;
    EvolveOptions opt;
    opt.boundary = s.boundary;
    opt.snapshot_every = every;
    opt.on_snapshot = [&](const WavePacketField& f) {
        io::write_snapshot_rows(snap, f);
        frames.push_back(f);
    };

    json summary{{"N", s.N}, {"w", s.w}, {"q0", s.q0}, {"t_end", s.t_end}, {"dt", s.dt},
                 {"boundary", s.boundary == Boundary::open ? "open" : "periodic"},
                 {"observable", s.observable == RayObservable::total ? "total" : "a_only"}};
    Evolution ev = [&] {
        if (s.drive) {
            summary["drive"] = to_json(*s.drive);
            summary["frame"] = "gauge";
            return evolve_driven(*s.drive, std::move(field), s.t_end, s.dt, opt);
        }
        summary["params"] = to_json(*s.lattice);
        return evolve_static(*s.lattice, std::move(field), s.t_end, s.dt, opt);
    }();
    summary["steps"] = ev.steps;
    summary["boundary_warning"] = ev.boundary_warning;
    summary["max_edge_fraction"] = ev.max_edge_fraction;

    std::vector<OutputFile> out{{prefix + "snapshots.csv", snap.str()}};
    json rays = json::array();
    for (std::size_t k = 0; k < s.rays.size(); ++k) {
        const auto tr = sample_ray(frames, s.rays[k], s.observable);
        std::ostringstream os;
        io::write_ray(os, tr);
        const std::string name = prefix + "ray" + std::to_string(k) + ".csv";
        out.push_back({name, os.str()});
        json r{{"file", std::filesystem::path(name).filename().string()},
               {"v", s.rays[k]},
               {"clamped", tr.clamped},
               {"intensity_ratio", tr.intensities.back() / tr.intensities.front()}};
        try {
            r["growth_rate_fit"] = fit_growth(tr, s.fit_t_min);
        } catch (const InsufficientData&) {
            r["growth_rate_fit"] = nullptr;
        }
        rays.push_back(r);
    }
    summary["fit_t_min"] = s.fit_t_min;
    summary["rays"] = rays;
    out.push_back({prefix + "propagate.json", dump(summary)});
    return out;
}

inline std::vector<OutputFile> run_floquet(const DriveParams& d, int nq, int steps, const std::string& prefix) {
    const auto q = q_grid(nq);
    const auto band = quasi_energies(d, q, steps);
    const auto rwa = rwa_params(d);
    std::ostringstream qe, st;
    io::write_bands(qe, band);

    std::vector<cplx> sp, sm;
    double deviation = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const auto e = dispersion(rwa, q[i]);
        sp.push_back(e.plus);
        sm.push_back(e.minus);
        const double w = d.omega();
        const double same = std::max(quasi_energy_distance(band.E_plus[i], e.plus, w),
                                     quasi_energy_distance(band.E_minus[i], e.minus, w));
        const double cross = std::max(quasi_energy_distance(band.E_plus[i], e.minus, w),
                                      quasi_energy_distance(band.E_minus[i], e.plus, w));
        deviation = std::max(deviation, std::min(same, cross));
    }
    io::write_bands(st, q, sp, sm);

    double max_imag = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i)
        max_imag = std::max({max_imag, std::abs(band.E_plus[i].imag()), std::abs(band.E_minus[i].imag())});
    json j{{"drive", to_json(d)},
           {"rwa", to_json(rwa)},
           {"J_M_Gamma", bessel_j(d.M(), d.Gamma())},
           {"J_0_2Gamma_cos", bessel_j(0, 2.0 * d.Gamma() * std::cos(d.drive_phase()))},
           {"phi_eff", effective_phase(d)},
           {"steps_per_period", steps},
           {"max_deviation_from_rwa", deviation},
           {"max_abs_imag", max_imag},
           {"degenerate_points", band.degenerate_points}};
    return {{prefix + "quasi_energies.csv", qe.str()},
            {prefix + "rwa_bands.csv", st.str()},
            {prefix + "rwa_params.json", dump(j)}};
}

inline GainProfile make_profile(const std::string& kind, int N, double g, int Ng, double ramp) {
    if (kind == "square") return GainProfile::square(N, g, Ng);
    if (kind == "smooth") return GainProfile::smooth(N, g, Ng, ramp);
    if (kind == "uniform") return GainProfile::uniform(N, g);
    throw ValidationError("--profile must be square, smooth or uniform");
}

inline std::vector<OutputFile> run_spectrum(const LatticeParams& p, int N, int Ng, const std::string& kind,
                                            double ramp, const std::string& prefix) {
    const auto profile = make_profile(kind, N, p.g(), Ng, ramp);
    const auto s = spectrum(build_hamiltonian(p, N, profile));
    std::ostringstream os;
    io::write_spectrum(os, s);
    json j = to_json(s);
    j["params"] = to_json(p);
    j["N"] = N;
    j["N_g"] = Ng;
    j["profile"] = kind;
    return {{prefix + "spectrum.csv", os.str()}, {prefix + "metrics.json", dump(j)}};
}

// ---- reproduction recipes ----

inline constexpr double fig_drive_k1 = 2.1124;
inline constexpr double fig_drive_gamma = 1.109;
inline constexpr double fig_drive_k3_a = 1.4784;
inline constexpr double fig_drive_k3_b = 0.6336;

inline DriveParams fig_drive(double kappa3, double omega) {
    return {fig_drive_k1, fig_drive_k1, kappa3, 0.05, 1, fig_drive_gamma, -std::numbers::pi / 4.0, omega};
}

using Task = std::function<std::vector<OutputFile>()>;

inline std::vector<Task> reproduce_tasks(const std::string& fig, const std::string& variant) {
    const double half_pi = std::numbers::pi / 2.0;
    std::vector<std::string> variants;
    if (variant == "all") variants = {"a", "b"};
    else if (variant == "a" || variant == "b") variants = {variant};
    else throw ValidationError("--variant must be a, b or all");

    std::vector<Task> tasks;
    if (fig == "fig2") {
        const LatticeParams base(1.0, 0.8, 0.6, half_pi, 0.0);
        const double g_th = threshold_and_gap(base).g_th;
        const std::vector<std::pair<std::string, double>> panels{{"a", 0.0}, {"b", g_th}, {"c", 3.0 * g_th}};
        for (const auto& [tag, g] : panels) {
            tasks.push_back([base, tag, g] {
                const auto p = base.with_g(g);
                const auto tg = threshold_and_gap(p);
                json j{{"params", to_json(p)}, {"g_th", tg.g_th}, {"gap", tg.gap},
                       {"E_plus_pi", to_json(dispersion(p, std::numbers::pi).plus)}};
                return std::vector<OutputFile>{{"fig2" + tag + "_bands.csv", bands_csv(p, 512)},
                                               {"fig2" + tag + ".json", dump(j)}};
            });
        }
    } else if (fig == "fig4") {
        for (const auto& v : variants) {
            tasks.push_back([v, half_pi] {
                PropagationSetup s;
                s.lattice = LatticeParams(1.0, 1.0, v == "a" ? 0.7 : 0.3, half_pi, 0.05);
                s.rays = {0.0, group_velocity(*s.lattice)};
                auto files = run_propagation(s, "fig4" + v + "_");
                const auto report = classify(*s.lattice, ClassifyMethod::numeric);
                files.push_back({"fig4" + v + "_classify.json", dump(to_json(report))});
                return files;
            });
        }
    } else if (fig == "fig5") {
        for (double omega : {6.0, 15.0, 150.0}) {
            tasks.push_back([omega] {
                std::ostringstream tag;
                tag << "fig5_omega" << omega << "_";
                return run_floquet(fig_drive(fig_drive_k3_a, omega), 128, default_monodromy_steps, tag.str());
            });
        }
        tasks.push_back([] {
            // The two kappa3 values used for the driven runs map onto different static lattices.
            json j = json::array();
            for (double k3 : {fig_drive_k3_a, fig_drive_k3_b}) {
                const auto p = rwa_params(fig_drive(k3, 15.0));
                j.push_back({{"kappa3", k3}, {"rwa", to_json(p)},
                             {"regime", to_string(classify(p, ClassifyMethod::numeric).regime)}});
            }
            return std::vector<OutputFile>{{"fig5_mappings.json", dump(j)}};
        });
    } else if (fig == "fig6") {
        for (const auto& v : variants) {
            tasks.push_back([v] {
                PropagationSetup s;
                s.drive = fig_drive(v == "a" ? fig_drive_k3_a : fig_drive_k3_b, 15.0);
                s.dt = s.drive->period() / 200.0;
                s.rays = {0.0, group_velocity(rwa_params(*s.drive))};
                return run_propagation(s, "fig6" + v + "_");
            });
        }
    } else if (fig == "fig7") {
        for (const auto& v : variants) {
            tasks.push_back([v, half_pi] {
                const LatticeParams p(1.0, 1.0, v == "a" ? 0.0 : 2.0, half_pi, 0.5);
                return run_spectrum(p, 300, 20, "square", 5.0, "fig7" + v + "_");
            });
        }
    } else {
        throw ValidationError("reproduce: unknown figure '" + fig + "' (fig2, fig4, fig5, fig6, fig7)");
    }
    return tasks;
}

inline unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("PTLATTICE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) throw ValidationError("PTLATTICE_THREADS must be a positive integer");
        n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

/// Runs the tasks on up to worker_count() threads; results keep task order.
inline std::vector<OutputFile> run_tasks(const std::vector<Task>& tasks) {
    std::vector<std::vector<OutputFile>> results(tasks.size());
    const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(tasks.size()));
    std::size_t next = 0;
    while (next < tasks.size()) {
        std::vector<std::future<std::vector<OutputFile>>> batch;
        const std::size_t first = next;
        for (unsigned k = 0; k < workers && next < tasks.size(); ++k, ++next)
            batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, tasks[next]));
        for (std::size_t k = 0; k < batch.size(); ++k) results[first + k] = batch[k].get();
    }
    std::vector<OutputFile> all;
    for (auto& r : results)
        for (auto& f : r) all.push_back(std::move(f));
    return all;
}

inline void write_outputs(const std::string& dir, const std::vector<OutputFile>& files, std::ostream& log) {
    std::filesystem::create_directories(dir);
    for (const auto& f : files) {
        const auto path = (std::filesystem::path(dir) / f.name).string();
        auto os = io::open_output(path);
        os << f.content;
        if (!os) throw Error("failed writing " + path);
        log << path << '\n';
    }
}

// ---- argument handling ----

namespace detail {

inline std::string config_value(const json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return io::fmt(v.get<double>());
    throw ValidationError("config key '" + key + "': unsupported value type");
}

// Splices the flat JSON document named by --config into the argument list,
// right after the subcommand, so explicit flags (parsed later) win.
inline std::vector<std::string> expand_config(std::vector<std::string> args, CLI::App& app) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw ValidationError("--config needs a path");
            path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + i);
            break;
        }
    }
    if (!path) return args;

    std::ifstream is(*path);
    if (!is) throw ValidationError("--config: cannot read " + *path);
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ValidationError("--config: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw ValidationError("--config: expected a flat JSON object");

    const auto sub_pos = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.empty() || a[0] != '-'; });
    if (sub_pos == args.end()) throw ValidationError("--config: no subcommand given");
    CLI::App* sub = nullptr;
    try {
        sub = app.get_subcommand(*sub_pos);
    } catch (const CLI::OptionNotFound&) {
        throw ValidationError("unknown subcommand '" + *sub_pos + "'");
    }

    std::vector<std::string> injected;
    for (const auto& [raw_key, value] : doc.items()) {
        std::string key = raw_key;
        std::replace(key.begin(), key.end(), '_', '-');
        const std::string flag = "--" + key;
        const CLI::Option* opt = sub->get_option_no_throw(flag);
        if (!opt) throw ValidationError("--config: unknown key '" + raw_key + "' for '" + sub->get_name() + "'");
        if (value.is_boolean()) {
            if (opt->get_type_size() != 0) throw ValidationError("config key '" + raw_key + "' expects a value");
            if (value.get<bool>()) injected.push_back(flag);
        } else if (value.is_array()) {
            for (const auto& e : value) {
                injected.push_back(flag);
                injected.push_back(config_value(e, raw_key));
            }
        } else {
            injected.push_back(flag);
            injected.push_back(config_value(value, raw_key));
        }
    }
    args.insert(sub_pos + 1, injected.begin(), injected.end());
    return args;
}

struct StaticFlags {
    double kappa = 1.0, sigma = 1.0, rho = 0.0, g = 0.0;
    std::string phi = "pi/2";

    void add(CLI::App* sub) {
        sub->add_option("--kappa", kappa, "intra-cell hopping")->capture_default_str();
        sub->add_option("--sigma", sigma, "inter-cell hopping")->capture_default_str();
        sub->add_option("--rho", rho, "next-nearest hopping magnitude")->capture_default_str();
        sub->add_option("--phi", phi, "next-nearest hopping phase (radians or pi/2-style literal)")->capture_default_str();
        sub->add_option("--g", g, "gain/loss rate")->capture_default_str();
    }
    LatticeParams params() const { return {kappa, sigma, rho, parse_angle(phi, "--phi"), g}; }
};

struct DriveFlags {
    double kappa1 = fig_drive_k1, kappa2 = fig_drive_k1, kappa3 = fig_drive_k3_a, Gamma = fig_drive_gamma, omega = 15.0;
    int M = 1;
    std::string drive_phase = "-pi/4";

    void add(CLI::App* sub) {
        sub->add_option("--kappa1", kappa1, "driven lattice hopping kappa1")->capture_default_str();
        sub->add_option("--kappa2", kappa2, "driven lattice hopping kappa2")->capture_default_str();
        sub->add_option("--kappa3", kappa3, "driven lattice next-nearest hopping")->capture_default_str();
        sub->add_option("--M", M, "resonance order, U = M omega")->capture_default_str();
        sub->add_option("--Gamma", Gamma, "ac drive amplitude")->capture_default_str();
        sub->add_option("--drive-phase", drive_phase, "ac drive phase")->capture_default_str();
        sub->add_option("--omega", omega, "modulation frequency")->capture_default_str();
    }
    DriveParams params(double g) const {
        return {kappa1, kappa2, kappa3, g, M, Gamma, parse_angle(drive_phase, "--drive-phase"), omega};
    }
};

} // namespace detail

/// Exit codes: 0 success, 1 validation/usage error, 2 numeric failure.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Convective and absolute PT symmetry breaking in Rice-Mele lattices", "ptlattice"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.footer("Every subcommand also accepts --config <file.json> (flat key/value document; "
               "explicit flags take precedence). PTLATTICE_THREADS caps reproduce parallelism.");

    std::string config_path, out_path = "-", out_dir = ".";
    auto add_config = [&](CLI::App* s) { s->add_option("--config", config_path, "flat JSON file with flag values"); };

    // bands
    detail::StaticFlags bands_flags;
    int nq = 256;
    auto* bands = app.add_subcommand("bands", "sweep q and write the Bloch dispersion CSV");
    bands_flags.add(bands);
    bands->add_option("--nq", nq, "number of q samples on [0, 2 pi)")->capture_default_str();
    bands->add_option("--out", out_path, "output CSV path, - for stdout")->capture_default_str();
    add_config(bands);

    // classify
    detail::StaticFlags cls_flags;
    std::string method = "numeric";
    auto* cls = app.add_subcommand("classify", "print the convective/absolute classification as JSON");
    cls_flags.add(cls);
    cls->add_option("--method", method, "numeric or asymptotic")->check(CLI::IsMember({"numeric", "asymptotic"}))->capture_default_str();
    add_config(cls);

    // propagate
    detail::StaticFlags prop_flags;
    detail::DriveFlags prop_drive;
    PropagationSetup setup;
    bool driven = false;
    std::string boundary = "open", observable = "total";
    auto* prop = app.add_subcommand("propagate", "evolve a Gaussian packet; write snapshots, ray traces and a summary");
    prop_flags.add(prop);
    prop_drive.add(prop);
    prop->add_flag("--driven", driven, "use the ac-dc driven lattice (drive flags) instead of the static one");
    prop->add_option("--N", setup.N, "lattice size (even), cells -N/2..N/2")->capture_default_str();
    prop->add_option("--w", setup.w, "packet width")->capture_default_str();
    std::string q0 = "pi";
    prop->add_option("--q0", q0, "carrier wave number")->capture_default_str();
    prop->add_option("--t-end", setup.t_end, "final time")->capture_default_str();
    prop->add_option("--dt", setup.dt, "RK4 step (driven runs: defaults to T/200)");
    prop->add_option("--snapshot-dt", setup.snapshot_dt, "time between snapshots")->capture_default_str();
    prop->add_option("--ray-v", setup.rays, "ray velocities (default: 0 and v_g)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
        ->delimiter(',');
    prop->add_option("--fit-t-min", setup.fit_t_min, "start of the growth-rate fit window")->capture_default_str();
    prop->add_option("--boundary", boundary, "open or periodic")->check(CLI::IsMember({"open", "periodic"}))->capture_default_str();
    prop->add_option("--observable", observable, "ray intensity: total or a_only")->check(CLI::IsMember({"total", "a_only"}))->capture_default_str();
    prop->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
    add_config(prop);

    // floquet
    detail::DriveFlags flq_drive;
    double flq_g = 0.05;
    int flq_nq = 128, steps = default_monodromy_steps;
    auto* flq = app.add_subcommand("floquet", "quasi-energies of the driven lattice and its averaged static parameters");
    flq_drive.add(flq);
    flq->add_option("--g", flq_g, "gain/loss rate")->capture_default_str();
    flq->add_option("--nq", flq_nq, "number of q samples on [0, 2 pi)")->capture_default_str();
    flq->add_option("--steps", steps, "RK4 steps per drive period (>= 200)")->capture_default_str();
    flq->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
    add_config(flq);

    // spectrum
    detail::StaticFlags spec_flags;
    int spec_N = 300, Ng = 20;
    double ramp = 5.0;
    std::string profile = "square";
    auto* spec = app.add_subcommand("spectrum", "eigenvalues of the truncated lattice with a confined gain/loss region");
    spec_flags.add(spec);
    spec->add_option("--N", spec_N, "lattice size (even), cells -N/2..N/2")->capture_default_str();
    spec->add_option("--Ng", Ng, "width of the gain/loss region")->capture_default_str();
    spec->add_option("--profile", profile, "square, smooth or uniform")->check(CLI::IsMember({"square", "smooth", "uniform"}))->capture_default_str();
    spec->add_option("--ramp", ramp, "raised-cosine ramp width for --profile smooth")->capture_default_str();
    spec->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
    add_config(spec);

    // reproduce
    std::string figure, variant = "all";
    auto* rep = app.add_subcommand("reproduce", "run the pinned parameter set of a figure end to end");
    rep->add_option("figure", figure, "fig2, fig4, fig5, fig6 or fig7")->required()
        ->check(CLI::IsMember({"fig2", "fig4", "fig5", "fig6", "fig7"}));
    rep->add_option("--variant", variant, "a, b or all")->check(CLI::IsMember({"a", "b", "all"}))->capture_default_str();
    rep->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
    add_config(rep);

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = detail::expand_config(std::move(args), app);
        std::reverse(args.begin(), args.end()); // CLI11 consumes a reversed vector
        app.parse(args);

        if (bands->parsed()) {
            const auto csv = bands_csv(bands_flags.params(), nq);
            if (out_path == "-") {
                out << csv;
            } else {
                auto os = io::open_output(out_path);
                os << csv;
                err << out_path << '\n';
            }
        } else if (cls->parsed()) {
            const auto m = method == "numeric" ? ClassifyMethod::numeric : ClassifyMethod::asymptotic;
            const auto p = cls_flags.params();
            json j = to_json(classify(p, m));
            j["params"] = to_json(p);
            out << dump(j);
        } else if (prop->parsed()) {
            setup.q0 = parse_angle(q0, "--q0");
            setup.boundary = boundary == "open" ? Boundary::open : Boundary::periodic;
            setup.observable = observable == "total" ? RayObservable::total : RayObservable::a_only;
            double v_g = 0.0;
            if (driven) {
                setup.drive = prop_drive.params(prop_flags.g);
                if (prop->count("--dt") == 0) setup.dt = setup.drive->period() / 200.0;
                v_g = group_velocity(rwa_params(*setup.drive));
            } else {
                setup.lattice = prop_flags.params();
                v_g = group_velocity(*setup.lattice);
            }
            if (setup.rays.empty()) setup.rays = {0.0, v_g};
            write_outputs(out_dir, run_propagation(setup, ""), err);
        } else if (flq->parsed()) {
            write_outputs(out_dir, run_floquet(flq_drive.params(flq_g), flq_nq, steps, ""), err);
        } else if (spec->parsed()) {
            write_outputs(out_dir, run_spectrum(spec_flags.params(), spec_N, Ng, profile, ramp, ""), err);
        } else if (rep->parsed()) {
            write_outputs(out_dir, run_tasks(reproduce_tasks(figure, variant)), err);
        }
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace ptlattice::cli

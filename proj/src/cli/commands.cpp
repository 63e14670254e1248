#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "internal.hpp"
#include "wvn/embed.hpp"
#include "wvn/errors.hpp"
#include "wvn/floquet.hpp"
#include "wvn/gbv.hpp"
#include "wvn/harmonics.hpp"
#include "wvn/periodic_potential.hpp"
#include "wvn/prufer.hpp"
#include "wvn/resonance.hpp"

namespace wvn::cli {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;
constexpr double pi = std::numbers::pi;

struct Context {
    RunConfig cfg;
    BackgroundSpec bg;
    fs::path dir;
    std::ostream& out;
    std::ostream& err;

    ode::Options ode() const {
        ode::Options o;
        o.rtol = cfg.tolerances.rtol;
        o.atol = cfg.tolerances.atol;
        return o;
    }
};

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    f << text;
    if (!f) throw ConfigError("write failed for '" + path.string() + "'");
}

void write_json(const Context& c, const std::string& name, const ordered_json& j) {
    write_file(c.dir / name, j.dump(2) + "\n");
    c.out << (c.dir / name).string() << "\n";
}

void write_csv(const Context& c, const std::string& name, const std::string& text) {
    write_file(c.dir / name, text);
    c.out << (c.dir / name).string() << "\n";
}

void write_plot(const Context& c, const std::string& name, const std::string& title, const std::string& xl,
                const std::string& yl, const std::vector<SvgSeries>& s, bool log_x) {
    if (!c.cfg.plot) return;
    write_file(c.dir / name, svg_plot(title, xl, yl, s, log_x));
    c.out << (c.dir / name).string() << "\n";
}

FourierSeries coefficient_series(const std::vector<std::array<double, 3>>& coeffs) {
    int order = 0;
    for (const auto& t : coeffs) order = std::max(order, static_cast<int>(std::abs(t[0])));
    FourierSeries s(order);
    for (const auto& t : coeffs) s.coeff_ref(static_cast<int>(t[0])) += std::complex<double>(t[1], t[2]);
    return s;
}

bool synthetic(const Context& c) { return c.bg.preset == "synthetic"; }

PeriodicPotential background(const Context& c) {
    const auto& b = c.bg;
    if (b.preset == "free") return PeriodicPotential::free();
    if (b.preset == "mathieu") return PeriodicPotential::cosine(b.amplitude);
    if (b.preset == "kronig_penney") return PeriodicPotential::kronig_penney(b.height, b.width);
    if (b.preset == "trigonometric") return PeriodicPotential::trigonometric(coefficient_series(b.coefficients));
    throw ConfigError("background preset '" + b.preset + "' has no periodic potential; this command needs one");
}

std::shared_ptr<const FloquetData> floquet_context(const Context& c, double E) {
    if (synthetic(c)) return synthetic_context(coefficient_series(c.bg.coefficients), c.bg.kappa);
    return std::make_shared<const FloquetData>(floquet_solution(background(c), E));
}

GBVPerturbation perturbation(const Context& c) {
    const auto& p = c.cfg.perturbation;
    if (p.preset == "wvn") return build_wigner_von_neumann(p.x0);
    if (p.preset == "cosines") {
        ExampleSpec s;
        s.L = p.L;
        s.alpha = p.alpha;
        s.gamma = p.gamma;
        s.p = p.p;
        s.x0 = p.x0;
        return build_example_potential(s);
    }
    return GBVPerturbation({}, 2, 0.5, p.x0);
}

int perturbation_p(const Context& c) {
    const auto& p = c.cfg.perturbation;
    return p.preset == "cosines" ? p.p : 2;
}

double perturbation_gamma(const Context& c) {
    const auto& p = c.cfg.perturbation;
    return p.preset == "cosines" ? p.gamma : 1.0;
}

/// Phases of the perturbation's exponential halves.
std::vector<double> perturbation_phases(const Context& c) {
    const auto& p = c.cfg.perturbation;
    if (p.preset == "wvn") return {2.0, -2.0};
    std::vector<double> a;
    if (p.preset == "cosines")
        for (double v : p.alpha) {
            a.push_back(v);
            a.push_back(-v);
        }
    return a;
}

ordered_json verdict_json(const Verdict& v) {
    return {{"kind", to_string(v.kind)},          {"model", v.model},
            {"B", v.B},                           {"B_stderr", v.B_stderr},
            {"intercept", v.intercept},           {"window_start", v.window_start},
            {"window_end", v.window_end},         {"oscillation_half", v.oscillation_half},
            {"oscillation_full", v.oscillation_full}};
}

ordered_json band_json(const Band& b) {
    return {{"lower", b.lower},
            {"upper", b.upper},
            {"branch", b.branch},
            {"lower_truncated", b.lower_truncated},
            {"upper_truncated", b.upper_truncated},
            {"touches_next", b.touches_next}};
}

// --- bands ---

int cmd_bands(const Context& c) {
    const auto V0 = background(c);
    const auto& g = c.cfg.energies;
    const auto opt = c.ode();
    const auto bs = band_structure(V0, g.min, g.max, g.resolution);

    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["background"] = V0.name();
    j["bands"] = ordered_json::array();
    for (const auto& b : bs.bands) j["bands"].push_back(band_json(b));
    j["spectrum"] = ordered_json::array();
    const auto spec = bs.spectrum();
    for (const auto& [a, b] : spec) j["spectrum"].push_back({a, b});
    j["gaps"] = ordered_json::array();
    for (std::size_t i = 0; i + 1 < spec.size(); ++i) j["gaps"].push_back({spec[i].second, spec[i + 1].first});
    j["warnings"] = ordered_json::array();
    for (const auto& w : bs.warnings)
        j["warnings"].push_back({{"lower", w.lower}, {"upper", w.upper}, {"message", w.message}});
    write_json(c, "bands.json", j);

    std::ostringstream csv;
    csv << "E,discriminant\n";
    SvgSeries s{"discriminant", {}};
    for (double E : ode::linspace(g.min, g.max, static_cast<std::size_t>(g.samples))) {
        const double d = discriminant(V0, E, opt);
        csv << fmt(E) << ',' << fmt(d) << '\n';
        s.points.emplace_back(E, d);
    }
    write_csv(c, "discriminant.csv", csv.str());
    write_plot(c, "discriminant.svg", "Discriminant", "E", "trace of monodromy", {s}, false);
    return ok;
}

// --- resonances ---

int cmd_resonances(const Context& c) {
    const auto V0 = background(c);
    const auto& g = c.cfg.energies;
    const auto phases = c.cfg.resonances.phases.value_or(perturbation_phases(c));
    const int p = c.cfg.resonances.p.value_or(perturbation_p(c));
    const auto bs = band_structure(V0, g.min, g.max, g.resolution);
    ResonanceOptions opt;
    opt.tolerance = c.cfg.tolerances.resonance;
    opt.ode = c.ode();
    const auto set = resonant_energies(V0, bs, phase_sums(phases, p), opt);

    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["phases"] = phases;
    j["p"] = p;
    j["sums"] = ordered_json::array();
    for (const auto& s : set.sums) {
        ordered_json prov = ordered_json::array();
        for (const auto& q : s.provenance) prov.push_back({{"order", q.order}, {"phases", q.phases}});
        j["sums"].push_back({{"value", s.value}, {"provenance", prov}});
    }
    j["energies"] = ordered_json::array();
    std::ostringstream csv;
    csv << "band,E,k,sum,sign,residual\n";
    for (std::size_t b = 0; b < set.energies.size(); ++b)
        for (const auto& r : set.energies[b]) {
            ordered_json sums = ordered_json::array();
            for (const auto& [i, sg] : r.sums) {
                sums.push_back({{"sum", set.sums[i].value}, {"sign", sg}});
                csv << b << ',' << fmt(r.energy) << ',' << fmt(r.k) << ',' << fmt(set.sums[i].value) << ',' << sg
                    << ',' << fmt(r.residual) << '\n';
            }
            j["energies"].push_back(
                {{"band", b}, {"E", r.energy}, {"k", r.k}, {"residual", r.residual}, {"sums", sums}});
        }
    auto diag = [](const std::vector<ResonanceDiagnostic>& v) {
        ordered_json a = ordered_json::array();
        for (const auto& d : v) a.push_back({{"band", d.band}, {"message", d.message}});
        return a;
    };
    j["boundary"] = diag(set.boundary);
    j["flagged"] = diag(set.flagged);
    j["count"] = set.count();
    write_json(c, "resonances.json", j);
    write_csv(c, "resonances.csv", csv.str());
    return ok;
}

// --- prufer ---

int cmd_prufer(const Context& c) {
    const auto& q = c.cfg.prufer;
    const double X = c.cfg.horizon;
    const auto V = perturbation(c);
    const auto F = floquet_context(c, q.energy);
    const auto opt = c.ode();
    const bool backward = q.direction == "backward";
    const auto n = static_cast<std::size_t>(std::ceil((X - q.x_start) * q.samples_per_unit)) + 1;
    auto grid = ode::linspace(q.x_start, X, std::max<std::size_t>(n, 2));
    if (backward) std::reverse(grid.begin(), grid.end());
    const double x0 = grid.front();

    auto run = [&]() {
        if (q.method == "flow") return flow(V, F, q.logR0, q.eta0, x0, grid, opt);
        const PruferTrajectory start(F, TrajectorySource::flow, {PruferSample{x0, q.logR0, q.eta0}});
        const auto [u0, du0] = start.solution(0);
        const RealFunction Vf = [&V](double x) { return V(x); };
        return decompose_direct(background(c), Vf, F, u0, du0, x0, grid, opt);
    };
    PruferTrajectory T = run();
    if (backward) {
        auto s = T.samples();
        std::reverse(s.begin(), s.end());
        const double r = T.reconstruction_residual();
        T = PruferTrajectory(F, T.source(), std::move(s));
        T.set_reconstruction_residual(r);
    }

    ClassifyOptions copt;
    copt.window_start = q.window_start;
    const Verdict v = classify(T, perturbation_gamma(c), perturbation_p(c), copt);

    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["energy"] = F->energy();
    j["k"] = F->k();
    j["kappa"] = F->kappa();
    j["method"] = q.method;
    j["direction"] = q.direction;
    j["horizon"] = X;
    j["samples"] = T.samples().size();
    j["logR_first"] = T.samples().front().logR;
    j["logR_last"] = T.samples().back().logR;
    j["reconstruction_residual"] = T.reconstruction_residual();
    j["verdict"] = verdict_json(v);
    write_json(c, "prufer.json", j);

    std::ostringstream csv;
    csv << "x,logR,eta\n";
    SvgSeries s{"log R", {}};
    for (const auto& p : T.samples()) {
        csv << fmt(p.x) << ',' << fmt(p.logR) << ',' << fmt(p.eta) << '\n';
        s.points.emplace_back(p.x, p.logR);
    }
    write_csv(c, "trajectory.csv", csv.str());
    write_plot(c, "trajectory.svg", "Pruefer radius", "x", "log R", {s}, true);
    return ok;
}

// --- harmonics ---

ordered_json series_json(const FourierSeries& s) {
    ordered_json a = ordered_json::array();
    for (int n = -s.order(); n <= s.order(); ++n) {
        const auto v = s.coeff(n);
        if (v != 0.0) a.push_back({n, v.real(), v.imag()});
    }
    return a;
}

ordered_json entries_json(const std::map<std::tuple<int, int, Multiset>, FourierSeries>& m) {
    ordered_json a = ordered_json::array();
    for (const auto& [key, s] : m) {
        const auto& [J, K, M] = key;
        a.push_back({{"J", J}, {"K", K}, {"phases", M}, {"coefficients", series_json(s)}});
    }
    return a;
}

int cmd_harmonics(const Context& c) {
    const auto& h = c.cfg.harmonics;
    if (h.phases.empty()) throw ConfigError("harmonics.phases must be non-empty");
    const auto F = floquet_context(c, h.energy);
    HarmonicOptions opt;
    opt.divisor_floor = c.cfg.tolerances.divisor_floor;
    opt.order = h.order;
    const auto T = compute_table(*F, h.phases, h.p, opt);

    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["energy"] = F->energy();
    j["kappa"] = F->kappa();
    j["p"] = h.p;
    j["phases"] = h.phases;
    j["order"] = h.order;
    j["f"] = entries_json(T.f_entries());
    j["g"] = entries_json(T.g_entries());
    j["h"] = ordered_json::array();
    for (const auto& [tuple, v] : T.h_entries()) j["h"].push_back({{"tuple", tuple}, {"value", v}});
    j["warnings"] = T.warnings();

    std::ostringstream csv;
    csv << "I,l,max_f,max_g,entries\n";
    j["residuals"] = ordered_json::array();
    for (int I = 2; I <= h.p - 1; ++I)
        for (int l = 1; l < I; ++l) {
            const auto r = verify_recursion(T, I, l);
            csv << I << ',' << l << ',' << fmt(r.max_f) << ',' << fmt(r.max_g) << ',' << r.entries.size() << '\n';
            j["residuals"].push_back({{"I", I}, {"l", l}, {"max_f", r.max_f}, {"max_g", r.max_g}});
        }
    write_json(c, "harmonics.json", j);
    write_csv(c, "harmonics_residuals.csv", csv.str());
    return ok;
}

// --- embed ---

double energy_for_k(const PeriodicPotential& V0, const Context& c, double k) {
    const auto& g = c.cfg.energies;
    const auto bs = band_structure(V0, g.min, g.max, g.resolution);
    const auto b = static_cast<std::size_t>(c.cfg.embed.band);
    if (b >= bs.bands.size())
        throw DomainError("embed: band " + std::to_string(b) + " not found in [" + fmt(g.min) + ", " + fmt(g.max) + "]");
    const auto opt = c.ode();
    double lo = bs.bands[b].lower, hi = bs.bands[b].upper;
    const double width = hi - lo;
    lo += 1e-12 * width;
    hi -= 1e-12 * width;
    const double klo = band_k(V0, lo, opt), khi = band_k(V0, hi, opt);
    if ((k - klo) * (k - khi) > 0.0)
        throw DomainError("embed: k = " + fmt(k) + " is outside the range of band " + std::to_string(b));
    const bool increasing = khi > klo;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        ((band_k(V0, mid, opt) < k) == increasing ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

ordered_json complex_json(std::complex<double> z) { return {z.real(), z.imag()}; }

ordered_json plan_json(const EmbeddingPlan& p) {
    return {{"energy", p.energy},
            {"k", p.k},
            {"kappa", p.kappa},
            {"p", p.p},
            {"gamma", p.gamma},
            {"phases", p.phases},
            {"term_phases", p.term_phases},
            {"multiplicity", p.multiplicity},
            {"L", p.L},
            {"xi_split", p.xi_split},
            {"C1", p.C1},
            {"mean_criterion", complex_json(p.mean_criterion)},
            {"Lambda", complex_json(p.Lambda_mean)},
            {"t_star", p.t_star},
            {"predicted_B", p.predicted_B},
            {"resonance_residual", p.resonance_residual},
            {"negated", p.negated}};
}

int cmd_embed(const Context& c) {
    const auto& e = c.cfg.embed;
    std::shared_ptr<const FloquetData> F;
    if (synthetic(c)) {
        F = floquet_context(c, 0.0);
    } else {
        const auto V0 = background(c);
        if (!e.energy && !e.k) throw ConfigError("embed: energy or k is required");
        const double E = e.energy ? *e.energy : energy_for_k(V0, c, *e.k);
        F = std::make_shared<const FloquetData>(floquet_solution(V0, E));
    }
    std::vector<double> tuple = e.phases.empty() ? std::vector<double>{2.0 * F->kappa()} : e.phases;
    std::vector<double> table_phases;
    for (double a : tuple)
        for (double s : {a, -a})
            if (std::find(table_phases.begin(), table_phases.end(), s) == table_phases.end()) table_phases.push_back(s);
    HarmonicOptions hopt;
    hopt.divisor_floor = c.cfg.tolerances.divisor_floor;
    hopt.permit_resonant = true;
    const auto T = compute_table(*F, table_phases, e.p, hopt);
    PlanOptions popt;
    popt.resonance_tolerance = c.cfg.tolerances.resonance;
    const auto plan = plan_embedding(F, T, tuple, e.gamma, e.L, popt);

    DemoOptions dopt;
    dopt.window_start = e.window_start;
    dopt.steering.gain = e.gain;
    dopt.steering.clamp_factor = e.clamp_factor;
    dopt.steering.ode = c.ode();
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["plan"] = plan_json(plan);
    if (e.p > 2) {
        const auto b = choose_beta0(plan, T);
        j["beta0"] = {{"coefficients", b.coefficients}, {"zero", b.zero}};
        if (!b.zero) dopt.steering.beta0 = b.beta0;
    }

    std::optional<DemoReport> rep;
    try {
        rep = demo_embedded(plan, c.cfg.horizon, dopt);
    } catch (const ConvergenceError& ex) {
        j["success"] = false;
        j["message"] = ex.what();
        write_json(c, "embed.json", j);
        throw;
    }
    const auto& r = *rep;
    const auto& st = r.steering;
    j["steering"] = {{"target", st.target},
                     {"final_error", st.final_error},
                     {"converged", st.converged},
                     {"margin", st.margin},
                     {"max_scaled_dxi", st.max_scaled_dxi}};
    j["verdict"] = verdict_json(r.verdict);
    j["relative_error"] = r.relative_error;
    j["tail_integrals"] = r.tail_integrals;
    j["tail_ratios"] = r.tail_ratios;
    j["ratios_below_one"] = r.ratios_below_one;
    j["ratios_decreasing"] = r.ratios_decreasing;
    j["endpoint"] = r.endpoint;
    j["l2"] = r.l2;
    j["success"] = r.success;
    j["message"] = r.message;
    write_json(c, "embed.json", j);

    std::ostringstream csv;
    csv << "x,logR,eta,xi,psi\n";
    SvgSeries sr{"log R", {}}, sp{"psi - target", {}};
    const auto& s = st.trajectory.samples();
    for (std::size_t i = 0; i < s.size(); ++i) {
        csv << fmt(s[i].x) << ',' << fmt(s[i].logR) << ',' << fmt(s[i].eta) << ',' << fmt(st.xi[i]) << ','
            << fmt(st.psi[i]) << '\n';
        sr.points.emplace_back(s[i].x, s[i].logR);
        sp.points.emplace_back(s[i].x, std::remainder(st.psi[i] - st.target, 2.0 * pi));
    }
    write_csv(c, "embed.csv", csv.str());
    write_plot(c, "embed.svg", "Embedded eigenvalue", "x", "log R and phase error", {sr, sp}, true);
    if (!r.success) {
        c.err << "embed: " << r.message << "\n";
        return nonconvergence;
    }
    return ok;
}

// --- genericity ---

int cmd_genericity(const Context& c) {
    if (!synthetic(c)) throw ConfigError("genericity: needs a 'synthetic' background");
    const auto& g = c.cfg.genericity;
    const auto base = coefficient_series(c.bg.coefficients);
    const double kappa = c.bg.kappa;
    const std::vector<double> tuple = g.phases.empty() ? std::vector<double>{2.0 * kappa} : g.phases;
    GenericityOptions opt;
    opt.trials = g.trials;
    opt.epsilon = g.epsilon;
    opt.floor = g.floor;
    opt.seed = c.cfg.seed;
    opt.divisor_floor = c.cfg.tolerances.divisor_floor;
    const auto st = genericity_scan(base, kappa, tuple, opt);

    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["kappa"] = kappa;
    j["phases"] = tuple;
    j["seed"] = c.cfg.seed;
    j["trials"] = st.trials;
    j["nonzero"] = st.nonzero;
    j["fraction"] = st.fraction;
    j["base_value"] = complex_json(st.base_value);
    j["min_abs"] = st.min_abs;
    j["max_abs"] = st.max_abs;
    write_json(c, "genericity.json", j);

    std::ostringstream csv;
    csv << "trial,abs_mean_criterion\n";
    for (std::size_t i = 0; i < st.values.size(); ++i) csv << i << ',' << fmt(st.values[i]) << '\n';
    write_csv(c, "genericity.csv", csv.str());
    return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Embedded eigenvalues of perturbed periodic Schroedinger operators"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    std::optional<int> jobs;
    std::optional<std::uint64_t> seed;
    bool plot = false;
    app.add_option("-c,--config", config_path, "JSON run configuration")->required();
    app.add_option("-o,--out", out_dir, "output directory (overrides the config)");
    app.add_option("-j,--jobs", jobs, "worker count (accepted; runs are sequential)");
    app.add_option("--seed", seed, "random seed (overrides the config)");
    app.add_flag("--plot", plot, "also write SVG plots");
    app.fallthrough();

    using Command = int (*)(const Context&);
    const std::vector<std::tuple<std::string, std::string, Command>> commands{
        {"bands", "band edges and the discriminant", cmd_bands},
        {"resonances", "resonant energies of the perturbation phases", cmd_resonances},
        {"prufer", "Pruefer trajectory and decay verdict", cmd_prufer},
        {"embed", "construct and verify an embedded eigenvalue", cmd_embed},
        {"harmonics", "harmonic coefficient table and recursion residuals", cmd_harmonics},
        {"genericity", "random-perturbation scan of the mean criterion", cmd_genericity},
    };
    for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return config;
    }

    try {
        RunConfig cfg = load_config(config_path);
        apply_environment(cfg);
        if (!out_dir.empty()) cfg.output = out_dir;
        if (jobs) cfg.jobs = *jobs;
        if (seed) cfg.seed = *seed;
        if (plot) cfg.plot = true;
        validate(cfg);
        BackgroundSpec bg = cfg.background.file ? load_background_file(*cfg.background.file) : cfg.background;
        fs::path dir(cfg.output);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
        Context ctx{std::move(cfg), std::move(bg), dir, out, err};
        for (const auto& [name, help, fn] : commands)
            if (app.got_subcommand(name)) return fn(ctx);
        return internal;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return config;
    } catch (const SmallDivisorError& e) {
        err << "small divisor: " << e.what() << " (K = " << e.K() << ", phase sum = " << fmt(e.phase_sum())
            << ")\n";
        return precondition;
    } catch (const DomainError& e) {
        err << "precondition failed: " << e.what() << "\n";
        return precondition;
    } catch (const ConvergenceError& e) {
        err << "no convergence: " << e.what() << "\n";
        return nonconvergence;
    } catch (const IntegratorError& e) {
        err << "integrator failure at x = " << fmt(e.position()) << ": " << e.what() << "\n";
        return nonconvergence;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return internal;
    }
}

}  // namespace wvn::cli

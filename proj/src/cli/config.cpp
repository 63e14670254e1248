#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wvn/cli.hpp"
#include "wvn/errors.hpp"

namespace wvn::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

/// Strict object reader: every key must be consumed.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        const json& v = j_.at(key);
        if constexpr (std::is_same_v<T, std::uint64_t>) {
            if (!v.is_number_unsigned()) throw ConfigError(where(key) + ": expected a non-negative integer");
        }
        if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
            if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
        }
        try {
            out = v.get<T>();
        } catch (const json::exception&) {
            throw ConfigError(where(key) + ": wrong type");
        }
    }

    template <class T>
    void get(const char* key, std::optional<T>& out) {
        if (!j_.contains(key)) return;
        T v{};
        get(key, v);
        out = std::move(v);
    }

    template <class F>
    void child(const char* key, F&& fn) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        Reader r(j_.at(key), where(key));
        fn(r);
        r.finish();
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError(where(k) + ": unknown key");
    }

private:
    std::string where(const std::string& key = "") const {
        if (key.empty()) return path_.empty() ? "config" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_background(Reader& r, BackgroundSpec& b) {
    r.get("preset", b.preset);
    r.get("amplitude", b.amplitude);
    r.get("height", b.height);
    r.get("width", b.width);
    r.get("coefficients", b.coefficients);
    r.get("kappa", b.kappa);
    r.get("file", b.file);
}

ordered_json write_background(const BackgroundSpec& b) {
    ordered_json j;
    j["preset"] = b.preset;
    j["amplitude"] = b.amplitude;
    j["height"] = b.height;
    j["width"] = b.width;
    j["coefficients"] = b.coefficients;
    j["kappa"] = b.kappa;
    if (b.file) j["file"] = *b.file;
    return j;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

void validate_exponent(double gamma, int p, const std::string& where) {
    require(p >= 2, where + ".p must be at least 2");
    std::ostringstream os;
    os << where << ".gamma = " << gamma << " outside (1/" << p << ", 1/" << p - 1 << "]";
    require(gamma > 1.0 / p && gamma <= 1.0 / (p - 1), os.str());
}

void env_override(const char* name, double& target) {
    const char* v = std::getenv(name);
    if (!v) return;
    char* end = nullptr;
    const double d = std::strtod(v, &end);
    if (end == v || *end != '\0' || !positive(d)) throw ConfigError(std::string(name) + ": not a positive number");
    target = d;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    RunConfig c;
    Reader r(j, "");
    r.get("schema_version", c.schema_version);
    if (!j.contains("schema_version")) throw ConfigError("config: missing schema_version");
    if (c.schema_version != kSchemaVersion) {
        std::ostringstream os;
        os << "config: schema_version " << c.schema_version << " is not supported (expected " << kSchemaVersion << ")";
        throw ConfigError(os.str());
    }
    r.child("background", [&](Reader& s) { read_background(s, c.background); });
    r.child("perturbation", [&](Reader& s) {
        auto& p = c.perturbation;
        s.get("preset", p.preset);
        s.get("L", p.L);
        s.get("alpha", p.alpha);
        s.get("gamma", p.gamma);
        s.get("p", p.p);
        s.get("x0", p.x0);
    });
    r.child("energies", [&](Reader& s) {
        s.get("min", c.energies.min);
        s.get("max", c.energies.max);
        s.get("resolution", c.energies.resolution);
        s.get("samples", c.energies.samples);
    });
    r.child("tolerances", [&](Reader& s) {
        s.get("rtol", c.tolerances.rtol);
        s.get("atol", c.tolerances.atol);
        s.get("divisor_floor", c.tolerances.divisor_floor);
        s.get("resonance", c.tolerances.resonance);
    });
    r.get("horizon", c.horizon);
    r.get("output", c.output);
    r.get("jobs", c.jobs);
    r.get("seed", c.seed);
    r.get("plot", c.plot);
    r.child("prufer", [&](Reader& s) {
        auto& p = c.prufer;
        s.get("energy", p.energy);
        s.get("method", p.method);
        s.get("direction", p.direction);
        s.get("x_start", p.x_start);
        s.get("logR0", p.logR0);
        s.get("eta0", p.eta0);
        s.get("samples_per_unit", p.samples_per_unit);
        s.get("window_start", p.window_start);
    });
    r.child("embed", [&](Reader& s) {
        auto& e = c.embed;
        s.get("energy", e.energy);
        s.get("k", e.k);
        s.get("band", e.band);
        s.get("phases", e.phases);
        s.get("p", e.p);
        s.get("gamma", e.gamma);
        s.get("L", e.L);
        s.get("gain", e.gain);
        s.get("clamp_factor", e.clamp_factor);
        s.get("window_start", e.window_start);
    });
    r.child("harmonics", [&](Reader& s) {
        auto& h = c.harmonics;
        s.get("energy", h.energy);
        s.get("phases", h.phases);
        s.get("p", h.p);
        s.get("order", h.order);
    });
    r.child("resonances", [&](Reader& s) {
        s.get("phases", c.resonances.phases);
        s.get("p", c.resonances.p);
    });
    r.child("genericity", [&](Reader& s) {
        auto& g = c.genericity;
        s.get("phases", g.phases);
        s.get("trials", g.trials);
        s.get("epsilon", g.epsilon);
        s.get("floor", g.floor);
    });
    r.finish();
    return c;
}

RunConfig load_config(const std::string& path) {
    namespace fs = std::filesystem;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig c = parse_config(ss.str());
    if (c.background.file && fs::path(*c.background.file).is_relative())
        c.background.file = (fs::path(path).parent_path() / *c.background.file).lexically_normal().string();
    return c;
}

BackgroundSpec load_background_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open background file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ConfigError("background file '" + path + "': " + e.what());
    }
    BackgroundSpec b;
    Reader r(j, path);
    read_background(r, b);
    r.finish();
    if (b.file) throw ConfigError("background file '" + path + "': nested file reference");
    return b;
}

std::string serialize_config(const RunConfig& c) {
    ordered_json j;
    j["schema_version"] = c.schema_version;
    j["background"] = write_background(c.background);
    const auto& p = c.perturbation;
    j["perturbation"] = {{"preset", p.preset}, {"L", p.L}, {"alpha", p.alpha},
                         {"gamma", p.gamma},   {"p", p.p}, {"x0", p.x0}};
    j["energies"] = {{"min", c.energies.min},
                     {"max", c.energies.max},
                     {"resolution", c.energies.resolution},
                     {"samples", c.energies.samples}};
    j["tolerances"] = {{"rtol", c.tolerances.rtol},
                       {"atol", c.tolerances.atol},
                       {"divisor_floor", c.tolerances.divisor_floor},
                       {"resonance", c.tolerances.resonance}};
    j["horizon"] = c.horizon;
    j["output"] = c.output;
    j["jobs"] = c.jobs;
    j["seed"] = c.seed;
    j["plot"] = c.plot;
    const auto& q = c.prufer;
    j["prufer"] = {{"energy", q.energy},     {"method", q.method}, {"direction", q.direction},
                   {"x_start", q.x_start},   {"logR0", q.logR0},   {"eta0", q.eta0},
                   {"samples_per_unit", q.samples_per_unit}, {"window_start", q.window_start}};
    const auto& e = c.embed;
    ordered_json je;
    if (e.energy) je["energy"] = *e.energy;
    if (e.k) je["k"] = *e.k;
    je["band"] = e.band;
    je["phases"] = e.phases;
    je["p"] = e.p;
    je["gamma"] = e.gamma;
    je["L"] = e.L;
    je["gain"] = e.gain;
    je["clamp_factor"] = e.clamp_factor;
    je["window_start"] = e.window_start;
    j["embed"] = je;
    const auto& h = c.harmonics;
    j["harmonics"] = {{"energy", h.energy}, {"phases", h.phases}, {"p", h.p}, {"order", h.order}};
    ordered_json jr = ordered_json::object();
    if (c.resonances.phases) jr["phases"] = *c.resonances.phases;
    if (c.resonances.p) jr["p"] = *c.resonances.p;
    j["resonances"] = jr;
    const auto& g = c.genericity;
    j["genericity"] = {{"phases", g.phases}, {"trials", g.trials}, {"epsilon", g.epsilon}, {"floor", g.floor}};
    return j.dump(2) + "\n";
}

void validate(const RunConfig& c) {
    require(c.schema_version == kSchemaVersion, "config: unsupported schema_version");

    const auto& b = c.background;
    const std::set<std::string> backgrounds{"free", "mathieu", "kronig_penney", "trigonometric", "synthetic"};
    if (b.file) {
        require(std::filesystem::exists(*b.file), "background file '" + *b.file + "' does not exist");
    } else {
        require(backgrounds.count(b.preset) > 0, "background.preset '" + b.preset + "' is unknown");
        require(std::isfinite(b.amplitude), "background.amplitude must be finite");
        require(std::isfinite(b.height), "background.height must be finite");
        require(b.width > 0.0 && b.width < 1.0, "background.width must lie in (0, 1)");
        require(std::isfinite(b.kappa), "background.kappa must be finite");
        for (const auto& t : b.coefficients)
            require(t[0] == std::round(t[0]) && std::abs(t[0]) <= 64, "background.coefficients: mode index must be an integer in [-64, 64]");
        if (b.preset == "trigonometric" || b.preset == "synthetic")
            require(!b.coefficients.empty(), "background.coefficients required for preset '" + b.preset + "'");
    }

    const auto& p = c.perturbation;
    require(p.preset == "none" || p.preset == "wvn" || p.preset == "cosines",
            "perturbation.preset '" + p.preset + "' is unknown");
    require(positive(p.x0), "perturbation.x0 must be positive");
    if (p.preset == "cosines") {
        require(!p.L.empty() && p.L.size() == p.alpha.size(), "perturbation: L and alpha need matching, non-empty lists");
        for (double v : p.L) require(positive(v), "perturbation.L must be positive");
        for (double v : p.alpha) require(std::isfinite(v) && v != 0.0, "perturbation.alpha must be nonzero");
        validate_exponent(p.gamma, p.p, "perturbation");
    }

    require(std::isfinite(c.energies.min) && std::isfinite(c.energies.max) && c.energies.min < c.energies.max,
            "energies: need min < max");
    require(positive(c.energies.resolution) && c.energies.resolution <= c.energies.max - c.energies.min, "energies.resolution must be a positive step no larger than the range");
    require(c.energies.samples >= 2, "energies.samples must be at least 2");

    const auto& t = c.tolerances;
    require(positive(t.rtol) && positive(t.atol) && positive(t.divisor_floor) && positive(t.resonance),
            "tolerances must be positive");
    require(positive(c.horizon), "horizon must be positive");
    require(c.jobs >= 1, "jobs must be at least 1");
    require(!c.output.empty(), "output directory must be non-empty");

    const auto& q = c.prufer;
    require(q.method == "flow" || q.method == "direct", "prufer.method must be 'flow' or 'direct'");
    require(q.direction == "forward" || q.direction == "backward", "prufer.direction must be 'forward' or 'backward'");
    require(positive(q.x_start) && q.x_start < c.horizon, "prufer.x_start must lie in (0, horizon)");
    require(positive(q.samples_per_unit), "prufer.samples_per_unit must be positive");
    require(q.window_start >= q.x_start && q.window_start < c.horizon, "prufer.window_start must lie in [x_start, horizon)");
    require(std::isfinite(q.energy) && std::isfinite(q.logR0) && std::isfinite(q.eta0), "prufer: non-finite value");

    const auto& e = c.embed;
    validate_exponent(e.gamma, e.p, "embed");
    require(!(e.energy && e.k), "embed: give energy or k, not both");
    if (e.k) require(*e.k > 0.0 && *e.k < std::numbers::pi, "embed.k must lie in (0, pi)");
    require(e.band >= 0, "embed.band must be non-negative");
    if (e.phases.empty()) require(e.p == 2, "embed.phases required for p > 2");
    else require(static_cast<int>(e.phases.size()) == e.p - 1, "embed.phases must have p - 1 entries");
    require(!e.L.empty(), "embed.L must be non-empty");
    for (double v : e.L) require(positive(v), "embed.L must be positive");
    require(e.gain >= 0.0 && e.clamp_factor >= 0.0, "embed: gain and clamp_factor must be non-negative");
    require(positive(e.window_start) && e.window_start < c.horizon, "embed.window_start must lie in (0, horizon)");

    const auto& h = c.harmonics;
    require(h.p >= 2, "harmonics.p must be at least 2");
    require(h.order >= 1, "harmonics.order must be positive");

    if (c.resonances.p) require(*c.resonances.p >= 2, "resonances.p must be at least 2");

    const auto& g = c.genericity;
    require(g.trials >= 0, "genericity.trials must be non-negative");
    require(g.epsilon >= 0.0 && positive(g.floor), "genericity: epsilon >= 0 and floor > 0 required");
}

void apply_environment(RunConfig& c) {
    env_override("WVN_RTOL", c.tolerances.rtol);
    env_override("WVN_ATOL", c.tolerances.atol);
    env_override("WVN_DIVISOR_FLOOR", c.tolerances.divisor_floor);
    env_override("WVN_RESONANCE_TOL", c.tolerances.resonance);
}

}  // namespace wvn::cli

#pragma once

// Batch front end: JSON run configurations, subcommands writing JSON/CSV/SVG outputs, and the
// exit-code contract 0 success, 2 config/IO, 3 mathematical precondition, 4 non-convergence.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wvn::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { ok = 0, internal = 1, config = 2, precondition = 3, nonconvergence = 4 };

struct BackgroundSpec {
    /// free | mathieu | kronig_penney | trigonometric | synthetic
    std::string preset = "free";
    double amplitude = 2.0;  // mathieu
    double height = 1.0;     // kronig_penney
    double width = 0.5;
    /// (n, re, im): Fourier coefficients of V0 (trigonometric) or of the periodic factor p (synthetic).
    std::vector<std::array<double, 3>> coefficients;
    double kappa = 1.0;  // synthetic
    /// JSON file holding a background object; replaces the inline fields when set.
    std::optional<std::string> file;

    bool operator==(const BackgroundSpec&) const = default;
};

struct PerturbationSpec {
    /// none | wvn | cosines
    std::string preset = "none";
    std::vector<double> L;
    std::vector<double> alpha;
    double gamma = 1.0;
    int p = 2;
    double x0 = 1.0;

    bool operator==(const PerturbationSpec&) const = default;
};

struct Tolerances {
    double rtol = 1e-10;
    double atol = 1e-12;
    double divisor_floor = 1e-6;
    double resonance = 1e-6;

    bool operator==(const Tolerances&) const = default;
};

struct EnergyGrid {
    double min = 0.1;
    double max = 10.0;
    double resolution = 0.01;  // band scan energy step
    int samples = 500;           // discriminant.csv rows

    bool operator==(const EnergyGrid&) const = default;
};

struct PruferSpec {
    double energy = 1.0;
    /// flow (Pruefer variables) | direct (ODE then decomposition)
    std::string method = "flow";
    /// forward from x_start, or backward from the horizon (selects the subordinate solution)
    std::string direction = "forward";
    double x_start = 1.0;
    double logR0 = 0.0;
    double eta0 = 0.0;
    double samples_per_unit = 8.0;
    double window_start = 1e2;

    bool operator==(const PruferSpec&) const = default;
};

struct EmbedSpec {
    std::optional<double> energy;
    /// Alternative to energy: quasimomentum in band `band` (0-based).
    std::optional<double> k;
    int band = 0;
    /// Resonant tuple; default {2 kappa} for p = 2.
    std::vector<double> phases;
    int p = 2;
    double gamma = 0.9;
    std::vector<double> L{4.0};
    double gain = 1.0;
    double clamp_factor = 4.0;
    double window_start = 1e2;

    bool operator==(const EmbedSpec&) const = default;
};

struct HarmonicsSpec {
    double energy = 1.0;
    std::vector<double> phases;
    int p = 2;
    int order = 64;

    bool operator==(const HarmonicsSpec&) const = default;
};

struct ResonanceSpec {
    /// Defaults to the perturbation's phases and p.
    std::optional<std::vector<double>> phases;
    std::optional<int> p;

    bool operator==(const ResonanceSpec&) const = default;
};

struct GenericitySpec {
    std::vector<double> phases;
    int trials = 200;
    double epsilon = 1e-3;
    double floor = 1e-9;

    bool operator==(const GenericitySpec&) const = default;
};

struct RunConfig {
    int schema_version = kSchemaVersion;
    BackgroundSpec background;
    PerturbationSpec perturbation;
    EnergyGrid energies;
    Tolerances tolerances;
    double horizon = 1e4;
    std::string output = "out";
    int jobs = 1;
    std::uint64_t seed = 1;
    bool plot = false;
    PruferSpec prufer;
    EmbedSpec embed;
    HarmonicsSpec harmonics;
    ResonanceSpec resonances;
    GenericitySpec genericity;

    bool operator==(const RunConfig&) const = default;
};

/// Parses JSON text. Unknown keys, wrong types and invalid values throw ConfigError.
RunConfig parse_config(const std::string& text);
/// Reads and parses a file; relative background files resolve against its directory.
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);
/// Positivity of tolerances, ranges and existence of referenced files. Throws ConfigError.
void validate(const RunConfig& cfg);
/// Applies WVN_RTOL, WVN_ATOL, WVN_DIVISOR_FLOOR and WVN_RESONANCE_TOL when set.
void apply_environment(RunConfig& cfg);

/// Runs one invocation (arguments without the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wvn::cli

#include "wvn/gbv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <variant>

#include "wvn/errors.hpp"
#include "wvn/quadrature.hpp"

namespace wvn {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct PowerTail {
    double gamma, x0;
};
struct Sampled {
    std::vector<double> x, v;
};
struct Custom {
    std::string name;
    std::function<double(double)> value, derivative;
    double onset;
    std::optional<double> variation, lp_norm, lp_exponent;
};
struct Sum {
    std::vector<Envelope> parts;
};

std::vector<double> log_grid(double a, double b, int per_decade) {
    const int n = std::max(2, static_cast<int>(std::ceil(std::log10(b / a) * per_decade)) + 1);
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = a * std::pow(b / a, static_cast<double>(i) / (n - 1));
    return g;
}

}  // namespace

struct Envelope::Data {
    std::variant<PowerTail, Sampled, Custom, Sum> v;
};

Envelope Envelope::power_tail(double gamma, double x0) {
    if (!(gamma > 0.0) || !(x0 > 0.0)) throw DomainError("power_tail envelope: need gamma > 0 and x0 > 0");
    return Envelope(std::make_shared<const Data>(Data{PowerTail{gamma, x0}}));
}

Envelope Envelope::sampled(std::vector<double> x, std::vector<double> v) {
    if (x.size() != v.size() || x.empty()) throw ConfigError("sampled envelope: x and v must be non-empty and equal length");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(v[i])) throw ConfigError("sampled envelope: non-finite sample");
        if (i && !(x[i] > x[i - 1])) throw ConfigError("sampled envelope: nodes must be strictly increasing");
    }
    if (!(x.front() > 0.0)) throw ConfigError("sampled envelope: nodes must be positive");
    return Envelope(std::make_shared<const Data>(Data{Sampled{std::move(x), std::move(v)}}));
}

Envelope Envelope::custom(std::string name, std::function<double(double)> value, std::function<double(double)> derivative,
                          double onset, std::optional<double> variation, std::optional<double> lp_norm,
                          std::optional<double> lp_exponent) {
    if (!value) throw ConfigError("custom envelope '" + name + "': missing value function");
    if (!(onset > 0.0)) throw ConfigError("custom envelope '" + name + "': onset must be positive");
    return Envelope(std::make_shared<const Data>(
        Data{Custom{std::move(name), std::move(value), std::move(derivative), onset, variation, lp_norm, lp_exponent}}));
}

Envelope Envelope::sum(std::vector<Envelope> parts) {
    if (parts.empty()) throw ConfigError("envelope sum: no parts");
    return Envelope(std::make_shared<const Data>(Data{Sum{std::move(parts)}}));
}

Envelope::Kind Envelope::kind() const noexcept { return static_cast<Kind>(d_->v.index()); }

std::string Envelope::describe() const {
    std::ostringstream os;
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, PowerTail>) os << "power_tail(gamma=" << e.gamma << ", x0=" << e.x0 << ")";
            else if constexpr (std::is_same_v<T, Sampled>) os << "sampled(" << e.x.size() << " nodes)";
            else if constexpr (std::is_same_v<T, Custom>) os << "custom(" << e.name << ")";
            else os << "sum(" << e.parts.size() << " parts)";
        },
        d_->v);
    return os.str();
}

double Envelope::operator()(double x) const {
    return std::visit(
        [x](const auto& e) -> double {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, PowerTail>) {
                return std::pow(std::max(x, e.x0), -e.gamma);
            } else if constexpr (std::is_same_v<T, Sampled>) {
                if (x <= e.x.front()) return e.v.front();
                if (x > e.x.back()) return 0.0;
                const auto it = std::lower_bound(e.x.begin(), e.x.end(), x);
                const auto i = static_cast<std::size_t>(it - e.x.begin());
                const double w = (x - e.x[i - 1]) / (e.x[i] - e.x[i - 1]);
                return e.v[i - 1] + w * (e.v[i] - e.v[i - 1]);
            } else if constexpr (std::is_same_v<T, Custom>) {
                return e.value(x);
            } else {
                double s = 0.0;
                for (const auto& p : e.parts) s += p(x);
                return s;
            }
        },
        d_->v);
}

double Envelope::derivative(double x) const {
    return std::visit(
        [&](const auto& e) -> double {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, PowerTail>) {
                return x < e.x0 ? 0.0 : -e.gamma * std::pow(x, -e.gamma - 1.0);
            } else if constexpr (std::is_same_v<T, Sampled>) {
                if (x <= e.x.front() || x > e.x.back()) return 0.0;
                const auto i = static_cast<std::size_t>(std::lower_bound(e.x.begin(), e.x.end(), x) - e.x.begin());
                return (e.v[i] - e.v[i - 1]) / (e.x[i] - e.x[i - 1]);
            } else if constexpr (std::is_same_v<T, Custom>) {
                if (e.derivative) return e.derivative(x);
                const double h = 1e-6 * std::max(1.0, std::abs(x));
                return (e.value(x + h) - e.value(x - h)) / (2 * h);
            } else {
                double s = 0.0;
                for (const auto& p : e.parts) s += p.derivative(x);
                return s;
            }
        },
        d_->v);
}

double Envelope::onset() const noexcept {
    return std::visit(
        [](const auto& e) -> double {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, PowerTail>) return e.x0;
            else if constexpr (std::is_same_v<T, Sampled>) return e.x.front();
            else if constexpr (std::is_same_v<T, Custom>) return e.onset;
            else {
                double o = inf;
                for (const auto& p : e.parts) o = std::min(o, p.onset());
                return o;
            }
        },
        d_->v);
}

std::optional<double> Envelope::exponent() const {
    if (const auto* p = std::get_if<PowerTail>(&d_->v)) return p->gamma;
    return std::nullopt;
}

bool Envelope::has_variation() const noexcept {
    if (const auto* c = std::get_if<Custom>(&d_->v)) return c->variation.has_value();
    if (const auto* s = std::get_if<Sum>(&d_->v))
        return std::all_of(s->parts.begin(), s->parts.end(), [](const Envelope& e) { return e.has_variation(); });
    return true;
}

Estimate Envelope::variation() const {
    return std::visit(
        [this](const auto& e) -> Estimate {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, PowerTail>) {
                return {std::pow(e.x0, -e.gamma), 0.0, false};
            } else if constexpr (std::is_same_v<T, Sampled>) {
                double var = std::abs(e.v.back()), step = std::abs(e.v.back());
                for (std::size_t i = 1; i < e.v.size(); ++i) {
                    const double d = std::abs(e.v[i] - e.v[i - 1]);
                    var += d;
                    step = std::max(step, d);
                }
                return {var, step, true};
            } else if constexpr (std::is_same_v<T, Custom>) {
                if (!e.variation) throw ConfigError("custom envelope '" + e.name + "' lacks variation bound metadata");
                return {*e.variation, 0.0, false};
            } else {
                // Grid estimate of the variation of the sum itself (a lower bound), with the remaining
                // value at the grid end counted as the drop to zero at infinity.
                if (!has_variation()) throw ConfigError("envelope sum contains a part without variation metadata");
                std::vector<double> nodes = log_grid(onset(), 1e8 * onset(), 400);
                for (const auto& p : e.parts)
                    if (const auto* s = std::get_if<Sampled>(&p.d_->v)) {
                        nodes.insert(nodes.end(), s->x.begin(), s->x.end());
                        for (double x : s->x) nodes.push_back(std::nextafter(x, inf));
                    }
                std::sort(nodes.begin(), nodes.end());
                double var = 0.0, step = 0.0, prev = (*this)(nodes.front());
                for (std::size_t i = 1; i < nodes.size(); ++i) {
                    const double cur = (*this)(nodes[i]);
                    var += std::abs(cur - prev);
                    step = std::max(step, std::abs(cur - prev));
                    prev = cur;
                }
                var += std::abs(prev);
                return {var, step, true};
            }
        },
        d_->v);
}

Estimate Envelope::lp_norm(double p) const {
    if (!(p >= 1.0)) throw DomainError("lp_norm: p must be at least 1");
    return std::visit(
        [p](const auto& e) -> Estimate {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, PowerTail>) {
                const double q = p * e.gamma;
                if (q <= 1.0) return {inf, 0.0, false};
                const auto r = quad::semi_infinite([&](double x) { return std::pow(x, -q); }, e.x0, q, 1e-14);
                const double norm = std::pow(r.value, 1.0 / p);
                // d(I^{1/p}) = I^{1/p - 1} dI / p
                return {norm, norm / r.value * r.error / p, false};
            } else if constexpr (std::is_same_v<T, Sampled>) {
                double I = 0.0;
                for (std::size_t i = 1; i < e.x.size(); ++i) {
                    // Exact for |linear|^p is not closed-form in general; Simpson per cell.
                    const double a = e.x[i - 1], b = e.x[i];
                    const double fa = std::pow(std::abs(e.v[i - 1]), p), fb = std::pow(std::abs(e.v[i]), p);
                    const double fm = std::pow(std::abs(0.5 * (e.v[i - 1] + e.v[i])), p);
                    I += (b - a) / 6.0 * (fa + 4 * fm + fb);
                }
                return {std::pow(I, 1.0 / p), 0.0, true};
            } else if constexpr (std::is_same_v<T, Custom>) {
                if (e.lp_norm && (!e.lp_exponent || *e.lp_exponent == p)) return {*e.lp_norm, 0.0, false};
                // No metadata: trapezoid on a log grid over six decades, flagged as an estimate.
                // The error field is the change from the last two decades.
                const auto grid = log_grid(e.onset, 1e6 * e.onset, 2000);
                double I = 0.0, I_early = 0.0;
                for (std::size_t i = 1; i < grid.size(); ++i) {
                    const double fa = std::pow(std::abs(e.value(grid[i - 1])), p);
                    const double fb = std::pow(std::abs(e.value(grid[i])), p);
                    I += 0.5 * (grid[i] - grid[i - 1]) * (fa + fb);
                    if (grid[i] <= 1e4 * e.onset) I_early = I;
                }
                const double n = std::pow(I, 1.0 / p);
                return {n, n - std::pow(I_early, 1.0 / p), true};
            } else {
                // Minkowski upper bound.
                Estimate s{0.0, 0.0, true};
                for (const auto& part : e.parts) {
                    const auto n = part.lp_norm(p);
                    s.value += n.value;
                    s.error += n.error;
                }
                return s;
            }
        },
        d_->v);
}

bool Envelope::same_as(const Envelope& other) const noexcept {
    if (d_ == other.d_) return true;
    const auto* a = std::get_if<PowerTail>(&d_->v);
    const auto* b = std::get_if<PowerTail>(&other.d_->v);
    return a && b && a->gamma == b->gamma && a->x0 == b->x0;
}

PhaseFunction PhaseFunction::constant(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }};
}

double smooth_cutoff(double x, double x0) {
    if (x >= x0) return 1.0;
    const double a = 0.5 * x0;
    if (x <= a) return 0.0;
    const double t = (x - a) / a;
    const double f = std::exp(-1.0 / t), g = std::exp(-1.0 / (1.0 - t));
    return f / (f + g);
}

GBVPerturbation::GBVPerturbation(std::vector<GBVTerm> terms, int p, double frak_a, double x0,
                                 std::optional<Envelope> beta0, std::vector<PhaseFunction> xi)
    : terms_(std::move(terms)), p_(p), frak_a_(frak_a), x0_(x0), beta0_(std::move(beta0)), xi_(std::move(xi)) {
    if (p_ < 2) throw DomainError("GBV perturbation: p must be at least 2");
    if (!(x0_ > 0.0)) throw DomainError("GBV perturbation: onset x0 must be positive");
    for (const auto& t : terms_) {
        if (t.xi >= static_cast<int>(xi_.size())) throw ConfigError("GBV term refers to a missing phase function");
        if (!std::isfinite(t.phase) || !std::isfinite(std::abs(t.c))) throw ConfigError("GBV term is not finite");
    }
    // Conjugate closure: pair each term with a (conj c, -phi, same envelope, opposite xi sign) partner.
    std::vector<bool> used(terms_.size(), false);
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (used[i]) continue;
        const auto& a = terms_[i];
        const bool self = a.phase == 0.0 && a.xi < 0 && std::abs(a.c.imag()) <= 1e-14 * (1.0 + std::abs(a.c));
        if (self) {
            used[i] = true;
            continue;
        }
        bool found = false;
        for (std::size_t j = i + 1; j < terms_.size() && !found; ++j) {
            if (used[j]) continue;
            const auto& b = terms_[j];
            if (std::abs(b.c - std::conj(a.c)) <= 1e-12 * (1.0 + std::abs(a.c)) &&
                std::abs(b.phase + a.phase) <= 1e-14 * (1.0 + std::abs(a.phase)) && b.envelope.same_as(a.envelope) &&
                b.xi == a.xi && (a.xi < 0 || b.xi_sign == -a.xi_sign)) {
                used[i] = used[j] = true;
                found = true;
            }
        }
        if (!found) throw DomainError("GBV perturbation: terms are not closed under conjugation (V must be real)");
    }
}

double GBVPerturbation::sum_terms(double x, std::span<const double> xi_values) const {
    double s = 0.0;
    for (const auto& t : terms_) {
        double theta = t.phase * x;
        if (t.xi >= 0) theta += t.xi_sign * xi_values[static_cast<std::size_t>(t.xi)];
        // Re(c e^{-i theta})
        s += (t.c.real() * std::cos(theta) + t.c.imag() * std::sin(theta)) * t.envelope(x);
    }
    if (beta0_) s += (*beta0_)(x);
    return s;
}

double GBVPerturbation::operator()(double x) const {
    const double chi = smooth_cutoff(x, x0_);
    if (chi == 0.0) return 0.0;
    double buf[16];
    std::vector<double> heap;
    std::span<double> xi_values;
    if (xi_.size() <= 16) {
        xi_values = std::span<double>(buf, xi_.size());
    } else {
        heap.resize(xi_.size());
        xi_values = heap;
    }
    for (std::size_t i = 0; i < xi_.size(); ++i) xi_values[i] = xi_[i].value(x);
    return chi * sum_terms(x, xi_values);
}

double GBVPerturbation::value_with_xi(double x, std::span<const double> xi_values) const {
    if (xi_values.size() != xi_.size()) throw ConfigError("value_with_xi: wrong number of phase values");
    const double chi = smooth_cutoff(x, x0_);
    return chi == 0.0 ? 0.0 : chi * sum_terms(x, xi_values);
}

std::complex<double> GBVPerturbation::complex_value(double x) const {
    std::complex<double> s = 0.0;
    for (const auto& t : terms_) {
        double theta = t.phase * x;
        if (t.xi >= 0) theta += t.xi_sign * xi_[static_cast<std::size_t>(t.xi)].value(x);
        s += t.c * std::polar(1.0, -theta) * t.envelope(x);
    }
    if (beta0_) s += (*beta0_)(x);
    return s;
}

std::vector<double> GBVPerturbation::phases() const {
    std::vector<double> out;
    for (const auto& t : terms_) out.push_back(t.phase);
    if (beta0_) out.push_back(0.0);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double GBVPerturbation::tau() const {
    double t = beta0_ ? beta0_->variation().value : 0.0;
    for (const auto& term : terms_) t = std::max(t, term.envelope.variation().value);
    return t;
}

double GBVPerturbation::frak_m() const {
    double m = beta0_ ? beta0_->lp_norm(p_).value : 0.0;
    for (const auto& term : terms_) m = std::max(m, term.envelope.lp_norm(p_).value);
    return m;
}

double GBVPerturbation::coefficient_sum() const {
    double s = beta0_ ? 1.0 : 0.0;
    for (const auto& t : terms_) s += std::pow(std::abs(t.c), frak_a_);
    return s;
}

GBVPerturbation GBVPerturbation::truncated(std::size_t L_max) const {
    if (L_max >= terms_.size()) return *this;
    std::vector<GBVTerm> kept(terms_.begin(), terms_.begin() + static_cast<std::ptrdiff_t>(L_max));
    double dropped = 0.0;
    for (std::size_t i = L_max; i < terms_.size(); ++i) dropped += std::abs(terms_[i].c);
    GBVPerturbation out(std::move(kept), p_, frak_a_, x0_, beta0_, xi_);
    out.tail_bound_ = tail_bound_ + dropped;
    out.example_gamma_ = example_gamma_;
    return out;
}

GBVPerturbation build_wigner_von_neumann(double x0, double frak_a) {
    // -8 sin(2x)/x = 4i e^{2ix}/x - 4i e^{-2ix}/x; e^{2ix} is the phase -2 term.
    const auto env = Envelope::power_tail(1.0, x0);
    std::vector<GBVTerm> terms{{{0.0, -4.0}, 2.0, env}, {{0.0, 4.0}, -2.0, env}};
    GBVPerturbation V(std::move(terms), 2, frak_a, x0);
    return V;
}

GBVPerturbation build_example_potential(const ExampleSpec& s) {
    const int p = s.p;
    if (p < 2) throw DomainError("example potential: p must be at least 2");
    if (s.L.size() != s.alpha.size() || s.L.empty())
        throw ConfigError("example potential: need matching, non-empty amplitude and phase lists");
    if (!s.xi.empty() && s.xi.size() != s.L.size()) throw ConfigError("example potential: one phase function per amplitude");
    const double lo = 1.0 / p, hi = 1.0 / (p - 1);
    if (!(s.gamma > lo && s.gamma <= hi * (1.0 + 1e-15)))
        throw DomainError("example potential: gamma must lie in (1/p, 1/(p-1)]");
    for (std::size_t l = 0; l < s.L.size(); ++l) {
        if (!(s.L[l] > 0.0)) throw DomainError("example potential: amplitudes must be positive");
        if (s.alpha[l] == 0.0 || !std::isfinite(s.alpha[l])) throw DomainError("example potential: phases must be nonzero");
    }
    const auto env = Envelope::power_tail(s.gamma, s.x0);
    std::vector<GBVTerm> terms;
    for (std::size_t l = 0; l < s.L.size(); ++l) {
        const int xi = s.xi.empty() ? -1 : static_cast<int>(l);
        terms.push_back({0.5 * s.L[l], s.alpha[l], env, xi, 1.0});
        terms.push_back({0.5 * s.L[l], -s.alpha[l], env, xi, -1.0});
    }
    const double a = s.frak_a.value_or(0.5 / (p - 1));
    GBVPerturbation V(std::move(terms), p, a, s.x0, s.beta0, s.xi);
    V.example_gamma_ = s.gamma;

    for (std::size_t l = 0; l < s.xi.size(); ++l) {
        const auto& d = s.xi[l].derivative;
        if (!d) throw ConfigError("example potential: phase function without derivative");
        double ratio = 0.0;
        if (!bounded_power_weight(d, (p - 1) * s.gamma, s.x0, 1e6, 1.5, &ratio))
            throw DomainError("example potential: xi' decays slower than x^{-(p-1) gamma} (growth ratio " +
                              std::to_string(ratio) + ")");
    }
    return V;
}

double evaluate(const GBVPerturbation& V, double x) {
    if (!(x > 0.0)) throw DomainError("evaluate: x must be positive");
    const auto z = smooth_cutoff(x, V.x0()) * V.complex_value(x);
    double scale = 1.0;
    for (const auto& t : V.terms()) scale = std::max(scale, std::abs(t.c) * std::abs(t.envelope(x)));
    if (std::abs(z.imag()) > 1e-12 * scale) throw DomainError("evaluate: imaginary residue above 1e-12");
    return z.real();
}

bool bounded_power_weight(const std::function<double(double)>& f, double a, double x0, double X, double slack,
                          double* ratio) {
    const double start = std::max(x0, 1e-300);
    const auto grid = log_grid(start, X, 200);
    double before = 0.0, last = 0.0;
    for (double x : grid) {
        const double w = std::pow(x, a) * std::abs(f(x));
        if (!std::isfinite(w)) {
            if (ratio) *ratio = inf;
            return false;
        }
        double& slot = x < X / 10 ? before : last;
        slot = std::max(slot, w);
    }
    const double r = before > 0.0 ? last / before : (last > 0.0 ? inf : 0.0);
    if (ratio) *ratio = r;
    return r <= slack;
}

bool ConditionReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

const ConditionCheck* ConditionReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

// Numerical variation of a custom envelope over [onset, onset + span], used to refute
// declared metadata.
double sampled_variation(const Envelope& e, double span, int n) {
    const double a = e.onset();
    double var = 0.0, prev = e(a);
    for (int i = 1; i <= n; ++i) {
        const double cur = e(a + span * i / n);
        var += std::abs(cur - prev);
        prev = cur;
    }
    return var;
}

}  // namespace

ConditionReport condition_report(const GBVPerturbation& V) {
    ConditionReport r;
    std::vector<Envelope> envs;
    for (const auto& t : V.terms()) envs.push_back(t.envelope);
    if (V.beta0()) envs.push_back(*V.beta0());

    bool bv_ok = true;
    std::string bv_detail;
    for (const auto& e : envs) {
        const auto v = e.variation();  // throws on missing metadata
        if (v.value > r.tau.value) r.tau = v;
        r.tau.estimated = r.tau.estimated || v.estimated;
        if (!std::isfinite(v.value)) bv_ok = false;
        if (e.kind() == Envelope::Kind::custom) {
            const double seen = sampled_variation(e, 200.0, 1'000'000);
            if (seen > v.value * (1.0 + 1e-3) + 1e-9) {
                bv_ok = false;
                bv_detail = "declared variation " + std::to_string(v.value) + " of " + e.describe() +
                            " contradicted by sampled variation " + std::to_string(seen);
            }
        }
    }
    if (bv_detail.empty()) bv_detail = "tau = " + std::to_string(r.tau.value);
    r.checks.push_back({"bounded_variation", bv_ok, bv_detail});

    bool lp_ok = true;
    for (const auto& e : envs) {
        const auto m = e.lp_norm(V.p());
        if (!(m.value <= r.frak_m.value)) r.frak_m = m;
        if (!std::isfinite(m.value)) lp_ok = false;
    }
    r.checks.push_back({"lp", lp_ok, "m = " + std::to_string(r.frak_m.value) + " for p = " + std::to_string(V.p())});

    const double a = V.frak_a();
    r.coefficient_sum = V.coefficient_sum();
    r.coefficient_tail = V.tail_bound();
    const bool a_ok = a > 0.0 && a < 1.0 / (V.p() - 1);
    r.checks.push_back({"coefficient_summability", a_ok && std::isfinite(r.coefficient_sum),
                        a_ok ? "sum |c|^a = " + std::to_string(r.coefficient_sum)
                             : "a = " + std::to_string(a) + " outside (0, 1/(p-1))"});

    double worst = 0.0;
    for (double x : log_grid(V.x0(), 1e4 * V.x0(), 100)) {
        const auto z = V.complex_value(x);
        double scale = 1.0;
        for (const auto& t : V.terms()) scale = std::max(scale, std::abs(t.c) * std::abs(t.envelope(x)));
        worst = std::max(worst, std::abs(z.imag()) / scale);
    }
    r.checks.push_back({"realness", worst < 1e-12, "max relative imaginary residue " + std::to_string(worst)});

    if (const auto g = V.example_gamma()) {
        const int p = V.p();
        const bool in_range = *g > 1.0 / p && *g <= 1.0 / (p - 1) * (1.0 + 1e-15);
        r.checks.push_back({"gamma_range", in_range, "gamma = " + std::to_string(*g)});
        if (V.beta0()) {
            const auto& b = *V.beta0();
            double r1 = 0.0, r2 = 0.0;
            const bool d1 = bounded_power_weight([&](double x) { return b(x); }, *g, V.x0(), 1e6, 1.5, &r1);
            const bool d2 =
                bounded_power_weight([&](double x) { return b.derivative(x); }, p * *g, V.x0(), 1e6, 1.5, &r2);
            r.checks.push_back({"beta0_decay", d1, "x^gamma |beta0| growth ratio " + std::to_string(r1)});
            r.checks.push_back({"beta0_derivative_decay", d2, "x^(p gamma) |beta0'| growth ratio " + std::to_string(r2)});
        }
        for (std::size_t l = 0; l < V.phase_functions().size(); ++l) {
            double rr = 0.0;
            const bool ok = bounded_power_weight(V.phase_functions()[l].derivative, (p - 1) * *g, V.x0(), 1e6, 1.5, &rr);
            r.checks.push_back({"xi_derivative_decay_" + std::to_string(l), ok, "growth ratio " + std::to_string(rr)});
        }
    }
    return r;
}

}  // namespace wvn

#include "wvn/embed.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "wvn/errors.hpp"
#include "wvn/ode.hpp"

namespace wvn {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduces to (-pi, pi].
double wrap(double a) {
    double r = std::remainder(a, kTwoPi);
    if (r <= -kPi) r += kTwoPi;
    return r;
}

double dist_2pi(double a) { return std::abs(std::remainder(a, kTwoPi)); }

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

/// Distinct orderings of a multiset with the given multiplicities.
double orderings(const std::vector<int>& mult) {
    int n = 0;
    double d = 1.0;
    for (int m : mult) {
        n += m;
        d *= factorial(m);
    }
    return factorial(n) / d;
}

std::vector<double> uniform_grid(double a, double b, double per_unit) {
    const auto n = static_cast<std::size_t>(std::ceil(std::abs(b - a) * per_unit)) + 1;
    return ode::linspace(a, b, std::max<std::size_t>(n, 2));
}

void require_context(const EmbeddingPlan& plan) {
    if (!plan.context) throw DomainError("embedding plan without a Floquet context");
}

}  // namespace

EmbeddingPlan plan_embedding(std::shared_ptr<const FloquetData> F, const HarmonicTable& T,
                             std::vector<double> phases, double gamma, std::vector<double> L,
                             const PlanOptions& opt) {
    if (!F) throw DomainError("plan: missing Floquet context");
    if (phases.empty()) throw DomainError("plan: empty phase tuple");
    const int p = static_cast<int>(phases.size()) + 1;
    if (T.p() != p) {
        std::ostringstream os;
        os << "plan: table order p = " << T.p() << " does not match the tuple length + 1 = " << p;
        throw DomainError(os.str());
    }
    if (std::abs(T.context().kappa() - F->kappa()) > 1e-12 * std::max(1.0, std::abs(F->kappa())))
        throw DomainError("plan: table and context have different quasimomenta");
    if (!(gamma > 1.0 / p && gamma <= 1.0 / (p - 1))) {
        std::ostringstream os;
        os << "plan: gamma = " << gamma << " outside (1/" << p << ", 1/" << p - 1 << "]";
        throw DomainError(os.str());
    }

    EmbeddingPlan plan;
    plan.context = F;
    plan.energy = F->energy();
    plan.k = F->k();
    plan.kappa = F->kappa();
    plan.p = p;
    plan.gamma = gamma;

    double s = 0.0;
    for (double v : phases) s += v;
    const double r_plus = dist_2pi(2.0 * plan.kappa - s), r_minus = dist_2pi(2.0 * plan.kappa + s);
    if (r_plus <= opt.resonance_tolerance) {
        plan.resonance_residual = r_plus;
    } else if (r_minus <= opt.resonance_tolerance) {
        // cos is even: the same cosines resonate through their partner halves.
        for (double& v : phases) v = -v;
        plan.resonance_residual = r_minus;
        plan.negated = true;
    } else {
        std::ostringstream os;
        os << "plan: tuple sum " << s << " is not resonant with 2 kappa = " << 2.0 * plan.kappa << " (residual "
           << std::min(r_plus, r_minus) << ")";
        throw DomainError(os.str());
    }
    plan.phases = phases;

    for (double v : phases) {
        auto it = std::find(plan.term_phases.begin(), plan.term_phases.end(), v);
        if (it == plan.term_phases.end()) {
            plan.term_phases.push_back(v);
            plan.multiplicity.push_back(1);
        } else {
            ++plan.multiplicity[static_cast<std::size_t>(it - plan.term_phases.begin())];
        }
    }
    if (L.size() != plan.term_phases.size()) {
        std::ostringstream os;
        os << "plan: " << L.size() << " amplitudes for " << plan.term_phases.size() << " distinct phases";
        throw DomainError(os.str());
    }
    for (double a : L)
        if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("plan: amplitudes must be positive");
    plan.L = std::move(L);
    plan.xi_split.assign(plan.term_phases.size(), 1.0 / (p - 1));

    // 2 kappa must not be a sum of fewer phases.
    const int P = static_cast<int>(T.phases().size());
    for (int l = 1; l < p - 1; ++l) {
        for (const Multiset& M : multisets(P, l)) {
            if (dist_2pi(2.0 * plan.kappa - T.phase_sum(M)) <= opt.resonance_tolerance) {
                std::ostringstream os;
                os << "plan: 2 kappa is already a sum of " << l << " phases";
                throw DomainError(os.str());
            }
        }
    }

    plan.mean_criterion = mean_criterion(T, plan.phases);
    if (std::abs(plan.mean_criterion) <= opt.mean_floor) {
        std::ostringstream os;
        os << "plan: mean criterion " << std::abs(plan.mean_criterion)
           << " vanishes; no decaying solution can be built at this energy";
        throw DomainError(os.str());
    }
    plan.C1 = static_cast<int>(std::lround(orderings(plan.multiplicity)));
    std::complex<double> amp = 1.0;
    for (std::size_t j = 0; j < plan.L.size(); ++j) amp *= std::pow(0.5 * plan.L[j], plan.multiplicity[j]);
    plan.Lambda_mean = static_cast<double>(plan.C1) * plan.mean_criterion * amp;
    plan.t_star = wrap(-std::arg(plan.Lambda_mean) - 0.5 * kPi);
    plan.predicted_B = std::abs(plan.Lambda_mean);
    return plan;
}

GBVPerturbation plan_potential(const EmbeddingPlan& plan, std::vector<PhaseFunction> xi,
                               std::optional<Envelope> beta0, double x0) {
    ExampleSpec spec;
    spec.L = plan.L;
    spec.alpha = plan.term_phases;
    spec.gamma = plan.gamma;
    spec.p = plan.p;
    spec.xi = std::move(xi);
    spec.beta0 = std::move(beta0);
    spec.x0 = x0;
    return build_example_potential(spec);
}

SteeringResult steer_xi(const EmbeddingPlan& plan, double X, const SteeringOptions& opt) {
    require_context(plan);
    if (!(opt.x_start > 0.0) || !(X > opt.x_start)) throw DomainError("steer_xi: need 0 < x_start < X");
    if (opt.gain < 0.0 || opt.clamp_factor < 0.0) throw DomainError("steer_xi: negative gain or clamp");
    const FloquetData& F = *plan.context;
    const std::size_t n_terms = plan.term_phases.size();
    const GBVPerturbation V =
        plan_potential(plan, std::vector<PhaseFunction>(n_terms, PhaseFunction::constant(0.0)), opt.beta0,
                       std::min(1.0, opt.x_start));
    const double target = opt.target.value_or(plan.t_star);
    const double decay = (plan.p - 1) * plan.gamma;
    const double C = opt.clamp_factor * plan.predicted_B;

    auto control = [&](double x, double eta, double xi) {
        const double bound = C * std::pow(x, -decay);
        return std::clamp(opt.gain * wrap(2.0 * eta - xi - target), -bound, bound);
    };
    std::vector<double> xi_values(n_terms);
    auto rhs = [&](double x, const Eigen::Vector3d& y) {
        for (std::size_t j = 0; j < n_terms; ++j) xi_values[j] = plan.xi_split[j] * y[2];
        const auto [dlogR, deta] = flow_rhs(F, x, V.value_with_xi(x, xi_values), y[1]);
        return Eigen::Vector3d(dlogR, deta, control(x, y[1], y[2]));
    };

    const auto grid = uniform_grid(opt.x_start, X, opt.samples_per_unit);
    Eigen::Vector3d y0(opt.logR0, opt.eta0.value_or(0.5 * target), 0.0);
    std::vector<PruferSample> samples;
    SteeringResult out{PruferTrajectory(plan.context, TrajectorySource::flow, {}), {}, {}, {}, target};
    samples.reserve(grid.size());
    out.xi.reserve(grid.size());
    out.dxi.reserve(grid.size());
    out.psi.reserve(grid.size());
    ode::integrate_grid(
        rhs, opt.x_start, y0, std::span<const double>(grid),
        [&](double x, const Eigen::Vector3d& y) {
            samples.push_back({x, y[0], y[1]});
            out.xi.push_back(y[2]);
            const double d = control(x, y[1], y[2]);
            out.dxi.push_back(d);
            out.psi.push_back(2.0 * y[1] - y[2]);
            out.max_scaled_dxi = std::max(out.max_scaled_dxi, std::abs(d) * std::pow(x, decay));
        },
        opt.ode);
    out.trajectory = PruferTrajectory(plan.context, TrajectorySource::flow, std::move(samples));
    out.final_error = std::abs(wrap(out.psi.back() - target));
    out.margin = opt.tolerance - out.final_error;
    out.converged = out.margin > 0.0;
    return out;
}

GBVPerturbation realized_potential(const EmbeddingPlan& plan, const SteeringResult& run,
                                   std::optional<Envelope> beta0, double x0) {
    const auto& s = run.trajectory.samples();
    if (s.size() < 2) throw DomainError("realized_potential: steering run too short");
    auto xs = std::make_shared<std::vector<double>>();
    xs->reserve(s.size());
    for (const auto& q : s) xs->push_back(q.x);
    auto xi = std::make_shared<const std::vector<double>>(run.xi);
    auto locate = [xs](double x) {
        const auto it = std::upper_bound(xs->begin(), xs->end(), x);
        return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - xs->begin() - 1, 0,
                                                                 static_cast<std::ptrdiff_t>(xs->size()) - 2));
    };
    auto value = [xs, xi, locate](double x) {
        if (x <= xs->front()) return xi->front();
        if (x >= xs->back()) return xi->back();
        const std::size_t i = locate(x);
        const double t = (x - (*xs)[i]) / ((*xs)[i + 1] - (*xs)[i]);
        return (1.0 - t) * (*xi)[i] + t * (*xi)[i + 1];
    };
    auto slope = [xs, xi, locate](double x) {
        if (x <= xs->front() || x >= xs->back()) return 0.0;
        const std::size_t i = locate(x);
        return ((*xi)[i + 1] - (*xi)[i]) / ((*xs)[i + 1] - (*xs)[i]);
    };
    std::vector<PhaseFunction> phases;
    for (double c : plan.xi_split)
        phases.push_back({[value, c](double x) { return c * value(x); }, [slope, c](double x) { return c * slope(x); }});
    return plan_potential(plan, std::move(phases), std::move(beta0), x0);
}

Beta0Check check_beta0(const Envelope& beta0, int p, double gamma, double x0, double X) {
    Beta0Check c;
    const bool v = bounded_power_weight([&](double x) { return beta0(x); }, gamma, x0, X, 1.5, &c.value_ratio);
    const bool d =
        bounded_power_weight([&](double x) { return beta0.derivative(x); }, p * gamma, x0, X, 1.5, &c.derivative_ratio);
    c.pass = v && d;
    std::ostringstream os;
    os << "x^gamma |beta0| growth ratio " << c.value_ratio << (v ? " (ok)" : " (fails)") << ", x^{p gamma} |beta0'| growth ratio "
       << c.derivative_ratio << (d ? " (ok)" : " (fails)");
    c.detail = os.str();
    return c;
}

Beta0Choice choose_beta0(const EmbeddingPlan& plan, const HarmonicTable& T, double x0) {
    require_context(plan);
    const FloquetData& F = *plan.context;
    if (std::abs(T.context().kappa() - F.kappa()) > 1e-12 * std::max(1.0, std::abs(F.kappa())))
        throw DomainError("choose_beta0: table and plan have different quasimomenta");
    if (T.p() < plan.p) throw DomainError("choose_beta0: table order below the plan's p");

    // Cosine halves (L_j / 2) e^{-i(+-phi_j) x}.
    std::vector<double> half_phase;
    std::vector<double> half_c;
    for (std::size_t j = 0; j < plan.term_phases.size(); ++j) {
        for (double sgn : {1.0, -1.0}) {
            half_phase.push_back(sgn * plan.term_phases[j]);
            half_c.push_back(0.5 * plan.L[j]);
        }
    }
    const int H = static_cast<int>(half_phase.size());
    const double mean_phi0 = F.phi0_fourier().mean().real();
    Beta0Choice out{Envelope::power_tail(plan.gamma, x0), {}, {}, true, {}};
    for (int I = 1; I <= plan.p - 1; ++I) {
        std::complex<double> drift = 0.0;
        for (const Multiset& M : multisets(H, I)) {
            double s = 0.0, c = 1.0;
            std::vector<double> values;
            std::map<int, int> mult;
            for (int h : M) {
                s += half_phase[static_cast<std::size_t>(h)];
                c *= half_c[static_cast<std::size_t>(h)];
                values.push_back(half_phase[static_cast<std::size_t>(h)]);
                ++mult[h];
            }
            if (dist_2pi(s) > 1e-9) continue;
            const Multiset TM = T.multiset_of(values);
            if (!T.has_f(I, 0, TM)) {
                std::ostringstream os;
                os << "choose_beta0: table lacks f_{" << I << ",0} for a zero-sum combination";
                throw DomainError(os.str());
            }
            std::vector<int> m;
            for (const auto& [h, n] : mult) m.push_back(n);
            const int shift = static_cast<int>(std::lround(-s / kTwoPi));
            drift += orderings(m) * c * T.f(I, 0, TM).coeff(-shift);
        }
        out.drift.push_back(drift);
        out.coefficients.push_back(drift.real() / mean_phi0);
        if (drift.real() != 0.0) out.zero = false;
    }

    const std::vector<double> b = out.coefficients;
    const double gamma = plan.gamma;
    if (out.zero) {
        out.beta0 = Envelope::custom(
            "zero", [](double) { return 0.0; }, [](double) { return 0.0; }, x0, 0.0);
    } else {
        double variation = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) variation += std::abs(b[i]) * std::pow(x0, -(i + 1.0) * gamma);
        out.beta0 = Envelope::custom(
            "drift cancellation",
            [b, gamma, x0](double x) {
                const double y = std::max(x, x0);
                double v = 0.0;
                for (std::size_t i = 0; i < b.size(); ++i) v += b[i] * std::pow(y, -(i + 1.0) * gamma);
                return v;
            },
            [b, gamma, x0](double x) {
                if (x < x0) return 0.0;
                double v = 0.0;
                for (std::size_t i = 0; i < b.size(); ++i)
                    v -= (i + 1.0) * gamma * b[i] * std::pow(x, -(i + 1.0) * gamma - 1.0);
                return v;
            },
            x0, variation);
    }
    out.check = check_beta0(out.beta0, plan.p, plan.gamma, x0);
    if (!out.check.pass) throw DomainError("choose_beta0: " + out.check.detail);
    return out;
}

DriftMeasurement measure_drift(const EmbeddingPlan& plan, std::optional<Envelope> beta0, double x_start, double X,
                               int phases, const ode::Options& opt) {
    require_context(plan);
    if (!(x_start > 0.0) || !(X > x_start)) throw DomainError("measure_drift: need 0 < x_start < X");
    if (phases < 1) throw DomainError("measure_drift: need at least one initial phase");
    const GBVPerturbation V = plan_potential(plan, {}, std::move(beta0), std::min(1.0, x_start));
    const auto grid = uniform_grid(x_start, 2.0 * X, 8.0);
    const double h = grid[1] - grid[0];

    auto window_mean = [&](const std::vector<PruferSample>& s, double a, double b) {
        double acc = 0.0;
        int n = 0;
        for (const auto& q : s) {
            if (q.x >= a - 0.5 * h && q.x <= b + 0.5 * h) {
                acc += q.eta;
                ++n;
            }
        }
        return acc / n;
    };
    auto drift_over = [&](const std::vector<PruferSample>& s, double end) {
        const double w = 0.05 * (end - x_start);
        return window_mean(s, end - w, end) - window_mean(s, x_start, x_start + w);
    };

    DriftMeasurement out{x_start, X, 0.0, 0.0};
    for (int i = 0; i < phases; ++i) {
        const double eta0 = kPi * i / phases;
        const auto T = flow(V, plan.context, 0.0, eta0, x_start, grid, opt);
        out.drift += drift_over(T.samples(), X) / phases;
        out.drift_doubled += drift_over(T.samples(), 2.0 * X) / phases;
    }
    return out;
}

DemoReport demo_embedded(const EmbeddingPlan& plan, double X, const DemoOptions& opt) {
    require_context(plan);
    SteeringResult run = steer_xi(plan, X, opt.steering);
    if (!run.converged) {
        std::ostringstream os;
        os << "demo_embedded: psi did not converge to the target (|psi(X) - t| = " << run.final_error
           << ", margin " << run.margin << ")";
        throw ConvergenceError(os.str());
    }
    ClassifyOptions copt;
    copt.window_start = opt.window_start;
    copt.window_end = X;
    Verdict verdict = classify(run.trajectory, plan.gamma, plan.p, copt);
    DemoReport rep{plan, std::move(run), verdict, 0.0, {}, {}, false, false, false, false, false, {}};
    rep.relative_error = std::abs(verdict.B - plan.predicted_B) / plan.predicted_B;

    const auto& s = rep.steering.trajectory.samples();
    for (double a = opt.window_start; 2.0 * a <= X * (1.0 + 1e-12); a *= 2.0) {
        double acc = 0.0;
        for (std::size_t i = 1; i < s.size(); ++i) {
            if (s[i - 1].x < a || s[i].x > 2.0 * a) continue;
            acc += 0.5 * (s[i].x - s[i - 1].x) * (std::exp(2.0 * s[i - 1].logR) + std::exp(2.0 * s[i].logR));
        }
        rep.tail_integrals.push_back(acc);
    }
    for (std::size_t j = 1; j < rep.tail_integrals.size(); ++j)
        rep.tail_ratios.push_back(rep.tail_integrals[j] / rep.tail_integrals[j - 1]);
    rep.endpoint = std::abs(plan.gamma - 1.0 / (plan.p - 1)) < 1e-12;
    rep.ratios_below_one = !rep.tail_ratios.empty() &&
                           std::all_of(rep.tail_ratios.begin(), rep.tail_ratios.end(), [](double r) { return r < 1.0; });
    // Power decay gives constant ratios, so the endpoint case only asks them not to rise.
    const double slack = rep.endpoint ? 1.05 : 1.0;
    rep.ratios_decreasing = rep.tail_ratios.size() >= 2;
    for (std::size_t j = 1; j < rep.tail_ratios.size(); ++j)
        rep.ratios_decreasing = rep.ratios_decreasing && rep.tail_ratios[j] < slack * rep.tail_ratios[j - 1];
    rep.l2 = verdict.kind == VerdictKind::decaying && (!rep.endpoint || verdict.B > 0.5);

    std::ostringstream os;
    if (verdict.kind != VerdictKind::decaying) os << "verdict " << to_string(verdict.kind) << "; ";
    if (rep.relative_error >= opt.B_tolerance)
        os << "fitted B " << verdict.B << " misses predicted " << plan.predicted_B << "; ";
    if (!rep.ratios_below_one || !rep.ratios_decreasing) os << "tail integrals not summable-trending; ";
    if (rep.endpoint) os << (rep.l2 ? "polynomial decay with B > 1/2: square integrable; " : "polynomial decay with B <= 1/2; ");
    rep.success = verdict.kind == VerdictKind::decaying && rep.relative_error < opt.B_tolerance &&
                  rep.ratios_below_one && rep.ratios_decreasing && rep.l2;
    rep.message = os.str();
    if (rep.message.empty()) rep.message = "ok";
    return rep;
}

std::shared_ptr<const FloquetData> synthetic_context(const FourierSeries& p, double kappa, int grid) {
    double omega = 0.0;
    for (int n = -p.order(); n <= p.order(); ++n) omega += 2.0 * (kTwoPi * n + kappa) * std::norm(p.coeff(n));
    if (!(omega > 0.0)) throw DomainError("synthetic_context: non-positive Wronskian");
    return std::make_shared<const FloquetData>(FloquetData::from_periodic_factor(0.0, kappa, p, omega, grid));
}

std::complex<double> synthetic_mean_criterion(const FourierSeries& p, double kappa, std::span<const double> tuple,
                                              double divisor_floor, int grid) {
    const auto F = synthetic_context(p, kappa, grid);
    std::vector<double> distinct;
    for (double v : tuple)
        if (std::find(distinct.begin(), distinct.end(), v) == distinct.end()) distinct.push_back(v);
    HarmonicOptions hopt;
    hopt.divisor_floor = divisor_floor;
    hopt.permit_resonant = true;
    const HarmonicTable T = compute_table(*F, distinct, static_cast<int>(tuple.size()) + 1, hopt);
    return mean_criterion(T, tuple);
}

GenericityStats genericity_scan(const FourierSeries& base, double kappa, std::span<const double> tuple,
                                const GenericityOptions& opt) {
    GenericityStats st;
    if (opt.trials <= 0) return st;
    st.base_value = synthetic_mean_criterion(base, kappa, tuple, opt.divisor_floor, opt.grid);
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal(0.0, std::numbers::sqrt2 / 2.0);
    st.min_abs = std::numeric_limits<double>::infinity();
    for (int t = 0; t < opt.trials; ++t) {
        FourierSeries q = base;
        for (int n = -q.order(); n <= q.order(); ++n) {
            const double re = normal(rng), im = normal(rng);
            q.coeff_ref(n) += opt.epsilon * std::complex<double>(re, im);
        }
        const double v = std::abs(synthetic_mean_criterion(q, kappa, tuple, opt.divisor_floor, opt.grid));
        st.values.push_back(v);
        st.min_abs = std::min(st.min_abs, v);
        st.max_abs = std::max(st.max_abs, v);
        if (v > opt.floor) ++st.nonzero;
        ++st.trials;
    }
    st.fraction = static_cast<double>(st.nonzero) / st.trials;
    return st;
}

}  // namespace wvn

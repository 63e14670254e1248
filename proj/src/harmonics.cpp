#include "wvn/harmonics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "wvn/errors.hpp"

namespace wvn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
using Key = std::tuple<int, int, Multiset>;

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Distance of alpha to the nearest multiple of 2 pi, and that multiple's index.
std::pair<double, int> nearest_resonance(double alpha) {
    const int m = static_cast<int>(std::lround(alpha / kTwoPi));
    return {std::abs(alpha - kTwoPi * m), m};
}

std::string describe_multiset(const Multiset& M) {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < M.size(); ++i) os << (i ? "," : "") << M[i];
    os << '}';
    return os.str();
}

}  // namespace

FourierSeries tilde_phi(const FourierSeries& Phi, double alpha) {
    const int N = Phi.order();
    FourierSeries out(N, FourierSeries::Vector::Zero(2 * N + 1), Phi.tail_mass());
    const int m = nearest_resonance(alpha).second;
    const double eps = alpha - kTwoPi * m;
    const std::complex<double> half = std::polar(1.0, 0.5 * eps);
    const double s = std::sin(0.5 * eps);
    // 1 - e^{i alpha} = -2i e^{i eps/2} sin(eps/2), accurate near resonance.
    const std::complex<double> numer = std::complex<double>(0.0, -2.0) * half * s;
    for (int n = -N; n <= N; ++n) {
        const std::complex<double> c = Phi.coeff(n);
        if (c == 0.0) continue;
        if (n == -m) {
            const double sinc = eps == 0.0 ? 1.0 : s / (0.5 * eps);
            out.coeff_ref(n) = std::complex<double>(0.0, 1.0) * c * half * sinc;
        } else {
            out.coeff_ref(n) = -c * numer / (kTwoPi * n + alpha);
        }
    }
    return out;
}

FourierSeries reduced_tilde_phi(const FourierSeries& Phi, double alpha, double floor, int K, double phase_sum) {
    const int N = Phi.order();
    FourierSeries out(N, FourierSeries::Vector::Zero(2 * N + 1), Phi.tail_mass());
    for (int n = -N; n <= N; ++n) {
        const std::complex<double> c = Phi.coeff(n);
        if (c == 0.0) continue;
        const double d = kTwoPi * n + alpha;
        if (std::abs(d) < floor) {
            std::ostringstream os;
            os << "small divisor |2 pi n + alpha| = " << std::abs(d) << " at n = " << n << ", alpha = " << alpha
               << " (K = " << K << ", phase sum = " << phase_sum << ")";
            throw SmallDivisorError(os.str(), K, phase_sum, n);
        }
        out.coeff_ref(n) = -c / d;
    }
    // The dropped mass is divided by at least the smallest out-of-range divisor.
    if (Phi.tail_mass() > 0) {
        const double d = std::max(std::abs(kTwoPi * (N + 1)) - std::abs(alpha), floor);
        out = FourierSeries(N, out.coefficients(), Phi.tail_mass() / d);
    }
    return out;
}

FourierSeries lambda_op(const FourierSeries& Phi, double alpha, int K, const FloquetData& F) {
    const FourierSeries t = tilde_phi(Phi, alpha);
    if (K == 0) return t;
    return multiply(t, F.unimodular(-K), Phi.order());
}

FourierSeries PhaseFamily::operator()(std::span<const double> phases) const {
    if (static_cast<int>(phases.size()) != arity) {
        std::ostringstream os;
        os << "PhaseFamily: expected " << arity << " phases, got " << phases.size();
        throw DomainError(os.str());
    }
    return fn(phases);
}

PhaseFamily symmetric_product(const PhaseFamily& p, const PhaseFamily& q, int order) {
    if (p.arity < 0 || q.arity < 0 || !p.fn || !q.fn) throw DomainError("symmetric_product: invalid factor");
    const int I = p.arity, J = q.arity;
    PhaseFamily out;
    out.arity = I + J;
    out.fn = [p, q, I, J, order](std::span<const double> phases) {
        std::vector<int> perm(static_cast<std::size_t>(I + J));
        std::iota(perm.begin(), perm.end(), 0);
        std::vector<double> a(static_cast<std::size_t>(I)), b(static_cast<std::size_t>(J));
        FourierSeries acc;
        std::size_t count = 0;
        bool first = true;
        do {
            for (int i = 0; i < I; ++i) a[static_cast<std::size_t>(i)] = phases[static_cast<std::size_t>(perm[i])];
            for (int j = 0; j < J; ++j) b[static_cast<std::size_t>(j)] = phases[static_cast<std::size_t>(perm[I + j])];
            const FourierSeries pa = p(a), qb = q(b);
            const int N = order >= 0 ? order : std::max(pa.order(), qb.order());
            const FourierSeries term = multiply(pa, qb, N);
            if (first) acc = term, first = false;
            else acc += term;
            ++count;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return acc * std::complex<double>(1.0 / static_cast<double>(count));
    };
    return out;
}

void for_each_split(const Multiset& M, int I,
                    const std::function<void(const Multiset&, const Multiset&, double)>& fn) {
    const int n = static_cast<int>(M.size());
    if (I < 0 || I > n) return;
    std::vector<int> values, counts;
    for (int v : M) {
        if (!values.empty() && values.back() == v) ++counts.back();
        else values.push_back(v), counts.push_back(1);
    }
    const double total = binomial(n, I);
    std::vector<int> take(values.size(), 0);
    // Odometer over take[v] in [0, counts[v]].
    while (true) {
        const int size = std::accumulate(take.begin(), take.end(), 0);
        if (size == I) {
            Multiset S, T;
            double w = 1.0;
            for (std::size_t v = 0; v < values.size(); ++v) {
                S.insert(S.end(), static_cast<std::size_t>(take[v]), values[v]);
                T.insert(T.end(), static_cast<std::size_t>(counts[v] - take[v]), values[v]);
                w *= binomial(counts[v], take[v]);
            }
            fn(S, T, w / total);
        }
        std::size_t v = 0;
        while (v < take.size() && take[v] == counts[v]) take[v++] = 0;
        if (v == take.size()) break;
        ++take[v];
    }
}

std::vector<Multiset> multisets(int P, int J) {
    std::vector<Multiset> out;
    if (P <= 0 || J < 0) return out;
    Multiset cur(static_cast<std::size_t>(J), 0);
    while (true) {
        out.push_back(cur);
        int i = J - 1;
        while (i >= 0 && cur[static_cast<std::size_t>(i)] == P - 1) --i;
        if (i < 0) break;
        const int v = cur[static_cast<std::size_t>(i)] + 1;
        for (int j = i; j < J; ++j) cur[static_cast<std::size_t>(j)] = v;
    }
    return out;
}

bool HarmonicTable::has_f(int J, int K, const Multiset& M) const {
    if (J <= 0 || K < 0 || K > J) return true;
    return f_.count({J, K, M}) > 0;
}

bool HarmonicTable::has_g(int J, int K, const Multiset& M) const {
    if (J <= 0 || K < 0 || K > J) return true;
    return g_.count({J, K, M}) > 0;
}

FourierSeries HarmonicTable::f(int J, int K, const Multiset& M) const {
    if (J <= 0 || K < 0 || K > J) return FourierSeries(opt_.order);
    const auto it = f_.find({J, K, M});
    if (it == f_.end()) {
        std::ostringstream os;
        os << "HarmonicTable: f_{" << J << "," << K << "}" << describe_multiset(M) << " not available";
        throw DomainError(os.str());
    }
    return it->second;
}

FourierSeries HarmonicTable::g(int J, int K, const Multiset& M) const {
    if (J == 0 && K == 0) return FourierSeries::constant(opt_.order, 2.0);
    if (J <= 0 || K < 0 || K > J) return FourierSeries(opt_.order);
    const auto it = g_.find({J, K, M});
    if (it == g_.end()) {
        std::ostringstream os;
        os << "HarmonicTable: g_{" << J << "," << K << "}" << describe_multiset(M) << " not available";
        throw DomainError(os.str());
    }
    return it->second;
}

double HarmonicTable::h(std::span<const int> tuple) const {
    if (tuple.empty()) return 1.0;
    const auto it = h_.find(std::vector<int>(tuple.begin(), tuple.end()));
    if (it == h_.end()) throw DomainError("HarmonicTable: h not available for this tuple");
    return it->second;
}

Multiset HarmonicTable::multiset_of(std::span<const double> values) const {
    Multiset M;
    for (double v : values) {
        const auto it = std::find_if(phases_.begin(), phases_.end(),
                                     [&](double q) { return std::abs(q - v) <= 1e-12 * std::max(1.0, std::abs(v)); });
        if (it == phases_.end()) {
            std::ostringstream os;
            os << "HarmonicTable: phase " << v << " is not in the table";
            throw DomainError(os.str());
        }
        M.push_back(static_cast<int>(it - phases_.begin()));
    }
    std::sort(M.begin(), M.end());
    return M;
}

double HarmonicTable::phase_sum(const Multiset& M) const {
    double s = 0.0;
    for (int i : M) s += phases_.at(static_cast<std::size_t>(i));
    return s;
}

double h_value(std::span<const double> phases, double k, double floor) {
    const auto J = phases.size();
    if (J == 0) return 1.0;
    const double sum = std::accumulate(phases.begin(), phases.end(), 0.0);
    const double alpha = 2.0 * k - sum;
    const double d = std::abs(2.0 * std::sin(0.5 * alpha));
    if (d < floor) {
        std::ostringstream os;
        os << "h_" << J << ": |1 - e^{i(2k - sum)}| = " << d << " below floor";
        throw SmallDivisorError(os.str(), 1, sum, static_cast<int>(std::lround(alpha / kTwoPi)));
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < J; ++j)
        acc += h_value(phases.subspan(0, j), k, floor) * h_value(phases.subspan(j, J - j - 1), k, floor);
    return acc / d;
}

HarmonicTable compute_table(const FloquetData& F, std::vector<double> phases, int p, const HarmonicOptions& opt) {
    if (p < 2) throw DomainError("compute_table: p must be at least 2");
    if (phases.empty()) throw DomainError("compute_table: empty phase list");
    if (opt.order < 0 || !(opt.divisor_floor > 0)) throw DomainError("compute_table: invalid options");
    for (double v : phases)
        if (!std::isfinite(v)) throw DomainError("compute_table: non-finite phase");
    HarmonicTable T(F, std::move(phases), p, opt);
    const int P = static_cast<int>(T.phases_.size());
    const int N = opt.order;
    if (p > opt.max_p) {
        std::ostringstream os;
        os << "compute_table: p = " << p << " exceeds the supported order " << opt.max_p
           << "; table size grows combinatorially";
        T.warnings_.push_back(os.str());
    }
    const FourierSeries Phi0 = F.phi0_fourier().resized(N);
    const double kappa = F.kappa();

    for (int J = 1; J <= p - 1; ++J) {
        for (const Multiset& M : multisets(P, J)) {
            // f_{J,K}
            for (int K = 0; K <= J; ++K) {
                if (J == 1) {
                    T.f_.emplace(Key{1, K, M}, K == 1 ? Phi0 : FourierSeries(N));
                    continue;
                }
                bool available = true;
                FourierSeries sym(N);
                for (int a = -1; a <= 1; ++a) {
                    const int Kp = K + a;
                    if (Kp <= 0 || Kp > J - 1) continue;
                    // Average over the phase not carried by g_{J-1}.
                    for (std::size_t i = 0; i < M.size(); ++i) {
                        if (i > 0 && M[i] == M[i - 1]) continue;
                        Multiset rest = M;
                        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
                        const auto mult = std::count(M.begin(), M.end(), M[i]);
                        if (!T.has_g(J - 1, Kp, rest)) {
                            available = false;
                            break;
                        }
                        sym += (weight(a) * static_cast<double>(mult) / J) * T.g(J - 1, Kp, rest);
                    }
                    if (!available) break;
                }
                if (available) T.f_.emplace(Key{J, K, M}, multiply(Phi0, sym, N));
            }
            // g_{J,K}
            T.g_.emplace(Key{J, 0, M}, FourierSeries(N));
            const double s = T.phase_sum(M);
            for (int K = 1; K <= J; ++K) {
                if (!T.has_f(J, K, M)) continue;
                const double alpha = 2.0 * K * kappa - s;
                try {
                    if (nearest_resonance(alpha).first < opt.divisor_floor) {
                        std::ostringstream os;
                        os << "resonant: 2 K kappa - s = " << alpha << " is within " << opt.divisor_floor
                           << " of 2 pi Z (K = " << K << ", phase sum = " << s << ")";
                        throw SmallDivisorError(os.str(), K, s, nearest_resonance(alpha).second);
                    }
                    const FourierSeries e = multiply(F.unimodular(K), T.f(J, K, M), N);
                    const FourierSeries r = reduced_tilde_phi(e, alpha, opt.divisor_floor, K, s);
                    T.g_.emplace(Key{J, K, M}, std::complex<double>(2.0 * K) * multiply(r, F.unimodular(-K), N));
                } catch (const SmallDivisorError&) {
                    if (!opt.permit_resonant) throw;
                    T.resonances_.push_back({J, K, M, alpha});
                }
            }
        }
    }

    // h_J on ordered tuples of length <= p-1.
    std::vector<int> tuple;
    std::vector<double> values;
    const auto visit = [&](auto&& self, int depth) -> void {
        if (depth > 0) {
            try {
                T.h_.emplace(tuple, h_value(values, kappa, opt.divisor_floor));
            } catch (const SmallDivisorError&) {
                if (!opt.permit_resonant) throw;
            }
        }
        if (depth == p - 1) return;
        for (int i = 0; i < P; ++i) {
            tuple.push_back(i);
            values.push_back(T.phases_[static_cast<std::size_t>(i)]);
            self(self, depth + 1);
            tuple.pop_back();
            values.pop_back();
        }
    };
    visit(visit, 0);
    return T;
}

std::complex<double> mean_criterion(const HarmonicTable& T, std::span<const double> tuple) {
    const int J = T.p() - 1;
    if (static_cast<int>(tuple.size()) != J) throw DomainError("mean_criterion: tuple length must be p - 1");
    const Multiset M = T.multiset_of(tuple);
    const double alpha = 2.0 * T.context().kappa() - T.phase_sum(M);
    const int m = nearest_resonance(alpha).second;
    const FourierSeries e = multiply(T.f(J, 1, M), T.context().unimodular(1), T.order());
    return e.coeff(-m);
}

RecursionReport verify_recursion(const HarmonicTable& T, int I, int l) {
    RecursionReport rep;
    rep.I = I;
    rep.l = l;
    if (I <= 1) {
        rep.vacuous = true;
        return rep;
    }
    if (l <= 0 || l >= I) throw DomainError("verify_recursion: need 0 < l < I");
    if (I > T.p() - 1) throw DomainError("verify_recursion: table order too small");
    const int N = T.order();
    const int P = static_cast<int>(T.phases().size());
    for (const Multiset& M : multisets(P, I)) {
        for (int K = l; K <= I; ++K) {
            if (!T.has_f(I, K, M) || !T.has_g(I, K, M)) continue;
            FourierSeries fr(N), gr(N);
            bool ok = true;
            for (int j = 0; j <= I && ok; ++j) {
                for_each_split(M, j, [&](const Multiset& S, const Multiset& R, double w) {
                    if (!ok) return;
                    if (!T.has_f(j, l, S) || !T.has_g(j, l, S) || !T.has_g(I - j, K - l, R)) {
                        ok = false;
                        return;
                    }
                    const FourierSeries gb = T.g(I - j, K - l, R);
                    fr += (0.5 * w) * multiply(T.f(j, l, S), gb, N);
                    gr += (0.5 * w) * multiply(T.g(j, l, S), gb, N);
                });
            }
            if (!ok) continue;
            const double fe = (T.f(I, K, M) - fr).l1_norm();
            const double ge = (T.g(I, K, M) - gr).l1_norm();
            rep.entries.push_back({K, M, fe, ge});
            rep.max_f = std::max(rep.max_f, fe);
            rep.max_g = std::max(rep.max_g, ge);
        }
    }
    return rep;
}

GBoundReport g_bound_check(const HarmonicTable& T, int J, int grid) {
    if (J < 1 || J > T.p() - 1) throw DomainError("g_bound_check: J out of range");
    GBoundReport rep;
    rep.J = J;
    rep.min_margin = std::numeric_limits<double>::infinity();
    const double phi0_norm = T.context().phi0_fourier().sup_norm(grid);
    double fact = 1.0;
    for (int i = 2; i <= J; ++i) fact *= i;
    const double pref = 2.0 * std::pow(2.0 * phi0_norm, J) / fact;
    for (const Multiset& M : multisets(static_cast<int>(T.phases().size()), J)) {
        if (!T.has_g(J, 1, M)) continue;
        std::vector<int> pos(static_cast<std::size_t>(J));
        std::iota(pos.begin(), pos.end(), 0);
        double hsum = 0.0;
        bool ok = true;
        std::vector<int> tuple(static_cast<std::size_t>(J));
        do {
            for (int i = 0; i < J; ++i) tuple[static_cast<std::size_t>(i)] = M[static_cast<std::size_t>(pos[i])];
            if (!T.h_entries().count(tuple)) {
                ok = false;
                break;
            }
            hsum += T.h(tuple);
        } while (std::next_permutation(pos.begin(), pos.end()));
        if (!ok) continue;
        const double bound = pref * hsum;
        const FourierSeries g = T.g(J, 1, M);
        for (int j = 0; j < grid; ++j) {
            const double v = std::abs(g(static_cast<double>(j) / grid));
            rep.max_ratio = std::max(rep.max_ratio, v / bound);
            rep.min_margin = std::min(rep.min_margin, bound - v);
        }
        ++rep.checked;
    }
    return rep;
}

}  // namespace wvn

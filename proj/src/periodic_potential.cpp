#include "wvn/periodic_potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wvn/errors.hpp"

namespace wvn {

namespace {

double reduce(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r = 0.0;
    return r;
}

}  // namespace

PeriodicPotential::PeriodicPotential(std::string name, Evaluator evaluator, std::vector<double> breakpoints,
                                     int fourier_order, int grid)
    : name_(std::move(name)), eval_(std::move(evaluator)), breakpoints_(std::move(breakpoints)), grid_(grid) {
    if (grid_ < 2 * fourier_order + 1) throw DomainError("PeriodicPotential: grid too coarse for Fourier order");
    for (double& b : breakpoints_) b = reduce(b);
    std::sort(breakpoints_.begin(), breakpoints_.end());
    breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
    std::vector<std::complex<double>> s(static_cast<std::size_t>(grid_));
    for (int j = 0; j < grid_; ++j) s[static_cast<std::size_t>(j)] = eval_(static_cast<double>(j) / grid_);
    fourier_ = FourierSeries::from_samples(s, fourier_order);
    zero_ = std::all_of(s.begin(), s.end(), [](auto v) { return v == 0.0; });
}

double PeriodicPotential::operator()(double x) const { return zero_ ? 0.0 : eval_(reduce(x)); }

PeriodicPotential PeriodicPotential::free() {
    return PeriodicPotential("free", [](double) { return 0.0; });
}

PeriodicPotential PeriodicPotential::cosine(double amplitude) {
    return PeriodicPotential("cosine", [amplitude](double x) {
        return amplitude * std::cos(2.0 * std::numbers::pi * x);
    });
}

PeriodicPotential PeriodicPotential::kronig_penney(double height, double width) {
    if (!(width > 0.0 && width < 1.0)) throw DomainError("kronig_penney: width must lie in (0, 1)");
    return PeriodicPotential("kronig_penney", [height, width](double x) { return x < width ? height : 0.0; },
                             {0.0, width});
}

PeriodicPotential PeriodicPotential::trigonometric(const FourierSeries& coeffs) {
    for (int n = -coeffs.order(); n <= coeffs.order(); ++n) {
        if (std::abs(coeffs.coeff(n) - std::conj(coeffs.coeff(-n))) > 1e-12 * (1.0 + coeffs.l1_norm()))
            throw DomainError("trigonometric potential: coefficients are not conjugate symmetric");
    }
    return PeriodicPotential("trigonometric", [coeffs](double x) { return coeffs(x).real(); },
                             {}, std::max(64, coeffs.order()), std::max(2048, 4 * coeffs.order() + 1));
}

PeriodicPotential PeriodicPotential::from_samples(std::vector<double> x, std::vector<double> v) {
    if (x.size() != v.size() || x.size() < 2) throw ConfigError("sampled potential: need at least two (x, V) pairs");
    std::vector<std::size_t> idx(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> xs, vs;
    for (auto i : idx) {
        if (x[i] < 0.0 || x[i] >= 1.0) throw ConfigError("sampled potential: x must lie in [0, 1)");
        xs.push_back(x[i]);
        vs.push_back(v[i]);
    }
    auto eval = [xs, vs](double t) {
        const auto it = std::upper_bound(xs.begin(), xs.end(), t);
        std::size_t hi = static_cast<std::size_t>(it - xs.begin());
        double x0, x1, v0, v1;
        if (hi == 0) {
            x0 = xs.back() - 1.0; v0 = vs.back(); x1 = xs.front(); v1 = vs.front();
        } else if (hi == xs.size()) {
            x0 = xs.back(); v0 = vs.back(); x1 = xs.front() + 1.0; v1 = vs.front();
        } else {
            x0 = xs[hi - 1]; v0 = vs[hi - 1]; x1 = xs[hi]; v1 = vs[hi];
        }
        const double w = (t - x0) / (x1 - x0);
        return v0 + w * (v1 - v0);
    };
    return PeriodicPotential("sampled", eval, xs);
}

PeriodicPotential::Validation PeriodicPotential::validate() const {
    Validation r{0.0, 0.0, 0.0};
    for (int j = 0; j < grid_; ++j) {
        const double x = static_cast<double>(j) / grid_;
        r.periodicity_error = std::max(r.periodicity_error, std::abs((*this)(x + 1.0) - (*this)(x)));
        r.reconstruction_error = std::max(r.reconstruction_error, std::abs((*this)(x) - fourier_(x).real()));
    }
    for (int n = 0; n <= fourier_.order(); ++n)
        r.conjugate_asymmetry =
            std::max(r.conjugate_asymmetry, std::abs(fourier_.coeff(n) - std::conj(fourier_.coeff(-n))));
    return r;
}

}  // namespace wvn

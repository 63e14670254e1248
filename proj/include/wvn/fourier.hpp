#pragma once

// Truncated Fourier series of 1-periodic functions, x -> sum_n c(n) exp(2 pi i n x),
// with n in [-N, N]. Products are formed by exact convolution and re-truncated;
// the discarded coefficient mass is carried along as `tail_mass`.

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace wvn {

template <class Scalar>
class BasicFourierSeries {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Real = typename Eigen::NumTraits<Scalar>::Real;

    BasicFourierSeries() : BasicFourierSeries(0) {}
    explicit BasicFourierSeries(int order) : order_(order), coeffs_(Vector::Zero(2 * order + 1)) {
        if (order < 0) throw std::invalid_argument("FourierSeries: negative order");
    }
    BasicFourierSeries(int order, Vector coeffs, Real tail = 0) : order_(order), coeffs_(std::move(coeffs)), tail_(tail) {
        if (coeffs_.size() != 2 * order + 1) throw std::invalid_argument("FourierSeries: size mismatch");
    }

    static BasicFourierSeries constant(int order, Scalar value) {
        BasicFourierSeries s(order);
        s.coeffs_[order] = value;
        return s;
    }

    /// Single mode c * exp(2 pi i n x).
    static BasicFourierSeries mode(int order, int n, Scalar value) {
        BasicFourierSeries s(order);
        if (std::abs(n) <= order) s.coeffs_[n + order] = value;
        else s.tail_ = std::abs(value);
        return s;
    }

    /// Discrete Fourier coefficients of uniform samples f(j/M), j = 0..M-1.
    static BasicFourierSeries from_samples(std::span<const Scalar> samples, int order) {
        const auto M = static_cast<int>(samples.size());
        if (M < 2 * order + 1) throw std::invalid_argument("FourierSeries: too few samples for order");
        BasicFourierSeries s(order);
        for (int n = -order; n <= order; ++n) {
            const std::complex<Real> w = std::polar<Real>(1, -2 * std::numbers::pi_v<Real> * n / M);
            std::complex<Real> z = 1;
            std::complex<Real> acc = 0;
            for (int j = 0; j < M; ++j) {
                acc += std::complex<Real>(samples[static_cast<std::size_t>(j)]) * z;
                z *= w;
                if ((j & 63) == 63) z = std::polar<Real>(1, -2 * std::numbers::pi_v<Real> * n * (j + 1) / M);
            }
            s.coeffs_[n + order] = static_cast<Scalar>(acc / static_cast<Real>(M));
        }
        return s;
    }

    int order() const noexcept { return order_; }
    const Vector& coefficients() const noexcept { return coeffs_; }
    Real tail_mass() const noexcept { return tail_; }
    void add_tail(Real t) { tail_ += t; }

    Scalar coeff(int n) const { return std::abs(n) <= order_ ? coeffs_[n + order_] : Scalar(0); }
    Scalar& coeff_ref(int n) { return coeffs_[n + order_]; }
    Scalar mean() const { return coeffs_[order_]; }

    Scalar operator()(Real x) const {
        const std::complex<Real> z = std::polar<Real>(1, 2 * std::numbers::pi_v<Real> * x);
        std::complex<Real> zp = 1;
        std::complex<Real> acc = coeffs_[order_];
        for (int n = 1; n <= order_; ++n) {
            zp *= z;
            acc += coeffs_[order_ + n] * zp + coeffs_[order_ - n] * std::conj(zp);
        }
        return static_cast<Scalar>(acc);
    }

    std::vector<Scalar> samples(int M) const {
        std::vector<Scalar> out(static_cast<std::size_t>(M));
        for (int j = 0; j < M; ++j) out[static_cast<std::size_t>(j)] = (*this)(static_cast<Real>(j) / M);
        return out;
    }

    /// max |f| over an M-point uniform grid.
    Real sup_norm(int M = 512) const {
        Real m = 0;
        for (int j = 0; j < M; ++j) m = std::max(m, static_cast<Real>(std::abs((*this)(static_cast<Real>(j) / M))));
        return m;
    }

    /// Sum of |c(n)|: an upper bound for the sup norm.
    Real l1_norm() const { return coeffs_.cwiseAbs().sum(); }

    BasicFourierSeries derivative() const {
        BasicFourierSeries d(order_);
        for (int n = -order_; n <= order_; ++n)
            d.coeffs_[n + order_] = coeffs_[n + order_] * Scalar(0, 2 * std::numbers::pi_v<Real> * n);
        return d;
    }

    /// Series of conj(f(x)).
    BasicFourierSeries conjugate() const {
        BasicFourierSeries s(order_);
        for (int n = -order_; n <= order_; ++n) s.coeffs_[n + order_] = std::conj(coeffs_[order_ - n]);
        s.tail_ = tail_;
        return s;
    }

    /// Series of f(x) exp(2 pi i m x), truncated back to the same order.
    BasicFourierSeries shifted(int m) const {
        BasicFourierSeries s(order_);
        s.tail_ = tail_;
        for (int n = -order_; n <= order_; ++n) {
            const int t = n + m;
            if (std::abs(t) <= order_) s.coeffs_[t + order_] = coeffs_[n + order_];
            else s.tail_ += std::abs(coeffs_[n + order_]);
        }
        return s;
    }

    /// Re-truncate (or zero-pad) to a new order, recording dropped mass.
    BasicFourierSeries resized(int order) const {
        BasicFourierSeries s(order);
        s.tail_ = tail_;
        for (int n = -order_; n <= order_; ++n) {
            if (std::abs(n) <= order) s.coeffs_[n + order] = coeffs_[n + order_];
            else s.tail_ += std::abs(coeffs_[n + order_]);
        }
        return s;
    }

    BasicFourierSeries& operator+=(const BasicFourierSeries& o) {
        if (o.order_ > order_) *this = resized(o.order_);
        for (int n = -o.order_; n <= o.order_; ++n) coeffs_[n + order_] += o.coeffs_[n + o.order_];
        tail_ += o.tail_;
        return *this;
    }
    BasicFourierSeries& operator-=(const BasicFourierSeries& o) {
        if (o.order_ > order_) *this = resized(o.order_);
        for (int n = -o.order_; n <= o.order_; ++n) coeffs_[n + order_] -= o.coeffs_[n + o.order_];
        tail_ += o.tail_;
        return *this;
    }
    BasicFourierSeries& operator*=(Scalar a) {
        coeffs_ *= a;
        tail_ *= std::abs(a);
        return *this;
    }

    friend BasicFourierSeries operator+(BasicFourierSeries a, const BasicFourierSeries& b) { return a += b; }
    friend BasicFourierSeries operator-(BasicFourierSeries a, const BasicFourierSeries& b) { return a -= b; }
    friend BasicFourierSeries operator*(Scalar a, BasicFourierSeries s) { return s *= a; }
    friend BasicFourierSeries operator*(BasicFourierSeries s, Scalar a) { return s *= a; }

private:
    int order_;
    Vector coeffs_;
    Real tail_ = 0;
};

/// Pointwise product by exact convolution (order Na + Nb), truncated to `order`.
/// The dropped mass plus the propagated input tails are recorded.
template <class Scalar>
BasicFourierSeries<Scalar> multiply(const BasicFourierSeries<Scalar>& a, const BasicFourierSeries<Scalar>& b,
                                    int order) {
    BasicFourierSeries<Scalar> out(order);
    typename BasicFourierSeries<Scalar>::Real dropped = 0;
    const int Na = a.order(), Nb = b.order();
    for (int n = -Na; n <= Na; ++n) {
        const Scalar an = a.coefficients()[n + Na];
        if (an == Scalar(0)) continue;
        for (int m = -Nb; m <= Nb; ++m) {
            const Scalar v = an * b.coefficients()[m + Nb];
            const int t = n + m;
            if (std::abs(t) <= order) out.coeff_ref(t) += v;
            else dropped += std::abs(v);
        }
    }
    out.add_tail(dropped + a.tail_mass() * b.l1_norm() + b.tail_mass() * a.l1_norm() +
                 a.tail_mass() * b.tail_mass());
    return out;
}

template <class Scalar>
BasicFourierSeries<Scalar> operator*(const BasicFourierSeries<Scalar>& a, const BasicFourierSeries<Scalar>& b) {
    return multiply(a, b, std::max(a.order(), b.order()));
}

/// Sup-norm distance between two series on an M-point grid.
template <class Scalar>
double sup_distance(const BasicFourierSeries<Scalar>& a, const BasicFourierSeries<Scalar>& b, int M = 512) {
    double m = 0;
    for (int j = 0; j < M; ++j) {
        const double x = static_cast<double>(j) / M;
        m = std::max(m, static_cast<double>(std::abs(a(x) - b(x))));
    }
    return m;
}

using FourierSeries = BasicFourierSeries<std::complex<double>>;

}  // namespace wvn

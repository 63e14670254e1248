#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wvn/fourier.hpp"

namespace wvn {

/// Real 1-periodic background potential V0, held both as an evaluator and as a
/// truncated Fourier series sampled from it.
class PeriodicPotential {
public:
    using Evaluator = std::function<double(double)>;

    /// `evaluator` is only called on [0, 1). `breakpoints` lists the points in [0, 1)
    /// where V0 fails to be smooth; cell integration restarts there.
    PeriodicPotential(std::string name, Evaluator evaluator, std::vector<double> breakpoints = {},
                      int fourier_order = 64, int grid = 2048);

    static PeriodicPotential free();
    /// V0(x) = amplitude * cos(2 pi x)  (Mathieu background).
    static PeriodicPotential cosine(double amplitude);
    /// Height `height` on [0, width), 0 on [width, 1).
    static PeriodicPotential kronig_penney(double height, double width = 0.5);
    /// V0(x) = sum_n coeffs(n) exp(2 pi i n x); coefficients must be conjugate symmetric.
    static PeriodicPotential trigonometric(const FourierSeries& coeffs);
    /// Piecewise-linear periodic interpolation of samples (x_i, v_i), x_i in [0, 1).
    static PeriodicPotential from_samples(std::vector<double> x, std::vector<double> v);

    double operator()(double x) const;
    const std::string& name() const noexcept { return name_; }
    const FourierSeries& fourier() const noexcept { return fourier_; }
    int grid() const noexcept { return grid_; }
    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    bool is_zero() const noexcept { return zero_; }

    struct Validation {
        double periodicity_error;      // |V0(x+1) - V0(x)| on the grid
        double conjugate_asymmetry;    // max |c(n) - conj(c(-n))|
        double reconstruction_error;   // sup |V0 - Fourier(V0)| on the grid
    };
    Validation validate() const;

private:
    std::string name_;
    Evaluator eval_;
    std::vector<double> breakpoints_;
    FourierSeries fourier_;
    int grid_;
    bool zero_ = false;
};

}  // namespace wvn

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

namespace tauber {

using cplx = std::complex<double>;

/// A uniformly gridded complex-valued function: value i lives at t0 + i*dt.
///
/// `derivative_order` records how many derivatives the producer guarantees (the m of f^{(m)});
/// `exponent` is the L^p tag (infinity for p = ∞). `zero_jet` marks signals normalized to
/// f(0) = ... = f^{(m-1)}(0) = 0, `mollifier` marks real samples supported in [-1, 1].
struct SampledSignal {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<cplx> values;
    int derivative_order = 0;
    double exponent = std::numeric_limits<double>::infinity();
    bool zero_jet = false;
    bool mollifier = false;

    std::size_t size() const { return values.size(); }
    double t(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
    double t_end() const { return values.empty() ? t0 : t(values.size() - 1); }

    /// Throws SpecError if the invariants (dt > 0, finite values, mollifier support) fail.
    void validate() const;

    /// Linear interpolation; zero outside [t0, t_end].
    cplx at_linear(double t) const;
    /// Cubic (Catmull-Rom) interpolation; zero outside [t0, t_end].
    cplx at_cubic(double t) const;

    /// Trapezoid integral over the sampled window.
    cplx integral() const;
    /// Trapezoid L^p norm of |values|; p = infinity gives the max.
    double lp_norm(double p) const;
    double sup_abs() const;

    std::vector<double> real_parts() const;
    std::vector<double> abs_values() const;

    static SampledSignal from_function(double t0, double dt, std::size_t n,
                                       const std::function<cplx(double)>& f);
    static SampledSignal from_real(double t0, double dt, std::span<const double> v);
};

/// CSV with header "t,re,im" and 17 significant digits.
void write_csv(std::ostream& os, const SampledSignal& s);
SampledSignal read_csv(std::istream& is);

/// Little-endian float64 layout: t0, dt, n, then n (re, im) pairs.
void write_binary(std::ostream& os, const SampledSignal& s);
SampledSignal read_binary(std::istream& is);

}  // namespace tauber

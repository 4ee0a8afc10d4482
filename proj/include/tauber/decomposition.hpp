#pragma once

#include <cstddef>
#include <vector>

#include "tauber/convolution.hpp"
#include "tauber/mollifier.hpp"
#include "tauber/rate_algebra.hpp"
#include "tauber/report.hpp"
#include "tauber/signal.hpp"

namespace tauber {

/// Relative level below which kernel tails are dropped.
inline constexpr double kKernelCutoff = 1e-14;

/// J1 = (δ - φ_R)^{*m} * f and J2 = f - J1 on f's grid.
struct DecompResult {
    SampledSignal J1;
    SampledSignal J2;
    std::vector<double> R_schedule;  // R at every grid point (constant for decompose)
    int m = 1;
    double R = 1.0;
    double valid_end = 0.0;          // J1, J2 are unaffected by the right edge for t <= valid_end
    double kernel_half_width = 0.0;
    double dropped_kernel_mass = 0.0;  // L1 mass of the truncated kernel tails
};

/// φ_R sampled at multiples of h, centred (odd length), tails below kKernelCutoff * peak dropped.
/// `dropped` receives the discarded L1 mass when non-null.
std::vector<double> kernel_samples(const SampledSignal& phi, double R, double h, double* dropped = nullptr);

/// f is treated as zero outside its window (in particular for t < 0).
DecompResult decompose(const SampledSignal& f, const SampledSignal& phi, double R, int m,
                       ConvMethod method = ConvMethod::Auto);

/// m-th derivative by repeated central differences (one-sided at the window ends).
SampledSignal derivative(const SampledSignal& f, int m);

/// f - g with g(t) = sum_k jet[k] t^k / k! * χ(t / t1), χ a smooth cutoff equal to 1 at 0 and
/// 0 beyond 1. The result has a vanishing jet of order jet.size() at 0.
SampledSignal subtract_jet(const SampledSignal& f, const std::vector<cplx>& jet, double t1 = 1.0);

/// P_y * g on g's grid using cell-exact kernel weights (each sample spreads over its cell).
SampledSignal poisson_convolve(const SampledSignal& g, double y);

/// ∫ P_y over the real line by double-exponential quadrature.
double poisson_mass(double y);

/// Observation "max_deviation" = max |poisson_mass(y) - 1| over ys, passing below tol.
VerificationReport poisson_mass_check(const std::vector<double>& ys, double tol = 1e-6);

/// Observation "sup_error" = sup |J1 + J2 - f| on f's grid, passing below tol.
VerificationReport reconstruction_check(const SampledSignal& f, const DecompResult& d, double tol = 1e-6);

/// Observations: "C" = sup over (t, R) of R^m |J1(t,R)| / (P_{1/R} * |f^(m)|)(t) on
/// [t_lo, t_hi] ∩ valid window. Points where the majorant is below 1e-30 are skipped.
/// If fm is empty, f^(m) is taken from `derivative`.
VerificationReport check_lemma21(const SampledSignal& f, const SampledSignal* fm, const SampledSignal& phi,
                                 int m, const std::vector<double>& R_list, double t_lo, double t_hi);

/// sup over t_points of R(t)^m |J1(t, R(t))| with R(t) = w_{M_K}(c1 t), each point evaluated
/// with its own scale. Points whose kernel is narrower than 16 grid steps are skipped and flagged.
VerificationReport check_final_j1(const SampledSignal& f, const SampledSignal& phi, const EnvelopeSpec& spec,
                                  const std::vector<double>& t_points);

struct CarlesonOptions {
    double t_lo = 0.0;  // evaluation window for the curve t + iγ(t)
    double t_hi = 0.0;  // t_lo == t_hi: g's window padded by its length on both sides
    std::size_t n_eval = 2049;
};

/// ∫_Γ |P*g|^p ds with Γ = {t + iγ(t)}, γ = 1/w_{M_K}(c1 t) for t > 0 and 1 otherwise.
/// Observations: "curve_integral", "g_norm_p" (‖g‖_p^p) and "ratio".
VerificationReport carleson_curve_check(const SampledSignal& g, const EnvelopeSpec& spec, double p,
                                        const CarlesonOptions& opt = {});

/// The A·B majorant for the Fourier-side J2 estimate at time t.
struct J2Bound {
    double t = 0.0;
    double R = 1.0;
    long N = 0;
    double log_A = 0.0;
    double log_B = 0.0;
    double ratio_x = 0.0;  // C3 log(2+N)^{1+eps} / (R M(R)), the ratio of the geometric sum
    bool trivial = false;  // N = 0: A = R^{m+1} K(R), B = 1
    bool geometric = false;  // ratio_x <= 1/2, hence B <= 2
    double log_value() const { return log_A + log_B; }
};

J2Bound j2_fourier_bound(const EnvelopeSpec& spec, const BumpSpec& psi_spec, double t, double C2 = 2.0,
                         double C3 = 2.0);

/// j2_fourier_bound over t_grid. Observations: "max_log_increase" (largest step-to-step
/// increase of log A·B, pass iff <= 0) and "B_bound" (B <= 2 wherever ratio_x <= 1/2).
VerificationReport j2_decay_scan(const EnvelopeSpec& spec, const BumpSpec& psi_spec, const std::vector<double>& t_grid,
                                 double C2 = 2.0, double C3 = 2.0);

}  // namespace tauber

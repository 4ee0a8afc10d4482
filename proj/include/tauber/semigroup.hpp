#pragma once

#include <complex>
#include <vector>

#include <json.hpp>

#include "tauber/rate_algebra.hpp"
#include "tauber/report.hpp"

namespace tauber {

/// Diagonal generator with eigenvalues a_n + i xi_n and diagonal truncations P1, P2.
struct DiagonalSystem {
    std::vector<double> xi;  // increasing, >= 0
    std::vector<double> a;   // < 0
    std::vector<double> P1;  // in [0, 1]; empty means all ones
    std::vector<double> P2;
    double omega = 1.0;
    int m = 1;
    /// Use (-A)^{-m} instead of (omega - A)^{-m}; the generator is invertible for the toy.
    bool invertible_generator = false;

    std::size_t size() const { return xi.size(); }
    std::complex<double> lambda(std::size_t n) const { return {a[n], xi[n]}; }
    double p1(std::size_t n) const { return P1.empty() ? 1.0 : P1[n]; }
    double p2(std::size_t n) const { return P2.empty() ? 1.0 : P2[n]; }
    /// Throws SpecError on size mismatch, decreasing xi, a_n >= 0 or weights outside [0, 1].
    void validate() const;

    nlohmann::json to_json() const;
    static DiagonalSystem from_json(const nlohmann::json& j);
};

/// n modes with xi log-spaced on [xi_min, xi_max] (xi_min > 0) and a_n = -1/(2 + xi_n).
DiagonalSystem polynomial_system(std::size_t n, double xi_min = 1e-2, double xi_max = 1e4);

/// max_n P2(n) P1(n) / |z - lambda_n|. Throws PoleError when z is an eigenvalue.
double truncated_resolvent_norm(const DiagonalSystem& sys, std::complex<double> z);

/// Exact sup of the truncated resolvent norm over the slice {Im z = s, -1/M(s) < Re z < 0}.
double slice_sup(const DiagonalSystem& sys, double M_s, double s);

struct FitWindow {
    double s_max = 1e4;
    int knots_per_decade = 32;
    double s_min = 1e-2;
    /// M(s) = max(2, margin * max{-1/a_n : xi_n near s}); margin > 1 keeps eigenvalues off ∂Ω_M.
    double margin = 1.5;
};

struct FittedRates {
    RateExpr M;
    RateExpr K;
    std::vector<double> knots;
};

/// Non-decreasing piecewise-linear envelopes on the window: M from the spectral boundary
/// profile, K from slice sups of the truncated resolvent over Ω_M.
FittedRates fit_M_K(const DiagonalSystem& sys, const FitWindow& window = {});

/// n standard complex Gaussian coefficients (Box-Muller on raw mt19937_64 output, so the
/// values depend only on the seed).
std::vector<std::complex<double>> gaussian_modes(std::size_t n, unsigned long long seed);

/// ||P2 T(t) (omega - A)^{-m} P1 x||, summed with compensation.
double orbit_norm(const DiagonalSystem& sys, const std::vector<std::complex<double>>& x, double t);

/// Observations: "weighted_sup" (p = inf) or "weighted_Lp" on the full grid, the same on the
/// first half of the horizon, and "horizon_growth" (full / half). Passes when the value is
/// finite and the growth stays within 1e-6 (p = inf) or 10% (p < inf).
VerificationReport corollary_check(const DiagonalSystem& sys, const std::vector<std::complex<double>>& x,
                                   const EnvelopeSpec& spec, const std::vector<double>& t_grid);

struct WaveRateInput {
    double delta = 1.0;
    RateExpr Mtilde = RateExpr::power_shift(2.0, 1.0, 1.0);
    int m = 1;
    double C = 1.0;
    double c1 = 1.0;
};

/// C / w_{Mtilde}(c1 t)^m.
double wave_rate(const WaveRateInput& inp, double t, double tol = kDefaultInverseTol);

/// M = max(2, 1/delta), K = max(2, C exp(C Mtilde)), c1 scaled by M C so that for C = 1
/// envelope(spec, t) equals wave_rate(t) / C.
EnvelopeSpec wave_envelope_spec(const WaveRateInput& inp);

/// Observation "c_log": min of Mtilde(s) / log(2 + s) on [0, s_max].
VerificationReport check_wave_input(const WaveRateInput& inp, double s_max = 1e4);

}  // namespace tauber

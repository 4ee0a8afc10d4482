#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "tauber/rate_algebra.hpp"
#include "tauber/report.hpp"

namespace tauber {

/// Largest log-magnitude that may be exponentiated without overflow.
inline constexpr double kLogRangeLimit = 709.0;

/// Counts log-domain quantities that would leave double range when materialized.
struct RangeMonitor {
    std::size_t trips = 0;
    double max_log = -std::numeric_limits<double>::infinity();
    void note(double log_abs) {
        if (log_abs > max_log) max_log = log_abs;
        if (std::isnan(log_abs) || log_abs > kLogRangeLimit) ++trips;
    }
};

/// exp(log_abs) * unit with |unit| = 1 (unit may be 0 for an exact zero).
struct LogPolar {
    double log_abs = -std::numeric_limits<double>::infinity();
    std::complex<double> unit{0.0, 0.0};
    std::complex<double> value() const { return log_abs == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(log_abs) * unit; }
};

/// Parameters of μ = τ R^{-m} Σ_{j=0}^k q^j δ_{w + q^j/A}.
struct MeasureParams {
    int k = 1;
    double delta = 1.0;
    double beta = 2.0;
    double c1 = 1.0;
    int m = 1;
    double A = 0.0;        // δA = k l(k), l(t) = β log(e + t)
    double log_tau = 0.0;  // k log(δA) - log(k)/2
    double R = 1.0;        // largest R with c1 k = δ M_K(R)
    double gamma1 = 1.1;
    double N2delta = 1.0;  // observed sup M(s + s')/M(s) over s' <= 2δ
    double gamma = 1.1;    // gamma1 * N2delta
    double gamma0 = 1.0;   // observed sup M(s + s')/M(s) over s' <= 1

    std::complex<double> w() const { return {-delta, R}; }
    std::complex<double> q() const;
    double l() const;
    nlohmann::json to_json() const;
};

/// Throws SpecError if δ <= 1/M(0), DomainError("R undefined") if M_K stays below c1 k / δ.
MeasureParams make_params(int k, double delta, double beta, double c1, const EnvelopeSpec& spec, int m = 1);

/// Default δ: max(1, 2/M(0)).
double default_delta(const EnvelopeSpec& spec);

/// Cμ at z = w + dz. Taking the offset avoids cancellation in Im z - R when R is large.
LogPolar cauchy_transform_offset(const MeasureParams& p, std::complex<double> dz, RangeMonitor* mon = nullptr);
std::complex<double> cauchy_transform(const MeasureParams& p, std::complex<double> z, RangeMonitor* mon = nullptr);

/// Lμ(t) and L'μ(t), log-domain series for t/A <= k+1 and a shifted atom sum above.
LogPolar laplace_transform_log(const MeasureParams& p, double t, RangeMonitor* mon = nullptr);
LogPolar laplace_deriv_log(const MeasureParams& p, double t, RangeMonitor* mon = nullptr);
std::complex<double> laplace_transform(const MeasureParams& p, double t, RangeMonitor* mon = nullptr);
std::complex<double> laplace_deriv(const MeasureParams& p, double t, RangeMonitor* mon = nullptr);

/// Plain compensated atom sum for Cμ at z = w + dz, usable while τ stays in range (small k).
std::complex<double> cauchy_direct(const MeasureParams& p, std::complex<double> dz);

/// log M_K^{-1}(s); saturated when the inverse exceeds the largest double.
InverseResult log_mk_inverse(const EnvelopeSpec& spec, double s);

struct Lemma42Grid {
    int n_eta = 64;    // offsets Im z - R on each side of the band
    int n_theta = 9;   // Re z = -θ / M(|Im z|), θ in [0, 1]
    int n_t = 512;     // t samples on [0, 3A], plus densification near δt = k
    double eps = 1e-6;
};

/// Observed constants of the four inequalities. Observations:
/// "C_cauchy" (sup over the band of R^m |Cμ| / (M^{1/2} K^{γ/c1})), "eps_cauchy" (sup off band),
/// "C_deriv", "eps_deriv", "C_laplace" (sup over the band of R^m |Lμ|),
/// "eps_laplace" (sup off band of |Lμ| R^{m-1} max(R, M_K^{-1}(c1 t))), "far_laplace" (same, t >= 2A),
/// "c_lower" (R^m |Lμ(k/δ)|) and "reverse_c" (the lower constant at Im z = R on ∂Ω_M).
VerificationReport verify_lemma42(const MeasureParams& p, const EnvelopeSpec& spec, const Lemma42Grid& grid = {});

struct ExtremalFunctionSpec {
    EnvelopeSpec spec;
    double eps0 = 1e-3;
    double amplitude = 1.0;
    std::vector<MeasureParams> measures;
    std::vector<double> checkpoints;  // t_n = k_n / δ
    std::vector<std::string> diagnostics;

    double eps(std::size_t n) const;  // ε_n = 2^{-n} ε0, n counted from 1
    nlohmann::json to_json() const;
};

/// k_1 = k_start (raised until R is defined), then k_{n+1} >= 4 k_n bumped until both interval
/// families are pairwise disjoint.
ExtremalFunctionSpec build_extremal(const EnvelopeSpec& spec, double delta, double beta, double c1, double eps0,
                                    int n_max, int k_start = 20);

LogPolar eval_extremal_log(const ExtremalFunctionSpec& f, double t, double weight_log = 0.0);
std::complex<double> eval_extremal(const ExtremalFunctionSpec& f, double t);
std::complex<double> eval_extremal_deriv(const ExtremalFunctionSpec& f, double t);
/// f̂ at z = i R_n + dz (offset from the n-th band centre on the imaginary axis).
std::complex<double> eval_extremal_laplace_offset(const ExtremalFunctionSpec& f, std::size_t n, std::complex<double> dz);
std::complex<double> eval_extremal_laplace(const ExtremalFunctionSpec& f, std::complex<double> z);

/// Observations: "c_checkpoints" (min over n of M_K^{-1}(c1 t_n)|f(t_n)|) and "fhat_ratio"
/// (sup over sampled Ω_M near every band of |f̂| R_n / (M^{1/2} K^{γ/c1})).
VerificationReport verify_extremal(const ExtremalFunctionSpec& f, const Lemma42Grid& grid = {});

/// Σ_j q^j/(z - q^j) summed at 40 digits against (k+1)/(z^{k+1} - 1) for
/// k = 1..k_max, `per_k` random z per k with |z| in [1/2, 3/2] and |z^{k+1} - 1| > 1e-3.
/// Observation "max_rel_error", passing below 1e-9. Fully determined by the seed.
VerificationReport roots_of_unity_check(int k_max, int per_k, unsigned long long seed);

/// For each c1, M_K^{-1}(c1 t_n)|f(t_n)| minimized over checkpoints t_n <= horizon.
/// Rows: "lower_bound" per c1. Flags "reduced resolution" when fewer than two checkpoints fit.
VerificationReport c1_threshold_scan(const EnvelopeSpec& spec, double gamma0, const std::vector<double>& c1_list,
                                     double delta, double beta, double horizon, double amplitude = 1.0);

}  // namespace tauber

#pragma once

#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "tauber/rate_algebra.hpp"
#include "tauber/report.hpp"
#include "tauber/signal.hpp"

namespace tauber {

/// Laplace side: |f^(z)| <= K(|Im z|) on Ω_M. Fourier side: |F^(j)(s)| <= j! K(|s|) M(|s|)^j.
enum class Side { Laplace, Fourier };

/// One side of the Fourier/Laplace hypothesis pair.
///
/// C_f and C_f_prime are the constants depending on ||f^(m)||_p and on the jet of f at 0.
/// They default to NaN so a conversion that needs them refuses to run until they are set.
struct HypothesisSide {
    Side side = Side::Laplace;
    RateExpr M = RateExpr::constant(2.0);
    RateExpr K = RateExpr::constant(2.0);
    double p = std::numeric_limits<double>::infinity();
    int m = 1;
    double C_f = std::numeric_limits<double>::quiet_NaN();
    double C_f_prime = std::numeric_limits<double>::quiet_NaN();

    nlohmann::json to_json() const;
    static HypothesisSide from_json(const nlohmann::json& j);
};

/// C_f = ||f^(m)||_p on the sampled window, C'_f = sum_{j<m} |f^(j)(0)|.
/// Derivatives come from `derivative` unless the signal is already f^(m) (fm != nullptr).
void constants_from_signal(HypothesisSide& h, const SampledSignal& f, const SampledSignal* fm = nullptr);

/// M_1 = M_2/(1-eps), K_1 = K_2/eps. Throws SpecError for eps outside (0, 1) or a Laplace input.
HypothesisSide fourier_to_laplace(const HypothesisSide& h, double eps);

struct ConversionResult {
    HypothesisSide side;
    RateValidity M_validity;
    RateValidity K_validity;
    std::vector<std::string> flags;
};

/// M_2(s) = M_1(s + 1/M_1(s)),
/// K_2(s) = K_1(s + 1/M_1(s)) + C_f M_1(s + 1/M_1(s))^{2-1/p} / (1+s)^m + C'_f.
/// The composed rates are validated on [0, s_max]; failures are flagged, not thrown.
/// The C_f term decays in s, so K_2 is often not monotone. With `majorant` the factor
/// (1+s)^{-m} is replaced by 1, which gives a larger, non-decreasing K_2 when M_1 is.
ConversionResult laplace_to_fourier(const HypothesisSide& h, double s_max = 1e4, bool majorant = false);

struct EpsRow {
    double eps = 0.0;
    double s = 0.0;
    double M1 = 0.0;
    double K1 = 0.0;
};

/// fourier_to_laplace over a list of eps (default 0.1, ..., 0.9) at the given points.
std::vector<EpsRow> eps_tradeoff_table(const HypothesisSide& h, const std::vector<double>& s_points,
                                       std::vector<double> eps_list = {});

struct EquivalenceWindow {
    double s_lo = 1.0;
    double s_hi = 1e3;
    int grid_n = 193;    // log-spaced in s
    int t_grid_n = 193;  // linear in t
    double tol = 1e-10;
};

/// With (M_2, K_2) from laplace_to_fourier(spec.M, spec.K) in majorant form:
/// observation "c" is the largest c with c M_2(s) log K_2(s) <= M(2s) log K(2s) on the window;
/// observation "w_ratio" is the max of w_{M_K}(c t) / (2 w_{(M_2)_{K_2}}(t)) on t up to
/// (M_2)_{K_2}(s_hi), passing when <= 1. If c_fixed > 0 the rows use it instead of the observed c.
VerificationReport theorem_equivalence_check(const EnvelopeSpec& spec, double C_f, double C_f_prime,
                                             const EquivalenceWindow& window = {}, double c_fixed = 0.0);

}  // namespace tauber

#pragma once

#include <complex>
#include <limits>
#include <vector>

#include "tauber/rate_expr.hpp"
#include "tauber/report.hpp"

namespace tauber {

inline constexpr double kDefaultInverseTol = 1e-10;
inline constexpr double kDefaultDomainCap = 1e12;

/// Result of a monotone inversion. `saturated` means the supremum reached the domain cap.
struct InverseResult {
    double value = 0.0;
    bool saturated = false;
};

/// sup{s >= 0 : f(s) <= t} for non-decreasing f, by bisection.
///
/// Stops once the bracket is narrower than tol * max(1, s). Throws DomainError if t < f(0).
InverseResult right_inverse(const RateExpr& f, double t, double tol = kDefaultInverseTol,
                            double cap = kDefaultDomainCap);

/// 1 if t < f(1), otherwise right_inverse(f, t).
InverseResult w_of(const RateExpr& f, double t, double tol = kDefaultInverseTol,
                   double cap = kDefaultDomainCap);

enum class MkVariant { Standard, General };

/// The pair (M, K) with the envelope parameters m, p, c1.
struct EnvelopeSpec {
    RateExpr M = RateExpr::constant(2.0);
    RateExpr K = RateExpr::constant(2.0);
    int m = 1;
    double p = std::numeric_limits<double>::infinity();
    double c1 = 1.0;
    MkVariant variant = MkVariant::Standard;

    /// Throws SpecError on c1 <= 0, m < 1 or p <= 1.
    void validate() const;
    /// M_K as an expression: M log K, or M log((2+s) M K) for the general variant.
    RateExpr mk() const;
};

/// {"M": ..., "K": ..., "m": 1, "p": "inf" | number, "c1": 1, "variant": "standard" | "general"}.
nlohmann::json envelope_to_json(const EnvelopeSpec& spec);
EnvelopeSpec envelope_from_json(const nlohmann::json& j);

double mk_rate(const EnvelopeSpec& spec, double s);

/// w_{M_K}(c1 t)^{-m}.
double envelope(const EnvelopeSpec& spec, double t, double tol = kDefaultInverseTol);

/// 0 > Re z > -1/M(|Im z|).
bool omega_contains(const RateExpr& M, std::complex<double> z);

/// Observations: "cond_i_margin" (min of log K - log max(s, M)), "cond_ii_eps".
VerificationReport check_hypotheses(const EnvelopeSpec& spec, double s_max, int grid_n);

/// Observation "delta_hat": min over t of log K(w_{M_K}(t)) / log t on [M_K(1), t_max].
VerificationReport check_K_aux(const EnvelopeSpec& spec, double t_max, int grid_n,
                               double tol = kDefaultInverseTol);

struct SubmultiplicativeGrid {
    double s_max = 1e3;
    int grid_n = 97;
    double s1 = 1.0;   // window for gamma0
    double tol = 1e-12;
};

/// Observations: "worst_log_ratio" (max of log M(s+s') - log N(s') - log M(s)) and
/// "gamma0" (sup over s' <= s1 of M(s+s')/M(s)).
VerificationReport check_submultiplicative(const RateExpr& M, const RateExpr& N, double s0,
                                           const SubmultiplicativeGrid& grid = {});

/// j * L_1(j) ... L_n(j) * L_{n+1}(j)^{1+eps}, with L_k(j) the k-fold logarithm of 1+k+j
/// floored at kIteratedLogFloor.
inline constexpr double kIteratedLogFloor = 0.25;
double iterated_log_sequence(int n, double eps, long j);

}  // namespace tauber

#include "tauber/rate_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tauber/errors.hpp"
#include "tauber/grid.hpp"

namespace tauber {

namespace {

bool above(const RateExpr& f, double s, double t) {
    const auto r = f.eval(s);
    return r.saturated || r.value > t;
}

}  // namespace

InverseResult right_inverse(const RateExpr& f, double t, double tol, double cap) {
    if (!(tol > 0.0)) throw SpecError("inversion tolerance must be positive");
    const auto f0 = f.eval(0.0);
    if (f0.saturated || t < f0.value)
        throw DomainError("right_inverse: t = " + format_number(t) + " is below f(0)");
    double lo = 0.0;
    double hi = 1.0;
    while (!above(f, hi, t)) {
        lo = hi;
        if (hi >= cap) return {cap, true};
        hi = std::min(2.0 * hi, cap);
    }
    while (hi - lo > tol * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (above(f, mid, t))
            hi = mid;
        else
            lo = mid;
    }
    return {0.5 * (lo + hi), false};
}

InverseResult w_of(const RateExpr& f, double t, double tol, double cap) {
    const auto f1 = f.eval(1.0);
    if (!f1.saturated && t < f1.value) return {1.0, false};
    if (f1.saturated) return {1.0, false};
    auto r = right_inverse(f, t, tol, cap);
    r.value = std::max(r.value, 1.0);
    return r;
}

void EnvelopeSpec::validate() const {
    if (!(c1 > 0.0)) throw SpecError("c1 must be positive");
    if (m < 1) throw SpecError("derivative order m must be at least 1");
    if (!(p > 1.0)) throw SpecError("exponent p must lie in (1, inf]");
}

RateExpr EnvelopeSpec::mk() const {
    if (variant == MkVariant::Standard) return RateExpr::product({M, RateExpr::log(K)});
    const auto inner = RateExpr::product({RateExpr::power_shift(2.0, 1.0, 1.0), M, K});
    return RateExpr::product({M, RateExpr::log(inner)});
}

nlohmann::json envelope_to_json(const EnvelopeSpec& spec) {
    nlohmann::json j;
    j["M"] = spec.M.to_json();
    j["K"] = spec.K.to_json();
    j["m"] = spec.m;
    if (std::isinf(spec.p))
        j["p"] = "inf";
    else
        j["p"] = spec.p;
    j["c1"] = spec.c1;
    j["variant"] = spec.variant == MkVariant::Standard ? "standard" : "general";
    return j;
}

EnvelopeSpec envelope_from_json(const nlohmann::json& j) {
    EnvelopeSpec s;
    if (j.contains("M")) s.M = RateExpr::from_json(j.at("M"));
    if (j.contains("K")) s.K = RateExpr::from_json(j.at("K"));
    s.m = j.value("m", 1);
    if (j.contains("p")) {
        const auto& p = j.at("p");
        s.p = p.is_string() ? std::numeric_limits<double>::infinity() : p.get<double>();
        if (p.is_string() && p.get<std::string>() != "inf") throw SpecError("p must be a number or \"inf\"");
    }
    s.c1 = j.value("c1", 1.0);
    const auto v = j.value("variant", std::string("standard"));
    if (v == "standard")
        s.variant = MkVariant::Standard;
    else if (v == "general")
        s.variant = MkVariant::General;
    else
        throw SpecError("unknown M_K variant: " + v);
    s.validate();
    return s;
}

double mk_rate(const EnvelopeSpec& spec, double s) { return spec.mk().eval(s).value; }

double envelope(const EnvelopeSpec& spec, double t, double tol) {
    const auto w = w_of(spec.mk(), spec.c1 * t, tol);
    return std::pow(w.value, -static_cast<double>(spec.m));
}

bool omega_contains(const RateExpr& M, std::complex<double> z) {
    if (!(z.real() < 0.0)) return false;
    const auto r = M.eval(std::abs(z.imag()));
    if (r.saturated) return false;
    return z.real() > -1.0 / r.value;
}

VerificationReport check_hypotheses(const EnvelopeSpec& spec, double s_max, int grid_n) {
    if (!(s_max > 1.0) || grid_n < 2) throw SpecError("check_hypotheses needs s_max > 1 and grid_n >= 2");
    VerificationReport rep("hypotheses");
    const double loglog_ee = 1.0;  // log log e^e
    double worst_i = std::numeric_limits<double>::infinity();
    double worst_i_at = s_max;
    double eps = 1.0;
    double eps_at = std::numeric_limits<double>::quiet_NaN();
    bool any_ii = false;
    for (double s : logspace(1.0, s_max, static_cast<std::size_t>(grid_n))) {
        const auto lk = spec.K.log_eval(s);
        const auto mv = spec.M.eval(s);
        // (i): K >= max(s, M), compared in logs.
        const double rhs = std::log(std::max(s, mv.value));
        const double margin_i = lk.saturated ? std::numeric_limits<double>::infinity() : lk.value - rhs;
        const bool pass_i = mv.saturated ? false : margin_i >= -1e-12 * std::max(1.0, std::fabs(rhs));
        rep.add_row({"cond_i", s, lk.value, rhs, margin_i, pass_i});
        if (mv.saturated || margin_i < worst_i) {
            worst_i = mv.saturated ? -std::numeric_limits<double>::infinity() : margin_i;
            worst_i_at = s;
        }
        // (ii): log log K <= (s M)^{1-eps} where K > e^e.
        double point_eps;
        if (lk.saturated || mv.saturated) {
            point_eps = -std::numeric_limits<double>::infinity();
        } else if (lk.value > std::exp(loglog_ee)) {
            const double lsm = std::log(s * mv.value);
            point_eps = 1.0 - std::log(std::log(lk.value)) / lsm;
        } else {
            continue;
        }
        any_ii = true;
        rep.add_row({"cond_ii_eps", s, point_eps, 0.0, point_eps, point_eps > 0.0});
        if (point_eps < eps) {
            eps = point_eps;
            eps_at = s;
        }
    }
    if (!any_ii) rep.flag("cond_ii vacuous: K <= e^e on the window");
    rep.observe("cond_i_margin", worst_i, worst_i_at, worst_i >= -1e-12);
    rep.observe("cond_ii_eps", eps, eps_at, eps > 0.0);
    return rep;
}

VerificationReport check_K_aux(const EnvelopeSpec& spec, double t_max, int grid_n, double tol) {
    VerificationReport rep("K_aux");
    const RateExpr mk = spec.mk();
    const double t_lo = mk.eval(1.0).value;
    double dhat = std::numeric_limits<double>::infinity();
    double dhat_at = std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    if (t_max > t_lo && grid_n >= 2) {
        for (double t : logspace(t_lo, t_max, static_cast<std::size_t>(grid_n))) {
            const auto w = w_of(mk, t, tol);
            if (w.saturated) {
                rep.count_skipped();
                continue;
            }
            const auto lk = spec.K.log_eval(w.value);
            const double ratio = lk.saturated ? std::numeric_limits<double>::infinity()
                                              : lk.value / std::log(t);
            rep.add_row({"delta_hat", t, lk.value, std::log(t), ratio, ratio > 0.0});
            ++used;
            if (ratio < dhat) {
                dhat = ratio;
                dhat_at = t;
            }
        }
    }
    if (used == 0) {
        rep.flag("degenerate");
        rep.observe("delta_hat", std::numeric_limits<double>::infinity(), dhat_at, true);
        return rep;
    }
    rep.observe("delta_hat", dhat, dhat_at, dhat > 0.0);
    return rep;
}

VerificationReport check_submultiplicative(const RateExpr& M, const RateExpr& N, double s0,
                                           const SubmultiplicativeGrid& g) {
    if (!(s0 >= 0.0)) throw SpecError("s0 must be nonnegative");
    VerificationReport rep("submultiplicative");
    std::vector<double> ss{s0};
    const double lo = std::max(s0, 1e-2);
    if (g.s_max > lo)
        for (double s : logspace(lo, g.s_max, static_cast<std::size_t>(g.grid_n))) ss.push_back(s);
    std::vector<double> sp{0.0};
    for (double s : logspace(1e-2, std::max(g.s_max, 1e-2 * 2), static_cast<std::size_t>(g.grid_n)))
        sp.push_back(s);
    if (g.s1 > 0.0) sp.push_back(g.s1);
    std::sort(sp.begin(), sp.end());
    double worst = -std::numeric_limits<double>::infinity();
    double worst_at = s0;
    double lgamma0 = -std::numeric_limits<double>::infinity();
    double gamma_at = s0;
    for (double s : ss) {
        const auto lms = M.log_eval(s);
        for (double t : sp) {
            const auto lmst = M.log_eval(s + t);
            const auto lnt = N.log_eval(t);
            double lr;
            if (lmst.saturated)
                lr = (lnt.saturated || lms.saturated) ? std::numeric_limits<double>::quiet_NaN()
                                                      : std::numeric_limits<double>::infinity();
            else
                lr = lmst.value - lnt.value - lms.value;
            if (std::isnan(lr)) {
                rep.count_skipped();
                continue;
            }
            if (lr > worst) {
                worst = lr;
                worst_at = s;
            }
            if (t <= g.s1 && !lmst.saturated && !lms.saturated) {
                const double lg = lmst.value - lms.value;
                if (lg > lgamma0) {
                    lgamma0 = lg;
                    gamma_at = s;
                }
            }
        }
    }
    rep.observe("worst_log_ratio", worst, worst_at, worst <= g.tol);
    rep.observe("worst_ratio", std::exp(worst), worst_at, worst <= g.tol);
    rep.observe("gamma0", std::exp(lgamma0), gamma_at, std::isfinite(lgamma0));
    return rep;
}

double iterated_log_sequence(int n, double eps, long j) {
    if (n < 1 || !(eps > 0.0 && eps < 1.0) || j < 0) throw SpecError("iterated_log_sequence: need n >= 1, eps in (0,1), j >= 0");
    if (j == 0) return 0.0;
    auto L = [j](int k) {
        double v = static_cast<double>(1 + k + j);
        for (int i = 0; i < k; ++i) {
            if (!(v > 0.0)) return kIteratedLogFloor;
            v = std::log(v);
        }
        return std::max(v, kIteratedLogFloor);
    };
    double out = static_cast<double>(j);
    for (int k = 1; k <= n; ++k) out *= L(k);
    return out * std::pow(L(n + 1), 1.0 + eps);
}

}  // namespace tauber

#include "tauber/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "tauber/errors.hpp"
#include "tauber/grid.hpp"

namespace tauber {

namespace {

using cd = std::complex<double>;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kSeriesTol = 1e-16;
constexpr double kLemniscateBand = 1e-6;
constexpr double kLogMaxDouble = 709.78;

// e^{i t R} with t R split exactly into p + e, so the phase is right even for huge products.
cd expi_product(double t, double R) {
    const double p = t * R;
    const double e = std::fma(t, R, -p);
    return std::polar(1.0, p) * std::polar(1.0, e);
}

// e^z - 1 without cancellation near z = 0 (mod 2πi).
cd expm1c(cd z) {
    const double a = z.real(), b = z.imag();
    const double s = std::sin(0.5 * b);
    return {std::expm1(a) * std::cos(b) - 2.0 * s * s, std::exp(a) * std::sin(b)};
}

cd root(int j, int k) { return std::polar(1.0, 2.0 * std::numbers::pi * j / (k + 1)); }

// Neumaier compensated sum of complex terms.
struct CompensatedSum {
    double re = 0.0, im = 0.0, cre = 0.0, cim = 0.0;
    static void add(double& s, double& c, double x) {
        const double t = s + x;
        c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
        s = t;
    }
    void add(cd x) {
        add(re, cre, x.real());
        add(im, cim, x.imag());
    }
    cd value() const { return {re + cre, im + cim}; }
};

LogPolar make_log(double log_abs, cd unit_like) {
    const double a = std::abs(unit_like);
    if (a == 0.0) return {};
    return {log_abs + std::log(a), unit_like / a};
}

// Sum of log-polar terms, rescaled by the largest magnitude.
LogPolar log_sum(const std::vector<LogPolar>& xs) {
    double top = kNegInf;
    for (const auto& x : xs) top = std::max(top, x.log_abs);
    if (top == kNegInf) return {};
    cd s = 0.0;
    for (const auto& x : xs)
        if (x.log_abs != kNegInf) s += std::exp(x.log_abs - top) * x.unit;
    return make_log(top, s);
}

double log_prefactor(const MeasureParams& p) { return p.log_tau - p.m * std::log(p.R); }

void note(RangeMonitor* mon, double v) {
    if (mon) mon->note(v);
}

// (k+1) t^k / (A^k k!) in logs, times e^{-δt}, τ R^{-m}.
double log_series_head(const MeasureParams& p, double t) {
    const int k = p.k;
    return log_prefactor(p) - p.delta * t + std::log(k + 1.0) + k * std::log(t) - k * std::log(p.A) -
           std::lgamma(k + 1.0);
}

// Terms T_n = k!/(n(k+1)-1)! u^{(n-1)(k+1)}, n >= 1, until they drop below kSeriesTol relative.
template <class F>
void series_terms(int k, double u, F&& visit) {
    const double kp = k + 1.0;
    double log_term = 0.0;
    double sum = 0.0;
    for (int n = 1; n < 100000; ++n) {
        const double term = std::exp(log_term);
        visit(n, term);
        sum += term;
        if (term < kSeriesTol * sum) break;
        log_term += kp * std::log(u) - (std::lgamma((n + 1) * kp) - std::lgamma(n * kp));
        if (log_term == kNegInf) break;
    }
}

}  // namespace

cd MeasureParams::q() const { return root(1, k); }

double MeasureParams::l() const { return beta * std::log(std::numbers::e + k); }

nlohmann::json MeasureParams::to_json() const {
    return {{"k", k},          {"delta", delta},       {"beta", beta},         {"c1", c1},
            {"m", m},          {"A", A},               {"log_tau", log_tau},   {"R", R},
            {"w_re", -delta},  {"w_im", R},            {"gamma1", gamma1},     {"N2delta", N2delta},
            {"gamma", gamma},  {"gamma0", gamma0},     {"l_k", l()}};
}

double default_delta(const EnvelopeSpec& spec) { return std::max(1.0, 2.0 / spec.M(0.0)); }

MeasureParams make_params(int k, double delta, double beta, double c1, const EnvelopeSpec& spec, int m) {
    spec.validate();
    if (k < 1) throw SpecError("make_params: k must be >= 1");
    if (!(beta >= 1.0)) throw SpecError("make_params: beta must be >= 1");
    if (!(c1 > 0.0)) throw SpecError("make_params: c1 must be positive");
    if (m < 1) throw SpecError("make_params: m must be >= 1");
    const double M0 = spec.M(0.0);
    if (!(delta > 1.0 / M0)) throw SpecError("make_params: delta must exceed 1/M(0) = " + format_number(1.0 / M0));

    MeasureParams p;
    p.k = k;
    p.delta = delta;
    p.beta = beta;
    p.c1 = c1;
    p.m = m;
    const double dA = k * p.l();
    p.A = dA / delta;
    p.log_tau = k * std::log(dA) - 0.5 * std::log(static_cast<double>(k));

    const auto mk = spec.mk();
    const double target = c1 * k / delta;
    const auto f0 = mk.eval(0.0);
    if (f0.saturated || target < f0.value)
        throw DomainError("R undefined: c1 k / delta = " + format_number(target) + " is below M_K(0)");
    const auto r = right_inverse(mk, target, 1e-15, 1e300);
    if (r.saturated) throw DomainError("R undefined: M_K stays below c1 k / delta = " + format_number(target));
    p.R = r.value;

    const double x = 1.0 / (delta * M0);
    p.gamma1 = std::max(1.1, -std::log1p(-x) / x);
    SubmultiplicativeGrid g;
    g.s1 = 2.0 * delta;
    p.N2delta = check_submultiplicative(spec.M, spec.M, 0.0, g).value("gamma0");
    g.s1 = 1.0;
    p.gamma0 = check_submultiplicative(spec.M, spec.M, 0.0, g).value("gamma0");
    p.gamma = p.gamma1 * p.N2delta;
    return p;
}

cd cauchy_direct(const MeasureParams& p, cd dz) {
    CompensatedSum s;
    for (int j = 0; j <= p.k; ++j) {
        const cd qj = root(j, p.k);
        const cd d = dz - qj / p.A;
        if (d == 0.0) throw PoleError("cauchy_transform: z is an atom of the measure");
        s.add(qj / d);
    }
    return std::exp(log_prefactor(p)) * s.value();
}

LogPolar cauchy_transform_offset(const MeasureParams& p, cd dz, RangeMonitor* mon) {
    const int k = p.k;
    const cd zeta = p.A * dz;
    LogPolar out;
    if (zeta == 0.0) {
        out = {log_prefactor(p) + std::log(k + 1.0) + std::log(p.A), cd(-1.0, 0.0)};
        note(mon, out.log_abs);
        return out;
    }
    const double a = (k + 1.0) * std::log(std::abs(zeta));
    const double b = (k + 1.0) * std::arg(zeta);
    if (std::abs(a) <= kLemniscateBand) {
        // Near |ζ|^{k+1} = 1 the closed form loses digits; sum the atoms instead.
        CompensatedSum s;
        for (int j = 0; j <= k; ++j) {
            const cd qj = root(j, k);
            const cd d = dz - qj / p.A;
            if (d == 0.0) throw PoleError("cauchy_transform: z is an atom of the measure");
            s.add(qj / d);
        }
        out = make_log(log_prefactor(p), s.value());
        note(mon, out.log_abs);
        return out;
    }
    double log_den;
    cd den_unit;
    if (a < 0.0) {
        const cd d = expm1c({a, b});
        if (d == 0.0) throw PoleError("cauchy_transform: z is an atom of the measure");
        log_den = std::log(std::abs(d));
        den_unit = d / std::abs(d);
    } else {
        const cd d = -expm1c({-a, -b});
        log_den = a + std::log(std::abs(d));
        den_unit = std::polar(1.0, b) * d / std::abs(d);
    }
    out = {log_prefactor(p) + std::log(k + 1.0) + std::log(p.A) - log_den, std::conj(den_unit)};
    note(mon, out.log_abs);
    return out;
}

cd cauchy_transform(const MeasureParams& p, cd z, RangeMonitor* mon) {
    return cauchy_transform_offset(p, z - p.w(), mon).value();
}

LogPolar laplace_transform_log(const MeasureParams& p, double t, RangeMonitor* mon) {
    if (t < 0.0) throw DomainError("laplace_transform: t must be nonnegative");
    if (t == 0.0) return {};  // Σ q^j = 0
    const double u = t / p.A;
    LogPolar out;
    if (u <= p.k + 1.0) {
        double II = 0.0;
        series_terms(p.k, u, [&](int, double term) { II += term; });
        out = {log_series_head(p, t) + std::log(II), expi_product(t, p.R)};
    } else {
        // e^{u} Σ q^j e^{u(q^j - 1)}: no term exceeds 1 after the shift.
        CompensatedSum s;
        for (int j = 0; j <= p.k; ++j) {
            const cd qj = root(j, p.k);
            s.add(qj * std::exp(u * (qj - 1.0)));
        }
        out = make_log(log_prefactor(p) - p.delta * t + u, expi_product(t, p.R) * s.value());
    }
    note(mon, out.log_abs);
    return out;
}

LogPolar laplace_deriv_log(const MeasureParams& p, double t, RangeMonitor* mon) {
    if (t < 0.0) throw DomainError("laplace_deriv: t must be nonnegative");
    LogPolar out;
    if (t == 0.0) {
        // Σ q^j (w + q^j/A) = (k+1)/A when k = 1, else 0.
        if (p.k == 1) out = {log_prefactor(p) + std::log(2.0 / p.A), cd(1.0, 0.0)};
        note(mon, out.log_abs);
        return out;
    }
    const double u = t / p.A;
    const double kp = p.k + 1.0;
    if (u <= p.k + 1.0) {
        double II = 0.0, IIc = 0.0;
        series_terms(p.k, u, [&](int n, double term) {
            II += term;
            IIc += term * (n * kp - 1.0);
        });
        const cd inner = p.w() * II + IIc / t;
        out = make_log(log_series_head(p, t), expi_product(t, p.R) * inner);
    } else {
        CompensatedSum s;
        for (int j = 0; j <= p.k; ++j) {
            const cd qj = root(j, p.k);
            s.add(qj * (p.w() + qj / p.A) * std::exp(u * (qj - 1.0)));
        }
        out = make_log(log_prefactor(p) - p.delta * t + u, expi_product(t, p.R) * s.value());
    }
    note(mon, out.log_abs);
    return out;
}

cd laplace_transform(const MeasureParams& p, double t, RangeMonitor* mon) {
    return laplace_transform_log(p, t, mon).value();
}

cd laplace_deriv(const MeasureParams& p, double t, RangeMonitor* mon) { return laplace_deriv_log(p, t, mon).value(); }

InverseResult log_mk_inverse(const EnvelopeSpec& spec, double s) {
    const auto mk = spec.mk();
    const auto f0 = mk.eval(0.0);
    if (f0.saturated || s < f0.value) return {kNegInf, false};
    const auto f1 = mk.eval(1.0);
    if (f1.saturated || f1.value > s) return {std::log(right_inverse(mk, s, 1e-15, 1.0).value), false};
    auto above = [&](double y) {
        const auto v = mk.eval(std::exp(y));
        return v.saturated || v.value > s;
    };
    double lo = 0.0, hi = 1.0;
    while (!above(hi)) {
        lo = hi;
        if (hi >= kLogMaxDouble) return {kLogMaxDouble, true};
        hi = std::min(2.0 * hi, kLogMaxDouble);
    }
    while (hi - lo > 1e-14 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (above(mid) ? hi : lo) = mid;
    }
    return {0.5 * (lo + hi), false};
}

VerificationReport verify_lemma42(const MeasureParams& p, const EnvelopeSpec& spec, const Lemma42Grid& grid) {
    VerificationReport rep("lemma42_k" + std::to_string(p.k));
    RangeMonitor mon;
    const double d = p.delta, R = p.R, logR = std::log(R);
    const double expo = p.gamma / p.c1;
    if (!(d - 1.0 / p.A > 0.0)) rep.flag("delta - 1/A <= 0");

    // Cauchy bound: Cμ on Ω_M, Re z = -θ / M(|Im z|), Im z = R + η.
    std::vector<double> band = linspace(-2.0 * d, 2.0 * d, static_cast<std::size_t>(2 * grid.n_eta + 1));
    std::vector<double> off;
    if (R > 1.0) {
        for (double e : logspace(1e-3, R, static_cast<std::size_t>(grid.n_eta))) off.push_back(2.0 * d + e);
    }
    off.insert(off.begin(), 2.0 * d);
    const auto thetas = linspace(0.0, 1.0, static_cast<std::size_t>(std::max(grid.n_theta, 2)));

    double C41 = 0.0, C41_at = std::nan(""), eps41 = 0.0, eps41_at = std::nan("");
    auto eval_c = [&](double eta, double theta) {
        const double s = std::abs(R + eta);
        const double Ms = spec.M(s);
        return std::pair{cauchy_transform_offset(p, cd(d - theta / Ms, eta), &mon), s};
    };
    for (double eta : band)
        for (double th : thetas) {
            const auto [c, s] = eval_c(eta, th);
            const double lr = c.log_abs + p.m * logR - 0.5 * std::log(spec.M(s)) - expo * spec.K.log_eval(s).value;
            const double r = std::exp(lr);
            if (r > C41) C41 = r, C41_at = eta;
        }
    for (double e : off)
        for (double sign : {1.0, -1.0}) {
            const double eta = sign * e;
            if (R + eta < 0.0) continue;
            for (double th : thetas) {
                const auto [c, s] = eval_c(eta, th);
                (void)s;
                const double v = std::exp(c.log_abs);
                if (v > eps41) eps41 = v, eps41_at = eta;
            }
        }
    rep.observe("C_cauchy", C41, C41_at, std::isfinite(C41));
    rep.observe("eps_cauchy", eps41, eps41_at, std::isfinite(eps41));
    {
        const auto c = cauchy_transform_offset(p, cd(d - 1.0 / spec.M(R), 0.0), &mon);
        const double lr = c.log_abs + p.m * logR - 0.5 * std::log(spec.M(R)) - spec.K.log_eval(R).value / p.c1;
        const double v = std::exp(lr);
        rep.observe("reverse_c", v, 0.0, std::isfinite(v) && v > 0.0);
    }

    // Laplace and derivative bounds on t in [0, 3A], densified over the band [k/2δ, 2k/δ].
    const double lo = p.k / (2.0 * d), hi = 2.0 * p.k / d;
    std::vector<double> ts = linspace(0.0, 3.0 * p.A, static_cast<std::size_t>(grid.n_t) + 1);
    for (double t : linspace(lo, hi, static_cast<std::size_t>(grid.n_t) + 1)) ts.push_back(t);
    ts.push_back(p.k / d);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

    double C42 = 0.0, C42_at = std::nan(""), eps42 = 0.0, eps42_at = std::nan("");
    double C43 = 0.0, C43_at = std::nan(""), eps43 = 0.0, eps43_at = std::nan("");
    double far = 0.0, far_at = std::nan("");
    std::size_t saturated = 0;
    for (double t : ts) {
        const bool in = t >= lo && t <= hi;
        const bool edge = t == lo || t == hi;
        const auto Ld = laplace_deriv_log(p, t, &mon);
        const double vd = std::exp(Ld.log_abs + (p.m - 1) * logR);
        if (in && vd > C42) C42 = vd, C42_at = t;
        if ((!in || edge) && vd > eps42) eps42 = vd, eps42_at = t;

        const auto L = laplace_transform_log(p, t, &mon);
        if (in) {
            const double v = std::exp(L.log_abs + p.m * logR);
            if (v > C43) C43 = v, C43_at = t;
        }
        if (!in || edge) {
            const auto inv = log_mk_inverse(spec, p.c1 * t);
            if (inv.saturated) {
                ++saturated;
                rep.count_skipped();
                continue;
            }
            const double v = std::exp(L.log_abs + (p.m - 1) * logR + std::max(logR, inv.value));
            if (v > eps43) eps43 = v, eps43_at = t;
            if (t >= 2.0 * p.A && v > far) far = v, far_at = t;
        }
    }
    if (saturated > 0) rep.flag("M_K inverse beyond double range at some t; skipped");
    rep.observe("C_deriv", C42, C42_at, std::isfinite(C42));
    rep.observe("eps_deriv", eps42, eps42_at, std::isfinite(eps42));
    rep.observe("C_laplace", C43, C43_at, std::isfinite(C43));
    rep.observe("eps_laplace", eps43, eps43_at, std::isfinite(eps43));
    rep.observe("far_laplace", far, far_at, far < grid.eps);

    // lower bound at t = k/δ
    const double c44 = std::exp(laplace_transform_log(p, p.k / d, &mon).log_abs + p.m * logR);
    rep.observe("c_lower", c44, p.k / d, std::isfinite(c44) && c44 > 0.0);
    rep.observe("monitor_trips", static_cast<double>(mon.trips), mon.max_log, mon.trips == 0);
    return rep;
}

double ExtremalFunctionSpec::eps(std::size_t n) const { return std::ldexp(eps0, -static_cast<int>(n)); }

nlohmann::json ExtremalFunctionSpec::to_json() const {
    nlohmann::json ms = nlohmann::json::array();
    for (const auto& p : measures) ms.push_back(p.to_json());
    return {{"spec", envelope_to_json(spec)}, {"eps0", eps0},           {"amplitude", amplitude},
            {"measures", ms},                 {"checkpoints", checkpoints}, {"diagnostics", diagnostics}};
}

ExtremalFunctionSpec build_extremal(const EnvelopeSpec& spec, double delta, double beta, double c1, double eps0,
                                    int n_max, int k_start) {
    if (n_max < 1) throw SpecError("build_extremal: n_max must be >= 1");
    if (!(eps0 > 0.0)) throw SpecError("build_extremal: eps0 must be positive");
    ExtremalFunctionSpec f;
    f.spec = spec;
    f.spec.c1 = c1;
    f.eps0 = eps0;

    auto disjoint = [&](const MeasureParams& p) {
        for (const auto& q : f.measures) {
            const bool r_ok = p.R - 2.0 * delta > q.R + 2.0 * delta || q.R - 2.0 * delta > p.R + 2.0 * delta;
            const double plo = p.k / (2.0 * delta), phi = 2.0 * p.k / delta;
            const double qlo = q.k / (2.0 * delta), qhi = 2.0 * q.k / delta;
            if (!r_ok || !(plo > qhi || qlo > phi)) return false;
        }
        return true;
    };

    long k = std::max(1, k_start);
    for (int n = 0; n < n_max; ++n) {
        if (n > 0) k = 4L * f.measures.back().k;
        bool placed = false;
        for (int bump = 0; bump < 100000 && k < std::numeric_limits<int>::max(); ++bump, ++k) {
            MeasureParams p;
            try {
                p = make_params(static_cast<int>(k), delta, beta, c1, f.spec, spec.m);
            } catch (const DomainError& e) {
                const std::string msg = e.what();
                if (msg.find("below M_K(0)") != std::string::npos) continue;
                f.diagnostics.push_back("stopped at n = " + std::to_string(n + 1) + ": " + msg);
                return f;
            }
            if (!disjoint(p)) continue;
            f.measures.push_back(p);
            f.checkpoints.push_back(p.k / delta);
            placed = true;
            break;
        }
        if (!placed) {
            f.diagnostics.push_back("no disjoint k found for n = " + std::to_string(n + 1));
            break;
        }
    }
    return f;
}

LogPolar eval_extremal_log(const ExtremalFunctionSpec& f, double t, double weight_log) {
    std::vector<LogPolar> xs;
    for (const auto& p : f.measures) xs.push_back(laplace_transform_log(p, t));
    auto s = log_sum(xs);
    if (s.log_abs == kNegInf || f.amplitude == 0.0) return {};
    s.log_abs += weight_log + std::log(std::abs(f.amplitude));
    if (f.amplitude < 0.0) s.unit = -s.unit;
    return s;
}

cd eval_extremal(const ExtremalFunctionSpec& f, double t) { return eval_extremal_log(f, t).value(); }

cd eval_extremal_deriv(const ExtremalFunctionSpec& f, double t) {
    std::vector<LogPolar> xs;
    for (const auto& p : f.measures) xs.push_back(laplace_deriv_log(p, t));
    return f.amplitude * log_sum(xs).value();
}

namespace {

LogPolar extremal_laplace_offset_log(const ExtremalFunctionSpec& f, std::size_t n, cd dz) {
    std::vector<LogPolar> xs;
    // The own band keeps the exact offset; other bands see the absolute Im z = R_n + Im dz.
    const double im = f.measures.at(n).R + dz.imag();
    for (std::size_t j = 0; j < f.measures.size(); ++j) {
        const auto& p = f.measures[j];
        const double off = j == n ? dz.imag() : im - p.R;
        xs.push_back(cauchy_transform_offset(p, cd(dz.real() + p.delta, off)));
    }
    auto s = log_sum(xs);
    if (s.log_abs == kNegInf || f.amplitude == 0.0) return {};
    s.log_abs += std::log(std::abs(f.amplitude));
    if (f.amplitude < 0.0) s.unit = -s.unit;
    return s;
}

}  // namespace

cd eval_extremal_laplace_offset(const ExtremalFunctionSpec& f, std::size_t n, cd dz) {
    return extremal_laplace_offset_log(f, n, dz).value();
}

cd eval_extremal_laplace(const ExtremalFunctionSpec& f, cd z) {
    std::vector<LogPolar> xs;
    for (const auto& p : f.measures) xs.push_back(cauchy_transform_offset(p, z - p.w()));
    return f.amplitude * log_sum(xs).value();
}

VerificationReport verify_extremal(const ExtremalFunctionSpec& f, const Lemma42Grid& grid) {
    VerificationReport rep("extremal");
    if (f.measures.empty()) {
        rep.flag("empty extremal spec");
        rep.observe("c_checkpoints", 0.0, std::nan(""), false);
        return rep;
    }
    for (const auto& d : f.diagnostics) rep.flag(d);
    const auto& spec = f.spec;
    const double eps_sum_total = f.eps0;

    double cmin = std::numeric_limits<double>::infinity(), cmin_at = std::nan("");
    double margin = std::numeric_limits<double>::infinity(), margin_at = std::nan("");
    for (std::size_t n = 0; n < f.measures.size(); ++n) {
        const auto& p = f.measures[n];
        const double t = f.checkpoints[n];
        const auto inv = log_mk_inverse(spec, spec.c1 * t);
        const double wlog = inv.saturated ? std::log(p.R) : inv.value;
        if (inv.saturated) rep.flag("M_K inverse saturated at a checkpoint; used R_n");
        const double v = std::exp(eval_extremal_log(f, t, wlog).log_abs);
        rep.add_row({"checkpoint", t, v, 0.0, v, v > 0.0});
        if (v < cmin) cmin = v, cmin_at = t;
        // |f(t_n)| R_n >= c_n - ε0 Σ_{j≠n} 2^{-j}, with c_n = R_n |Lμ_n(t_n)|.
        const double cn = std::abs(f.amplitude) * std::exp(laplace_transform_log(p, t).log_abs + std::log(p.R));
        const double lhs = std::exp(eval_extremal_log(f, t, std::log(p.R)).log_abs);
        const double rhs = cn - std::abs(f.amplitude) * (eps_sum_total - f.eps(n + 1));
        rep.add_row({"proof_bound", t, lhs, rhs, lhs - rhs, lhs >= rhs});
        if (lhs - rhs < margin) margin = lhs - rhs, margin_at = t;
    }
    rep.observe("c_checkpoints", cmin, cmin_at, std::isfinite(cmin) && cmin > 0.0);
    rep.observe("proof_bound_margin", margin, margin_at, margin >= 0.0);

    // |f̂| R_nearest / (M^{1/2} K^{γ/c1}) near every band and between them.
    double gamma = 0.0;
    for (const auto& p : f.measures) gamma = std::max(gamma, p.gamma);
    const double expo = gamma / spec.c1;
    const auto thetas = linspace(0.0, 1.0, static_cast<std::size_t>(std::max(grid.n_theta, 2)));
    double worst = 0.0, worst_at = std::nan("");
    for (std::size_t n = 0; n < f.measures.size(); ++n) {
        const auto& p = f.measures[n];
        std::vector<double> etas = linspace(-2.0 * p.delta, 2.0 * p.delta, static_cast<std::size_t>(2 * grid.n_eta + 1));
        if (p.R > 1.0)
            for (double e : logspace(1e-3, p.R, static_cast<std::size_t>(grid.n_eta))) {
                etas.push_back(2.0 * p.delta + e);
                etas.push_back(-2.0 * p.delta - e);
            }
        for (double eta : etas) {
            if (p.R + eta < 0.0) continue;
            const double s = p.R + eta;
            std::size_t near = 0;
            for (std::size_t j = 1; j < f.measures.size(); ++j)
                if (std::abs(s - f.measures[j].R) < std::abs(s - f.measures[near].R)) near = j;
            const double Ms = spec.M(s), lK = spec.K.log_eval(s).value;
            for (double th : thetas) {
                const auto v = extremal_laplace_offset_log(f, n, cd(-th / Ms, eta));
                const double lr = v.log_abs + std::log(f.measures[near].R) - 0.5 * std::log(Ms) - expo * lK;
                const double r = std::exp(lr);
                if (r > worst) worst = r, worst_at = s;
            }
        }
    }
    rep.observe("fhat_ratio", worst, worst_at, std::isfinite(worst));
    return rep;
}

VerificationReport roots_of_unity_check(int k_max, int per_k, unsigned long long seed) {
    // Outside the unit disc the atom sum is about (k+1)|z|^{-(k+1)} while its terms are O(1),
    // so it is summed with 40 significant digits.
    using hp = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<40>>;
    std::mt19937_64 rng(seed);
    // 53-bit uniform in [0, 1), independent of the library's distribution implementation
    auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    VerificationReport rep("roots_of_unity");
    double worst = 0.0, worst_k = 1.0;
    const hp two_pi = 2 * boost::math::constants::pi<hp>();
    for (int k = 1; k <= k_max; ++k) {
        std::vector<hp> qr(k + 1), qi(k + 1);
        for (int j = 0; j <= k; ++j) {
            const hp ang = two_pi * j / (k + 1);
            qr[j] = cos(ang);
            qi[j] = sin(ang);
        }
        double k_worst = 0.0;
        for (int i = 0; i < per_k;) {
            const cd z = std::polar(0.5 + uniform(), 2.0 * std::numbers::pi * uniform());
            const cd den = std::pow(z, k + 1) - 1.0;
            if (std::abs(den) <= 1e-3) continue;
            ++i;
            hp sr = 0, si = 0;
            for (int j = 0; j <= k; ++j) {
                const hp dr = hp(z.real()) - qr[j], di = hp(z.imag()) - qi[j];
                const hp d2 = dr * dr + di * di;
                sr += (qr[j] * dr + qi[j] * di) / d2;
                si += (qi[j] * dr - qr[j] * di) / d2;
            }
            const cd direct(static_cast<double>(sr), static_cast<double>(si));
            const cd closed = (k + 1.0) / den;
            k_worst = std::max(k_worst, std::abs(direct - closed) / std::abs(closed));
        }
        rep.add_row({"max_rel_error", static_cast<double>(k), k_worst, 1e-9, 1e-9 - k_worst, k_worst < 1e-9});
        if (k_worst > worst) worst = k_worst, worst_k = k;
    }
    rep.observe("max_rel_error", worst, worst_k, worst < 1e-9);
    return rep;
}

VerificationReport c1_threshold_scan(const EnvelopeSpec& spec, double gamma0, const std::vector<double>& c1_list,
                                     double delta, double beta, double horizon, double amplitude) {
    VerificationReport rep("c1_threshold");
    double above = std::numeric_limits<double>::infinity(), above_at = std::nan("");
    for (double c1 : c1_list) {
        auto f = build_extremal(spec, delta, beta, c1, 1e-3, 4);
        f.amplitude = amplitude;
        double lower = std::numeric_limits<double>::infinity();
        std::size_t used = 0;
        for (std::size_t n = 0; n < f.measures.size(); ++n) {
            const double t = f.checkpoints[n];
            if (t > horizon) continue;
            const auto inv = log_mk_inverse(f.spec, c1 * t);
            const double wlog = inv.saturated ? std::log(f.measures[n].R) : inv.value;
            lower = std::min(lower, std::exp(eval_extremal_log(f, t, wlog).log_abs));
            ++used;
        }
        if (used < 2) rep.flag("reduced resolution at c1 = " + format_number(c1));
        if (used == 0) lower = 0.0;
        rep.add_row({"lower_bound", c1, lower, gamma0, c1 - gamma0, lower > 0.0});
        if (c1 > gamma0 && lower < above) above = lower, above_at = c1;
    }
    if (std::isinf(above)) {
        rep.flag("no c1 above gamma0 in the list");
        rep.observe("lower_bound_above_gamma0", std::nan(""), std::nan(""), true);
    } else {
        rep.observe("lower_bound_above_gamma0", above, above_at, above > 0.0);
    }
    return rep;
}

}  // namespace tauber

#include "tauber/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tauber/errors.hpp"

namespace tauber {

namespace {

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// ∫ P_y over [a, b] as a difference of arctangents, stable when both ends share a sign.
double poisson_cell(double a, double b, double y) {
    if (a >= 0.0 || b <= 0.0) {
        const double u = a / y, v = b / y;
        return std::atan((v - u) / (1.0 + u * v)) / std::numbers::pi;
    }
    return (std::atan(b / y) - std::atan(a / y)) / std::numbers::pi;
}

// Smooth cutoff: 1 on (-inf, 0], 0 on [1, inf), all derivatives vanish at both ends.
double cutoff(double u) {
    if (u <= 0.0) return 1.0;
    if (u >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / u), b = std::exp(-1.0 / (1.0 - u));
    return b / (a + b);
}

// φ^{*j} for j = 0..m on φ's own grid, each cropped back to φ's window (j = 0 unused).
std::vector<SampledSignal> phi_powers(const SampledSignal& phi, int m) {
    std::vector<SampledSignal> out(static_cast<std::size_t>(m) + 1);
    if (m >= 1) out[1] = phi;
    const auto re = phi.real_parts();
    const std::size_t n = phi.size();
    for (int j = 2; j <= m; ++j) {
        const auto prev = out[static_cast<std::size_t>(j) - 1].real_parts();
        const auto full = convolve(std::span<const double>(prev), std::span<const double>(re), phi.dt);
        // full[k] lives at 2 t0 + k dt; φ's window starts at t0, so offset (-t0)/dt samples.
        const auto off = static_cast<std::ptrdiff_t>(std::llround(-phi.t0 / phi.dt));
        SampledSignal s = phi;
        for (std::size_t i = 0; i < n; ++i) {
            const auto k = static_cast<std::ptrdiff_t>(i) + off;
            s.values[i] = (k >= 0 && k < static_cast<std::ptrdiff_t>(full.size())) ? full[static_cast<std::size_t>(k)] : 0.0;
        }
        out[static_cast<std::size_t>(j)] = std::move(s);
    }
    return out;
}

}  // namespace

std::vector<double> kernel_samples(const SampledSignal& phi, double R, double h, double* dropped) {
    if (!(R > 0.0) || !(h > 0.0)) throw DomainError("kernel_samples: R and h must be positive");
    const double half = std::min(-phi.t0, phi.t_end()) / R;
    const auto L = static_cast<std::size_t>(std::floor(half / h));
    std::vector<double> k(2 * L + 1);
    double peak = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double tau = (static_cast<double>(i) - static_cast<double>(L)) * h;
        k[i] = R * phi.at_cubic(R * tau).real();
        peak = std::max(peak, std::abs(k[i]));
    }
    std::size_t keep = 0;
    for (std::size_t i = 0; i <= L; ++i)
        if (std::abs(k[L - i]) >= kKernelCutoff * peak || std::abs(k[L + i]) >= kKernelCutoff * peak) keep = i;
    double lost = 0.0;
    for (std::size_t i = keep + 1; i <= L; ++i) lost += (std::abs(k[L - i]) + std::abs(k[L + i])) * h;
    if (dropped) *dropped = lost;
    return {k.begin() + static_cast<std::ptrdiff_t>(L - keep), k.begin() + static_cast<std::ptrdiff_t>(L + keep + 1)};
}

DecompResult decompose(const SampledSignal& f, const SampledSignal& phi, double R, int m, ConvMethod method) {
    if (m < 1) throw DomainError("decompose: m must be >= 1");
    const double h = f.dt;
    DecompResult out;
    out.m = m;
    out.R = R;
    const auto kernel = kernel_samples(phi, R, h, &out.dropped_kernel_mass);
    const std::size_t L = kernel.size() / 2;
    out.kernel_half_width = static_cast<double>(L) * h;

    const std::size_t n = f.size(), pad = static_cast<std::size_t>(m) * L;
    std::vector<cplx> g(n + 2 * pad, 0.0);
    std::copy(f.values.begin(), f.values.end(), g.begin() + static_cast<std::ptrdiff_t>(pad));

    std::vector<cplx> j1(g), j2(g.size(), 0.0);
    for (int j = 1; j <= m; ++j) {
        g = convolve_same(g, kernel, h, method);
        const double c = binomial(m, j) * ((j % 2) ? -1.0 : 1.0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            j1[i] += c * g[i];
            j2[i] -= c * g[i];
        }
    }
    out.J1 = f;
    out.J2 = f;
    for (std::size_t i = 0; i < n; ++i) {
        out.J1.values[i] = j1[pad + i];
        out.J2.values[i] = j2[pad + i];
    }
    out.J1.zero_jet = out.J2.zero_jet = false;
    out.R_schedule.assign(n, R);
    out.valid_end = f.t_end() - static_cast<double>(pad) * h;
    return out;
}

SampledSignal derivative(const SampledSignal& f, int m) {
    SampledSignal d = f;
    const std::size_t n = f.size();
    if (n < 3) throw DomainError("derivative: need at least 3 samples");
    for (int k = 0; k < m; ++k) {
        std::vector<cplx> v(n);
        const auto& u = d.values;
        v[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * f.dt);
        v[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * f.dt);
        for (std::size_t i = 1; i + 1 < n; ++i) v[i] = (u[i + 1] - u[i - 1]) / (2.0 * f.dt);
        d.values = std::move(v);
    }
    d.derivative_order = std::max(0, f.derivative_order - m);
    return d;
}

SampledSignal subtract_jet(const SampledSignal& f, const std::vector<cplx>& jet, double t1) {
    if (!(t1 > 0.0)) throw DomainError("subtract_jet: t1 must be positive");
    SampledSignal out = f;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double t = f.t(i);
        if (t < 0.0 || t >= t1) continue;
        cplx poly = 0.0;
        double term = 1.0;
        for (std::size_t k = 0; k < jet.size(); ++k) {
            poly += jet[k] * term;
            term *= t / static_cast<double>(k + 1);
        }
        out.values[i] -= poly * cutoff(t / t1);
    }
    out.zero_jet = true;
    return out;
}

SampledSignal poisson_convolve(const SampledSignal& g, double y) {
    if (!(y > 0.0)) throw DomainError("poisson_convolve: y must be positive");
    const std::size_t n = g.size();
    const double h = g.dt;
    std::vector<double> kernel(2 * n - 1);
    for (std::size_t i = 0; i < kernel.size(); ++i) {
        const double d = static_cast<double>(i) - static_cast<double>(n - 1);
        kernel[i] = poisson_cell((d - 0.5) * h, (d + 0.5) * h, y) / h;
    }
    SampledSignal out = g;
    out.values = convolve_same(g.values, kernel, h);
    return out;
}

double poisson_mass(double y) {
    if (!(y > 0.0)) throw DomainError("poisson_mass: y must be positive");
    const double step = 1.0 / 64.0, half_pi = std::numbers::pi / 2.0;
    double sum = 0.0;
    for (int k = -320; k <= 320; ++k) {
        const double x = k * step;
        const double t = y * std::sinh(half_pi * std::sinh(x));
        const double dt = y * std::cosh(half_pi * std::sinh(x)) * half_pi * std::cosh(x);
        sum += y / (t * t + y * y) * dt;
    }
    return sum * step / std::numbers::pi;
}

VerificationReport check_lemma21(const SampledSignal& f, const SampledSignal* fm, const SampledSignal& phi, int m,
                                 const std::vector<double>& R_list, double t_lo, double t_hi) {
    VerificationReport rep("lemma21");
    const SampledSignal deriv = fm ? *fm : derivative(f, m);
    SampledSignal absd = deriv;
    for (auto& v : absd.values) v = std::abs(v);

    double worst = 0.0, worst_t = std::nan("");
    std::size_t used = 0;
    for (double R : R_list) {
        const auto d = decompose(f, phi, R, m);
        const auto major = poisson_convolve(absd, 1.0 / R);
        const double hi = std::min(t_hi, d.valid_end);
        double worst_R = 0.0, worst_R_t = std::nan("");
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double t = f.t(i);
            if (t < t_lo || t > hi) continue;
            const double rhs = major.values[i].real();
            if (!(rhs >= 1e-30)) {
                rep.count_skipped();
                continue;
            }
            const double ratio = std::pow(R, m) * std::abs(d.J1.values[i]) / rhs;
            ++used;
            if (ratio > worst_R) worst_R = ratio, worst_R_t = t;
        }
        rep.add_row({"C_at_R", R, worst_R, worst_R_t, 0.0, std::isfinite(worst_R)});
        if (worst_R > worst) worst = worst_R, worst_t = worst_R_t;
    }
    if (used == 0) rep.flag("no usable points");
    rep.observe("C", worst, worst_t, std::isfinite(worst) && used > 0);
    return rep;
}

VerificationReport check_final_j1(const SampledSignal& f, const SampledSignal& phi, const EnvelopeSpec& spec,
                                  const std::vector<double>& t_points) {
    VerificationReport rep("final_j1");
    const int m = spec.m;
    const auto powers = phi_powers(phi, m);
    const auto mk = spec.mk();
    const double h = f.dt, W = std::min(-phi.t0, phi.t_end());

    double worst = 0.0, worst_t = std::nan("");
    for (double t : t_points) {
        const double R = t > 0.0 ? w_of(mk, spec.c1 * t).value : 1.0;
        if (1.0 / R < 16.0 * h) {
            rep.count_skipped();
            continue;
        }
        cplx j1 = f.at_linear(t);
        const double reach = W / R;
        const auto i_lo = static_cast<std::ptrdiff_t>(std::ceil((t - reach - f.t0) / h));
        const auto i_hi = static_cast<std::ptrdiff_t>(std::floor((t + reach - f.t0) / h));
        for (int j = 1; j <= m; ++j) {
            cplx s = 0.0;
            const auto& pj = powers[static_cast<std::size_t>(j)];
            for (auto i = std::max<std::ptrdiff_t>(i_lo, 0); i <= i_hi && i < static_cast<std::ptrdiff_t>(f.size()); ++i)
                s += f.values[static_cast<std::size_t>(i)] * (R * pj.at_cubic(R * (t - f.t(static_cast<std::size_t>(i)))).real());
            j1 += binomial(m, j) * ((j % 2) ? -1.0 : 1.0) * h * s;
        }
        const double val = std::pow(R, m) * std::abs(j1);
        rep.add_row({"weighted_J1", t, val, R, 0.0, std::isfinite(val)});
        if (val > worst) worst = val, worst_t = t;
    }
    if (rep.skipped() > 0) rep.flag("kernel under-resolved at some points");
    rep.observe("sup_weighted_J1", worst, worst_t, std::isfinite(worst));
    return rep;
}

VerificationReport carleson_curve_check(const SampledSignal& g, const EnvelopeSpec& spec, double p,
                                        const CarlesonOptions& opt) {
    if (!(p > 1.0)) throw DomainError("carleson_curve_check: p must exceed 1");
    VerificationReport rep("carleson");
    double lo = opt.t_lo, hi = opt.t_hi;
    if (lo == hi) {
        const double len = g.t_end() - g.t0;
        lo = g.t0 - len;
        hi = g.t_end() + len;
    }
    const std::size_t ne = std::max<std::size_t>(opt.n_eval, 3);
    const double ds = (hi - lo) / static_cast<double>(ne - 1);
    const auto mk = spec.mk();

    std::vector<double> ts(ne), gam(ne), u(ne);
    for (std::size_t k = 0; k < ne; ++k) {
        ts[k] = lo + ds * static_cast<double>(k);
        gam[k] = ts[k] > 0.0 ? 1.0 / w_of(mk, spec.c1 * ts[k]).value : 1.0;
    }
    const double h = g.dt;
    for (std::size_t k = 0; k < ne; ++k) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double d = ts[k] - g.t(j);
            acc += g.values[j] * poisson_cell(d - 0.5 * h, d + 0.5 * h, gam[k]);
        }
        u[k] = std::pow(std::abs(acc), p);
    }
    double integral = 0.0;
    for (std::size_t k = 0; k < ne; ++k) {
        const std::size_t a = k == 0 ? 0 : k - 1, b = k + 1 == ne ? k : k + 1;
        const double slope = (gam[b] - gam[a]) / (ts[b] - ts[a]);
        const double w = (k == 0 || k + 1 == ne) ? 0.5 : 1.0;
        integral += w * u[k] * std::sqrt(1.0 + slope * slope) * ds;
    }
    const double norm = std::pow(g.lp_norm(p), p);
    const double ratio = norm > 0.0 ? integral / norm : 0.0;
    rep.observe("curve_integral", integral, std::nan(""), std::isfinite(integral));
    rep.observe("g_norm_p", norm, std::nan(""), std::isfinite(norm));
    rep.observe("ratio", ratio, std::nan(""), std::isfinite(ratio));
    return rep;
}

J2Bound j2_fourier_bound(const EnvelopeSpec& spec, const BumpSpec& psi_spec, double t, double C2, double C3) {
    J2Bound b;
    b.t = t;
    b.R = t > 0.0 ? w_of(spec.mk(), spec.c1 * t, kDefaultInverseTol, 1e300).value : 1.0;
    const double MR = spec.M(b.R), logK = spec.K.log_eval(b.R).value;
    b.N = t > 0.0 ? static_cast<long>(std::floor(t / (C2 * MR))) : 0;
    b.log_A = (spec.m + 1) * std::log(b.R) + logK;
    if (b.N == 0) {
        b.trivial = true;
        b.log_B = 0.0;
        b.ratio_x = 0.0;
        b.geometric = true;
        return b;
    }
    const double N = static_cast<double>(b.N);
    b.log_A += N * std::log(C2 * MR * N / (std::numbers::e * t));
    const double log_x = std::log(C3) + (1.0 + psi_spec.eps) * std::log(std::log(2.0 + N)) - std::log(b.R * MR);
    b.ratio_x = std::exp(log_x);
    // log sum_{j=0}^N x^j
    if (std::abs(log_x) < 1e-12) {
        b.log_B = std::log(N + 1.0);
    } else if (log_x < 0.0) {
        b.log_B = std::log(-std::expm1((N + 1.0) * log_x)) - std::log(-std::expm1(log_x));
    } else {
        b.log_B = N * log_x + std::log(-std::expm1(-(N + 1.0) * log_x)) - std::log(-std::expm1(-log_x));
    }
    b.geometric = b.ratio_x <= 0.5;
    return b;
}

VerificationReport j2_decay_scan(const EnvelopeSpec& spec, const BumpSpec& psi_spec, const std::vector<double>& t_grid,
                                 double C2, double C3) {
    VerificationReport rep("j2_decay");
    double max_inc = -std::numeric_limits<double>::infinity(), inc_t = std::nan("");
    double worst_B = 0.0, worst_B_t = std::nan("");
    bool b_ok = true;
    double prev = std::nan("");
    for (double t : t_grid) {
        const auto b = j2_fourier_bound(spec, psi_spec, t, C2, C3);
        const double v = b.log_value();
        rep.add_row({"log_AB", t, v, prev, std::isnan(prev) ? 0.0 : prev - v, std::isnan(prev) || v <= prev});
        if (b.trivial) rep.flag("trivial bound (N = 0) at some points");
        if (!std::isnan(prev) && v - prev > max_inc) max_inc = v - prev, inc_t = t;
        if (b.geometric && !b.trivial) {
            if (b.log_B > worst_B) worst_B = b.log_B, worst_B_t = t;
            if (b.log_B > std::log(2.0) + 1e-12) b_ok = false;
        }
        prev = v;
    }
    rep.observe("max_log_increase", max_inc, inc_t, max_inc <= 0.0);
    rep.observe("B_bound", std::exp(worst_B), worst_B_t, b_ok);
    return rep;
}

VerificationReport poisson_mass_check(const std::vector<double>& ys, double tol) {
    VerificationReport rep("poisson_mass");
    double worst = 0.0, at = ys.empty() ? 0.0 : ys.front();
    for (double y : ys) {
        const double dev = std::abs(poisson_mass(y) - 1.0);
        rep.add_row({"mass", y, 1.0 + dev, 1.0, tol - dev, dev < tol});
        if (dev > worst) worst = dev, at = y;
    }
    rep.observe("max_deviation", worst, at, worst < tol);
    return rep;
}

VerificationReport reconstruction_check(const SampledSignal& f, const DecompResult& d, double tol) {
    if (d.J1.size() != f.size() || d.J2.size() != f.size())
        throw SpecError("reconstruction_check: decomposition does not live on f's grid");
    VerificationReport rep("reconstruction");
    double worst = 0.0, at = f.t0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double e = std::abs(d.J1.values[i] + d.J2.values[i] - f.values[i]);
        if (e > worst) worst = e, at = f.t(i);
    }
    rep.observe("sup_error", worst, at, worst < tol);
    return rep;
}

}  // namespace tauber
